"""Replays a run from its manifest.json into a new output directory."""
import argparse
import logging
import os
import sys

import yaml

from libelcontrol.common_utils import Timer, load_manifest
from libelcontrol.config_utils import DEFAULTS
from main import main as elctl

# output locations are given on the command line instead
SKIPPED_KEYS = {'out', 'result_dir', 'run_name'}


def write_replay_config(manifest, config_path):
    """Writes the experiment keys of the manifest's config snapshot as a YAML config."""
    snapshot = manifest['config']
    config = {k: snapshot[k] for k in DEFAULTS if k in snapshot and k not in SKIPPED_KEYS}
    os.makedirs(os.path.dirname(config_path) or '.', exist_ok=True)
    with open(config_path, 'w', encoding='utf-8', newline='\n') as fp:
        yaml.safe_dump(config, fp, sort_keys=True)
    logging.info(f'Finish writing replay config to {config_path}.')
    return config_path


def main():
    parser = argparse.ArgumentParser(description='Re-run an elctl command from its manifest')
    parser.add_argument('manifest', help='Path to manifest.json')
    parser.add_argument('--out', required=True,
                        help='Directory for the replayed artifacts')
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format='%(asctime)s %(levelname)s:%(message)s')
    manifest = load_manifest(args.manifest)
    config_path = write_replay_config(manifest, os.path.join(args.out, 'replay_config.yml'))
    return elctl([manifest['command'], '--config', config_path, '--out', args.out])


if __name__ == '__main__':
    wall_time = Timer()
    code = main()
    print(f'Wall time: {wall_time.time():.2f} (s)')
    sys.exit(code)
