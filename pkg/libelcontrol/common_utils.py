import copy
import json
import logging
import os
import time

import numpy as np


class Timer(object):
    """Computes elasped time."""

    def __init__(self):
        self.reset()

    def reset(self):
        self.running = True
        self.total = 0
        self.start = time.time()
        return self

    def resume(self):
        if not self.running:
            self.running = True
            self.start = time.time()
        return self

    def stop(self):
        if self.running:
            self.running = False
            self.total += time.time() - self.start
        return self

    def time(self):
        if self.running:
            return self.total + time.time() - self.start
        return self.total


def dump_manifest(manifest_path, command, config=None, artifacts=None, duration=None):
    """Write the run manifest including the resolved config and the produced files.
    Re-running `command` with the stored config reproduces every artifact.

    Args:
        manifest_path (str): Path to manifest.json.
        command (str): One of check, simulate, sweep or compare.
        config (dict): Resolved config to save, defaults to None.
        artifacts (list): File names written next to the manifest, defaults to None.
        duration (float): Wall-clock duration in seconds, defaults to None.
    """
    os.makedirs(os.path.dirname(manifest_path) or '.', exist_ok=True)
    result = {'command': command}
    if config:
        config_to_save = copy.deepcopy(dict(config))
        result['config_path'] = config_to_save.get('config')
        result['output_dir'] = os.path.dirname(os.path.abspath(manifest_path))
        result['config'] = to_builtin(config_to_save)
    result['artifacts'] = list(artifacts or [])
    if duration is not None:
        result['duration'] = duration

    with open(manifest_path, 'w', encoding='utf-8', newline='\n') as fp:
        json.dump(result, fp, indent=2, sort_keys=True)
        fp.write('\n')

    logging.info(f'Finish writing manifest to {manifest_path}.')


def load_manifest(manifest_path):
    with open(manifest_path, encoding='utf-8') as fp:
        return json.load(fp)


def to_builtin(value):
    """Converts numpy scalars and arrays nested in `value` to plain python objects
    so they can be dumped as JSON or YAML.
    """
    if isinstance(value, dict):
        return {k: to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_csv(frame, path):
    """Writes a pandas.DataFrame as UTF-8, LF-terminated CSV with round-trip floats."""
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    frame.to_csv(path, index=False, float_format='%.17g',
                 encoding='utf-8', lineterminator='\n')
    logging.info(f'Finish writing {len(frame)} rows to {path}.')


class AttributeDict(dict):
    """AttributeDict is an extended dict that can access
    stored items as attributes.

    >>> ad = AttributeDict({'ans': 42})
    >>> ad.ans
    >>> 42
    """

    def __getattr__(self, key: str) -> any:
        try:
            return self[key]
        except KeyError:
            raise AttributeError(f'Missing attribute "{key}"')

    def __setattr__(self, key: str, value: any) -> None:
        self[key] = value
