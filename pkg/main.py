import argparse
import logging
import os
import sys
from datetime import datetime
from pathlib import Path

from libelcontrol.common_utils import Timer, AttributeDict
from libelcontrol.config_utils import DEFAULTS, ConfigError, build_experiment, load_config

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_CONFIG = 2
EXIT_VIOLATION = 3


def add_all_arguments(parser):
    parser.add_argument('command', choices=['check', 'simulate', 'sweep', 'compare'],
                        help='Experiment to run')

    # path / directory
    parser.add_argument('--result_dir', default=DEFAULTS['result_dir'],
                        help='The directory holding one sub-directory per run (default: %(default)s)')
    parser.add_argument('--out',
                        help='Write the artifacts to this directory instead of <result_dir>/<run_name>. '
                             'The ELCTL_OUT environment variable takes precedence (default: %(default)s)')

    # constraints
    parser.add_argument('--Q_bar', type=float, default=DEFAULTS['Q_bar'],
                        help='Position constraint |q| < Q_bar in rad (default: %(default)s)')
    parser.add_argument('--V_bar', type=float, default=DEFAULTS['V_bar'],
                        help='Velocity constraint |dq| < V_bar in rad/s (default: %(default)s)')
    parser.add_argument('--tau_bar', type=float, default=DEFAULTS['tau_bar'],
                        help='Input constraint |tau| <= tau_bar in N m (default: %(default)s)')
    parser.add_argument('--d_bar', type=float, default=DEFAULTS['d_bar'],
                        help='Disturbance bound |d| <= d_bar in N m (default: %(default)s)')

    # controller
    parser.add_argument('--controller', default=DEFAULTS['controller'], choices=['proposed', 'baseline'],
                        help='Control law used by simulate (default: %(default)s)')
    parser.add_argument('--alpha', type=float, default=DEFAULTS['alpha'],
                        help='Filter gain of r = de + alpha * e (default: %(default)s)')
    parser.add_argument('--theta_bar', type=float, default=DEFAULTS['theta_bar'],
                        help='Bound on the norm of the parameter vector (default: %(default)s)')

    # simulation
    parser.add_argument('--t_end', type=float, default=DEFAULTS['t_end'],
                        help='Simulation horizon in seconds (default: %(default)s)')
    parser.add_argument('--dt', type=float, default=DEFAULTS['dt'],
                        help='Step of the integration grid in seconds. Steps are split into RK4 substeps '
                             'when the adaptation loop is too stiff for dt (default: %(default)s)')
    parser.add_argument('--decimation', type=int, default=DEFAULTS['decimation'],
                        help='Log every decimation-th integration step (default: %(default)s)')
    parser.add_argument('--zoh', action='store_true',
                        help='Hold the applied input over each dt step instead of re-evaluating it '
                             'inside the Runge-Kutta stages (default: %(default)s)')
    parser.add_argument('--force', action='store_true',
                        help='Run even if a blocking assumption fails (default: %(default)s)')
    parser.add_argument('--baseline_saturate', action='store_true',
                        help='Pass the baseline input through the saturation (default: %(default)s)')
    parser.add_argument('--no_baseline_projection', dest='baseline_projection', action='store_false',
                        help='Run the baseline gradient law without the parameter projection (default: project)')

    # sweep
    parser.add_argument('--case', default=DEFAULTS['case'],
                        choices=['tau-q', 'tau-v', 'q-v', 'tau-q-v', 'alpha-k'],
                        help='Constraints swept by sweep, or alpha-k to scan the gains alpha and '
                             'K1 = k * K1 (default: %(default)s)')
    parser.add_argument('--grid',
                        help='Grid of the swept axes as a0:a1:n,b0:b1:n, with a third range for tau-q-v '
                             '(default: a per-case grid)')
    parser.add_argument('--hard_axis1', type=float,
                        help='Hard upper limit on the first swept axis (default: %(default)s)')
    parser.add_argument('--hard_axis2', type=float,
                        help='Hard upper limit on the second swept axis (default: %(default)s)')

    # others
    parser.add_argument('--paper_values', action='store_true',
                        help='Print the quoted reference numbers next to the computed ones (default: %(default)s)')
    parser.add_argument('--silent', action='store_true',
                        help='Enable silent mode')

    parser.add_argument('-h', '--help', action='help',
                        help='Matrices, the reference signal and the disturbance schedule are set in a yaml file. '
                             'See example configs in example_config')


def get_config(argv=None):
    parser = argparse.ArgumentParser(
        add_help=False,
        description='constrained adaptive tracking control of a two-link arm')

    # load params from config file
    parser.add_argument('-c', '--config', help='Path to configuration file')
    args, _ = parser.parse_known_args(argv)
    config = {}
    if args.config:
        config = load_config(args.config)

    add_all_arguments(parser)

    parser.set_defaults(**{**DEFAULTS, **config})
    args = parser.parse_args(argv)
    config = AttributeDict(vars(args))

    config.run_name = config.run_name or '{}_{}_{}'.format(
        config.command,
        Path(config.config).stem if config.config else 'default',
        datetime.now().strftime('%Y%m%d%H%M%S'),
    )
    config.out_dir = os.environ.get('ELCTL_OUT') or config.out or os.path.join(
        config.result_dir, config.run_name)

    return config


def check_config(config):
    """Check if the configuration has invalid arguments.

    Args:
        config (AttributeDict): Config of the experiment from `get_config`.
    """
    if config.command == 'compare' and config.controller == 'baseline':
        raise ConfigError('compare always runs both controllers; drop --controller baseline', key='controller')

    if config.command in ('simulate', 'compare') and config.dt > config.t_end:
        raise ConfigError(f'must not exceed t_end ({config.dt} > {config.t_end})', key='dt')

    return build_experiment(config)


def main(argv=None):
    try:
        # Get config
        config = get_config(argv)
        experiment = check_config(config)
    except ConfigError as e:
        logging.basicConfig(format='%(asctime)s %(levelname)s:%(message)s')
        logging.error(f'Config error: {e}')
        return EXIT_CONFIG

    # Set up logger
    log_level = logging.WARNING if config.silent else logging.INFO
    logging.basicConfig(
        level=log_level, format='%(asctime)s %(levelname)s:%(message)s')

    logging.info(f'Run name: {config.run_name}')

    if config.command in ('check', 'sweep'):
        from feasibility_runner import check_run, sweep_run
        runner = check_run if config.command == 'check' else sweep_run
    else:
        from simulation_runner import compare_run, simulate_run
        runner = simulate_run if config.command == 'simulate' else compare_run

    try:
        return runner(config, experiment)
    except ConfigError as e:
        logging.error(f'Config error: {e}')
        return EXIT_CONFIG


if __name__ == '__main__':
    wall_time = Timer()
    code = main()
    print(f'Wall time: {wall_time.time():.2f} (s)')
    sys.exit(code)
