import dataclasses
import logging
import os

import pandas as pd

from libelcontrol.common_utils import Timer, dump_manifest, write_csv
from libelcontrol.simulation import (AssumptionGateError, BarrierViolation, NumericOverflowError,
                                     persistent_disturbance, run, tabulate_metrics)

EXIT_INFEASIBLE = 1
EXIT_VIOLATION = 3


def _run(sim, controller):
    """Runs one controller and maps the runtime failures to exit codes."""
    try:
        return run(sim, controller), None
    except AssumptionGateError as e:
        print(e.report.tabulate())
        logging.error(str(e))
        return None, EXIT_INFEASIBLE
    except BarrierViolation as e:
        print(f'Barrier violation at t = {e.t:.6g} s')
        return None, EXIT_VIOLATION
    except NumericOverflowError as e:
        logging.error(f'Numeric overflow: {e}')
        return None, EXIT_VIOLATION


def simulate_run(config, experiment):
    """Writes trajectory.csv, metrics.csv and manifest.json for one controller."""
    timer = Timer()
    result, code = _run(experiment.sim, config.controller)
    if code is not None:
        return code
    log, metric_dict = result

    log.write(os.path.join(config.out_dir, 'trajectory.csv'))
    write_csv(metric_dict.to_frame(), os.path.join(config.out_dir, 'metrics.csv'))
    dump_manifest(os.path.join(config.out_dir, 'manifest.json'), 'simulate', config=config,
                  artifacts=['trajectory.csv', 'metrics.csv'], duration=timer.time())
    print(tabulate_metrics(metric_dict, f'{config.controller} controller'))

    if log.barrier_violation is not None and log.law == 'proposed':
        print(f'Barrier violation at t = {log.barrier_violation:.6g} s')
        return EXIT_VIOLATION
    return 0


def compare_run(config, experiment):
    """Runs the proposed and the baseline controller on one timeline and writes compare.csv
    (both signal sets side by side) and compare_metrics.csv (one row per controller).
    Both run under the persistent disturbance d = (d_bar sin t, d_bar cos t) whatever the config
    schedules.
    """
    timer = Timer()
    d_bar = experiment.spec.d_bar
    sim = dataclasses.replace(experiment.sim, disturbance=persistent_disturbance((d_bar, d_bar)))
    logging.info(f'Comparing under d = ({d_bar:g} sin t, {d_bar:g} cos t).')
    sims = {'proposed': dataclasses.replace(sim, law='proposed'),
            'baseline': dataclasses.replace(sim, law='baseline')}

    frames, summaries = [], []
    for law, sim in sims.items():
        result, code = _run(sim, law)
        if code is not None:
            return code
        log, metric_dict = result
        frames.append(log.to_frame().add_prefix(f'{law}_').rename(columns={f'{law}_t': 't'}))
        summaries.append({'controller': law, **metric_dict})
        print(tabulate_metrics(metric_dict, f'{law} controller'))

    frame = pd.merge(frames[0], frames[1], on='t', how='outer')
    write_csv(frame, os.path.join(config.out_dir, 'compare.csv'))
    write_csv(pd.DataFrame(summaries), os.path.join(config.out_dir, 'compare_metrics.csv'))
    dump_manifest(os.path.join(config.out_dir, 'manifest.json'), 'compare', config=config,
                  artifacts=['compare.csv', 'compare_metrics.csv'], duration=timer.time())

    flags = [k for k, v in summaries[1].items()
             if k.endswith('_violation') and not k.endswith('first_violation') and bool(v)]
    print(f'Baseline violations: {", ".join(flags) or "none"}')
    if summaries[0].get('barrier_violation'):
        return EXIT_VIOLATION
    return 0

