import logging
import os

import numpy as np
import pandas as pd

import libelcontrol.feasibility as feasibility
from libelcontrol.common_utils import Timer, dump_manifest, write_csv
from libelcontrol.config_utils import ConfigError
from libelcontrol.simulation import check_assumptions

DEFAULT_GRIDS = {'tau-q': ((1., 60., 50), (2., 3., 50)),
                 'tau-v': ((1., 60., 50), (0.7, 2., 50)),
                 'q-v': ((2., 3., 50), (0.7, 2., 50)),
                 'tau-q-v': ((1., 60., 30), (2., 3., 30), (0.7, 2., 30)),
                 'alpha-k': ((0.05, 0.6, 12), (0.5, 2., 4))}


def parse_grid(grid, case):
    """Reads `a0:a1:n,b0:b1:n` (or a list of [start, stop, num] lists) into one range per axis.
    tau-q-v takes three ranges, every other case two.
    """
    if case not in DEFAULT_GRIDS:
        raise ConfigError(f'must be one of {", ".join(DEFAULT_GRIDS)}, got {case}', key='case')
    if grid is None:
        return DEFAULT_GRIDS[case]
    n_axes = len(DEFAULT_GRIDS[case])
    pattern = ','.join(['a0:a1:n'] * n_axes)
    try:
        if isinstance(grid, str):
            axes = [tuple(part.split(':')) for part in grid.split(',')]
        else:
            axes = [tuple(axis) for axis in grid]
        assert len(axes) == n_axes and all(len(axis) == 3 for axis in axes)
        ranges = tuple((float(a0), float(a1), int(n)) for a0, a1, n in axes)
    except (AssertionError, TypeError, ValueError):
        raise ConfigError(f'expected {pattern} for {case}, got {grid!r}', key='grid')
    for a0, a1, n in ranges:
        if n < 2 or not a1 > a0:
            raise ConfigError(f'each axis needs a0 < a1 and n >= 2, got {grid!r}', key='grid')
    return ranges


def tabulate_report(report):
    msg = '====== feasibility =======\n'
    for k, v in report.to_dict().items():
        if k == 'reasons':
            continue
        value = f'{v:.6g}' if isinstance(v, float) else f'{v}'
        msg += f'|{k:<14}|{value:>16}|\n'
    for reason in report.reasons:
        msg += f'  {reason}\n'
    return msg


def check_run(config, experiment):
    """Prints the assumption and feasibility reports. Returns 0 iff every blocking gate passes."""
    timer = Timer()
    report = feasibility.check_c1(experiment.spec, experiment.refbounds, experiment.gains)
    assumptions = check_assumptions(experiment.sim)

    print(assumptions.tabulate())
    print(tabulate_report(report))
    if config.paper_values:
        rows = feasibility.paper_comparison(report)
        print(pd.DataFrame(rows, columns=['quantity', 'formula', 'quoted', 'rel_diff']).to_string(index=False))

    frame = pd.DataFrame([{k: v for k, v in report.to_dict().items() if k != 'reasons'}])
    frame['reasons'] = '; '.join(report.reasons)
    write_csv(frame, os.path.join(config.out_dir, 'feasibility.csv'))
    dump_manifest(os.path.join(config.out_dir, 'manifest.json'), 'check', config=config,
                  artifacts=['feasibility.csv'], duration=timer.time())

    if report.feasible and assumptions.passed:
        logging.info('All gates pass.')
        return 0
    for reason in report.reasons:
        logging.warning(reason)
    return 1


def region_frame(grid, hard_axis1=None, hard_axis2=None):
    """Row-major table of a FeasibilityGrid with the hard-constraint memberships."""
    a1, a2 = np.meshgrid(grid.axis1, grid.axis2, indexing='ij')
    if grid.column_axis == grid.axis2_name:
        boundary = np.broadcast_to(grid.boundary[None, :], a1.shape)
        floor = np.broadcast_to(grid.floor[None, :], a1.shape)
    else:
        boundary = np.broadcast_to(grid.boundary[:, None], a1.shape)
        floor = np.broadcast_to(grid.floor[:, None], a1.shape)
    within1 = np.ones_like(grid.feasible) if hard_axis1 is None else a1 <= hard_axis1
    within2 = np.ones_like(grid.feasible) if hard_axis2 is None else a2 <= hard_axis2
    return pd.DataFrame({'axis1': a1.ravel(),
                         'axis2': a2.ravel(),
                         'feasible': grid.feasible.ravel().astype(int),
                         'boundary_value': boundary.ravel(),
                         'floor_value': floor.ravel(),
                         'in_s1': (grid.feasible & within1).ravel().astype(int),
                         'in_s2': (grid.feasible & within2).ravel().astype(int),
                         'in_both': (grid.feasible & within1 & within2).ravel().astype(int)})


def volume_frame(volume):
    """Row-major table of a FeasibilityVolume; axis1..axis3 are tau_bar, Q_bar and V_bar."""
    t, q, v = np.meshgrid(volume.tau_bar, volume.Q_bar, volume.V_bar, indexing='ij')
    boundary = np.broadcast_to(volume.boundary[None, :, :], t.shape)
    return pd.DataFrame({'axis1': t.ravel(),
                         'axis2': q.ravel(),
                         'axis3': v.ravel(),
                         'feasible': volume.feasible.ravel().astype(int),
                         'boundary_value': boundary.ravel()})


def scan_frame(scan):
    """Row-major table of a GainScan; axis1 is alpha and axis2 the K1 scale."""
    a, k = np.meshgrid(scan.alpha, scan.k_scale, indexing='ij')
    kappa = np.broadcast_to(scan.kappa[:, None], a.shape)
    return pd.DataFrame({'axis1': a.ravel(),
                         'axis2': k.ravel(),
                         'feasible': scan.feasible.ravel().astype(int),
                         'tau_min': scan.tau_min.ravel(),
                         'kappa': kappa.ravel()})


def sweep_run(config, experiment):
    """Writes region.csv for a constraint trade-off, or gain_scan.csv for the alpha-k scan."""
    timer = Timer()
    case = feasibility.CASE_ALIASES.get(config.case, config.case)
    grid = parse_grid(config.grid, case)
    args = (grid, experiment.spec, experiment.refbounds, experiment.gains)

    if case == 'alpha-k':
        try:
            result = feasibility.gain_scan(*args, silent=config.silent)
        except ValueError as e:
            raise ConfigError(str(e), key='grid')
        artifact = 'gain_scan.csv'
        frame = scan_frame(result)
        best = result.best()
        if best is not None:
            logging.info(f'Smallest tau_min on the grid: {best[2]:.4g} at alpha = {best[0]:.4g}, '
                         f'k = {best[1]:.4g}.')
    elif case == 'tau-q-v':
        result = feasibility.sweep_volume(*args, silent=config.silent)
        artifact = 'region.csv'
        frame = volume_frame(result)
    else:
        result = feasibility.sweep(case, *args, silent=config.silent)
        artifact = 'region.csv'
        frame = region_frame(result, config.hard_axis1, config.hard_axis2)
        if case == 'q-v' and result.feasible.any():
            q_min = result.axis1[result.feasible.any(axis=1)].min()
            logging.info(f'Smallest feasible Q_bar on the grid: {q_min:.4g}, '
                         f'velocity floor {np.nanmin(result.floor):.4g}.')
    write_csv(frame, os.path.join(config.out_dir, artifact))

    dump_manifest(os.path.join(config.out_dir, 'manifest.json'), 'sweep', config=config,
                  artifacts=[artifact], duration=timer.time())
    print(f'{int(result.feasible.sum())} of {result.feasible.size} grid points are feasible.')
    return 0
