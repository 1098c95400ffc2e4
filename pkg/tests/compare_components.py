import argparse
import os

import numpy as np
import pandas as pd

ARTIFACTS = ['trajectory.csv', 'metrics.csv', 'region.csv', 'feasibility.csv',
             'compare.csv', 'compare_metrics.csv']


def compare(current, master, rtol=0., atol=0.):
    """Compares two CSV artifacts column by column. The default tolerances require
    bit-identical numbers.
    """
    if list(current.columns) != list(master.columns) or current.shape != master.shape:
        return False
    for column in current.columns:
        a, b = current[column].to_numpy(), master[column].to_numpy()
        if a.dtype.kind in 'fc':
            if not np.allclose(a, b, rtol=rtol, atol=atol, equal_nan=True):
                return False
        elif not (a == b).all():
            return False
    return True


def main():
    # Get arguments
    parser = argparse.ArgumentParser()
    parser.add_argument('--current_dir',
                        help='The directory holding the artifacts of the current branch')
    parser.add_argument('--master_dir',
                        help='The directory holding the artifacts of the master branch')
    parser.add_argument('--rtol', type=float, default=0.,
                        help='Relative tolerance for float columns (default: %(default)s)')
    args = parser.parse_args()

    # Compare artifacts present in both runs
    for name in ARTIFACTS:
        current_path = os.path.join(args.current_dir, name)
        master_path = os.path.join(args.master_dir, name)
        if not (os.path.isfile(current_path) and os.path.isfile(master_path)):
            continue
        ret = compare(pd.read_csv(current_path), pd.read_csv(master_path), rtol=args.rtol)
        print(name, 'PASSED' if ret else 'FAILED')


if __name__ == '__main__':
    main()
