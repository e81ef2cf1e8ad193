"""Small bundled datasets."""

from importlib import resources

import numpy as np

TOY_X = "toy_x.csv"
TOY_Y = "toy_y.csv"


def toy_paths():
    """Filesystem paths of the toy design and response CSV files."""
    root = resources.files(__name__)
    return str(root / TOY_X), str(root / TOY_Y)


def load_toy():
    """The toy dataset as ``(x, y, column_names)``.

    Thirty rows and six predictors: two correlated pairs, one independent
    column and one pure-noise column.  The response is
    ``2*(x1 + x2) - 1.5*(x3 + x4) + x5 + noise``.
    """
    x_path, y_path = toy_paths()
    with open(x_path, encoding="utf-8") as fh:
        names = fh.readline().strip().split(",")
    x = np.loadtxt(x_path, delimiter=",", skiprows=1)
    y = np.loadtxt(y_path, delimiter=",", skiprows=1)
    return x, y, names
