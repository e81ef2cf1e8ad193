"""Proximal operator of the hexagonal penalty ``lam1*||b||_1 + lam2*sum_{j<k}|b_j - b_k|``."""

import numpy as np
from scipy.optimize import isotonic_regression


def fusion_prox(a, lam1: float, lam2: float) -> np.ndarray:
    """Solve ``argmin_b 0.5*||b - a||^2 + lam1*||b||_1 + lam2*sum_{j<k}|b_j - b_k|``.

    The all-pairs term is permutation symmetric, so its prox keeps the order
    of ``a``.  On that order the term is linear with rank weights
    ``lam2*(2i - m - 1)``; shifting by the weights and projecting onto the
    increasing cone (pool adjacent violators) gives the fused values, and a
    final soft threshold applies the L1 part.
    """
    a = np.asarray(a, dtype=float)
    m = a.size
    if m == 0:
        return a.copy()
    order = np.argsort(a, kind="stable")
    out = np.empty(m)
    if lam2 > 0 and m > 1:
        w = lam2 * (2.0 * np.arange(1, m + 1) - m - 1)
        out[order] = isotonic_regression(a[order] - w, increasing=True).x
    else:
        out[:] = a
    if lam1 > 0:
        out = np.sign(out) * np.maximum(np.abs(out) - lam1, 0.0)
    return out
