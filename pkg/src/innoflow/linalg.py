"""Small shared numeric helpers."""

from __future__ import annotations

import numpy as np


def spectral_radius(mat: np.ndarray, tol: float = 1e-12, max_iter: int = 10000) -> float:
    """Spectral radius of a nonnegative square matrix by power iteration.

    Iterates on ``mat + I`` (primitive whenever ``mat`` is irreducible, so the
    L1 growth ratio converges even for periodic structures) and subtracts the
    shift. Nilpotent matrices return 0.0. If the iteration budget runs out the
    current estimate is returned; with ``tol=1e-12`` and the default cap this
    does not happen for the matrix sizes used here.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("spectral_radius expects a square matrix")
    if np.any(mat < 0):
        raise ValueError("spectral_radius expects a nonnegative matrix")
    n = mat.shape[0]
    if n == 0:
        return 0.0
    v = np.full(n, 1.0 / n)
    lam = 1.0
    for _ in range(max_iter):
        u = mat @ v + v
        norm = u.sum()
        if norm == 0.0:
            return 0.0
        lam_new = norm / v.sum()
        u /= norm
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return max(lam_new - 1.0, 0.0)
        lam, v = lam_new, u
    return max(lam - 1.0, 0.0)
