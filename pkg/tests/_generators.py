"""Random inputs that hit degenerate branches more often than Haar sampling does."""

import numpy as np

from fermigauss.gfs_cm import CovarianceMatrix
from fermigauss.matalg import J2, PAULI_Z, rotation


def structured_cm(n: int, rng: np.random.Generator) -> CovarianceMatrix:
    """CM whose blocks are randomly zero, rotation-proportional, reflection-proportional or generic."""
    g = np.zeros((2 * n, 2 * n))
    for i in range(n):
        g[2 * i:2 * i + 2, 2 * i:2 * i + 2] = rng.choice([0.0, rng.uniform(-1, 1)]) * J2
        for j in range(i + 1, n):
            kind = rng.integers(0, 4)
            if kind == 0:
                b = np.zeros((2, 2))
            elif kind == 1:
                b = rng.uniform(0.1, 1) * rotation(rng.uniform(-3, 3))
            elif kind == 2:
                b = rng.uniform(0.1, 1) * PAULI_Z @ rotation(rng.uniform(-3, 3))
            else:
                b = rng.normal(size=(2, 2))
            g[2 * i:2 * i + 2, 2 * j:2 * j + 2] = b
            g[2 * j:2 * j + 2, 2 * i:2 * i + 2] = -b.T
    s = np.linalg.norm(g, 2)
    if s > 1:
        g = g / s * rng.uniform(0.3, 1)
    return CovarianceMatrix(g)


def even_three_mode_state(amps) -> np.ndarray:
    """Pure state with amplitudes on ``|000>, |011>, |101>, |110>``."""
    v = np.zeros(8, dtype=complex)
    v[[0, 3, 5, 6]] = amps
    return v / np.linalg.norm(v)
