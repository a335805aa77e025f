"""Dense kernels for real antisymmetric matrices.

Pfaffians, the orthogonal block-diagonal (Williamson-type) normal form and
a 2x2 singular value decomposition with both factors restricted to SO(2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from ._consts import EPS_DEG, EPS_SYM
from .errors import DimensionMismatch, NotAntisymmetric, OddDimension

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
PAULI_Z = np.diag([1.0, -1.0])


def rotation(alpha: float) -> np.ndarray:
    """R(alpha) = [[cos, sin], [-sin, cos]] = exp(alpha * J2)."""
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, s], [-s, c]])


def rotation_angle(r: np.ndarray) -> float:
    """Inverse of :func:`rotation` for a matrix in SO(2)."""
    return float(np.arctan2(r[0, 1], r[0, 0]))


def as_antisymmetric(a, tol: float = EPS_SYM) -> np.ndarray:
    """Validate and return the exactly antisymmetric part of ``a`` as float64.

    Raises
    ------
    DimensionMismatch
        if ``a`` is not a square 2-d array.
    OddDimension
        if the dimension is odd.
    NotAntisymmetric
        if ``max|a + a^T| > tol``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] % 2:
        raise OddDimension(f"dimension {a.shape[0]} is odd")
    if a.size and np.max(np.abs(a + a.T)) > tol:
        raise NotAntisymmetric(f"antisymmetry residual {np.max(np.abs(a + a.T)):.3e}")
    return 0.5 * (a - a.T)


def pfaffian(a) -> float:
    """Pfaffian of a real antisymmetric matrix.

    Dimensions up to 4 use the explicit expansion. Larger matrices use the
    Parlett-Reid reduction to tridiagonal form with partial pivoting, which
    costs O(n^3).
    """
    a = as_antisymmetric(a)
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n == 2:
        return float(a[0, 1])
    if n == 4:
        return float(a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2])
    return _pfaffian_parlett_reid(a.copy())


def _pfaffian_parlett_reid(a: np.ndarray) -> float:
    n = a.shape[0]
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0.0
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


@dataclass(frozen=True)
class BlockDiagonalForm:
    """``rotation @ A @ rotation.T == direct_sum([b * J2 for b in couplings])``."""

    rotation: np.ndarray
    couplings: np.ndarray

    def block_matrix(self) -> np.ndarray:
        return direct_sum([b * J2 for b in self.couplings])

    def reconstruct(self) -> np.ndarray:
        return self.rotation.T @ self.block_matrix() @ self.rotation


def antisymmetric_normal_form(a) -> BlockDiagonalForm:
    """Bring an antisymmetric matrix to 2x2 block form by an SO(2n) rotation.

    Couplings are ordered by non-increasing modulus and made non-negative by
    swapping the two rows of a block. Each swap flips the determinant, so if
    the accumulated rotation ends up with determinant -1 the last (smallest)
    coupling carries the sign instead.
    """
    a = as_antisymmetric(a)
    dim = a.shape[0]
    if dim == 0:
        return BlockDiagonalForm(np.eye(0), np.zeros(0))
    t, z = scipy.linalg.schur(a, output="real")
    rows: list[tuple[np.ndarray, np.ndarray]] = []
    singles: list[np.ndarray] = []
    i = 0
    while i < dim:
        if i + 1 < dim and t[i + 1, i] != 0.0:
            rows.append((z[:, i], z[:, i + 1]))
            i += 2
        else:
            singles.append(z[:, i])
            i += 1
    rows.extend(zip(singles[0::2], singles[1::2]))

    def coupling(pair):
        u, v = pair
        return float(u @ a @ v)

    rows.sort(key=lambda p: -abs(coupling(p)))
    o = np.empty((dim, dim))
    for k, (u, v) in enumerate(rows):
        if coupling((u, v)) < 0:
            u, v = v, u
        o[2 * k], o[2 * k + 1] = u, v
    if np.linalg.det(o) < 0:
        o[-1] = -o[-1]
    blocks = o @ a @ o.T
    betas = np.array([blocks[2 * k, 2 * k + 1] for k in range(dim // 2)])
    return BlockDiagonalForm(o, betas)


class SVD2(NamedTuple):
    """``left @ M @ right.T == diag``; ``left`` and ``right`` lie in SO(2)."""

    left: np.ndarray
    diag: np.ndarray
    right: np.ndarray

    @property
    def singular_values(self) -> tuple[float, float]:
        return float(self.diag[0, 0]), float(self.diag[1, 1])

    def degenerate(self, scale: float | None = None, eps: float = EPS_DEG) -> bool:
        """True when ``d - |d'|`` is below ``eps * scale``.

        ``scale`` defaults to the Frobenius norm of the block itself; callers
        working inside a larger matrix pass that matrix's norm.
        """
        d, dp = self.singular_values
        if scale is None:
            scale = float(np.hypot(d, dp))
        return d - abs(dp) <= eps * scale


def svd2_so(m) -> SVD2:
    """SVD of a real 2x2 matrix with special orthogonal factors.

    Returns ``SVD2(left, D, right)`` with ``D = diag(d, d')``, ``d >= |d'|``
    and ``d >= 0``. The sign of ``d'`` is the sign of ``det M``.

    The block is split into a rotation part ``rho R(phi)`` and a reflection
    part ``kappa Z R(psi)``. Rotating by ``alpha`` on the left and ``beta``
    on the right with ``alpha - beta = -phi`` and ``alpha + beta = psi``
    leaves ``rho I + kappa Z``.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise DimensionMismatch(f"expected a 2x2 matrix, got shape {m.shape}")
    e = 0.5 * (m[0, 0] + m[1, 1])
    f = 0.5 * (m[0, 1] - m[1, 0])
    g = 0.5 * (m[0, 0] - m[1, 1])
    h = 0.5 * (m[0, 1] + m[1, 0])
    rho, kappa = np.hypot(e, f), np.hypot(g, h)
    phi = np.arctan2(f, e) if rho > 0 else 0.0
    psi = np.arctan2(h, g) if kappa > 0 else 0.0
    alpha = 0.5 * (psi - phi)
    beta = 0.5 * (psi + phi)
    # alpha and beta are fixed up to a joint shift by pi; pick the
    # representative with cos(alpha) > 0 (sin(alpha) > 0 on the tie) so
    # diagonal inputs return identity factors.
    c, s = np.cos(alpha), np.sin(alpha)
    if c < -1e-12 or (abs(c) <= 1e-12 and s < 0):
        alpha += np.pi
        beta += np.pi
    left, right = rotation(alpha), rotation(beta)
    d = np.diag([rho + kappa, rho - kappa])
    return SVD2(left, d, right)


def direct_sum(blocks: Sequence) -> np.ndarray:
    """Block-diagonal matrix assembled from ``blocks`` (an empty list gives 0x0)."""
    blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out
