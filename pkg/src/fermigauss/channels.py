"""Gaussian channels in the Choi-Jamiolkowski block form ``(A, B, D)``.

The channel's CJ covariance matrix is ``E = [[A, B], [-B^T, D]]`` with output
modes first. A channel acts on covariance matrices as
``Gamma -> A + B Gamma (D Gamma + I)^{-1} B^T``, which needs no inverse of
``Gamma`` and therefore accepts mixed and singular inputs.

A channel counts as separable across parties when its CJ covariance matrix
is a direct sum over the parties; that is a definition adopted here, not a
derived fact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._consts import EPS_DEG, PHYS_TOL, PURE_TOL
from .errors import (
    BadPartition,
    DimensionMismatch,
    NotOrthogonal,
    NotPhysical,
    NotSeparableChannel,
    SingularPencil,
)
from .gfs_cm import Bipartition, CovarianceMatrix, as_cm, is_s2pi_separable_cm, random_cm
from .matalg import as_antisymmetric, direct_sum


@dataclass(frozen=True)
class GaussianChannel:
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.B, dtype=float)
        d = np.atleast_2d(np.asarray(self.D, dtype=float))
        if a.size == 0:
            a = np.zeros((0, 0))
        if d.size == 0:
            d = np.zeros((0, 0))
        if b.ndim != 2:
            b = b.reshape(a.shape[0], d.shape[0])
        if (a.shape[0] != a.shape[1] or d.shape[0] != d.shape[1]
                or b.shape != (a.shape[0], d.shape[0]) or a.shape[0] % 2 or d.shape[0] % 2):
            raise DimensionMismatch(f"inconsistent blocks A{a.shape} B{b.shape} D{d.shape}")
        a, d = as_antisymmetric(a), as_antisymmetric(d)
        for name, m in (("A", a), ("B", b), ("D", d)):
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        if self.check:
            e = self.cj_matrix()
            if e.size and np.linalg.norm(e, 2) > 1 + PHYS_TOL:
                raise NotPhysical("CJ covariance matrix violates E^2 >= -I")

    @property
    def out_modes(self) -> int:
        return self.A.shape[0] // 2

    @property
    def in_modes(self) -> int:
        return self.D.shape[0] // 2

    def cj_matrix(self) -> np.ndarray:
        return np.block([[self.A, self.B], [-self.B.T, self.D]])

    def to_json(self) -> dict:
        return {"in_modes": self.in_modes, "out_modes": self.out_modes,
                "A": self.A.tolist(), "B": self.B.tolist(), "D": self.D.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "GaussianChannel":
        ch = cls(np.array(obj["A"], dtype=float).reshape(2 * obj["out_modes"], -1),
                 np.array(obj["B"], dtype=float).reshape(2 * obj["out_modes"], 2 * obj["in_modes"]),
                 np.array(obj["D"], dtype=float).reshape(2 * obj["in_modes"], -1))
        return ch


def load_channel(path) -> GaussianChannel:
    return GaussianChannel.from_json(json.loads(Path(path).read_text()))


def save_channel(ch: GaussianChannel, path) -> None:
    Path(path).write_text(json.dumps(ch.to_json()))


def channel_from_cj(e, out_modes: int) -> GaussianChannel:
    """Slice a CJ covariance matrix back into ``(A, B, D)``."""
    e = as_cm(e).gamma
    k = 2 * out_modes
    if k > e.shape[0]:
        raise DimensionMismatch(f"{out_modes} output modes exceed the CJ matrix")
    return GaussianChannel(e[:k, :k], e[:k, k:], e[k:, k:])


def cj_cm(ch: GaussianChannel) -> CovarianceMatrix:
    return CovarianceMatrix(ch.cj_matrix())


def identity_channel(n: int) -> GaussianChannel:
    z = np.zeros((2 * n, 2 * n))
    return GaussianChannel(z, np.eye(2 * n), z)


def glu_channel(o) -> GaussianChannel:
    """Orthogonal conjugation ``Gamma -> O Gamma O^T`` as ``(0, O, 0)``."""
    o = np.asarray(o, dtype=float)
    if o.ndim != 2 or o.shape[0] != o.shape[1] or o.shape[0] % 2:
        raise NotOrthogonal(f"expected an even square matrix, got shape {o.shape}")
    if np.abs(o @ o.T - np.eye(o.shape[0])).max(initial=0.0) > 1e-10:
        raise NotOrthogonal("matrix is not orthogonal")
    z = np.zeros_like(o)
    return GaussianChannel(z, o, z)


def product_channel(channels) -> GaussianChannel:
    """Tensor product; modes of the factors are concatenated in order."""
    channels = list(channels)
    return GaussianChannel(direct_sum([c.A for c in channels]),
                           direct_sum([c.B for c in channels]),
                           direct_sum([c.D for c in channels]))


def apply_channel_cm(ch: GaussianChannel, gamma) -> CovarianceMatrix:
    g = as_cm(gamma).gamma
    if g.shape[0] != ch.D.shape[0]:
        raise DimensionMismatch(f"channel takes {ch.in_modes} modes, CM has {g.shape[0] // 2}")
    if not np.any(g):
        return CovarianceMatrix(ch.A.copy())
    pencil = ch.D @ g + np.eye(g.shape[0])
    if np.linalg.cond(pencil) > 1e12:
        raise SingularPencil("D Gamma + I is numerically singular")
    # Gamma (D Gamma + I)^{-1} = ((D Gamma + I)^{-T} Gamma^T)^T
    core = np.linalg.solve(pencil.T, g.T).T
    return CovarianceMatrix(ch.A + ch.B @ core @ ch.B.T)


def extend_with_identity(ch: GaussianChannel, n: int) -> GaussianChannel:
    """``ch`` on the first modes and the identity on ``n`` extra trailing modes."""
    z = np.zeros((2 * n, 2 * n))
    return GaussianChannel(direct_sum([ch.A, z]), direct_sum([ch.B, np.eye(2 * n)]),
                           direct_sum([ch.D, z]), check=False)


def compose_channels(second: GaussianChannel, first: GaussianChannel) -> GaussianChannel:
    """Channel of ``second`` after ``first``, by acting on the CJ state of ``first``."""
    if second.in_modes != first.out_modes:
        raise DimensionMismatch("output of the first channel does not match input of the second")
    e = apply_channel_cm(extend_with_identity(second, first.in_modes), cj_cm(first))
    return channel_from_cj(e, second.out_modes)


def _cj_partition(ch: GaussianChannel, partition) -> Bipartition:
    labels = tuple(partition.labels if isinstance(partition, Bipartition) else partition)
    if len(labels) == ch.in_modes + ch.out_modes:
        return Bipartition(labels)
    if len(labels) == ch.in_modes == ch.out_modes:
        return Bipartition(labels + labels)
    raise BadPartition(f"partition of {len(labels)} modes does not fit a "
                       f"{ch.in_modes}->{ch.out_modes} channel")


def is_product_channel(ch: GaussianChannel, partition, eps: float = EPS_DEG) -> bool:
    """True iff the CJ matrix is block diagonal with respect to the parties.

    ``partition`` labels either every mode once (square channels; each output
    mode is grouped with the matching input mode) or all CJ modes, outputs
    first.
    """
    return is_s2pi_separable_cm(cj_cm(ch), _cj_partition(ch, partition), eps)


@dataclass
class ProbeReport:
    samples: int
    hits: int
    min_purity_residual: float
    fitted_orthogonals: list[np.ndarray]
    fit_residuals: list[float]

    def to_json(self) -> dict:
        return {"samples": self.samples, "hits": self.hits,
                "min_purity_residual": self.min_purity_residual,
                "fitted_orthogonals": [o.tolist() for o in self.fitted_orthogonals],
                "fit_residuals": list(self.fit_residuals)}


def _nearest_orthogonal(m: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(m)
    return u @ vt


def _fully_entangled_pure(g: np.ndarray, tol: float) -> tuple[bool, float]:
    residual = float(np.linalg.norm(g @ g + np.eye(g.shape[0])))
    if residual >= tol:
        return False, residual
    n = g.shape[0] // 2
    # a pure mode factorizes exactly when its own coupling has modulus one
    split = any(abs(g[2 * k, 2 * k + 1]) > 1 - tol for k in range(n))
    return not split, residual


def gsep_triviality_probe(ch: GaussianChannel, samples: int = 100,
                          rng: np.random.Generator | None = None,
                          tol: float = PURE_TOL) -> ProbeReport:
    """Look for pure fully-entangled inputs mapped to pure fully-entangled outputs.

    The channel must be square and a product over single modes. For every
    mode the 2x2 block of ``B`` is fitted by its nearest orthogonal matrix;
    the residual measures how far the local factor is from a conjugation
    (it also includes the local ``A`` and ``D`` blocks). The probe samples
    inputs and is statistical evidence only.
    """
    n = ch.in_modes
    if ch.out_modes != n or not is_product_channel(ch, tuple(range(1, n + 1))):
        raise NotSeparableChannel("channel is not a product of single-mode channels")
    rng = np.random.default_rng() if rng is None else rng
    hits, best = 0, np.inf
    for _ in range(samples):
        gin = random_cm(n, rng, pure=True).gamma
        ok_in, _ = _fully_entangled_pure(gin, tol)
        if not ok_in:
            continue
        ok, res = _fully_entangled_pure(apply_channel_cm(ch, gin).gamma, tol)
        best = min(best, res)
        hits += ok
    fits, residuals = [], []
    for k in range(n):
        sl = slice(2 * k, 2 * k + 2)
        b = ch.B[sl, sl]
        o = _nearest_orthogonal(b)
        fits.append(o)
        residuals.append(float(np.sqrt(np.linalg.norm(b - o) ** 2 + np.linalg.norm(ch.A[sl, sl]) ** 2
                                       + np.linalg.norm(ch.D[sl, sl]) ** 2)))
    return ProbeReport(samples, hits, float(best), fits, residuals)


def random_channel(in_modes: int, out_modes: int, rng: np.random.Generator,
                   pure: bool = True) -> GaussianChannel:
    """Channel whose CJ matrix is a random physical CM."""
    return channel_from_cj(random_cm(in_modes + out_modes, rng, pure=pure), out_modes)
