"""Covariance matrices of Gaussian fermionic states.

Indexing follows the physics convention used throughout the package: modes
are numbered 1..n and Majorana operators 1..2n, with Majoranas ``2j-1`` and
``2j`` belonging to mode ``j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._consts import EPS_DEG, PHYS_TOL, PURE_TOL
from .errors import (
    BadIndices,
    DimensionMismatch,
    NotAntisymmetric,
    NotSpecialOrthogonal,
    OutOfRange,
    SizeMismatch,
)
from .matalg import (
    J2,
    PAULI_Z,
    antisymmetric_normal_form,
    as_antisymmetric,
    direct_sum,
    pfaffian,
    rotation,
)


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Real antisymmetric ``2n x 2n`` matrix of second Majorana moments.

    Construction only enforces antisymmetry; physicality is reported by
    :func:`validate_cm` and checked by the operations that need it.
    """

    gamma: np.ndarray

    def __post_init__(self):
        g = as_antisymmetric(self.gamma)
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @property
    def modes(self) -> int:
        return self.gamma.shape[0] // 2

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 block coupling modes ``i`` and ``j`` (1-based)."""
        return self.gamma[2 * i - 2:2 * i, 2 * j - 2:2 * j]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.gamma, dtype=dtype)

    def to_json(self) -> dict:
        return {"modes": self.modes, "gamma": self.gamma.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "CovarianceMatrix":
        g = np.asarray(obj["gamma"], dtype=float)
        if "modes" in obj and g.shape != (2 * obj["modes"], 2 * obj["modes"]):
            raise DimensionMismatch(
                f"'modes'={obj['modes']} does not match gamma of shape {g.shape}"
            )
        return cls(g)


def as_cm(x) -> CovarianceMatrix:
    return x if isinstance(x, CovarianceMatrix) else CovarianceMatrix(np.asarray(x, dtype=float))


def load_cm(path) -> CovarianceMatrix:
    return CovarianceMatrix.from_json(json.loads(Path(path).read_text()))


def save_cm(cm, path) -> None:
    Path(path).write_text(json.dumps(as_cm(cm).to_json()))


# ---------------------------------------------------------------- local ops

@dataclass(frozen=True)
class LocalOrthogonalSet:
    """Per-mode orthogonal matrices ``Z^m_i R(alpha_i)``.

    ``R(alpha)`` on mode ``j`` is generated by the local unitary
    ``exp(i alpha Z_j / 2)``; the flip ``m_i = 1`` needs a parity-odd
    ancilla and has determinant -1.
    """

    angles: tuple[float, ...]
    flips: tuple[int, ...] = ()

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        flips = tuple(int(m) for m in self.flips) or (0,) * len(angles)
        if len(flips) != len(angles):
            raise SizeMismatch("angles and flips differ in length")
        if any(m not in (0, 1) for m in flips):
            raise OutOfRange("flip bits must be 0 or 1")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "flips", flips)

    @property
    def modes(self) -> int:
        return len(self.angles)

    @classmethod
    def identity(cls, n: int) -> "LocalOrthogonalSet":
        return cls((0.0,) * n, (0,) * n)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, flips: bool = True) -> "LocalOrthogonalSet":
        angles = rng.uniform(-np.pi, np.pi, size=n)
        bits = rng.integers(0, 2, size=n) if flips else np.zeros(n, dtype=int)
        return cls(tuple(angles), tuple(bits))

    def matrices(self) -> list[np.ndarray]:
        return [np.linalg.matrix_power(PAULI_Z, m) @ rotation(a)
                for a, m in zip(self.angles, self.flips)]

    def matrix(self) -> np.ndarray:
        return direct_sum(self.matrices())

    def to_json(self) -> dict:
        return {"angles": list(self.angles), "flips": list(self.flips)}


# --------------------------------------------------------------- partitions

@dataclass(frozen=True)
class Bipartition:
    """Assignment of each mode (position ``k`` holds mode ``k+1``) to a party.

    Any number of party labels is allowed; the name reflects the common case.
    """

    labels: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def split(cls, n_a: int, n_b: int) -> "Bipartition":
        return cls(("A",) * n_a + ("B",) * n_b)

    @property
    def modes(self) -> int:
        return len(self.labels)

    def parties(self) -> list:
        seen = []
        for lab in self.labels:
            if lab not in seen:
                seen.append(lab)
        return seen

    def modes_of(self, party) -> list[int]:
        """1-based modes held by ``party``."""
        return [k + 1 for k, lab in enumerate(self.labels) if lab == party]


def _majorana_rows(modes: Iterable[int]) -> list[int]:
    """0-based Majorana indices for 1-based modes."""
    return [r for j in modes for r in (2 * j - 2, 2 * j - 1)]


def _check_partition(cm: CovarianceMatrix, partition: Bipartition) -> None:
    if partition.modes != cm.modes:
        raise SizeMismatch(f"partition covers {partition.modes} modes, CM has {cm.modes}")


# --------------------------------------------------------------- operations

@dataclass(frozen=True)
class CMReport:
    antisymmetric: bool
    physical: bool
    pure: bool
    williamson_spectrum: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "antisymmetric": self.antisymmetric,
            "physical": self.physical,
            "pure": self.pure,
            "williamson_spectrum": list(self.williamson_spectrum),
        }


def williamson_spectrum(gamma) -> np.ndarray:
    """Moduli ``|mu_k|`` of the block couplings, non-increasing."""
    return np.abs(antisymmetric_normal_form(np.asarray(gamma, dtype=float)).couplings)


def validate_cm(gamma) -> CMReport:
    """Report antisymmetry, physicality, purity and the Williamson spectrum.

    The spectrum is returned as moduli; the sign of an individual coupling
    is not invariant under local Z flips and so carries no information here.
    """
    g = np.asarray(gamma, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
        raise DimensionMismatch(f"expected an even square matrix, got shape {g.shape}")
    try:
        g = as_antisymmetric(g)
    except NotAntisymmetric:
        return CMReport(False, False, False, ())
    n2 = g.shape[0]
    smax = np.linalg.norm(g, 2) if n2 else 0.0
    pure = bool(n2 == 0 or np.linalg.norm(g @ g + np.eye(n2)) < PURE_TOL)
    return CMReport(True, bool(smax <= 1 + PHYS_TOL), pure, tuple(williamson_spectrum(g)))


def is_physical(gamma) -> bool:
    g = np.asarray(gamma, dtype=float)
    return bool(g.size == 0 or np.linalg.norm(g, 2) <= 1 + PHYS_TOL)


def is_pure(gamma) -> bool:
    g = np.asarray(gamma, dtype=float)
    return bool(np.linalg.norm(g @ g + np.eye(g.shape[0])) < PURE_TOL)


def _check_special_orthogonal(o: np.ndarray, tol: float = 1e-10) -> None:
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise NotSpecialOrthogonal(f"basis of shape {o.shape} is not square")
    if np.max(np.abs(o @ o.T - np.eye(o.shape[0])), initial=0.0) > tol:
        raise NotSpecialOrthogonal("basis is not orthogonal")
    if o.size and abs(np.linalg.det(o) - 1) > tol:
        raise NotSpecialOrthogonal("basis has determinant -1")


def thermal_cm(betas: Sequence[float], basis=None) -> CovarianceMatrix:
    """CM of the thermal state of ``H = (i/4) c^T G c``.

    ``G = basis^T (sum_k beta_k J2) basis``. Each block contributes
    ``-tanh(beta_k / 2) J2``, so infinite ``beta`` gives the ground state.
    """
    betas = np.asarray(betas, dtype=float)
    n = betas.size
    basis = np.eye(2 * n) if basis is None else np.asarray(basis, dtype=float)
    if basis.shape != (2 * n, 2 * n):
        raise NotSpecialOrthogonal(f"basis shape {basis.shape} does not fit {n} modes")
    _check_special_orthogonal(basis)
    core = direct_sum([-np.tanh(b / 2) * J2 for b in betas])
    return CovarianceMatrix(basis.T @ core @ basis)


def wick_moment(gamma, indices: Sequence[int]) -> float:
    """``i^p tr(rho c_j1 ... c_j2p)`` for strictly increasing 1-based ``indices``.

    By Wick's theorem this is the Pfaffian of the corresponding submatrix.
    """
    cm = as_cm(gamma)
    idx = list(indices)
    if len(idx) % 2:
        raise BadIndices("an odd number of Majorana operators has zero moment by parity")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise BadIndices("indices must be strictly increasing")
    if idx and (idx[0] < 1 or idx[-1] > 2 * cm.modes):
        raise BadIndices(f"indices must lie in 1..{2 * cm.modes}")
    sub = cm.gamma[np.ix_([i - 1 for i in idx], [i - 1 for i in idx])]
    return pfaffian(sub)


def apply_local_orthogonal(gamma, ops: LocalOrthogonalSet) -> CovarianceMatrix:
    cm = as_cm(gamma)
    if ops.modes != cm.modes:
        raise SizeMismatch(f"{ops.modes} local operations for {cm.modes} modes")
    o = ops.matrix()
    return CovarianceMatrix(o @ cm.gamma @ o.T)


def cross_block(gamma, partition: Bipartition) -> np.ndarray:
    """Block ``C`` of ``gamma`` between the first party and everybody else."""
    cm = as_cm(gamma)
    _check_partition(cm, partition)
    parties = partition.parties()
    a = _majorana_rows(partition.modes_of(parties[0]))
    b = _majorana_rows(m for p in parties[1:] for m in partition.modes_of(p))
    return cm.gamma[np.ix_(a, b)]


def is_s2pi_separable_cm(gamma, partition: Bipartition, eps: float = EPS_DEG) -> bool:
    """True iff every block between modes of different parties vanishes."""
    cm = as_cm(gamma)
    _check_partition(cm, partition)
    scale = np.linalg.norm(cm.gamma)
    labels = partition.labels
    for i, j in combinations(range(1, cm.modes + 1), 2):
        if labels[i - 1] != labels[j - 1] and np.linalg.norm(cm.block(i, j)) > eps * scale:
            return False
    return True


def correlation_rank(gamma, partition: Bipartition, eps: float = EPS_DEG) -> int:
    """Numerical rank of the inter-party correlation block of a bipartite CM."""
    cm = as_cm(gamma)
    c = cross_block(cm, partition)
    if c.size == 0:
        return 0
    sv = np.linalg.svd(c, compute_uv=False)
    return int(np.sum(sv > eps * np.linalg.norm(cm.gamma)))


def permute_modes(gamma, order: Sequence[int]) -> CovarianceMatrix:
    """CM with new mode ``k`` equal to old mode ``order[k-1]`` (1-based)."""
    rows = _majorana_rows(order)
    g = as_cm(gamma).gamma
    return CovarianceMatrix(g[np.ix_(rows, rows)])


def two_copies(gamma, partition: Bipartition) -> tuple[CovarianceMatrix, Bipartition]:
    """CM of two uncorrelated copies, regrouped so each party holds both copies."""
    cm = as_cm(gamma)
    _check_partition(cm, partition)
    n = cm.modes
    doubled = direct_sum([cm.gamma, cm.gamma])
    order, labels = [], []
    for p in partition.parties():
        mine = partition.modes_of(p)
        order += mine + [m + n for m in mine]
        labels += [p] * (2 * len(mine))
    return permute_modes(doubled, order), Bipartition(tuple(labels))


def gamma_zero() -> CovarianceMatrix:
    """Two-mode CM with a single nonzero pair correlating Majoranas 1 and 3.

    Mode 1 and mode 2 each contribute one Majorana to a paired mode that
    is shared between the parties, while the other two Majoranas are
    maximally mixed.
    """
    g = np.zeros((4, 4))
    g[0, 2], g[2, 0] = 1.0, -1.0
    return CovarianceMatrix(g)


def fixture_gamma_p(p: float) -> CovarianceMatrix:
    """``(1 - 2p) * gamma_zero()`` for ``0 <= p <= 1/2``."""
    if not 0.0 <= p <= 0.5:
        raise OutOfRange(f"p={p} outside [0, 1/2]")
    return CovarianceMatrix((1 - 2 * p) * gamma_zero().gamma)


# ----------------------------------------------------------- random samples

def random_orthogonal(dim: int, rng: np.random.Generator, special: bool = True) -> np.ndarray:
    """Haar-random orthogonal matrix (QR with sign correction)."""
    if dim == 0:
        return np.eye(0)
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    q = q * np.sign(np.diag(r))
    if special and np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_cm(n: int, rng: np.random.Generator, pure: bool = False) -> CovarianceMatrix:
    """Random physical CM: Haar rotation of blocks with couplings in [-1, 1]."""
    mus = rng.choice([-1.0, 1.0], size=n) if pure else rng.uniform(-1, 1, size=n)
    o = random_orthogonal(2 * n, rng)
    return CovarianceMatrix(o.T @ direct_sum([m * J2 for m in mus]) @ o)
