"""Jordan-Wigner representation of fermionic states.

States are plain numpy arrays: a vector of length ``2**n`` for a pure state
or a ``2**n x 2**n`` matrix for a density operator. Basis states
``|k_1 ... k_n>`` are ordered with ``k_1`` as the most significant bit, so
mode 1 is the leftmost tensor factor.

Majorana operators are ``c_{2j-1} = Z^{(j-1)} X_j`` and
``c_{2j} = Z^{(j-1)} Y_j`` (1-based indices).
"""

from __future__ import annotations

import json
from functools import lru_cache, reduce
from pathlib import Path

import numpy as np

from ._consts import NORM_TOL, PARITY_TOL
from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotEven,
    NotFermionic,
    OutOfRange,
    TooLarge,
    WrongModeCount,
)
from .gfs_cm import CovarianceMatrix, LocalOrthogonalSet

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

MAX_MODES = 8
MAX_DOUBLED_MODES = 6


def kron_all(factors) -> np.ndarray:
    return reduce(np.kron, factors, np.ones((1, 1), dtype=complex))


def modes_of(x) -> int:
    """Number of modes of a state vector or density matrix."""
    x = np.asarray(x)
    dim = x.shape[0]
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim or (x.ndim == 2 and x.shape != (dim, dim)) or x.ndim > 2:
        raise DimensionMismatch(f"shape {x.shape} is not a 2^n Fock-space object")
    if n > MAX_MODES:
        raise TooLarge(f"{n} modes exceeds the dense limit of {MAX_MODES}")
    return n


def local_operator(op, site: int, n: int) -> np.ndarray:
    """Embed a 2x2 ``op`` on qubit ``site`` (1-based) of ``n``."""
    if not 1 <= site <= n:
        raise IndexOutOfRange(f"site {site} outside 1..{n}")
    return kron_all([op if k == site else I2 for k in range(1, n + 1)])


def apply_local(psi: np.ndarray, op, site: int) -> np.ndarray:
    """Apply a 2x2 operator to one qubit of a state vector without building the full matrix."""
    n = modes_of(psi)
    if not 1 <= site <= n:
        raise IndexOutOfRange(f"site {site} outside 1..{n}")
    t = np.asarray(psi, dtype=complex).reshape(2 ** (site - 1), 2, 2 ** (n - site))
    return np.einsum("ab,ibj->iaj", np.asarray(op, dtype=complex), t).reshape(-1)


@lru_cache(maxsize=None)
def _majorana(i: int, n: int) -> np.ndarray:
    j = (i + 1) // 2
    core = X if i % 2 else Y
    m = kron_all([Z] * (j - 1) + [core] + [I2] * (n - j))
    m.setflags(write=False)
    return m


def majorana_matrix(i: int, n: int) -> np.ndarray:
    """Dense matrix of Majorana operator ``c_i`` on ``n`` modes (read-only, cached)."""
    if not 1 <= n <= MAX_MODES:
        raise TooLarge(f"n={n} outside 1..{MAX_MODES}")
    if not 1 <= i <= 2 * n:
        raise IndexOutOfRange(f"Majorana index {i} outside 1..{2 * n}")
    return _majorana(i, n)


def majoranas(n: int) -> list[np.ndarray]:
    return [majorana_matrix(i, n) for i in range(1, 2 * n + 1)]


def lambda_operator(n: int) -> np.ndarray:
    """``sum_i c_i (x) c_i`` on the doubled space.

    The result is real in this basis (``Y (x) Y`` is real), so a float array
    is returned. Memory grows as ``16**n``; ``n = 6`` needs about 130 MB.
    """
    if n > MAX_DOUBLED_MODES:
        raise TooLarge(f"doubled space for n={n} exceeds the limit n <= {MAX_DOUBLED_MODES}")
    out = np.zeros((4 ** n, 4 ** n))
    for c in majoranas(n):
        out += np.kron(c, c).real
    return out


# ------------------------------------------------------------------ parity

@lru_cache(maxsize=None)
def _weights(n: int) -> np.ndarray:
    w = np.array([bin(k).count("1") for k in range(2 ** n)])
    w.setflags(write=False)
    return w


def even_mask(n: int) -> np.ndarray:
    return _weights(n) % 2 == 0


def parity_operator(n: int) -> np.ndarray:
    return np.diag(np.where(even_mask(n), 1.0, -1.0)).astype(complex)


def parity_of(psi) -> int:
    """0 for even, 1 for odd; raises NotFermionic for mixed parity."""
    psi = np.asarray(psi)
    if not is_fermionic(psi):
        raise NotFermionic("state has components of both parities")
    ev = even_mask(modes_of(psi))
    if psi.ndim == 1:
        return 0 if np.linalg.norm(psi[ev]) >= np.linalg.norm(psi[~ev]) else 1
    w_even = abs(np.trace(psi[np.ix_(ev, ev)]))
    w_odd = abs(np.trace(psi[np.ix_(~ev, ~ev)]))
    return 0 if w_even >= w_odd else 1


def is_fermionic(x, tol: float = PARITY_TOL) -> bool:
    """True iff the state has no coherence between the two parity sectors."""
    x = np.asarray(x)
    n = modes_of(x)
    ev = even_mask(n)
    if x.ndim == 1:
        nrm = np.linalg.norm(x)
        return bool(min(np.linalg.norm(x[ev]), np.linalg.norm(x[~ev])) <= tol * nrm)
    scale = max(np.linalg.norm(x), 1e-300)
    return bool(np.linalg.norm(x[np.ix_(ev, ~ev)]) <= tol * scale
                and np.linalg.norm(x[np.ix_(~ev, ev)]) <= tol * scale)


def _require_fermionic(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if not is_fermionic(x):
        raise NotFermionic("input mixes even and odd parity")
    return x


def normalized(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise DimensionMismatch("zero vector cannot be normalized")
    return psi / nrm


def is_normalized(psi, tol: float = NORM_TOL) -> bool:
    return abs(np.linalg.norm(psi) - 1) <= tol


def density(x) -> np.ndarray:
    """Density matrix of a vector; matrices are returned unchanged."""
    x = np.asarray(x, dtype=complex)
    return np.outer(x, x.conj()) if x.ndim == 1 else x


# ------------------------------------------------------------- Gaussianity

def is_gaussian_pure(psi, tol: float = 1e-9) -> bool:
    """A pure fermionic state is Gaussian iff ``Lambda (psi (x) psi) = 0``."""
    psi = normalized(_require_fermionic(psi))
    n = modes_of(psi)
    out = np.zeros(4 ** n, dtype=complex)
    for c in majoranas(n):
        v = c @ psi
        out += np.kron(v, v)
    return bool(np.linalg.norm(out) < tol)


def commutator_norm_with_lambda(x) -> float:
    """Frobenius norm of ``[Lambda, x (x) x]`` without forming the doubled space.

    ``[Lambda, x (x) x] = sum_i (c_i x)(x)(c_i x) - (x c_i)(x)(x c_i)``. After
    the index reshuffle ``(a,b),(c,d) -> (a,c),(b,d)`` each Kronecker square
    ``A (x) A`` becomes ``vec(A) vec(A)^T``, so the norm equals
    ``||K S K^T||_F`` with ``K = [vec(c_i x), vec(x c_i)]`` and
    ``S = diag(1, -1)``. With ``K = QR`` this is ``||R S R^T||_F``, which
    avoids the cancellation of a Gram-matrix formula.
    """
    x = np.asarray(x, dtype=complex)
    n = modes_of(x)
    cs = majoranas(n)
    k = np.stack([(c @ x).reshape(-1) for c in cs] + [(x @ c).reshape(-1) for c in cs], axis=1)
    s = np.concatenate([np.ones(len(cs)), -np.ones(len(cs))])
    r = np.linalg.qr(k, mode="r")
    return float(np.linalg.norm((r * s) @ r.T))


def is_gaussian_operator(x, tol: float = 1e-8) -> bool:
    """An even operator is Gaussian iff it commutes with ``Lambda`` in the doubled sense."""
    x = np.asarray(x, dtype=complex)
    n = modes_of(x)
    if x.ndim != 2:
        raise DimensionMismatch("expected an operator (matrix)")
    ev = even_mask(n)
    scale = max(np.linalg.norm(x), 1e-300)
    if np.linalg.norm(x[np.ix_(ev, ~ev)]) + np.linalg.norm(x[np.ix_(~ev, ev)]) > PARITY_TOL * scale:
        raise NotEven("operator has parity-odd components")
    return bool(commutator_norm_with_lambda(x) < tol * scale ** 2)


def is_gaussian_two_mode(rho, tol: float = 1e-10) -> bool:
    """Two-mode test: Gaussian iff the even and odd parity blocks have equal determinants."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = density(rho)
    if modes_of(rho) != 2:
        raise WrongModeCount("the determinant test applies to two modes")
    rho = _require_fermionic(rho)
    rho = rho / np.trace(rho)
    det_e = np.linalg.det(rho[np.ix_([0, 3], [0, 3])])
    det_o = np.linalg.det(rho[np.ix_([1, 2], [1, 2])])
    return bool(abs(det_e - det_o) < tol)


XYXY = kron_all([X, Y, X, Y])


def four_mode_invariant(psi) -> complex:
    """``<psi*| X Y X Y |psi>`` with ``psi*`` the entrywise conjugate (basis dependent)."""
    psi = np.asarray(psi, dtype=complex)
    if modes_of(psi) != 4 or psi.ndim != 1:
        raise WrongModeCount("the XYXY test applies to pure four-mode states")
    psi = normalized(psi)
    return complex(psi @ XYXY @ psi)


def is_gaussian_four_mode_pure(psi, tol: float = 1e-9) -> bool:
    val = four_mode_invariant(psi)
    _require_fermionic(psi)
    return bool(abs(val) < tol)


# --------------------------------------------------------------- CM bridge

def cm_from_state(x) -> CovarianceMatrix:
    """``gamma_kl = (i/2) tr(rho [c_k, c_l])`` for a vector or density matrix."""
    x = _require_fermionic(x)
    n = modes_of(x)
    cs = majoranas(n)
    if x.ndim == 1:
        v = np.stack([c @ x for c in cs], axis=1)
        m = v.conj().T @ v / np.vdot(x, x).real
    else:
        pc = np.stack([(x @ c) for c in cs])          # rho c_k
        m = np.einsum("kab,lba->kl", pc, np.stack(cs)) / np.trace(x).real
    g = (0.5j * (m - m.T)).real
    return CovarianceMatrix(0.5 * (g - g.T))


def moment(x, indices) -> complex:
    """``i^p tr(rho c_j1 ... c_j2p)`` by explicit matrix products (1-based indices)."""
    x = np.asarray(x, dtype=complex)
    n = modes_of(x)
    idx = list(indices)
    prod = kron_all([I2] * n)
    for j in idx:
        prod = prod @ majorana_matrix(j, n)
    p = len(idx) // 2
    if x.ndim == 1:
        val = np.vdot(x, prod @ x) / np.vdot(x, x)
    else:
        val = np.trace(x @ prod) / np.trace(x)
    return complex((1j) ** p * val)


def quadratic_hamiltonian(g) -> np.ndarray:
    """``H = (i/4) sum_kl G_kl c_k c_l`` for real antisymmetric ``G``."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0] // 2
    cs = majoranas(n)
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for k in range(2 * n):
        for l in range(k + 1, 2 * n):
            if g[k, l] != 0:
                h += 0.5j * g[k, l] * (cs[k] @ cs[l])
    return 0.5 * (h + h.conj().T)


def thermal_state(g) -> np.ndarray:
    """Normalized ``exp(-H)`` for ``H = quadratic_hamiltonian(G)``."""
    h = quadratic_hamiltonian(g)
    w, v = np.linalg.eigh(h)
    boltz = np.exp(-(w - w.min()))
    rho = (v * boltz) @ v.conj().T
    return rho / np.trace(rho).real


def ground_state(g) -> np.ndarray:
    """Ground state of ``quadratic_hamiltonian(G)`` (assumed nondegenerate)."""
    w, v = np.linalg.eigh(quadratic_hamiltonian(g))
    psi = v[:, 0]
    k = int(np.argmax(np.abs(psi)))
    return psi * np.exp(-1j * np.angle(psi[k]))


def local_unitary_from_orthogonal(ops: LocalOrthogonalSet) -> np.ndarray:
    """Unitary ``U`` whose conjugation ``U rho U^dag`` maps the CM by ``ops``.

    ``R(alpha)`` on mode ``j`` is ``exp(i alpha Z_j / 2)``; the flip on mode
    ``j`` is ``X_j Z_{j+1} ... Z_n``, an odd operator.
    """
    n = ops.modes
    u = kron_all([I2] * n)
    for j, a in enumerate(ops.angles, start=1):
        u = local_operator(np.diag([np.exp(0.5j * a), np.exp(-0.5j * a)]), j, n) @ u
    for j, m in enumerate(ops.flips, start=1):
        if m:
            u = kron_all([I2] * (j - 1) + [X] + [Z] * (n - j)) @ u
    return u


# ----------------------------------------------------------- swaps, traces

def _swap_permutation(n: int, site: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(2 ** n)
    hi = (idx >> (n - site)) & 1
    lo = (idx >> (n - site - 1)) & 1
    target = idx ^ ((hi ^ lo) << (n - site)) ^ ((hi ^ lo) << (n - site - 1))
    sign = np.where(hi & lo, -1.0, 1.0)
    return target, sign


def fermionic_swap(x, site: int) -> np.ndarray:
    """Exchange modes ``site`` and ``site + 1``: ``|ij> -> (-1)^{ij} |ji>``."""
    x = np.asarray(x, dtype=complex)
    n = modes_of(x)
    if not 1 <= site < n:
        raise IndexOutOfRange(f"swap site {site} outside 1..{n - 1}")
    target, sign = _swap_permutation(n, site)
    out = np.empty_like(x)
    if x.ndim == 1:
        out[target] = sign * x
    else:
        out[np.ix_(target, target)] = np.outer(sign, sign) * x
    return out


def fermionic_partial_trace(x, mode: int) -> np.ndarray:
    """Trace out ``mode`` after moving it to the last position with fermionic swaps."""
    rho = density(x)
    n = modes_of(rho)
    if not 1 <= mode <= n:
        raise IndexOutOfRange(f"mode {mode} outside 1..{n}")
    if n == 1:
        raise IndexOutOfRange("cannot trace out the only mode")
    for s in range(mode, n):
        rho = fermionic_swap(rho, s)
    d = 2 ** (n - 1)
    return np.trace(rho.reshape(d, 2, d, 2), axis1=1, axis2=3)


def reduced_state(x, keep) -> np.ndarray:
    """Density matrix of the 1-based modes in ``keep`` (kept in increasing order)."""
    rho = density(x)
    n = modes_of(rho)
    keep = set(keep)
    for m in sorted(set(range(1, n + 1)) - keep, reverse=True):
        rho = fermionic_partial_trace(rho, m)
    return rho


def single_mode_populations(psi) -> np.ndarray:
    """``(p0, p1)`` of each mode's reduced state, shape ``(n, 2)``.

    Reduced single-mode states of fermionic states are diagonal, so the
    populations determine them.
    """
    psi = np.asarray(psi, dtype=complex)
    n = modes_of(psi)
    prob = np.abs(psi) ** 2 if psi.ndim == 1 else np.real(np.diag(psi))
    prob = prob / prob.sum()
    t = prob.reshape((2,) * n)
    out = np.empty((n, 2))
    for k in range(n):
        axes = tuple(a for a in range(n) if a != k)
        out[k] = t.sum(axis=axes)
    return out


# ------------------------------------------------------------------ states

def basis_state(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def ghz_hadamard_state(n: int) -> np.ndarray:
    """Uniform superposition of all even-weight basis states."""
    if n < 2:
        raise OutOfRange("needs at least two modes")
    v = even_mask(n).astype(complex)
    return v / np.linalg.norm(v)


def w_state(n: int = 3) -> np.ndarray:
    """Equal superposition of the weight ``n - 1`` basis states."""
    v = np.zeros(2 ** n, dtype=complex)
    for k in range(n):
        v[(2 ** n - 1) ^ (1 << k)] = 1.0
    return v / np.linalg.norm(v)


def werner_state(fidelity: float) -> np.ndarray:
    """``(4F-1)/3 |psi-><psi-| + (1-F)/3 I`` on two modes."""
    if not 0.0 <= fidelity <= 1.0:
        raise OutOfRange(f"F={fidelity} outside [0, 1]")
    singlet = (basis_state("01") - basis_state("10")) / np.sqrt(2)
    return (4 * fidelity - 1) / 3 * density(singlet) + (1 - fidelity) / 3 * np.eye(4)


def random_fermionic_state(n: int, rng: np.random.Generator, parity: int | None = None) -> np.ndarray:
    """Random pure state supported on one parity sector."""
    if parity is None:
        parity = int(rng.integers(0, 2))
    mask = even_mask(n) if parity == 0 else ~even_mask(n)
    v = np.zeros(2 ** n, dtype=complex)
    v[mask] = rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())
    return v / np.linalg.norm(v)


def random_gaussian_state(n: int, rng: np.random.Generator, pure: bool = True) -> np.ndarray:
    """Ground or thermal state of a random quadratic Majorana Hamiltonian."""
    a = rng.normal(size=(2 * n, 2 * n))
    g = a - a.T
    return ground_state(g) if pure else thermal_state(0.5 * g)


# -------------------------------------------------------------------- JSON

def _complex_list(arr) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(arr, dtype=complex).reshape(-1)]


def _parse_complex(entries) -> np.ndarray:
    out = []
    for e in entries:
        if isinstance(e, (list, tuple)):
            if len(e) != 2:
                raise DimensionMismatch(f"complex entry {e!r} must be [re, im]")
            out.append(complex(float(e[0]), float(e[1])))
        else:
            out.append(complex(float(e)))
    return np.array(out, dtype=complex)


def state_to_json(x) -> dict:
    x = np.asarray(x, dtype=complex)
    n = modes_of(x)
    if x.ndim == 1:
        return {"modes": n, "amplitudes": _complex_list(x)}
    return {"modes": n, "density": [_complex_list(row) for row in x]}


def state_from_json(obj: dict) -> np.ndarray:
    if "amplitudes" in obj:
        x = _parse_complex(obj["amplitudes"])
    elif "density" in obj:
        x = np.stack([_parse_complex(row) for row in obj["density"]])
    else:
        raise DimensionMismatch("state JSON needs 'amplitudes' or 'density'")
    n = modes_of(x)
    if "modes" in obj and obj["modes"] != n:
        raise DimensionMismatch(f"'modes'={obj['modes']} but data has {n} modes")
    return x


def load_state(path) -> np.ndarray:
    return state_from_json(json.loads(Path(path).read_text()))


def save_state(x, path) -> None:
    Path(path).write_text(json.dumps(state_to_json(x)))
