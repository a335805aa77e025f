"""Finite-round local measurement protocols with classical feed-forward.

All local operators have the form ``X^k D`` with ``D`` diagonal, so each has
definite parity. Protocols are expanded into every measurement branch; a
protocol is deterministic when every branch ends in the target state.

Only finitely many rounds are simulated. Limits of infinite-round protocols
are out of reach by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import nnls

from ._consts import PROB_CUTOFF
from .errors import EmptySymmetryList, IncompleteInstrument, NotPositive, SingularDiagonal
from .jw_fock import X, apply_local, cm_from_state, even_mask, modes_of, normalized
from .glu_standard import standard_form


@dataclass(frozen=True)
class LocalKraus:
    """Operator ``X^flip @ diag(diag)`` on one site (1-based)."""

    site: int
    flip: int
    diag: tuple[complex, complex]

    def __post_init__(self):
        object.__setattr__(self, "diag", tuple(complex(d) for d in self.diag))
        object.__setattr__(self, "flip", int(self.flip))

    def matrix(self) -> np.ndarray:
        d = np.diag(np.array(self.diag, dtype=complex))
        return X @ d if self.flip else d

    @classmethod
    def diag_then_flip(cls, site: int, diag, flip: int) -> "LocalKraus":
        """The operator ``D X^flip`` rewritten as ``X^flip D'``."""
        d = tuple(diag)
        return cls(site, flip, (d[1], d[0]) if flip else d)

    def to_json(self) -> dict:
        return {"site": self.site, "flip": self.flip,
                "diag": [[z.real, z.imag] for z in self.diag]}


@dataclass(frozen=True)
class Instrument:
    site: int
    branches: tuple[LocalKraus, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if any(b.site != self.site for b in self.branches):
            raise IncompleteInstrument("every branch must act on the instrument's site")
        total = sum((k.matrix().conj().T @ k.matrix() for k in self.branches), np.zeros((2, 2)))
        if np.abs(total - np.eye(2)).max() > 1e-9:
            raise IncompleteInstrument(f"sum K^dag K deviates from identity by "
                                       f"{np.abs(total - np.eye(2)).max():.2e}")


@dataclass(frozen=True)
class Round:
    """One measurement plus corrections keyed by the full transcript so far."""

    instrument: Instrument
    corrections: Mapping[tuple[int, ...], tuple[LocalKraus, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class Protocol:
    rounds: tuple[Round, ...] = ()

    def without_corrections(self, site: int | None = None) -> "Protocol":
        """Copy with corrections removed (only those acting on ``site`` if given)."""
        rounds = []
        for r in self.rounds:
            corr = {} if site is None else {
                t: tuple(k for k in ops if k.site != site) for t, ops in r.corrections.items()
            }
            rounds.append(Round(r.instrument, corr))
        return Protocol(tuple(rounds))


@dataclass
class BranchOutcome:
    probability: float
    state: np.ndarray
    transcript: tuple[int, ...]


def apply_instrument(psi, ins: Instrument) -> list[BranchOutcome]:
    """Branch probabilities ``||K_b psi||^2`` and normalized post-measurement states."""
    psi = normalized(psi)
    out = []
    for b, k in enumerate(ins.branches):
        v = apply_local(psi, k.matrix(), ins.site)
        p = float(np.vdot(v, v).real)
        if p > PROB_CUTOFF:
            out.append(BranchOutcome(p, v / np.sqrt(p), (b,)))
    return out


def run_protocol(psi, protocol: Protocol) -> list[BranchOutcome]:
    """Depth-first expansion of all branches, ordered by transcript."""
    results: list[BranchOutcome] = []

    def expand(state, prob, transcript, r):
        if r == len(protocol.rounds):
            results.append(BranchOutcome(prob, state, transcript))
            return
        rnd = protocol.rounds[r]
        for out in apply_instrument(state, rnd.instrument):
            t = transcript + out.transcript
            s = out.state
            for k in rnd.corrections.get(t, ()):
                s = apply_local(s, k.matrix(), k.site)
            expand(normalized(s), prob * out.probability, t, r + 1)

    expand(normalized(psi), 1.0, (), 0)
    return results


def branch_local_operators(protocol: Protocol, n: int) -> dict[tuple[int, ...], list[np.ndarray]]:
    """Per-site accumulated 2x2 operator of every transcript (before normalization)."""
    out: dict[tuple[int, ...], list[np.ndarray]] = {(): [np.eye(2, dtype=complex)] * n}
    for rnd in protocol.rounds:
        nxt = {}
        for t, ops in out.items():
            for b, k in enumerate(rnd.instrument.branches):
                new = list(ops)
                new[k.site - 1] = k.matrix() @ new[k.site - 1]
                for c in rnd.corrections.get(t + (b,), ()):
                    new[c.site - 1] = c.matrix() @ new[c.site - 1]
                nxt[t + (b,)] = new
        out = nxt
    return out


def is_flip_diagonal(op: np.ndarray, tol: float = 1e-12) -> bool:
    """True iff ``op`` is ``D`` or ``X D`` for a diagonal ``D``."""
    return bool(abs(op[0, 1]) + abs(op[1, 0]) <= tol or abs(op[0, 0]) + abs(op[1, 1]) <= tol)


def verify_deterministic(psi_in, psi_target, protocol: Protocol, tol: float = 1e-9,
                         mode: str = "both") -> bool:
    """Check that every branch reaches the target.

    ``mode="exact"`` compares overlaps (``|<branch|target>| > 1 - tol``),
    ``mode="glu"`` compares CM standard forms (Frobenius distance < tol) and
    ``mode="both"`` requires both.
    """
    if mode not in ("exact", "glu", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    target = normalized(psi_target)
    s_target = standard_form(cm_from_state(target)).s_gamma.gamma if mode != "exact" else None
    for out in run_protocol(psi_in, protocol):
        if mode != "glu" and abs(np.vdot(out.state, target)) <= 1 - tol:
            return False
        if mode != "exact":
            s = standard_form(cm_from_state(out.state)).s_gamma.gamma
            if np.linalg.norm(s - s_target) >= tol:
                return False
    return True


# -------------------------------------------------------- concrete protocols

def _as_diag(d) -> tuple[complex, complex]:
    d = np.asarray(d, dtype=complex)
    vals = np.diag(d) if d.ndim == 2 else d
    if vals.shape != (2,):
        raise SingularDiagonal(f"expected a 2x2 diagonal, got shape {d.shape}")
    if d.ndim == 2 and (abs(d[0, 1]) > 0 or abs(d[1, 0]) > 0):
        raise SingularDiagonal("matrix is not diagonal")
    if np.min(np.abs(vals)) == 0:
        raise SingularDiagonal("diagonal has a zero entry")
    return complex(vals[0]), complex(vals[1])


def flip_measurement(site: int, diag) -> Instrument:
    """Two-outcome instrument ``{D, D X} / s`` with ``s^2 = |d0|^2 + |d1|^2``.

    ``D^dag D + X D^dag D X = (|d0|^2 + |d1|^2) I``, so this ``s`` makes the
    instrument complete exactly.
    """
    d0, d1 = _as_diag(diag)
    s = np.sqrt(abs(d0) ** 2 + abs(d1) ** 2)
    d = (d0 / s, d1 / s)
    return Instrument(site, (LocalKraus.diag_then_flip(site, d, 0),
                             LocalKraus.diag_then_flip(site, d, 1)))


def _x(site: int) -> LocalKraus:
    return LocalKraus(site, 1, (1, 1))


def ghz3_protocol(d1, d2) -> Protocol:
    """Parties 1 and 2 measure ``{D_i, D_i X}``; party 3 applies ``X^(k1+k2)``.

    Starting from the even three-mode GHZ state the result is
    ``D1 (x) D2 (x) I |GHZ>`` on every branch, because
    ``X^k1 (x) X^k2 (x) X^(k1+k2)`` leaves that state invariant.
    """
    corr = {(k1, k2): ((_x(3),) if (k1 + k2) % 2 else ()) for k1 in (0, 1) for k2 in (0, 1)}
    return Protocol((Round(flip_measurement(1, d1)), Round(flip_measurement(2, d2), corr)))


def seed4_protocol(d1) -> Protocol:
    """Party 1 measures ``{D1, D1 X}``; on the second outcome parties 2-4 apply X.

    Works for any state invariant under ``X`` on all four sites, in
    particular every ``G_abcd`` seed.
    """
    corr = {(1,): (_x(2), _x(3), _x(4))}
    return Protocol((Round(flip_measurement(1, d1), corr),))


def seed4_symmetric_protocol(d2, d3) -> Protocol:
    """Parties 2 and 3 measure; parties 1 and 4 correct.

    Valid for seeds invariant under ``Y X^0 X Z`` and ``Z X X^0 Y`` (site
    order 1..4), e.g. ``G_abcd`` with ``a = b`` and ``c = d = i a``. A flip on
    site 2 is undone with Z on 1 and Y on 4, a flip on site 3 with Y on 1 and
    Z on 4, and both together with X on sites 1 and 4.
    """
    z = lambda s: LocalKraus(s, 0, (1, -1))  # noqa: E731
    y = lambda s: LocalKraus(s, 1, (1j, -1j))  # noqa: E731
    corr = {
        (0, 0): (),
        (1, 0): (z(1), y(4)),
        (0, 1): (y(1), z(4)),
        (1, 1): (_x(1), _x(4)),
    }
    return Protocol((Round(flip_measurement(2, d2)), Round(flip_measurement(3, d3), corr)))


# ------------------------------------------------------------ feasibility

@dataclass
class FeasibilityResult:
    feasible: bool
    weights: np.ndarray
    residual: float
    r: float

    def to_json(self) -> dict:
        return {"feasible": self.feasible, "weights": self.weights.tolist(),
                "residual": self.residual, "r": self.r}


def _check_positive(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotPositive(f"{name} is not square")
    if np.abs(m - m.conj().T).max() > 1e-10 * max(1.0, np.abs(m).max()):
        raise NotPositive(f"{name} is not Hermitian")
    if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() <= 0:
        raise NotPositive(f"{name} is not positive definite")
    return m


def _real_vec(m: np.ndarray) -> np.ndarray:
    v = np.asarray(m, dtype=complex).reshape(-1)
    return np.concatenate([v.real, v.imag])


def simplex_least_squares(cols: np.ndarray, b: np.ndarray, simplex: np.ndarray) -> np.ndarray:
    """Minimize ``||cols @ x - b||`` over ``x >= 0`` with ``sum(x[simplex]) = 1``.

    Non-negative least squares with the equality appended as a heavily
    weighted row, followed by an exact equality-constrained solve on the
    detected support.
    """
    scale = max(1.0, np.linalg.norm(cols), np.linalg.norm(b))
    w = 1e6 * scale
    a_aug = np.vstack([cols, w * simplex[None, :].astype(float)])
    b_aug = np.concatenate([b, [w]])
    x, _ = nnls(a_aug, b_aug, maxiter=50 * cols.shape[1] + 100)
    if x[simplex].sum() > 0:
        x[simplex] /= x[simplex].sum()
    support = x > 1e-14
    if support.any():
        cs = cols[:, support]
        c = simplex[support].astype(float)
        k = int(support.sum())
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = cs.T @ cs
        kkt[:k, k] = kkt[k, :k] = c
        rhs = np.concatenate([cs.T @ b, [1.0]])
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]
        if np.all(sol >= 0):
            cand = np.zeros_like(x)
            cand[support] = sol
            if np.linalg.norm(cols @ cand - b) <= np.linalg.norm(cols @ x - b):
                x = cand
    return x


def sep_feasibility(g, h, symmetries: Sequence, r: float | None = None,
                    seed_state=None, tol: float = 1e-8) -> FeasibilityResult:
    """Search for ``p`` on the simplex with ``sum_i p_i S_i^dag H S_i = r G``.

    ``r`` is taken from the argument, else computed as
    ``<s|H|s> / <s|G|s>`` from ``seed_state``, else optimized jointly
    (``r >= 0``). Feasible iff the minimal Frobenius residual is below ``tol``.
    Only the caller-supplied finite list of symmetries is searched.
    """
    if len(symmetries) == 0:
        raise EmptySymmetryList("at least one symmetry is required")
    g = _check_positive(g, "G")
    h = _check_positive(h, "H")
    mats = [np.asarray(s, dtype=complex) for s in symmetries]
    cols = np.stack([_real_vec(s.conj().T @ h @ s) for s in mats], axis=1)
    m = len(mats)
    if r is None and seed_state is not None:
        s = normalized(seed_state)
        r = float(np.vdot(s, h @ s).real / np.vdot(s, g @ s).real)
    if r is None:
        cols = np.hstack([cols, -_real_vec(g)[:, None]])
        simplex = np.array([True] * m + [False])
        x = simplex_least_squares(cols, np.zeros(cols.shape[0]), simplex)
        weights, r_val = x[:m], float(x[m])
        residual = float(np.linalg.norm(cols @ x))
    else:
        b = float(r) * _real_vec(g)
        weights = simplex_least_squares(cols, b, np.ones(m, dtype=bool))
        r_val = float(r)
        residual = float(np.linalg.norm(cols @ weights - b))
    return FeasibilityResult(bool(residual < tol), weights, residual, r_val)


def split_parity(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Even and odd parts of an operator on the Fock space."""
    k = np.asarray(k, dtype=complex)
    ev = even_mask(modes_of(k))
    even = np.where(np.equal.outer(ev, ev), k, 0)
    return even, k - even


# --------------------------------------------------------------- JSON I/O

def _kraus_from_json(obj: dict, site: int | None = None) -> LocalKraus:
    diag = [complex(*d) if isinstance(d, (list, tuple)) else complex(d) for d in obj["diag"]]
    return LocalKraus(int(obj.get("site", site)), int(obj.get("flip", 0)), tuple(diag))


def protocol_from_json(obj: dict) -> Protocol:
    """Rounds as ``{site, branches: [{flip, diag}], corrections: {"k1,k2": [{site, flip, diag}]}}``."""
    rounds = []
    for rj in obj.get("rounds", []):
        site = int(rj["site"])
        ins = Instrument(site, tuple(_kraus_from_json(b, site) for b in rj["branches"]))
        corr = {}
        for key, ops in rj.get("corrections", {}).items():
            t = tuple(int(x) for x in key.split(",")) if key else ()
            corr[t] = tuple(_kraus_from_json(o) for o in ops)
        rounds.append(Round(ins, corr))
    return Protocol(tuple(rounds))


def protocol_to_json(p: Protocol) -> dict:
    return {"rounds": [
        {
            "site": r.instrument.site,
            "branches": [{"flip": k.flip, "diag": [[z.real, z.imag] for z in k.diag]}
                         for k in r.instrument.branches],
            "corrections": {",".join(map(str, t)): [k.to_json() for k in ops]
                            for t, ops in r.corrections.items()},
        }
        for r in p.rounds
    ]}
