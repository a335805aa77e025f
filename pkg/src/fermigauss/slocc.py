"""Local invertible (X^k D) equivalence of pure fermionic states.

Covers the iterative normal form built from diagonal local operators,
criticality, the two- and three-mode class labels and the four-mode seed
families together with their Gaussianity conditions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._consts import EPS_DEG, EPS_NULL
from .errors import AllZero, NotFermionic, UnknownFamily, WrongModeCount
from .jw_fock import (
    X,
    apply_local,
    basis_state,
    is_fermionic,
    kron_all,
    modes_of,
    normalized,
    parity_of,
    single_mode_populations,
)


@dataclass
class NormalFormTrace:
    """Outcome of :func:`normal_form_iterate`.

    ``norm_history[k]`` is the cumulative squared norm after sweep ``k``;
    the working state is renormalized every step so the decay is tracked
    here rather than in the state.
    """

    iterations: int
    norm_history: list[float]
    final_state: np.ndarray | None
    local_ops_product: list[np.ndarray]
    verdict: str

    def to_json(self) -> dict:
        from .jw_fock import state_to_json
        return {
            "iterations": self.iterations,
            "norm_history": list(self.norm_history),
            "final_state": None if self.final_state is None else state_to_json(self.final_state),
            "local_ops_product": [[[float(z.real), float(z.imag)] for z in np.diag(op)]
                                  for op in self.local_ops_product],
            "verdict": self.verdict,
        }


def _require_pure_fermionic(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise NotFermionic("expected a state vector")
    if not is_fermionic(psi):
        raise NotFermionic("state mixes parities")
    return normalized(psi)


def reduction_distance(psi) -> float:
    """Largest trace distance ``|p0 - 1/2| + |p1 - 1/2|`` of a single-mode reduction from I/2."""
    pops = single_mode_populations(psi)
    return float(np.max(np.abs(pops - 0.5).sum(axis=1)))


def is_critical(psi, tol: float = 1e-8) -> bool:
    """True iff every single-mode reduced state is within ``tol`` of I/2 in trace norm."""
    return reduction_distance(_require_pure_fermionic(psi)) <= tol


def normal_form_iterate(psi, max_iter: int = 1000, tol: float = 1e-10) -> NormalFormTrace:
    """Drive a state towards a critical one with determinant-one diagonal operators.

    Each step acts on one site with ``X_i = det(rho_i)^(1/4) rho_i^(-1/2)``
    (``rho_i`` is diagonal for fermionic states). For a normalized input the
    squared norm afterwards is ``2 sqrt(det rho_i) <= 1``. ``max_iter``
    counts sweeps over all sites.

    Verdicts: ``critical_reached`` once every reduction is within ``tol`` of
    I/2, ``null_cone`` once the cumulative squared norm drops below 1e-10,
    ``max_iter_plateau`` otherwise.
    """
    psi = _require_pure_fermionic(psi)
    n = modes_of(psi)
    acc = [np.eye(2, dtype=complex) for _ in range(n)]
    log_norm = 0.0          # log of cumulative squared norm
    history: list[float] = []
    if reduction_distance(psi) <= tol:
        return NormalFormTrace(0, history, psi, acc, "critical_reached")
    for sweep in range(1, max_iter + 1):
        for i in range(n):
            p0, p1 = single_mode_populations(psi)[i]
            if min(p0, p1) <= 0.0:
                # A pure-product mode: its population can be scaled to zero.
                history.append(0.0)
                return NormalFormTrace(sweep, history, None, acc, "null_cone")
            scale = (p0 * p1) ** 0.25
            op = np.diag([scale / np.sqrt(p0), scale / np.sqrt(p1)]).astype(complex)
            psi = apply_local(psi, op, i + 1)
            sq = float(np.vdot(psi, psi).real)       # = 2 sqrt(p0 p1)
            log_norm += np.log(sq)
            psi = psi / np.sqrt(sq)
            acc[i] = op @ acc[i]
        history.append(float(np.exp(log_norm)))
        if history[-1] < EPS_NULL:
            return NormalFormTrace(sweep, history, None, acc, "null_cone")
        if reduction_distance(psi) <= tol:
            return NormalFormTrace(sweep, history, psi, acc, "critical_reached")
    return NormalFormTrace(max_iter, history, psi, acc, "max_iter_plateau")


# ----------------------------------------------------------------- labels

@dataclass(frozen=True)
class SloccLabel:
    """Class label; ``params`` and ``partition`` are only set where meaningful."""

    kind: str
    params: tuple = ()
    partition: str | None = None
    gaussian: bool | None = None
    note: str = ""

    def to_json(self) -> dict:
        out: dict = {"label": self.kind}
        if self.params:
            out["params"] = [[float(np.real(p)), float(np.imag(p))] for p in self.params]
        if self.partition is not None:
            out["partition"] = self.partition
        if self.gaussian is not None:
            out["gaussian"] = self.gaussian
        if self.note:
            out["note"] = self.note
        return out


EVEN3 = (0b000, 0b011, 0b101, 0b110)
# Mode that splits off when exactly two amplitudes (by position in EVEN3) survive.
_BISEPARABLE = {(0, 1): 1, (0, 2): 2, (0, 3): 3, (1, 2): 3, (1, 3): 2, (2, 3): 1}


def even_amplitudes_3mode(psi) -> np.ndarray:
    """``(a1, a2, a3, a4)`` on ``|000>, |011>, |101>, |110>`` after mapping odd states by X^3."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or modes_of(psi) != 3:
        raise WrongModeCount("expected a pure three-mode state")
    psi = _require_pure_fermionic(psi)
    if parity_of(psi) == 1:
        psi = kron_all([X, X, X]) @ psi
    return psi[list(EVEN3)]


def classify_3mode(psi) -> SloccLabel:
    """GHZ3 (no zero amplitude), W3 (one), Biseparable (two) or Separable."""
    a = even_amplitudes_3mode(psi)
    zero = np.abs(a) < EPS_DEG * np.abs(a).max()
    count = int(zero.sum())
    if count == 0:
        return SloccLabel("GHZ3", gaussian=True)
    if count == 1:
        return SloccLabel("W3", gaussian=True)
    if count == 2:
        alive = tuple(int(k) for k in np.flatnonzero(~zero))
        lone = _BISEPARABLE[alive]
        rest = "".join(str(k) for k in (1, 2, 3) if k != lone)
        return SloccLabel("Biseparable", partition=f"{lone}|{rest}", gaussian=True)
    return SloccLabel("Separable", gaussian=True)


# ------------------------------------------------------- four-mode seeds

_PHI_P = (basis_state("00") + basis_state("11")) / np.sqrt(2)
_PHI_M = (basis_state("00") - basis_state("11")) / np.sqrt(2)
_PSI_P = (basis_state("01") + basis_state("10")) / np.sqrt(2)
_PSI_M = (basis_state("01") - basis_state("10")) / np.sqrt(2)


def seed_4mode_gabcd(a, b, c, d) -> np.ndarray:
    """``a Phi+ Phi+ + b Phi- Phi- + c Psi+ Psi+ + d Psi- Psi-`` on pairs (1,2)(3,4), normalized."""
    coeffs = np.array([a, b, c, d], dtype=complex)
    if not np.any(coeffs):
        raise AllZero("all four coefficients vanish")
    v = sum(k * np.kron(p, p) for k, p in zip(coeffs, (_PHI_P, _PHI_M, _PSI_P, _PSI_M)))
    return normalized(v)


def _pairs(*terms) -> np.ndarray:
    v = np.zeros(16, dtype=complex)
    for coeff, strings in terms:
        for s in strings:
            v += coeff * basis_state(s)
    return normalized(v)


def seed_4mode_labc2(a, b, c) -> np.ndarray:
    return _pairs(
        ((a + b) / 2, ("0000", "1111")),
        ((a - b) / 2, ("0011", "1100")),
        (c, ("0101", "1010")),
        (1.0, ("0110",)),
    )


def seed_4mode_la2b2(a, b) -> np.ndarray:
    return _pairs(
        (a, ("0000", "1111")),
        (b, ("0101", "1010")),
        (1.0, ("0110", "0011")),
    )


def nullcone_4mode() -> np.ndarray:
    return _pairs((1.0, ("1100", "1111", "1010", "0110")))


FAMILIES = ("G_abcd", "L_abc2", "L_a2b2", "NullCone4")


def family_state(family: str, params=()) -> np.ndarray:
    if family == "G_abcd":
        return seed_4mode_gabcd(*params)
    if family == "L_abc2":
        return seed_4mode_labc2(*params)
    if family == "L_a2b2":
        return seed_4mode_la2b2(*params)
    if family == "NullCone4":
        return nullcone_4mode()
    raise UnknownFamily(f"unknown family {family!r}; expected one of {FAMILIES}")


def family_condition(family: str, params=()) -> complex:
    """Value that vanishes exactly on the Gaussian members of a family."""
    p = [complex(x) for x in params]
    if family == "G_abcd":
        a, b, c, d = p
        return a * b + c * d
    if family == "L_abc2":
        a, b, c = p
        return a * b + c * c
    if family == "L_a2b2":
        a, b = p
        return a * a + b * b
    if family == "NullCone4":
        return 0j
    raise UnknownFamily(f"unknown family {family!r}; expected one of {FAMILIES}")


def classify_4mode_seed(params, family: str, tol: float = 1e-9) -> SloccLabel:
    """Label a seed by its family and Gaussianity condition.

    The condition is evaluated on the parameters scaled so the largest has
    modulus one, making ``tol`` independent of the overall scale.
    """
    params = tuple(complex(x) for x in params)
    expected = {"G_abcd": 4, "L_abc2": 3, "L_a2b2": 2, "NullCone4": 0}
    if family not in expected:
        raise UnknownFamily(f"unknown family {family!r}; expected one of {FAMILIES}")
    if len(params) != expected[family]:
        raise WrongModeCount(f"{family} takes {expected[family]} parameters")
    if family == "NullCone4":
        return SloccLabel("NullCone4", gaussian=True,
                          note="GLU-equivalent to the 4-qubit W-state")
    scale = max(1.0, max(abs(x) for x in params))
    value = family_condition(family, [x / scale for x in params])
    if abs(value) > tol:
        return SloccLabel("NonGaussian", params, gaussian=False, note=f"{family} condition violated")
    return SloccLabel(family, params, gaussian=True)


def random_gslocc(psi, rng: np.random.Generator, condition: float = 10.0) -> np.ndarray:
    """Apply a random invertible ``X^k D`` on every site and renormalize."""
    psi = np.asarray(psi, dtype=complex)
    n = modes_of(psi)
    for site in range(1, n + 1):
        mags = np.exp(rng.uniform(-np.log(condition), np.log(condition), size=2) / 2)
        d = np.diag(mags * np.exp(1j * rng.uniform(-np.pi, np.pi, size=2)))
        op = X @ d if rng.integers(0, 2) else d
        psi = apply_local(psi, op, site)
    return normalized(psi)
