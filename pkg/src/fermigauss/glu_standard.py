"""Canonical representatives of covariance matrices under local orthogonal maps.

Each mode is its own party. The allowed local maps are ``Z^m R(alpha)`` per
mode, where the Z flip is optional. :func:`standard_form` picks a unique
point on each orbit, so two CMs are related by such maps iff their standard
forms coincide.

The procedure:

1. Diagonal blocks are ``lambda_i J2``. Rotations leave them alone and a flip
   negates them, so flips are set to make ``lambda_i > 0``. Flip bits of modes
   with ``lambda_i = 0`` are undetermined at this point. Every pattern is
   tried and one is selected at the end (see :func:`_candidate_key`).
2. Off-diagonal blocks are scanned in row-major order (``i < j``). Modes whose
   relative angles are already pinned are tracked as *groups*. A group can
   still be rotated jointly by any angle ("free"), by 0 or pi ("binary"), or
   not at all ("fixed"). Member ``k`` turns by ``sigma_k * t`` when the group
   turns by ``t``.
3. Each nonzero block either fixes angles (2x2 SVD, Gram-matrix
   diagonalization, or a sign choice) or links two free groups when it is
   proportional to an orthogonal matrix.
4. Groups that remain free get angle 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from ._consts import EPS_DEG
from .errors import NotPhysical, NotPure, NotStandardForm, SizeMismatch, WrongModeCount
from .gfs_cm import (
    CovarianceMatrix,
    LocalOrthogonalSet,
    apply_local_orthogonal,
    as_cm,
    is_physical,
    is_pure,
)
from .matalg import rotation, rotation_angle, svd2_so

TIE_TOL = 1e-9  # tie threshold for O(1) quantities such as cosines


@dataclass(frozen=True, eq=False)
class StandardFormResult:
    s_gamma: CovarianceMatrix
    ops: LocalOrthogonalSet
    decision_log: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "s_gamma": self.s_gamma.gamma.tolist(),
            "ops": self.ops.to_json(),
            "decision_log": list(self.decision_log),
        }


class _Canonicalizer:
    """Rotation part of the procedure for a fixed choice of flips."""

    def __init__(self, g: np.ndarray, tol: float):
        self.w = g.copy()
        self.n = g.shape[0] // 2
        self.tol = tol
        self.parent = list(range(self.n))
        self.sigma = [1] * self.n
        self.kind = ["free"] * self.n      # meaningful at group roots
        self.angle = np.zeros(self.n)
        self.log: list[dict] = []

    # -- group bookkeeping
    def root(self, k: int) -> int:
        while self.parent[k] != k:
            k = self.parent[k]
        return k

    def members(self, r: int) -> list[int]:
        return [k for k in range(self.n) if self.root(k) == r]

    def merge(self, keep: int, absorb: int, kind: str, orient: int = 1) -> None:
        for k in self.members(absorb):
            self.sigma[k] *= orient
            self.parent[k] = keep
        self.parent[absorb] = keep
        self.kind[keep] = kind

    # -- actions on the working matrix
    def rotate_mode(self, k: int, t: float) -> None:
        r = rotation(t)
        s = slice(2 * k, 2 * k + 2)
        self.w[s, :] = r @ self.w[s, :]
        self.w[:, s] = self.w[:, s] @ r.T
        self.angle[k] += t

    def shift(self, r: int, t: float) -> None:
        """Turn every member of group ``r`` by ``sigma_k * t``."""
        for k in self.members(r):
            self.rotate_mode(k, self.sigma[k] * t)

    def block(self, i: int, j: int) -> np.ndarray:
        return self.w[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    def note(self, i: int, j: int, rule: str) -> None:
        self.log.append({"block": [i + 1, j + 1], "rule": rule})

    # -- helpers for blocks proportional to orthogonal matrices
    @staticmethod
    def _proper_angle(m: np.ndarray) -> float:
        """``phi`` with ``m = r R(phi)``."""
        return float(np.arctan2(m[0, 1] - m[1, 0], m[0, 0] + m[1, 1]))

    @staticmethod
    def _improper_angle(m: np.ndarray) -> float:
        """``psi`` with ``m = r Z R(psi)``."""
        return float(np.arctan2(m[0, 1] + m[1, 0], m[0, 0] - m[1, 1]))

    @staticmethod
    def _sign_rule(o: np.ndarray) -> int:
        """+1 if ``o`` already has ``o_11 > 0`` (or ``o_11 = 0`` and ``o_12 > 0``), else -1."""
        if abs(o[0, 0]) > TIE_TOL:
            return 1 if o[0, 0] > 0 else -1
        return 1 if o[0, 1] > 0 else -1

    # -- the scan
    def run(self) -> None:
        for i, j in combinations(range(self.n), 2):
            m = self.block(i, j)
            if np.linalg.norm(m) <= self.tol:
                continue
            ri, rj = self.root(i), self.root(j)
            svd = svd2_so(m)
            d, dp = svd.singular_values
            degenerate = d - abs(dp) <= self.tol
            det_pos = np.linalg.det(m) > 0
            if ri != rj:
                self._link(i, j, ri, rj, m, svd, degenerate, det_pos)
            else:
                self._within(i, j, ri, m, svd, degenerate, det_pos)
        for r in sorted({self.root(k) for k in range(self.n)}):
            if self.kind[r] == "free":
                self.log.append({"modes": [k + 1 for k in self.members(r)],
                                 "rule": "residual rotation set to identity"})

    def _link(self, i, j, ri, rj, m, svd, degenerate, det_pos):
        ki, kj = self.kind[ri], self.kind[rj]
        if ki == "free" and kj == "free":
            if not degenerate:
                self.shift(ri, self.sigma[i] * rotation_angle(svd.left))
                self.shift(rj, self.sigma[j] * rotation_angle(svd.right))
                self.merge(ri, rj, "binary")
                self.note(i, j, "svd")
            elif det_pos:
                self.shift(rj, self.sigma[j] * self._proper_angle(m))
                self.merge(ri, rj, "free", self.sigma[j] * self.sigma[i])
                self.note(i, j, "rotation-proportional link")
            else:
                self.shift(rj, self.sigma[j] * self._improper_angle(m))
                self.merge(ri, rj, "free", -self.sigma[j] * self.sigma[i])
                self.note(i, j, "reflection-proportional link")
        elif ki == "free" or kj == "free":
            left_free = ki == "free"
            free_root, other = (ri, rj) if left_free else (rj, ri)
            k = i if left_free else j
            if not degenerate:
                if left_free:
                    # R(a) M = D O~ with R(a) = +-left, O~ = +-right.
                    s = self._sign_rule(svd.right)
                    a = rotation_angle(s * svd.left)
                else:
                    # M R(b)^T = O~ D with R(b) = +-right, O~ = +-left^T.
                    s = self._sign_rule(svd.left.T)
                    a = rotation_angle(s * svd.right)
                self.note(i, j, "gram diagonalization")
            else:
                if det_pos:
                    phi = self._proper_angle(m)
                    a = -phi if left_free else phi
                else:
                    a = self._improper_angle(m)
                self.note(i, j, "orthogonal-proportional alignment")
            self.shift(free_root, self.sigma[k] * a)
            self.merge(other, free_root, self.kind[other])
        else:
            kind = "fixed" if "fixed" in (ki, kj) else "binary"
            flippable = rj if kj == "binary" else (ri if ki == "binary" else None)
            if flippable is not None:
                first = next(x for x in m.reshape(-1) if abs(x) > self.tol)
                if first < 0:
                    self.shift(flippable, np.pi)
                self.note(i, j, "sign fix")
            else:
                self.note(i, j, "already fixed")
            self.merge(ri, rj, kind)

    def _within(self, i, j, r, m, svd, degenerate, det_pos):
        if self.kind[r] != "free":
            self.note(i, j, "already fixed")
            return
        si, sj = self.sigma[i], self.sigma[j]
        if not degenerate:
            self.shift(r, si * rotation_angle(svd.left))
            self.kind[r] = "binary"
            self.note(i, j, "gram diagonalization within group")
            return
        if (si == sj) == det_pos:
            self.note(i, j, "invariant under residual rotation")
            return
        if det_pos:     # si == -sj: block turns as R(phi + 2 si t)
            self.shift(r, -si * self._proper_angle(m) / 2)
        else:           # si == sj: block turns as Z R(psi - 2 si t)
            self.shift(r, si * self._improper_angle(m) / 2)
        self.kind[r] = "binary"
        self.note(i, j, "diagonal alignment within group")


def _flip(g: np.ndarray, bits) -> np.ndarray:
    z = np.ones(g.shape[0])
    for k, b in enumerate(bits):
        if b:
            z[2 * k + 1] = -1.0
    return z[:, None] * g * z[None, :]


def _candidate_key(w: np.ndarray, tol: float) -> list[int]:
    """Signs of the off-diagonal block determinants in row-major order."""
    n = w.shape[0] // 2
    out = []
    for i, j in combinations(range(n), 2):
        d = svd2_so(w[2 * i:2 * i + 2, 2 * j:2 * j + 2]).singular_values[1]
        out.append(0 if abs(d) <= tol else (1 if d > 0 else -1))
    return out


def _lex_greater(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    iu = np.triu_indices(a.shape[0], 1)
    for x, y in zip(a[iu], b[iu]):
        if abs(x - y) > tol:
            return x > y
    return False


def standard_form(gamma, allow_z_flips: bool = True, eps: float = EPS_DEG) -> StandardFormResult:
    """Canonical form of a physical CM under per-mode orthogonal maps.

    Parameters
    ----------
    gamma : CovarianceMatrix or array
    allow_z_flips : bool
        When False only rotations are used and every flip bit is 0.
    eps : float
        Relative threshold (times ``||gamma||_F``) below which blocks count
        as zero and singular values as equal.
    """
    cm = as_cm(gamma)
    if not is_physical(cm.gamma):
        raise NotPhysical("CM has singular values above 1")
    g, n = cm.gamma, cm.modes
    tol = eps * max(np.linalg.norm(g), 1.0 if n == 0 else np.finfo(float).tiny)
    lam = np.array([g[2 * k, 2 * k + 1] for k in range(n)])
    log: list[dict] = []
    bits = [0] * n
    free: list[int] = []
    if allow_z_flips:
        for k in range(n):
            if abs(lam[k]) <= tol:
                free.append(k)
            elif lam[k] < 0:
                bits[k] = 1
                log.append({"mode": k + 1, "rule": "flip to make the diagonal block positive"})

    best = None
    for pattern in product((0, 1), repeat=len(free)):
        trial = list(bits)
        for k, b in zip(free, pattern):
            trial[k] = b
        canon = _Canonicalizer(_flip(g, trial), tol)
        canon.run()
        key = _candidate_key(canon.w, tol)
        if best is None or key > best[0] or (key == best[0] and _lex_greater(canon.w, best[1].w, tol)):
            best = (key, canon, trial)
    _, canon, bits = best
    if free:
        log.append({"modes": [k + 1 for k in free],
                    "flips": [bits[k] for k in free],
                    "rule": "flips of modes with vanishing diagonal block chosen by block determinant signs"})
    log.extend(canon.log)

    # R(a) Z^m = Z^m R((-1)^m a)
    angles = tuple(float((-1) ** m * a) for a, m in zip(canon.angle, bits))
    ops = LocalOrthogonalSet(angles, tuple(bits))
    return StandardFormResult(apply_local_orthogonal(cm, ops), ops, log)


def standard_form_distance(g1, g2, allow_z_flips: bool = True) -> float:
    a, b = as_cm(g1), as_cm(g2)
    if a.modes != b.modes:
        raise SizeMismatch(f"{a.modes} vs {b.modes} modes")
    s1 = standard_form(a, allow_z_flips).s_gamma.gamma
    s2 = standard_form(b, allow_z_flips).s_gamma.gamma
    return float(np.linalg.norm(s1 - s2))


def glu_equivalent(g1, g2, tol: float = 1e-7, allow_z_flips: bool = True) -> bool:
    """True iff the two CMs have the same standard form (Frobenius distance < tol)."""
    return standard_form_distance(g1, g2, allow_z_flips) < tol


# ------------------------------------------------------- three-mode checker

@dataclass(frozen=True)
class ThreeModeParameters:
    lambdas: tuple[float, float, float]
    d12: float
    d12p: float
    d13: float
    d13p: float
    l1: float
    l2: float
    m1: float
    m2: float
    m12: float
    m21: float


def three_mode_parameters(s, tol: float = 1e-8) -> ThreeModeParameters | None:
    """Read the template parameters off a 3-mode CM; None if it does not fit the template."""
    g = as_cm(s).gamma
    if g.shape != (6, 6):
        raise WrongModeCount("expected three modes")
    b12, b13, b23 = g[0:2, 2:4], g[0:2, 4:6], g[2:4, 4:6]
    if abs(b12[0, 1]) > tol or abs(b12[1, 0]) > tol:
        return None
    d13 = float(np.hypot(b13[0, 0], b13[1, 0]))
    if d13 <= tol:
        if np.abs(b13).max() > tol:
            return None
        l1 = l2 = d13p = 0.0
        d13 = 0.0
    else:
        l1, l2 = b13[0, 0] / d13, -b13[1, 0] / d13
        d13p = l2 * b13[0, 1] + l1 * b13[1, 1]
        recon = np.array([[l1 * d13, l2 * d13p], [-l2 * d13, l1 * d13p]])
        if np.abs(recon - b13).max() > tol:
            return None
    return ThreeModeParameters(
        (g[0, 1], g[2, 3], g[4, 5]), b12[0, 0], b12[1, 1], d13, d13p, l1, l2,
        b23[0, 0], b23[1, 1], b23[0, 1], b23[1, 0],
    )


def validate_3mode_standard_form(s, tol: float = 1e-8) -> dict:
    """Check a 3-mode CM against the enumerated shapes a standard form can take.

    The enumeration covers states where every diagonal coupling is positive
    and no mode is uncorrelated with the rest. Other inputs return
    ``{"valid": None, "matched_case": "unvalidated"}``.
    """
    g = as_cm(s).gamma
    if g.shape != (6, 6):
        raise WrongModeCount("expected three modes")
    lam = [g[0, 1], g[2, 3], g[4, 5]]
    blocks = {(0, 1): g[0:2, 2:4], (0, 2): g[0:2, 4:6], (1, 2): g[2:4, 4:6]}
    factorizes = any(all(np.abs(b).max() <= tol for key, b in blocks.items() if k in key) for k in range(3))
    if min(lam) <= tol or factorizes:
        return {"valid": None, "matched_case": "unvalidated"}
    p = three_mode_parameters(g, tol)
    if p is None:
        return {"valid": False, "matched_case": "template mismatch"}

    eq = lambda a, b: abs(a - b) <= tol  # noqa: E731
    gt = lambda a, b: a > b + tol  # noqa: E731
    nz = lambda a: abs(a) > tol  # noqa: E731
    b23 = blocks[(1, 2)]
    m1, m2, m12, m21 = p.m1, p.m2, p.m12, p.m21
    zero13 = p.d13 == 0.0
    zero23 = np.abs(b23).max() <= tol
    unit_l = eq(p.l1, 1) and eq(p.l2, 0)
    diag23 = eq(m12, 0) and eq(m21, 0)
    d13_deg = eq(p.d13, abs(p.d13p)) and nz(p.d13)
    d13_gen = gt(p.d13, abs(p.d13p))

    def od_form():
        """``[[l1 d, l2 d'], [-l2 d, l1 d']]`` with the sign rule on (l1, l2)."""
        d = np.hypot(m1, m21)
        if d <= tol:
            return False
        l1, l2 = m1 / d, -m21 / d
        dp = l2 * m12 + l1 * m2
        ok = np.allclose([[l1 * d, l2 * dp], [-l2 * d, l1 * dp]], b23, atol=tol, rtol=0)
        return ok and gt(d, abs(dp)) and (l1 > tol or (abs(l1) <= tol and l2 > tol))

    def do_form(sign_rule: bool):
        """``[[l1 d, l2 d], [-l2 d', l1 d']]``, optionally with the sign rule."""
        d = np.hypot(m1, m12)
        if d <= tol:
            return False
        l1, l2 = m1 / d, m12 / d
        dp = -l2 * m21 + l1 * m2
        ok = np.allclose([[l1 * d, l2 * d], [-l2 * dp, l1 * dp]], b23, atol=tol, rtol=0)
        ok = ok and gt(d, abs(dp))
        if sign_rule:
            ok = ok and (l1 > tol or (abs(l1) <= tol and l2 > tol))
        return ok

    def proportional_orthogonal():
        if zero23:
            return False
        gram = b23.T @ b23
        return np.abs(gram - 0.5 * np.trace(gram) * np.eye(2)).max() <= tol

    cases = []
    if gt(p.d12, abs(p.d12p)):
        cases = [
            ("12 generic, 13 generic", d13_gen and p.l1 ** 2 + p.l2 ** 2 > 1 - tol
             and (p.l1 > tol or (abs(p.l1) <= tol and p.l2 > tol))),
            ("12 generic, 13 orthogonal-proportional", d13_deg and unit_l),
            ("12 generic, 13 zero, 23 generic", zero13 and od_form()),
            ("12 generic, 13 zero, 23 orthogonal-proportional",
             zero13 and eq(m1, abs(m2)) and nz(m1) and diag23),
        ]
    elif eq(p.d12, abs(p.d12p)) and nz(p.d12):
        det23 = np.linalg.det(b23)
        cases = [
            ("12 orthogonal-proportional, 13 generic", d13_gen and unit_l),
            ("12 and 13 orthogonal-proportional, 23 generic", d13_deg and unit_l and do_form(False)),
            ("12 and 13 orthogonal-proportional, 23 orthogonal-proportional with positive sign product",
             d13_deg and unit_l and proportional_orthogonal() and p.d12p * p.d13p * det23 > tol ** 2),
            ("12 and 13 orthogonal-proportional, 23 diagonal with negative sign product",
             d13_deg and unit_l and eq(m1, abs(m2)) and diag23 and p.d12p * p.d13p * m2 < -tol ** 2),
            ("12 orthogonal-proportional, 13 zero, 23 generic diagonal",
             zero13 and diag23 and gt(m1, abs(m2))),
            ("12 orthogonal-proportional, 13 zero, 23 orthogonal-proportional",
             zero13 and diag23 and eq(m1, abs(m2)) and nz(m1)),
            ("12 and 13 orthogonal-proportional, 23 zero", d13_deg and unit_l and zero23),
        ]
    elif eq(p.d12, 0) and eq(p.d12p, 0):
        cases = [
            ("12 zero, 13 generic, 23 generic", d13_gen and unit_l and do_form(True)),
            ("12 zero, 13 generic, 23 orthogonal-proportional",
             d13_gen and unit_l and eq(m1, abs(m2)) and nz(m1) and diag23),
            ("12 zero, 13 orthogonal-proportional, 23 generic diagonal",
             d13_deg and unit_l and diag23 and gt(m1, abs(m2))),
            ("12 zero, 13 and 23 orthogonal-proportional",
             d13_deg and unit_l and eq(m1, abs(m2)) and nz(m1) and diag23),
        ]
    for label, ok in cases:
        if ok:
            return {"valid": True, "matched_case": label}
    return {"valid": False, "matched_case": "no case matched"}


# ------------------------------------------------------------ two-mode pure

def pure_2mode_params(s, tol: float = 1e-9) -> dict:
    """Coordinates of a pure two-mode standard form.

    Returns ``lambda`` (the common diagonal coupling), ``d`` (the upper-left
    entry of the off-diagonal block) and whether the state is maximally
    entangled (``lambda = 0``).
    """
    cm = as_cm(s)
    if cm.modes != 2:
        raise WrongModeCount("expected two modes")
    if not is_pure(cm.gamma):
        raise NotPure("CM is not pure")
    canon = standard_form(cm).s_gamma.gamma
    if np.linalg.norm(canon - cm.gamma) > 1e-7:
        raise NotStandardForm("input differs from its standard form")
    lam, d = float(cm.gamma[0, 1]), float(cm.gamma[0, 2])
    return {"lambda": lam, "d": d, "maximally_entangled": bool(abs(lam) < tol)}
