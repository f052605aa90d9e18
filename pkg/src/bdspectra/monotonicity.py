"""Pointwise membership in the monotonicity criterion sets and interval scans.

Every criterion is a conjunction over indices ``j`` of (usually) a few
disjuncts, each a sign pattern of derivative quantities.  The decreasing
(``↓``) variant of a set is obtained by flipping every inequality, which is
the same as flipping the sign of every derivative quantity; that is how the
mirrors are evaluated here.

Signs are rounding-aware: a quantity computed as a sum of terms whose
absolute values add up to ``mag`` is treated as exactly zero when
``|value| <= 1e-12 * mag``.  Without this, a product such as
``a_j b_{j+1}`` that is identically constant has a derivative made of
rounding noise, and the noise would decide the verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .eigen_tri import eigenvalues_bisect
from .errors import BdSpectraError
from .model import RandomWalkSpec, TriSym
from .spectral_calculus import Local, all_lambda_primes, bounds, chi_recursive

__all__ = [
    "UP", "DOWN", "BASES", "ALL_CRITERIA", "BD_BASES", "RW_BASES",
    "CriterionVerdict", "MonotoneInterval", "CommutationReport",
    "parse_criterion", "applicable_criteria", "target_eigenvalue",
    "classify", "classify_ismail", "classify_B_max", "classify_Btilde_max",
    "classify_B_min", "classify_E_min", "classify_magagna", "classify_D_max",
    "is_member", "scan", "grid_points",
]

UP = "↑"
DOWN = "↓"
_ASCII = {"_UP": UP, "_DOWN": DOWN}

BD_BASES = ("ISMAIL_MIN", "ISMAIL_MAX", "B_MAX", "BTILDE_MAX", "B_MIN", "E_MIN",
            "MAGAGNA_A0", "MAGAGNA_A1")
RW_BASES = ("ISMAIL_C_MAX", "D_MAX")
BASES = BD_BASES[:2] + ("ISMAIL_C_MAX",) + BD_BASES[2:] + ("D_MAX",)
ALL_CRITERIA = tuple(b + arrow for b in BASES for arrow in (UP, DOWN))

SIGN_RTOL = 1e-12
EQUALITY_RTOL = 1e-10
COMMUTE_RTOL = 1e-9
EIG_PRIME_ATOL = 1e-7
REFINE_TOL = 1e-6


def parse_criterion(tag: str):
    """``"B_MAX↑"`` or ``"B_MAX_UP"`` -> ``("B_MAX", "↑")``."""
    tag = tag.strip()
    for suffix, arrow in _ASCII.items():
        if tag.upper().endswith(suffix):
            tag = tag[: -len(suffix)] + arrow
            break
    base, arrow = tag[:-1].upper(), tag[-1:]
    if arrow not in (UP, DOWN) or base not in BASES:
        raise ValueError(f"unknown criterion {tag!r}")
    return base, arrow


def applicable_criteria(spec) -> tuple:
    bases = RW_BASES if isinstance(spec, RandomWalkSpec) else BD_BASES
    return tuple(b + a for b in bases for a in (UP, DOWN))


def target_eigenvalue(criterion: str) -> str:
    """Which eigenvalue a criterion speaks about: ``max``, ``min`` or ``all``.

    For random-walk criteria ``max`` refers to ``lambda_max(B)``.
    """
    base, _ = parse_criterion(criterion)
    if base in ("ISMAIL_MIN", "B_MIN", "E_MIN"):
        return "min"
    if base.startswith("MAGAGNA"):
        return "all"
    return "max"


@dataclass(frozen=True)
class CriterionVerdict:
    criterion: str
    t: float
    member: bool
    witness: tuple          # per index j: satisfied disjunct ("D1", "C", ...) or "-"
    nondegenerate: bool = True

    def trace(self) -> str:
        return ";".join(f"j{j}:{w}" for j, w in enumerate(self.witness))


@dataclass(frozen=True)
class MonotoneInterval:
    lo: float
    hi: float
    criterion: str
    direction: str          # "increasing" | "decreasing"


@dataclass(frozen=True)
class CommutationReport:
    t: float
    commutator: float       # max |A'A - AA'|
    scale: float
    eig_A_prime: np.ndarray
    lambda_primes: np.ndarray
    commutes: bool = field(init=False)
    spectra_match: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "commutes", self.commutator <= COMMUTE_RTOL * self.scale)
        diff = np.max(np.abs(self.eig_A_prime - self.lambda_primes), initial=0.0)
        object.__setattr__(self, "spectra_match", bool(diff <= EIG_PRIME_ATOL))


# --------------------------------------------------------------------------
# rounding-aware signs
# --------------------------------------------------------------------------

def _sgn(value, mag) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    mag = np.asarray(mag, dtype=float)
    return np.where(np.abs(value) <= SIGN_RTOL * mag, 0, np.sign(value)).astype(int)


class _Quantities:
    """Signed derivative quantities of a birth-death spec at one ``t``."""

    def __init__(self, loc: Local):
        self.loc = loc
        v, n = loc.v, loc.n
        self.n = n
        d = loc.d
        self.dd = loc.dd
        self.dd_mag = np.abs(v.da) + np.abs(v.db)
        self.dp_mag = np.abs(v.da[:-1] * v.b[1:]) + np.abs(v.a[:-1] * v.db[1:])
        # (a_{j-1} b_j)' for j = 0..n, with a_{-1} = 0
        self.dpm1 = np.concatenate(([0.0], loc.dp))
        self.dpm1_mag = np.concatenate(([0.0], self.dp_mag))
        # ell_j for j < n and ell_{n-1} at j = n
        if n > 0:
            ell = np.concatenate((loc.ell, loc.ell[-1:]))
            ell_mag = self.dp_mag / (2.0 * loc.p)
            ell_mag = np.concatenate((ell_mag, ell_mag[-1:]))
        else:
            ell = ell_mag = np.zeros(1)
        self.ell, self.ell_mag = ell, ell_mag
        # (sqrt e_j)' for j = 0..n-1 (zero at j = 0)
        self.dse = loc.dsqrt_e()
        self.dse_mag = np.zeros(n)
        if n > 1:
            self.dse_mag[1:] = np.sqrt(loc.p[:-1] / loc.p[1:]) * (ell_mag[:n - 1] + ell_mag[1:n])
        self.bounds = b = bounds(loc)

        def shifted(c):
            return self.dd + ell * (c - d), self.dd_mag + ell_mag * (abs(c) + d)

        self.f, self.f_mag = shifted(b.m1)
        self.g, self.g_mag = shifted(b.m2)
        self.l, self.l_mag = shifted(b.mu)
        self.h = self.dd - ell * d
        self.h_mag = self.dd_mag + ell_mag * d

    def nondegenerate(self) -> bool:
        return bool(np.any(_sgn(self.loc.dp, self.dp_mag) != 0)
                    or np.any(_sgn(self.dd, self.dd_mag) != 0))


def _first(disjuncts) -> str:
    for name, ok in disjuncts:
        if ok:
            return name
    return "-"


def _verdict(criterion, t, witness, nondegenerate=True):
    witness = tuple(witness)
    member = nondegenerate and all(w != "-" for w in witness)
    return CriterionVerdict(criterion, float(t), bool(member), witness, bool(nondegenerate))


def _local(spec, t) -> Local:
    return spec if isinstance(spec, Local) else Local.at(spec, t)


def _both(fn, base, spec, t):
    return {base + UP: fn(spec, t, +1, base + UP), base + DOWN: fn(spec, t, -1, base + DOWN)}


# --------------------------------------------------------------------------
# classical sets
# --------------------------------------------------------------------------

def _ismail_min(spec, t, s, tag):
    loc = _local(spec, t)
    v = loc.v
    sa = s * _sgn(v.da, np.abs(v.da))
    cross = v.da * v.b - v.a * v.db
    sc = s * _sgn(cross, np.abs(v.da * v.b) + np.abs(v.a * v.db))
    wit = ["C" if (v.b0_zero and sa[0] > 0) else "-"]
    wit += ["C" if (sa[j] > 0 and sc[j] > 0) else "-" for j in range(1, loc.n + 1)]
    return _verdict(tag, v.t, wit)


def _ismail_max(spec, t, s, tag):
    loc = _local(spec, t)
    v = loc.v
    sa = s * _sgn(v.da, np.abs(v.da))
    sb = s * _sgn(v.db, np.abs(v.db))
    return _verdict(tag, v.t, ["C" if (sa[j] > 0 and sb[j] > 0) else "-"
                               for j in range(loc.n + 1)])


def _ismail_c_max(rw: RandomWalkSpec, t, s, tag):
    c, dc = rw.values(t)
    sc = s * _sgn(dc, np.abs(dc))
    wit = ["C" if rw.c0_identically_one else "-"]
    wit += ["C" if sc[j] < 0 else "-" for j in range(1, rw.n + 1)]
    # for n = 0 the conditions are vacuous and B = [0] is constant
    return _verdict(tag, t, wit, nondegenerate=rw.n >= 1)


def classify_ismail(spec, t: float) -> dict:
    """Verdicts for the three classical sets and their mirrors that apply to
    ``spec`` (birth-death: ISMAIL_MIN, ISMAIL_MAX; random walk: ISMAIL_C_MAX)."""
    if isinstance(spec, RandomWalkSpec):
        return _both(_ismail_c_max, "ISMAIL_C_MAX", spec, t)
    loc = _local(spec, t)
    out = _both(_ismail_min, "ISMAIL_MIN", loc, t)
    out.update(_both(_ismail_max, "ISMAIL_MAX", loc, t))
    return out


# --------------------------------------------------------------------------
# largest eigenvalue
# --------------------------------------------------------------------------

def _b_max(spec, t, s, tag, q: _Quantities = None):
    q = q or _Quantities(_local(spec, t))
    n = q.n
    pm1 = s * _sgn(q.dpm1, q.dpm1_mag)
    pj = s * _sgn(q.loc.dp, q.dp_mag)
    dd = s * _sgn(q.dd, q.dd_mag)
    f = s * _sgn(q.f, q.f_mag)
    g = s * _sgn(q.g, q.g_mag)
    es = s * _sgn(q.dse, q.dse_mag)
    wit = []
    for j in range(n):
        wit.append(_first([
            ("D1", pm1[j] >= 0 and pj[j] >= 0 and dd[j] >= 0),
            ("D2", pj[j] <= 0 and g[j] > 0 and es[j] >= 0),
            ("D3", dd[j] <= 0 and f[j] >= 0 and es[j] >= 0),
        ]))
    wit.append(_first([
        ("D1", pm1[n] >= 0 and dd[n] >= 0),
        ("D2", pm1[n] <= 0 and g[n] > 0),
        ("D3", dd[n] <= 0 and f[n] >= 0),
    ]))
    return _verdict(tag, q.loc.v.t, wit, q.nondegenerate())


def classify_B_max(spec, t: float) -> dict:
    q = _Quantities(_local(spec, t))
    return {"B_MAX" + a: _b_max(None, t, s, "B_MAX" + a, q) for a, s in ((UP, 1), (DOWN, -1))}


def _btilde_max(spec, t, s, tag, q: _Quantities = None):
    q = q or _Quantities(_local(spec, t))
    v, m2 = q.loc.v, q.bounds.m2
    w = v.a * v.db - v.da * v.b
    w_mag = np.abs(v.a * v.db) + np.abs(v.da * v.b)
    u = v.da * m2 + w
    u_mag = np.abs(v.da * m2) + w_mag
    sw = s * _sgn(w, w_mag)
    su = s * _sgn(u, u_mag)
    wit = ["C" if su[0] >= 0 else "-"]
    wit += ["C" if (sw[j] >= 0 and su[j] >= 0) else "-" for j in range(1, q.n + 1)]
    nondeg = bool(su[0] != 0 or np.any(sw[1:] != 0) or np.any(su[1:] != 0))
    return _verdict(tag, v.t, wit, nondeg)


def classify_Btilde_max(spec, t: float) -> dict:
    q = _Quantities(_local(spec, t))
    return {"BTILDE_MAX" + a: _btilde_max(None, t, s, "BTILDE_MAX" + a, q)
            for a, s in ((UP, 1), (DOWN, -1))}


# --------------------------------------------------------------------------
# smallest eigenvalue
# --------------------------------------------------------------------------

def _b_min_disjuncts(q: _Quantities, s: int, j: int) -> str:
    n = q.n
    pm1 = s * _sgn(q.dpm1[j], q.dpm1_mag[j])
    dd = s * _sgn(q.dd[j], q.dd_mag[j])
    h = s * _sgn(q.h[j], q.h_mag[j])
    l = s * _sgn(q.l[j], q.l_mag[j])
    if j == n:
        return _first([
            ("D1", pm1 <= 0 and dd >= 0),
            ("D2", pm1 >= 0 and h >= 0),
            ("D3", dd <= 0 and l >= 0),
        ])
    pj = s * _sgn(q.loc.dp[j], q.dp_mag[j])
    es = s * _sgn(q.dse[j], q.dse_mag[j])
    return _first([
        ("D1", pm1 <= 0 and pj <= 0 and dd >= 0),
        ("D2", pj >= 0 and h >= 0 and es <= 0),
        ("D3", dd <= 0 and l >= 0 and es <= 0),
    ])


def _b_min(spec, t, s, tag, q: _Quantities = None):
    q = q or _Quantities(_local(spec, t))
    wit = [_b_min_disjuncts(q, s, j) for j in range(q.n + 1)]
    return _verdict(tag, q.loc.v.t, wit, q.nondegenerate())


def classify_B_min(spec, t: float) -> dict:
    q = _Quantities(_local(spec, t))
    return {"B_MIN" + a: _b_min(None, t, s, "B_MIN" + a, q) for a, s in ((UP, 1), (DOWN, -1))}


def _chi_ratio(q: _Quantities) -> np.ndarray:
    """``chi_j / chi_{j-1}`` for ``j = 1..n`` (index 0 unused)."""
    v = q.loc.v
    ratio = np.zeros(q.n + 1)
    if v.b0_zero:
        ratio[1:] = np.sqrt(v.a[:-1] / v.b[1:])
        return ratio
    chi = chi_recursive(v)
    if not np.all(chi > 0):
        raise BdSpectraError(f"chi sequence not positive at t={v.t!r}: {chi}")
    ratio[1:] = chi[1:] / chi[:-1]
    return ratio


def _e_min(spec, t, s, tag, q: _Quantities = None):
    q = q or _Quantities(_local(spec, t))
    n = q.n
    wit = [_b_min_disjuncts(q, s, 0)]
    if n >= 2:
        ratio = _chi_ratio(q)
        sp = q.loc.sp
        for j in range(1, n):
            thr = ratio[j] / sp[j]
            pm1 = s * _sgn(q.dpm1[j], q.dpm1_mag[j])
            h = s * _sgn(q.h[j], q.h_mag[j])
            l = s * _sgn(q.l[j], q.l_mag[j])
            xh = s * _sgn(q.dse[j] - thr * q.h[j], q.dse_mag[j] + thr * q.h_mag[j])
            xl = s * _sgn(q.dse[j] - thr * q.l[j], q.dse_mag[j] + thr * q.l_mag[j])
            wit.append(_first([
                ("D1", pm1 > 0 and h < 0 and xh < 0),
                ("D2", pm1 < 0 and l < 0 and xl < 0),
            ]))
    if n >= 1:
        wit.append(_b_min_disjuncts(q, s, n))
    # intersected with the nondegeneracy set: for n <= 1 a constant spec
    # would otherwise satisfy the (non-strict) end conditions
    return _verdict(tag, q.loc.v.t, wit, q.nondegenerate())


def classify_E_min(spec, t: float) -> dict:
    q = _Quantities(_local(spec, t))
    return {"E_MIN" + a: _e_min(None, t, s, "E_MIN" + a, q) for a, s in ((UP, 1), (DOWN, -1))}


# --------------------------------------------------------------------------
# all eigenvalues
# --------------------------------------------------------------------------

def _equal(x, y):
    return np.abs(x - y) <= EQUALITY_RTOL * (np.abs(x) + np.abs(y))


def _magagna_a0(spec, t, s, tag):
    v = _local(spec, t).v
    sa = s * _sgn(v.da, np.abs(v.da))
    eq = _equal(v.da * v.b, v.a * v.db)
    return _verdict(tag, v.t, ["C" if (sa[j] > 0 and eq[j]) else "-" for j in range(v.n + 1)])


def _magagna_a1(spec, t, s, tag):
    v = _local(spec, t).v
    sa = s * _sgn(v.da, np.abs(v.da))
    sb0 = s * np.sign(v.db[0])
    # b'_0 must share the sign of the a'_j so that A'(t) is itself a
    # birth-death matrix; without it the set is not sufficient
    wit = ["C" if (sa[0] > 0 and sb0 >= 0) else "-"]
    eq = _equal(v.da[:-1] * v.b[1:], v.a[:-1] * v.db[1:])
    wit += ["C" if (sa[j] > 0 and eq[j - 1]) else "-" for j in range(1, v.n + 1)]
    return _verdict(tag, v.t, wit)


def _commutation(loc: Local) -> CommutationReport:
    v = loc.v
    A = np.diag(loc.d) + np.diag(v.a[:-1], 1) + np.diag(v.b[1:], -1)
    Ap = np.diag(loc.dd) + np.diag(v.da[:-1], 1) + np.diag(v.db[1:], -1)
    comm = float(np.max(np.abs(Ap @ A - A @ Ap)))
    scale = max(1.0, float(np.max(np.abs(Ap)) * np.max(np.abs(A))))
    prod = v.da[:-1] * v.db[1:]
    off = np.sign(v.da[:-1]) * np.sqrt(np.abs(prod))
    eig = eigenvalues_bisect(TriSym(loc.dd, off)) if np.all(prod > 0) else \
        np.sort(np.linalg.eigvals(Ap).real)
    return CommutationReport(v.t, comm, scale, eig, np.sort(all_lambda_primes(loc)))


def classify_magagna(spec, t: float):
    """Verdicts for the two proportional-rate sets and their mirrors.

    Returns ``(verdicts, report)``; ``report`` is a :class:`CommutationReport`
    when ``t`` lies in both increasing (or both decreasing) sets, else None.
    """
    loc = _local(spec, t)
    out = _both(_magagna_a0, "MAGAGNA_A0", loc, t)
    out.update(_both(_magagna_a1, "MAGAGNA_A1", loc, t))
    report = None
    for a in (UP, DOWN):
        if out["MAGAGNA_A0" + a].member and out["MAGAGNA_A1" + a].member:
            report = _commutation(loc)
    return out, report


# --------------------------------------------------------------------------
# random walks
# --------------------------------------------------------------------------

def _d_max(rw: RandomWalkSpec, t, s, tag):
    c, dc = rw.values(t)
    terms = (-dc[1:] * c[:-1], (1.0 - c[1:]) * dc[:-1])
    ddelta = terms[0] + terms[1]
    sd = s * _sgn(ddelta, np.abs(terms[0]) + np.abs(terms[1]))
    return _verdict(tag, t, ["C" if x > 0 else "-" for x in sd], nondegenerate=rw.n >= 1)


def classify_D_max(rw: RandomWalkSpec, t: float) -> dict:
    """``(c_j (1 - c_{j+1}))' > 0`` for every ``j`` (``< 0`` for the mirror)."""
    return _both(_d_max, "D_MAX", rw, t)


# --------------------------------------------------------------------------
# dispatch and scanning
# --------------------------------------------------------------------------

_SINGLE = {
    "ISMAIL_MIN": _ismail_min,
    "ISMAIL_MAX": _ismail_max,
    "ISMAIL_C_MAX": _ismail_c_max,
    "B_MAX": _b_max,
    "BTILDE_MAX": _btilde_max,
    "B_MIN": _b_min,
    "E_MIN": _e_min,
    "MAGAGNA_A0": _magagna_a0,
    "MAGAGNA_A1": _magagna_a1,
    "D_MAX": _d_max,
}


def _check_kind(spec, base):
    rw = isinstance(spec, RandomWalkSpec)
    if rw != (base in RW_BASES):
        kind = "random-walk" if rw else "birth-death"
        raise ValueError(f"criterion {base} does not apply to a {kind} problem")


def classify(spec, criterion: str, t: float) -> CriterionVerdict:
    base, arrow = parse_criterion(criterion)
    _check_kind(spec, base)
    return _SINGLE[base](spec, float(t), 1 if arrow == UP else -1, base + arrow)


def is_member(spec, criterion: str, t: float, component: int | None = None) -> bool:
    """Membership with evaluation failures counted as non-membership.

    With ``component = j`` only the index-``j`` set of the criterion is
    tested (no intersection over indices, no nondegeneracy condition).
    """
    try:
        verdict = classify(spec, criterion, t)
    except (BdSpectraError, ArithmeticError):
        return False
    if component is None:
        return verdict.member
    return verdict.witness[component] != "-"


def grid_points(domain, grid_size: int) -> np.ndarray:
    lo, hi = domain
    return lo + (np.arange(grid_size) + 0.5) * (hi - lo) / grid_size


def _refine(member: Callable[[float], bool], inside: float, outside: float, tol: float):
    while abs(inside - outside) > tol:
        mid = 0.5 * (inside + outside)
        if member(mid):
            inside = mid
        else:
            outside = mid
    return inside, outside


def scan(spec, criterion: str, grid_size: int = 1000, tol: float = REFINE_TOL,
         mapper: Callable[[Callable, Iterable], Iterable] = map,
         component: int | None = None) -> list:
    """Maximal subintervals of the domain on which ``criterion`` holds.

    Membership is sampled on the interior grid
    ``t_i = lo + (i + 1/2)(hi - lo)/grid_size``, consecutive members are
    merged, and each end is refined by bisection on the membership indicator
    to width ``tol``.  A domain end acts as a non-member sentinel; an end
    that refines onto it is snapped to it.  Runs whose refined width does not
    exceed ``tol`` are discarded.

    ``mapper`` evaluates the grid (e.g. ``executor.map``); refinement is
    sequential, so the result does not depend on it.  ``component`` scans a
    single index set instead of the full criterion (see :func:`is_member`).
    """
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    base, arrow = parse_criterion(criterion)
    _check_kind(spec, base)
    tag = base + arrow
    lo, hi = spec.domain
    ts = grid_points(spec.domain, grid_size)
    member = _MemberAt(spec, tag, component)
    flags = list(mapper(member, ts))

    out = []
    i = 0
    while i < grid_size:
        if not flags[i]:
            i += 1
            continue
        k = i
        while k + 1 < grid_size and flags[k + 1]:
            k += 1
        left_out = ts[i - 1] if i > 0 else lo
        right_out = ts[k + 1] if k + 1 < grid_size else hi
        a_in, a_out = _refine(member, ts[i], left_out, tol)
        b_in, b_out = _refine(member, ts[k], right_out, tol)
        a = lo if (i == 0 and a_out == lo) else 0.5 * (a_in + a_out)
        b = hi if (k + 1 == grid_size and b_out == hi) else 0.5 * (b_in + b_out)
        if b - a > tol:
            out.append(MonotoneInterval(float(a), float(b), tag,
                                        "increasing" if arrow == UP else "decreasing"))
        i = k + 1
    return out


class _MemberAt:
    """Picklable membership predicate for process-pool mappers."""

    def __init__(self, spec, tag, component=None):
        self.spec = spec
        self.tag = tag
        self.component = component

    def __call__(self, t):
        return is_member(self.spec, self.tag, t, self.component)
