"""Eigenvalue derivatives of birth-death matrices and the auxiliary sequences
used by the monotonicity criteria.

With ``S(t)`` the symmetrised matrix and ``q`` the eigenvector normalised to
``q[0] = 1``, every form below evaluates ``q^T S' q / q^T q``:

``rawdot``
    ``y^T A' x / y^T x`` with right/left eigenvectors ``x = D^{-1} q`` and
    ``y = D q`` of the unsymmetrised ``A(t)``.
``grouped``
    per-index terms built from ``ell_j`` and ``(sqrt e_j)'``, obtained by
    eliminating ``q[j+1]`` with the recursion.
``newform``
    per-index terms ``(a'_j lam + a_j b'_j - a'_j b_j) q_j^2 / a_j + ...``.
``sumsq``
    diagonal-only terms weighted by ``Pi'_j / Pi_j`` where
    ``Pi_n = 1`` and ``Pi_j Pi_{j+1} = a_j b_{j+1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsl import Dual
from .eigen_tri import eigenvalues_bisect, eigenvector_q
from .errors import FormMismatch
from .model import BirthDeathSpec, CoeffValues, TriSym

__all__ = [
    "FORMS", "DerivativeBreakdown", "BoundSet", "AuxSequences",
    "lambda_prime", "all_lambda_primes", "aux_sequences", "bounds",
    "pi_logderiv_explicit", "chi_closed_form", "chi_recursive", "q_at_zero",
    "Local",
]

FORMS = ("rawdot", "grouped", "newform", "sumsq")
FORM_RTOL = 1e-9
PI_RTOL = 1e-9
CHI_RTOL = 1e-10
EIG_TOL_ULPS = 4.0


@dataclass(frozen=True)
class DerivativeBreakdown:
    total: float
    terms: np.ndarray
    form_used: str
    k: int
    eigenvalue: float
    qnorm2: float


@dataclass(frozen=True)
class BoundSet:
    m1: float
    sigma: float
    rho: float
    m2: float
    mu: float


@dataclass(frozen=True)
class AuxSequences:
    e: np.ndarray             # e_0..e_{n-1}, e_0 = 0
    de: np.ndarray            # e'_j
    ell: np.ndarray           # ell_j = (a_j b_{j+1})' / (2 a_j b_{j+1})
    Pi: np.ndarray            # Pi_0..Pi_n
    Pi_logderiv: np.ndarray   # Pi'_j / Pi_j from the alternating sums
    chi: np.ndarray           # chi_0..chi_n
    q_zero: np.ndarray        # q_j(0; t) from the recursion at x = 0


# --------------------------------------------------------------------------
# per-t quantities
# --------------------------------------------------------------------------

class Local:
    """Coefficient-level quantities of a birth-death spec at one ``t``."""

    def __init__(self, values: CoeffValues):
        self.v = v = values
        self.n = v.n
        self.d = v.a + v.b
        self.dd = v.da + v.db
        self.p = v.a[:-1] * v.b[1:]
        self.dp = v.da[:-1] * v.b[1:] + v.a[:-1] * v.db[1:]
        self.sp = np.sqrt(self.p)
        # logarithmic form avoids differentiating the square root
        self.ell = self.dp / (2.0 * self.p)
        self._spectrum = None

    @classmethod
    def at(cls, spec: BirthDeathSpec, t: float) -> "Local":
        return cls(spec.values(t))

    @property
    def S(self) -> TriSym:
        return TriSym(self.d, self.sp)

    def S_prime(self) -> TriSym:
        return TriSym(self.dd, self.ell * self.sp)

    def dsqrt_e(self) -> np.ndarray:
        """``(sqrt e_j)'`` for ``j = 0..n-1``; zero at ``j = 0``."""
        out = np.zeros(self.n)
        if self.n > 1:
            out[1:] = np.sqrt(self.p[:-1] / self.p[1:]) * (self.ell[:-1] - self.ell[1:])
        return out

    def cross(self) -> np.ndarray:
        """``sqrt(a_j b_{j+1}) (sqrt e_j)'`` for ``j = 0..n-1``."""
        out = np.zeros(self.n)
        if self.n > 1:
            out[1:] = self.sp[:-1] * (self.ell[:-1] - self.ell[1:])
        return out

    def eigenvalues(self) -> np.ndarray:
        # several forms multiply lambda by a'_j / a_j, so bisect to the
        # accuracy of the Sturm count itself rather than the default width
        if self._spectrum is None:
            S = self.S
            self._spectrum = eigenvalues_bisect(S, EIG_TOL_ULPS * np.finfo(float).eps
                                                * max(1.0, S.norm_inf()))
        return self._spectrum

    def qvec(self, k: int) -> np.ndarray:
        return eigenvector_q(self.S, self.eigenvalues()[k])


# --------------------------------------------------------------------------
# derivative forms
# --------------------------------------------------------------------------

def _terms_rawdot(loc: Local, lam, q):
    v = loc.v
    dvec = np.concatenate(([1.0], np.sqrt(np.cumprod(v.a[:-1] / v.b[1:]))))
    x = q / dvec
    y = q * dvec
    ax = loc.dd * x
    if loc.n > 0:
        ax[:-1] += v.da[:-1] * x[1:]
        ax[1:] += v.db[1:] * x[:-1]
    return y * ax


def _terms_grouped(loc: Local, lam, q):
    n = loc.n
    if n == 0:
        return loc.dd.copy()
    terms = np.empty(n + 1)
    cross = loc.cross()
    qprev = np.concatenate(([0.0], q[:-2]))
    terms[:n] = ((loc.dd[:n] + loc.ell * (lam - loc.d[:n])) * q[:n] ** 2
                 + cross * qprev * q[:n])
    terms[n] = (loc.dd[n] + loc.ell[n - 1] * (lam - loc.d[n])) * q[n] ** 2
    return terms


def _terms_newform(loc: Local, lam, q):
    v = loc.v
    w = v.a * v.db - v.da * v.b
    terms = (v.da * lam + w) * q ** 2 / v.a
    if loc.n > 0:
        terms[1:] += np.sqrt(v.a[:-1] / v.b[1:]) * w[1:] * q[:-1] * q[1:] / v.a[1:]
    return terms


def _terms_sumsq(loc: Local, lam, q):
    L = pi_logderiv_explicit(loc)
    return (loc.dd + L * (lam - loc.d)) * q ** 2


_TERMS = {
    "rawdot": _terms_rawdot,
    "grouped": _terms_grouped,
    "newform": _terms_newform,
    "sumsq": _terms_sumsq,
}


def _breakdown(loc: Local, k: int, form: str) -> DerivativeBreakdown:
    lam = float(loc.eigenvalues()[k])
    q = loc.qvec(k)
    terms = _TERMS[form](loc, lam, q)
    qq = float(q @ q)
    return DerivativeBreakdown(float(terms.sum() / qq), terms, form, k, lam, qq)


def _mismatch(x: DerivativeBreakdown, ref: DerivativeBreakdown) -> bool:
    scale = 1.0 + abs(ref.total) + float(np.abs(ref.terms).sum()) / ref.qnorm2
    return abs(x.total - ref.total) > FORM_RTOL * scale


def lambda_prime(spec, t: float, k: int, form: str = "rawdot",
                 check: bool = True) -> DerivativeBreakdown:
    """Derivative of the ``k``-th smallest eigenvalue of ``A(t)``.

    ``spec`` may be a :class:`BirthDeathSpec` or a prebuilt :class:`Local`.
    With ``check`` the result is compared against the ``rawdot`` form and a
    :class:`FormMismatch` is raised on disagreement.
    """
    if form not in _TERMS:
        raise ValueError(f"unknown form {form!r}; expected one of {FORMS}")
    loc = spec if isinstance(spec, Local) else Local.at(spec, t)
    if not 0 <= k <= loc.n:
        raise IndexError(f"eigenvalue index {k} outside 0..{loc.n}")
    out = _breakdown(loc, k, form)
    if check and form != "rawdot":
        ref = _breakdown(loc, k, "rawdot")
        if _mismatch(out, ref):
            raise FormMismatch(f"{form} gives {out.total!r}, rawdot gives {ref.total!r} "
                               f"(k={k}, t={loc.v.t!r})")
    return out


def all_lambda_primes(spec, t: float = None, form: str = "rawdot") -> np.ndarray:
    loc = spec if isinstance(spec, Local) else Local.at(spec, t)
    return np.array([_breakdown(loc, k, form).total for k in range(loc.n + 1)])


# --------------------------------------------------------------------------
# auxiliary sequences
# --------------------------------------------------------------------------

def pi_logderiv_explicit(loc: Local) -> np.ndarray:
    """``Pi'_k / Pi_k`` as alternating sums of ``(a_i b_{i+1})' / (a_i b_{i+1})``.

    For ``n - k`` odd the sum runs over ``P_k - P_{k+1} + ... + P_{n-1}``;
    for ``n - k`` even over ``P_k - P_{k+1} + ... - P_{n-1}``.
    """
    n = loc.n
    P = 2.0 * loc.ell
    L = np.zeros(n + 1)
    for k in range(n):
        m = n - k
        if m % 2:
            L[k] = (sum(P[k + 2 * i] for i in range((m - 1) // 2 + 1))
                    - sum(P[k + 2 * i - 1] for i in range(1, (m - 1) // 2 + 1)))
        else:
            L[k] = (sum(P[k + 2 * i] for i in range((m - 2) // 2 + 1))
                    - sum(P[k + 2 * i + 1] for i in range((m - 2) // 2 + 1)))
    return L


def _pi_dual(loc: Local):
    n = loc.n
    pis = [Dual(1.0, 0.0)] * (n + 1)
    for j in range(n - 1, -1, -1):
        pis[j] = Dual(loc.p[j], loc.dp[j]) / pis[j + 1]
    return pis


def chi_closed_form(v: CoeffValues) -> np.ndarray:
    n = v.n
    chi = np.ones(n + 1)
    for j in range(1, n + 1):
        num = 0.0
        for k in range(j + 1):
            num += np.prod(v.b[:k]) * np.prod(v.a[k:j])
        chi[j] = num / np.sqrt(np.prod(v.a[:j]) * np.prod(v.b[1:j + 1]))
    return chi


def chi_recursive(v: CoeffValues) -> np.ndarray:
    n = v.n
    chi = np.ones(n + 1)
    dvec = np.concatenate(([1.0], np.sqrt(np.cumprod(v.a[:-1] / v.b[1:]))))
    for j in range(1, n + 1):
        chi[j] = np.sqrt(v.a[j - 1] / v.b[j]) * chi[j - 1]
        if not v.b0_zero:
            chi[j] += v.b[0] / (v.b[j] * dvec[j])
    return chi


def q_at_zero(loc: Local) -> np.ndarray:
    """Orthogonal polynomials of ``S(t)`` evaluated at ``x = 0``."""
    n = loc.n
    q = np.zeros(n + 1)
    q[0] = 1.0
    for j in range(n):
        prev = loc.sp[j - 1] * q[j - 1] if j > 0 else 0.0
        q[j + 1] = (-loc.d[j] * q[j] - prev) / loc.sp[j]
    return q


def aux_sequences(spec, t: float = None) -> AuxSequences:
    """``e_j``, ``e'_j``, ``ell_j``, ``Pi_j``, ``Pi'_j/Pi_j``, ``chi_j`` and
    ``q_j(0; t)``.

    Two independent routes are evaluated for ``Pi'_j/Pi_j`` (alternating sums
    versus dual-number differentiation of the downward recursion) and for
    ``chi_j`` (closed sum versus recursion); disagreement raises
    :class:`FormMismatch`.
    """
    loc = spec if isinstance(spec, Local) else Local.at(spec, t)
    n = loc.n
    e = np.zeros(n)
    de = np.zeros(n)
    if n > 1:
        e[1:] = loc.p[:-1] / loc.p[1:]
        de[1:] = e[1:] * 2.0 * (loc.ell[:-1] - loc.ell[1:])

    pis = _pi_dual(loc)
    Pi = np.array([x.value for x in pis])
    L_dual = np.array([x.deriv / x.value for x in pis])
    L = pi_logderiv_explicit(loc)
    scale = 1.0 + np.abs(2.0 * loc.ell).sum()
    if np.any(np.abs(L - L_dual) > PI_RTOL * scale):
        raise FormMismatch(f"Pi'/Pi alternating sums {L} disagree with dual recursion {L_dual}")

    chi = chi_closed_form(loc.v)
    chi_rec = chi_recursive(loc.v)
    if np.any(np.abs(chi - chi_rec) > CHI_RTOL * np.abs(chi)):
        raise FormMismatch(f"chi closed form {chi} disagrees with recursion {chi_rec}")

    return AuxSequences(e, de, loc.ell.copy(), Pi, L, chi, q_at_zero(loc))


# --------------------------------------------------------------------------
# Gershgorin-type bounds
# --------------------------------------------------------------------------

def bounds(spec, t: float = None) -> BoundSet:
    """``m1 < lambda_max <= m2 = min(sigma, rho)`` and ``lambda_min < mu``."""
    loc = spec if isinstance(spec, Local) else Local.at(spec, t)
    v, d, sp, n = loc.v, loc.d, loc.sp, loc.n
    m1 = float(d.max())
    mu = float(d.min())
    if n == 0:
        return BoundSet(m1, m1, m1, m1, mu)
    sigma = max(2 * v.a[0] + v.b[0], v.a[n] + 2 * v.b[n])
    rho = max(d[0] + sp[0], d[n] + sp[n - 1])
    if n > 1:
        sigma = max(sigma, 2 * float(d[1:n].max()))
        rho = max(rho, float((d[1:n] + sp[:-1] + sp[1:]).max()))
    sigma, rho = float(sigma), float(rho)
    return BoundSet(m1, sigma, rho, min(sigma, rho), mu)
