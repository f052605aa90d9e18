"""Independent reference values.

Nothing here touches the Sturm/recursion path: eigenvalues come from LAPACK
on the dense matrix, derivatives from central differences of those
eigenvalues, and a few closed forms are kept for the worked examples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DomainError
from .model import (
    BirthDeathSpec, RandomWalkSpec, TriSym, assemble_A, assemble_B,
)

__all__ = [
    "OracleReport", "dense_eig", "eigenvalues_at", "fd_lambda_prime", "fd_all", "closed_form",
    "check_closed_form", "ClosedFormCheck", "CLOSED_FORMS", "oracle_report",
]

MAX_DENSE = 64
FD_H = 1e-6
RICHARDSON_RTOL = 1e-4
AGREE_RTOL = 1e-5


@dataclass(frozen=True)
class OracleReport:
    t: float
    k: int
    fd_deriv: float
    form_deriv: float
    closed_form: float | None = None

    @property
    def agree(self) -> bool:
        return abs(self.fd_deriv - self.form_deriv) <= AGREE_RTOL * (1.0 + abs(self.form_deriv))


def dense_eig(m) -> np.ndarray:
    """Eigenvalues of a tridiagonal matrix, ascending, via dense LAPACK.

    Symmetric input goes through ``eigvalsh``; general input through
    ``eigvals`` (Hessenberg QR, LAPACK's own iteration cap), keeping real
    parts.  LAPACK non-convergence surfaces as :class:`ConvergenceFailure`.
    """
    if m.size > MAX_DENSE:
        raise ValueError(f"dense oracle limited to size {MAX_DENSE}, got {m.size}")
    dense = m.to_dense()
    try:
        if isinstance(m, TriSym):
            w = np.linalg.eigvalsh(dense)
        else:
            w = np.linalg.eigvals(dense)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return np.sort(np.real(w))


def eigenvalues_at(spec, t: float) -> np.ndarray:
    """Dense eigenvalues of ``A(t)`` or ``B(t)``."""
    if isinstance(spec, RandomWalkSpec):
        return dense_eig(assemble_B(spec, t))
    return dense_eig(assemble_A(spec, t))


def _central(spec, t, k, h):
    return (eigenvalues_at(spec, t + h)[k] - eigenvalues_at(spec, t - h)[k]) / (2.0 * h)


def fd_lambda_prime(spec, t: float, k: int, h: float = FD_H) -> float:
    """Central difference of the ``k``-th smallest eigenvalue.

    When the estimates at ``h`` and ``h/2`` differ by more than 1e-4
    (relative) the Richardson combination of the two is returned instead.
    """
    lo, hi = spec.domain
    if not (lo < t - h and t + h < hi):
        raise DomainError(f"[t-h, t+h] leaves the domain ({lo}, {hi})", t=t)
    d1 = _central(spec, t, k, h)
    d2 = _central(spec, t, k, h / 2)
    if abs(d1 - d2) > RICHARDSON_RTOL * max(1.0, abs(d2)):
        return (4.0 * d2 - d1) / 3.0
    return d1


def fd_all(spec, t: float, h: float = FD_H) -> np.ndarray:
    """:func:`fd_lambda_prime` for every index at once."""
    lo, hi = spec.domain
    if not (lo < t - h and t + h < hi):
        raise DomainError(f"[t-h, t+h] leaves the domain ({lo}, {hi})", t=t)
    d1 = (eigenvalues_at(spec, t + h) - eigenvalues_at(spec, t - h)) / (2.0 * h)
    d2 = (eigenvalues_at(spec, t + h / 2) - eigenvalues_at(spec, t - h / 2)) / h
    rough = np.abs(d1 - d2) > RICHARDSON_RTOL * np.maximum(1.0, np.abs(d2))
    return np.where(rough, (4.0 * d2 - d1) / 3.0, d1)


# --------------------------------------------------------------------------
# closed forms of the worked examples
# --------------------------------------------------------------------------

def _a1_mid(t):
    return 1.0 / t + 1.0 / (1.0 - t)


def _b1_max_printed(t):
    return math.sqrt(2.0 * t) / ((t + 1.0) * (2.0 * t + 1.0))


def _b1_max_derived(t):
    # 2x2 zero-diagonal: lambda^2 = c_0 (1 - c_1)
    return math.sqrt(2.0 * t / ((1.0 + t) * (1.0 + 2.0 * t)))


A1 = BirthDeathSpec(2, ("1/t", "1-t", "1/t"), ("1/(1-t)", "t", "1/(1-t)"), (0.0, 1.0), "A1")
B1 = RandomWalkSpec(1, ("1/(1+t)", "1/(1+2*t)"), (0.0, 1.0), "B1")

# name -> (problem, sorted eigenvalue index, {variant: function})
CLOSED_FORMS = {
    "A1_mid": (A1, 1, {"printed": _a1_mid}),
    "B1_max": (B1, 1, {"printed": _b1_max_printed, "derived": _b1_max_derived}),
}


@dataclass(frozen=True)
class ClosedFormCheck:
    name: str
    t: float
    dense: float
    variants: dict          # variant -> value
    matches: dict           # variant -> bool

    @property
    def discrepancy(self) -> bool:
        return not all(self.matches.values())


def closed_form(name: str, t: float, variant: str | None = None) -> float:
    """Closed-form eigenvalue of a worked example.

    Without ``variant`` the variant that agrees with :func:`dense_eig` is
    returned (the printed one when several agree).
    """
    _, _, forms = CLOSED_FORMS[name]
    if not 0.0 < t < 1.0:
        raise DomainError("closed forms are defined on (0, 1)", t=t)
    if variant is not None:
        return forms[variant](t)
    check = check_closed_form(name, t)
    for v, ok in check.matches.items():
        if ok:
            return check.variants[v]
    raise ConvergenceFailure(f"no closed form for {name} matches the dense solver at t={t}")


def check_closed_form(name: str, t: float, rtol: float = 1e-10) -> ClosedFormCheck:
    spec, k, forms = CLOSED_FORMS[name]
    dense = float(eigenvalues_at(spec, t)[k])
    values = {v: f(t) for v, f in forms.items()}
    matches = {v: abs(x - dense) <= rtol * max(1.0, abs(dense)) for v, x in values.items()}
    return ClosedFormCheck(name, t, dense, values, matches)


def oracle_report(spec: BirthDeathSpec, t: float, k: int, form_deriv: float,
                  closed: float | None = None) -> OracleReport:
    return OracleReport(t, k, fd_lambda_prime(spec, t, k), form_deriv, closed)
