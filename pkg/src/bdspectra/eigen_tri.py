"""Spectra and structured eigenvectors of symmetric tridiagonal Jacobi matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels
from .errors import AllZero, DegenerateOffDiagonal, ResidualTooLarge
from .model import BirthDeathSpec, TriSym, assemble_S

__all__ = [
    "Spectrum", "eigenvalues_bisect", "eigenvector_q", "sign_changes",
    "interlacing_check", "spectrum", "default_tol", "sturm_count",
]

RESIDUAL_TOL = 1e-8
INTERLACE_SLACK = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in increasing order; column ``k`` of ``qvecs`` is the
    eigenvector for ``values[k]`` scaled so that its first entry is 1.

    For a Jacobi matrix column ``k`` has exactly ``n - k`` sign changes: the
    eigenvector of the largest eigenvalue is one-signed and that of the
    smallest alternates.
    """

    values: np.ndarray
    qvecs: np.ndarray


def default_tol(m: TriSym) -> float:
    return 1e-13 * max(1.0, m.norm_inf())


def _check_offdiag(m: TriSym):
    zero = np.flatnonzero(m.off == 0.0)
    if zero.size:
        raise DegenerateOffDiagonal(int(zero[0]))


def sturm_count(m: TriSym, x) -> np.ndarray:
    """Number of eigenvalues of ``m`` strictly below ``x`` (vectorised in ``x``)."""
    return _kernels.sturm_count(m.diag, m.off, x)


def eigenvalues_bisect(m: TriSym, tol: float | None = None) -> np.ndarray:
    """All eigenvalues by Sturm-count bisection from Gershgorin brackets.

    Each eigenvalue is bracketed to width ``<= tol`` (default
    ``1e-13 * max(1, ||m||_inf)``).
    """
    if tol is None:
        tol = default_tol(m)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if m.size == 1:
        return m.diag.astype(float).copy()
    _check_offdiag(m)
    return _kernels.bisect_eigenvalues(m.diag, m.off, tol)


def _residual(m: TriSym, q: np.ndarray, lam: float) -> float:
    r = m.diag * q - lam * q
    if m.size > 1:
        r[:-1] += m.off * q[1:]
        r[1:] += m.off * q[:-1]
    return float(np.max(np.abs(r)) / np.max(np.abs(q)))


def _inverse_iteration(m: TriSym, lam: float, steps: int = 3) -> np.ndarray:
    n = m.size
    shift = lam + 1e-14 * max(1.0, m.norm_inf())
    ab = np.zeros((3, n))
    ab[0, 1:] = m.off
    ab[1] = m.diag - shift
    ab[2, :-1] = m.off
    x = np.ones(n)
    for _ in range(steps):
        x = solve_banded((1, 1), ab, x, check_finite=False)
        x /= np.max(np.abs(x))
    return x / x[0]


def eigenvector_q(m: TriSym, lam: float) -> np.ndarray:
    """Eigenvector for ``lam`` normalised to ``q[0] = 1``.

    Built from the three-term recursion
    ``q[j+1] = ((lam - diag[j]) q[j] - off[j-1] q[j-1]) / off[j]``.
    When the forward recursion is inaccurate (relative residual above 1e-8)
    the vector is recomputed by shifted inverse iteration.
    """
    if m.size == 1:
        return np.ones(1)
    _check_offdiag(m)
    q = _kernels.q_recursion(m.diag, m.off, lam)
    res = _residual(m, q, lam) if np.all(np.isfinite(q)) else np.inf
    if res <= RESIDUAL_TOL:
        return q
    q = _inverse_iteration(m, lam)
    res = _residual(m, q, lam)
    if not res <= RESIDUAL_TOL:
        raise ResidualTooLarge(res)
    return q


def spectrum(m: TriSym, tol: float | None = None) -> Spectrum:
    values = eigenvalues_bisect(m, tol)
    qvecs = np.column_stack([eigenvector_q(m, lam) for lam in values])
    return Spectrum(values, qvecs)


def sign_changes(v) -> int:
    """Sign alternations in ``v`` with exact zeros skipped."""
    v = np.asarray(v, dtype=float)
    nz = v[v != 0.0]
    if nz.size == 0:
        raise AllZero("every entry is zero")
    s = np.signbit(nz)
    return int(np.count_nonzero(s[1:] != s[:-1]))


def interlacing_check(spec: BirthDeathSpec, t: float) -> bool:
    """Strict interlacing between consecutive leading sections of ``A(t)``.

    Leading sections of ``A`` and of its symmetrisation share spectra, so the
    sections of ``S(t)`` are used.  Rounding slack: ``1e-12 * ||S||_inf``.
    """
    s = assemble_S(spec, t)
    slack = INTERLACE_SLACK * max(1.0, s.norm_inf())
    prev = eigenvalues_bisect(s.leading(1))
    for k in range(2, s.size + 1):
        cur = eigenvalues_bisect(s.leading(k))
        if np.any(cur[:-1] >= prev + slack) or np.any(prev >= cur[1:] + slack):
            return False
        prev = cur
    return True
