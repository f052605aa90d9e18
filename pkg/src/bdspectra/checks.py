"""Property suite shared by ``bd-spectra verify`` and the test-suite.

Each property is evaluated over a set of ``t`` values and reports the first
witness of failure, so a red result can be reproduced from its message.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracle
from .eigen_tri import eigenvalues_bisect, interlacing_check, sign_changes, spectrum
from .errors import BdSpectraError
from .model import BirthDeathSpec, RandomWalkSpec, assemble_S, golub_kahan_reduce, rw_to_bd_hat
from .monotonicity import (
    DOWN, UP, applicable_criteria, classify, classify_magagna, parse_criterion,
    target_eigenvalue,
)
from .spectral_calculus import FORMS, Local, all_lambda_primes, bounds


__all__ = [
    "PropertyResult", "run_suite", "soundness_failures", "SOUNDNESS_RTOL",
    "FORM_RTOL", "FD_RTOL",
]

FORM_RTOL = 1e-9
FD_RTOL = 1e-5
SOUNDNESS_RTOL = 1e-12
SANDWICH_SLACK = 1e-12
SYMMETRY_RTOL = 1e-10
GK_RTOL = 1e-10


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    failure: str | None = None

    @property
    def passed(self) -> bool:
        return self.failure is None

    def fail(self, message: str):
        if self.failure is None:
            self.failure = message

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tail = f" ({self.checked} checks)" if self.passed else f": {self.failure}"
        return f"{status} {self.name}{tail}"


def _bd_view(spec):
    """Birth-death spec carrying the eigenvalue derivatives of ``spec``."""
    return rw_to_bd_hat(spec) if isinstance(spec, RandomWalkSpec) else spec


# --------------------------------------------------------------------------
# soundness
# --------------------------------------------------------------------------

def _derivatives_for(spec, criterion, loc: Local, fd: np.ndarray):
    """``(indices, form_derivs, fd_derivs, scale)`` the criterion speaks about."""
    target = target_eigenvalue(criterion)
    n = loc.n
    ks = {"max": [n], "min": [0], "all": list(range(n + 1))}[target]
    form = all_lambda_primes(loc)
    scale = max(1.0, loc.S_prime().norm_inf())
    return ks, form[ks], fd[ks], scale


def soundness_failures(spec, t: float, criteria=None, loc: Local | None = None,
                       fd: np.ndarray | None = None) -> list:
    """Criteria whose membership at ``t`` is contradicted by the derivatives.

    The eigenvalue derivative from the quadratic form must have the claimed
    sign beyond ``1e-12 * ||S'||_inf``, and the finite-difference oracle must
    agree with it to ``1e-5 (1 + |lambda'|)``.
    """
    criteria = criteria or applicable_criteria(spec)
    loc = loc or Local.at(_bd_view(spec), t)
    fd = oracle.fd_all(spec, t) if fd is None else fd
    out = []
    for c in criteria:
        verdict = classify(spec, c, t)
        if not verdict.member:
            continue
        s = 1.0 if parse_criterion(c)[1] == UP else -1.0
        ks, form, fdk, scale = _derivatives_for(spec, c, loc, fd)
        for k, f, g in zip(ks, form, fdk):
            if not s * f > SOUNDNESS_RTOL * scale:
                out.append(f"{c} at t={t!r}: lambda'_{k} = {f!r} (trace {verdict.trace()})")
            elif abs(g - f) > FD_RTOL * (1.0 + abs(f)):
                out.append(f"{c} at t={t!r}: finite difference {g!r} vs {f!r} for k={k}")
    return out


# --------------------------------------------------------------------------
# suite
# --------------------------------------------------------------------------

def _point(spec, t, res):
    rw = isinstance(spec, RandomWalkSpec)
    bd = _bd_view(spec)
    if rw:
        spec.values(t)          # range violations surface as such
    loc = Local.at(bd, t)
    n = loc.n
    S = loc.S
    lam = eigenvalues_bisect(S)
    scale = max(1.0, S.norm_inf())

    # derivative forms
    r = res["form_agreement"]
    ref = all_lambda_primes(loc, form="rawdot")
    for form in FORMS[1:]:
        other = all_lambda_primes(loc, form=form)
        bad = np.abs(other - ref) > FORM_RTOL * (1.0 + np.abs(ref))
        r.checked += n + 1
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            r.fail(f"t={t!r} k={k}: {form} {other[k]!r} vs rawdot {ref[k]!r}")

    # finite differences
    r = res["fd_agreement"]
    fd = None
    try:
        fd = oracle.fd_all(spec, t)
    except BdSpectraError:
        pass
    if fd is not None:
        bad = np.abs(fd - ref) > FD_RTOL * (1.0 + np.abs(ref))
        r.checked += n + 1
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            r.fail(f"t={t!r} k={k}: finite difference {fd[k]!r} vs {ref[k]!r}")

    # bounds and positivity
    b = bounds(loc)
    r = res["bound_sandwich"]
    r.checked += 1
    slack = SANDWICH_SLACK * scale
    if not (b.m1 - slack < lam[-1] <= b.m2 + slack and lam[0] < b.mu + slack):
        r.fail(f"t={t!r}: m1={b.m1!r} lambda_max={lam[-1]!r} m2={b.m2!r} "
               f"lambda_min={lam[0]!r} mu={b.mu!r}")
    r = res["positivity"]
    r.checked += 1
    if not lam[0] > 0.0:
        r.fail(f"t={t!r}: lambda_min={lam[0]!r}")

    # eigenvector structure
    r = res["interlacing"]
    r.checked += 1
    if not interlacing_check(bd, t):
        r.fail(f"t={t!r}")
    r = res["sign_changes"]
    sp = spectrum(assemble_S(bd, t))
    for k in range(n + 1):
        # counted from the top: lambda_max has a one-signed eigenvector
        r.checked += 1
        got = sign_changes(sp.qvecs[:, k])
        if got != n - k:
            r.fail(f"t={t!r} k={k}: {got} sign changes, expected {n - k}")

    # containments
    r = res["containment"]
    pairs = ((("ISMAIL_C_MAX", "D_MAX"),) if rw else (("ISMAIL_MAX", "B_MAX"),))
    for small, big in pairs:
        for arrow in (UP, DOWN):
            r.checked += 1
            if classify(spec, small + arrow, t).member and not classify(spec, big + arrow, t).member:
                r.fail(f"t={t!r}: member of {small + arrow} but not of {big + arrow}")

    # soundness of every criterion
    r = res["soundness"]
    if fd is not None:
        r.checked += 1
        for msg in soundness_failures(spec, t, loc=loc, fd=fd):
            r.fail(msg)

    if rw:
        eB = oracle.eigenvalues_at(spec, t)
        r = res["spectrum_symmetry"]
        r.checked += 1
        if np.max(np.abs(eB + eB[::-1])) > SYMMETRY_RTOL * max(1.0, np.max(np.abs(eB))):
            r.fail(f"t={t!r}: {eB}")
        if spec.size % 2 == 0:
            r = res["golub_kahan"]
            r.checked += 1
            w = eigenvalues_bisect(assemble_S(golub_kahan_reduce(spec), t))
            gk = np.sort(np.concatenate((-np.sqrt(w), np.sqrt(w))))
            if np.max(np.abs(gk - eB)) > GK_RTOL * max(1.0, np.max(np.abs(eB))):
                r.fail(f"t={t!r}: {gk} vs {eB}")
    else:
        verdicts, report = classify_magagna(loc, t)
        if report is not None:
            r = res["magagna_commutation"]
            r.checked += 1
            if not (report.commutes and report.spectra_match):
                r.fail(f"t={t!r}: commutator {report.commutator!r}, eig(A')="
                       f"{report.eig_A_prime} vs {report.lambda_primes}")


def property_names(spec) -> tuple:
    names = ["form_agreement", "fd_agreement", "bound_sandwich", "positivity",
             "interlacing", "sign_changes", "containment", "soundness"]
    if isinstance(spec, RandomWalkSpec):
        names.append("spectrum_symmetry")
        if spec.size % 2 == 0:
            names.append("golub_kahan")
    else:
        names.append("magagna_commutation")
    return tuple(names)


def run_suite(spec: BirthDeathSpec | RandomWalkSpec, ts) -> list:
    """Evaluate every applicable property at each ``t``.

    Validity errors (positivity, range) and evaluation errors propagate.
    """
    res = {name: PropertyResult(name) for name in property_names(spec)}
    for t in ts:
        _point(spec, float(t), res)
    return list(res.values())
