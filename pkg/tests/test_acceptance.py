"""Acceptance suite: one test per criterion, tolerances pinned below."""

import functools
import math
import time

import numpy as np

from bdspectra import oracle
from bdspectra.checks import run_suite, soundness_failures
from bdspectra.eigen_tri import eigenvalues_bisect
from bdspectra.model import RandomWalkSpec, assemble_S, golub_kahan_reduce, rw_to_bd_hat
from bdspectra.monotonicity import applicable_criteria, classify, classify_magagna, scan
from bdspectra.spectral_calculus import FORMS, Local, all_lambda_primes

import corpus
from corpus import A1, A2, B1

GRID = 20
ENDPOINT_TOL = 1e-3
A1_CLOSED_FORM_TOL = 1e-9
A1_RUNTIME_S = 5.0
BTILDE_LEFT_END = 0.554958
BTILDE_TOL = 1e-4
B1_CLOSED_FORM_TOL = 1e-10
FORM_RTOL = 1e-9
FD_RTOL = 1e-5
DERIVATIVE_RUNTIME_S = 60.0
COMMUTE_RTOL = 1e-9
EIG_PRIME_TOL = 1e-7
GOLUB_KAHAN_TOL = 1e-10


def single(intervals):
    assert len(intervals) == 1, f"expected one interval, got {intervals}"
    return intervals[0].lo, intervals[0].hi


def near(got, want, tol=ENDPOINT_TOL):
    return all(abs(g - w) <= tol for g, w in zip(got, want))


def test_criterion_01_first_example_reproduced():
    start = time.perf_counter()
    for t in np.linspace(0.02, 0.98, 50):
        lam = eigenvalues_bisect(assemble_S(A1, t))
        assert abs(lam[1] - (1 / t + 1 / (1 - t))) <= A1_CLOSED_FORM_TOL * max(1.0, lam[1])
    for tag, want in (("B_MAX↑", (0.5, 1.0)), ("B_MIN↑", (0.5, 1.0)),
                      ("B_MAX↓", (0.0, 0.5)), ("B_MIN↓", (0.0, 0.5))):
        got = single(scan(A1, tag))
        assert near(got, want), (tag, got)
    elapsed = time.perf_counter() - start
    assert elapsed < A1_RUNTIME_S, f"{elapsed:.2f} s"


def test_criterion_02_alternative_largest_set_left_end():
    intervals = scan(A1, "BTILDE_MAX↑")
    assert intervals, ("BTILDE_MAX↑ is empty for A1: the index-1 condition "
                       "a'_1 m2 + a_1 b'_1 - a'_1 b_1 = 1 - m2 is negative since m2 >= 5; "
                       "the index-0 set alone starts at "
                       f"{scan(A1, 'BTILDE_MAX↑', component=0)[0].lo:.6f}")
    assert abs(intervals[0].lo - BTILDE_LEFT_END) <= BTILDE_TOL


def test_criterion_03_second_example_reproduced():
    assert near(single(scan(A2, "B_MAX↑")), (0.5, 1.0))
    assert scan(A2, "B_MAX↓") == []
    assert near(single(scan(A2, "B_MIN↑")), (0.6, 1.0))
    assert scan(A2, "B_MIN↓") == []
    for tag in ("ISMAIL_MIN↑", "ISMAIL_MIN↓", "ISMAIL_MAX↑", "ISMAIL_MAX↓"):
        assert scan(A2, tag) == [], tag


def test_criterion_04_random_walk_example_reproduced():
    r = 1 / math.sqrt(2)
    assert near(single(scan(B1, "D_MAX↑")), (0.0, r))
    assert near(single(scan(B1, "D_MAX↓")), (r, 1.0))
    for t in np.linspace(0.02, 0.98, 50):
        check = oracle.check_closed_form("B1_max", t, rtol=B1_CLOSED_FORM_TOL)
        assert check.matches["derived"], t
        assert check.discrepancy and not check.matches["printed"], t


def _derivative_problems():
    problems = [A1, A2, B1] + list(corpus.RANDOM_BD)
    assert len(corpus.RANDOM_BD) == 20 and all(s.n <= 6 for s in corpus.RANDOM_BD)
    return problems


def test_criterion_05_derivative_forms_and_differences_agree():
    start = time.perf_counter()
    bad = []
    for spec in _derivative_problems():
        bd = rw_to_bd_hat(spec) if isinstance(spec, RandomWalkSpec) else spec
        for t in corpus.grid(spec, GRID):
            loc = Local.at(bd, t)
            ref = all_lambda_primes(loc, form="rawdot")
            for form in FORMS[1:]:
                other = all_lambda_primes(loc, form=form)
                if np.any(np.abs(other - ref) > FORM_RTOL * (1 + np.abs(ref))):
                    bad.append((spec.name, t, form))
            fd = oracle.fd_all(spec, t)
            if np.any(np.abs(fd - ref) > FD_RTOL * (1 + np.abs(ref))):
                bad.append((spec.name, t, "finite difference"))
    elapsed = time.perf_counter() - start
    assert not bad, bad[:5]
    assert elapsed < DERIVATIVE_RUNTIME_S, f"{elapsed:.1f} s"


STRUCTURAL = ("interlacing", "positivity", "spectrum_symmetry", "sign_changes", "bound_sandwich")


@functools.lru_cache(maxsize=None)
def _suite(spec):
    return {r.name: r for r in run_suite(spec, corpus.grid(spec, GRID))}


def test_criterion_06_structural_properties_on_corpus():
    failures = []
    for spec in corpus.CORPUS:
        for name, r in _suite(spec).items():
            if name in STRUCTURAL:
                assert r.checked > 0
                if not r.passed:
                    failures.append(f"{spec.name}: {r.line()}")
    assert not failures, failures


def test_criterion_07_containments_on_corpus():
    failures = []
    for spec in corpus.CORPUS:
        r = _suite(spec)["containment"]
        assert r.checked > 0
        if not r.passed:
            failures.append(f"{spec.name}: {r.line()}")
    assert not failures, failures


def test_criterion_08_proportional_rates():
    spec = corpus.PROPORTIONAL
    assert single(scan(spec, "MAGAGNA_A0↑", 200)) == spec.domain
    for t in corpus.grid(spec, GRID):
        verdicts, report = classify_magagna(spec, t)
        assert verdicts["MAGAGNA_A0↑"].member
        assert report is not None
        assert report.commutator <= COMMUTE_RTOL * report.scale
        assert np.max(np.abs(report.eig_A_prime - report.lambda_primes)) <= EIG_PRIME_TOL


def test_criterion_09_even_walks_split():
    assert sorted(s.size for s in corpus.EVEN_RW) == [2, 4, 6]
    for rw in corpus.EVEN_RW:
        w = golub_kahan_reduce(rw)
        for t in corpus.grid(rw, GRID):
            eB = oracle.eigenvalues_at(rw, t)
            root = np.sqrt(eigenvalues_bisect(assemble_S(w, t)))
            paired = np.sort(np.concatenate((-root, root)))
            assert np.max(np.abs(paired - eB)) <= GOLUB_KAHAN_TOL, (rw.name, t)


def test_criterion_10_soundness_sweep():
    counterexamples = []
    members = 0
    for spec in corpus.CORPUS:
        for t in corpus.grid(spec, GRID):
            members += sum(classify(spec, c, t).member for c in applicable_criteria(spec))
            for msg in soundness_failures(spec, t):
                counterexamples.append(f"{spec.name}: {msg}")
    assert members > 0
    assert not counterexamples, counterexamples[:10]
