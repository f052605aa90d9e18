import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdspectra import _kernels
from bdspectra.eigen_tri import (
    eigenvalues_bisect, eigenvector_q, interlacing_check, sign_changes, spectrum, sturm_count,
)
from bdspectra.errors import AllZero, DegenerateOffDiagonal, ResidualTooLarge
from bdspectra.model import BirthDeathSpec, TriSym, assemble_S, assemble_Sw
from bdspectra.oracle import dense_eig

import corpus
from corpus import A1, A2, UNIT


@pytest.fixture(params=sorted(_kernels.BACKENDS), autouse=True)
def backend(request, monkeypatch):
    monkeypatch.setattr(_kernels, "_active", _kernels.BACKENDS[request.param])
    return request.param


def tri(diag, off):
    return TriSym(np.asarray(diag, dtype=float), np.asarray(off, dtype=float))


def random_jacobi(rng, n):
    return tri(rng.uniform(-3, 3, n), rng.uniform(0.05, 2.0, n - 1))


class TestBisection:
    def test_A1_midpoint_contains_four(self):
        lam = eigenvalues_bisect(tri([4, 1, 4], [1, 1]))
        assert lam[1] == pytest.approx(4.0, abs=1e-12)

    def test_one_by_one(self):
        assert eigenvalues_bisect(tri([2.5], [])).tolist() == [2.5]

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_dense(self, seed):
        m = random_jacobi(np.random.default_rng(seed), 6)
        np.testing.assert_allclose(eigenvalues_bisect(m), dense_eig(m), atol=1e-10)

    def test_strictly_increasing(self):
        m = random_jacobi(np.random.default_rng(7), 12)
        assert np.all(np.diff(eigenvalues_bisect(m)) > 0)

    def test_tolerance_respected(self):
        m = tri([4, 1, 4], [1, 1])
        coarse = eigenvalues_bisect(m, tol=1e-3)
        np.testing.assert_allclose(coarse, dense_eig(m), atol=1e-3)

    def test_zero_offdiagonal(self):
        with pytest.raises(DegenerateOffDiagonal) as info:
            eigenvalues_bisect(tri([1, 2, 3], [1, 0]))
        assert info.value.j == 1

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            eigenvalues_bisect(tri([1, 2], [1]), tol=0.0)

    def test_sturm_counts_at_gershgorin_bounds(self):
        m = random_jacobi(np.random.default_rng(3), 8)
        lo, hi = _kernels.gershgorin_bounds(m.diag, m.off)
        assert sturm_count(m, lo - 1e-9) == 0
        assert sturm_count(m, hi + 1e-9) == 8
        counts = sturm_count(m, np.array([lo - 1, hi + 1]))
        assert counts.tolist() == [0, 8]


class TestEigenvectors:
    def test_A1_midpoint(self):
        q = eigenvector_q(tri([4, 1, 4], [1, 1]), 4.0)
        np.testing.assert_allclose(q, [1, 0, -1], atol=1e-15)

    def test_one_by_one(self):
        assert eigenvector_q(tri([3.0], []), 3.0).tolist() == [1.0]

    def test_not_an_eigenvalue(self):
        with pytest.raises(ResidualTooLarge):
            eigenvector_q(tri([4, 1, 4], [1, 1]), 3.0)

    @pytest.mark.parametrize("spec", corpus.BD_CORPUS, ids=lambda s: s.name)
    def test_top_eigenvector_positive(self, spec):
        for t in corpus.grid(spec, 5):
            sp = spectrum(assemble_S(spec, t))
            assert np.all(sp.qvecs[:, -1] > 0)
            assert np.all(sp.qvecs[0] == 1.0)

    def test_long_chain_eigenvectors_have_small_residual(self):
        # a long chain where forward recursion is unstable for interior eigenvalues
        n = 40
        m = tri(np.linspace(1, 30, n), np.full(n - 1, 0.05))
        sp = spectrum(m)
        dense = m.to_dense()
        for k in range(n):
            q = sp.qvecs[:, k]
            r = dense @ q - sp.values[k] * q
            assert np.max(np.abs(r)) <= 1e-8 * np.max(np.abs(q))


class TestSignChanges:
    def test_examples(self):
        assert sign_changes([1, 0, -1]) == 1
        assert sign_changes([1, -2, 3, -4]) == 3
        assert sign_changes([0, 2, 0, 3]) == 0

    def test_all_zero(self):
        with pytest.raises(AllZero):
            sign_changes([0.0, 0.0])

    def test_A2_smallest_alternates(self):
        # oracle on A2(0.7): the smallest eigenvalue's vector has n = 2 changes
        sp = spectrum(assemble_S(A2, 0.7))
        assert [sign_changes(sp.qvecs[:, k]) for k in range(3)] == [2, 1, 0]

    @pytest.mark.parametrize("spec", [s for s in corpus.BD_CORPUS if s.n <= 8],
                             ids=lambda s: s.name)
    def test_corpus_counts(self, spec):
        for t in corpus.grid(spec, 5):
            sp = spectrum(assemble_S(spec, t))
            n = spec.n
            assert [sign_changes(sp.qvecs[:, k]) for k in range(n + 1)] == list(range(n, -1, -1))


class TestInterlacing:
    def test_bundled_examples(self):
        assert interlacing_check(A1, 0.5)
        assert interlacing_check(A2, 0.3)

    def test_one_by_one(self):
        assert interlacing_check(BirthDeathSpec(0, ("1",), ("1",), UNIT), 0.5)

    @pytest.mark.parametrize("spec", corpus.BD_CORPUS, ids=lambda s: s.name)
    def test_corpus(self, spec):
        assert all(interlacing_check(spec, t) for t in corpus.grid(spec, 5))


@pytest.mark.parametrize("spec", corpus.BD_CORPUS, ids=lambda s: s.name)
def test_birth_death_spectrum_positive(spec):
    for t in corpus.grid(spec, 5):
        assert eigenvalues_bisect(assemble_S(spec, t))[0] > 0


@pytest.mark.parametrize("spec", corpus.RW_CORPUS, ids=lambda s: s.name)
def test_walk_spectrum_inside_unit_interval(spec):
    for t in corpus.grid(spec, 5):
        lam = eigenvalues_bisect(assemble_Sw(spec, t))
        assert -1 < lam[0] and lam[-1] < 1


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 16))
def test_random_jacobi_against_dense(seed, n):
    m = random_jacobi(np.random.default_rng(seed), n)
    lam = eigenvalues_bisect(m)
    np.testing.assert_allclose(lam, dense_eig(m), atol=1e-10 * max(1.0, m.norm_inf()))
    sp = spectrum(m)
    assert [sign_changes(sp.qvecs[:, k]) for k in range(n)] == list(range(n - 1, -1, -1))


def test_backends_agree():
    rng = np.random.default_rng(11)
    impls = list(_kernels.BACKENDS.values())
    for n in (1, 2, 5, 17):
        m = random_jacobi(rng, n) if n > 1 else tri([1.0], [])
        tol = 1e-13
        outs = [impl["bisect"](m.diag, m.off, tol) for impl in impls]
        for other in outs[1:]:
            np.testing.assert_allclose(other, outs[0], atol=2 * tol)
        if n > 1:
            lam = float(outs[0][n // 2])
            qs = [impl["q_recursion"](m.diag, m.off, lam) for impl in impls]
            for other in qs[1:]:
                np.testing.assert_allclose(other, qs[0], rtol=1e-12)


def test_jit_flag(monkeypatch):
    import importlib
    monkeypatch.setenv("BDSPECTRA_DISABLE_JIT", "1")
    try:
        mod = importlib.reload(_kernels)
        assert mod.BACKEND == "numpy" and not mod.JIT_ENABLED
    finally:
        monkeypatch.delenv("BDSPECTRA_DISABLE_JIT")
        importlib.reload(_kernels)
