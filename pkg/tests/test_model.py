import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdspectra.errors import (
    DomainError, OddOrder, PositivityViolation, ProblemFileError, RangeViolation, SpecError,
)
from bdspectra.model import (
    BirthDeathSpec, RandomWalkSpec, assemble_A, assemble_A_prime, assemble_B, assemble_D,
    assemble_S, assemble_Sw, golub_kahan_reduce, load_problem, problem_from_mapping,
    rw_to_bd_hat,
)
from bdspectra.oracle import dense_eig

import corpus
from corpus import A1, A2, B1, UNIT


class TestAssembleA:
    def test_A1_midpoint(self):
        m = assemble_A(A1, 0.5)
        np.testing.assert_allclose(m.diag, [4, 1, 4], rtol=1e-15)
        np.testing.assert_allclose(m.sup, [2, 0.5], rtol=1e-15)
        np.testing.assert_allclose(m.sub, [0.5, 2], rtol=1e-15)

    def test_one_by_one(self):
        spec = BirthDeathSpec(0, ("2",), ("0",), UNIT)
        assert assemble_A(spec, 0.3).diag.tolist() == [2.0]

    def test_open_domain(self):
        with pytest.raises(DomainError):
            assemble_A(A1, 0.0)

    def test_positivity_violation_names_index(self):
        spec = BirthDeathSpec(1, ("1", "t - 0.5"), ("0", "1"), UNIT)
        with pytest.raises(PositivityViolation) as info:
            assemble_A(spec, 0.25)
        assert (info.value.j, info.value.which, info.value.t) == (1, "a", 0.25)
        spec = BirthDeathSpec(1, ("1", "1"), ("-0.1", "1"), UNIT)
        with pytest.raises(PositivityViolation) as info:
            assemble_A(spec, 0.25)
        assert (info.value.j, info.value.which) == (0, "b")

    def test_derivative_matrix(self):
        m = assemble_A_prime(A1, 0.5)
        np.testing.assert_allclose(m.diag, [0, 0, 0], atol=1e-12)
        np.testing.assert_allclose(m.sup, [-4, -1], rtol=1e-15)

    def test_spec_shape_errors(self):
        with pytest.raises(SpecError):
            BirthDeathSpec(2, ("1", "1"), ("1", "1", "1"), UNIT)
        with pytest.raises(SpecError):
            BirthDeathSpec(1, ("1", "1"), ("1", "1"), (1.0, 0.0))


class TestSymmetrisation:
    def test_A1_offdiagonal_is_one(self):
        s = assemble_S(A1, 0.5)
        np.testing.assert_allclose(s.off, [1, 1], rtol=1e-15)

    def test_square_root(self):
        spec = BirthDeathSpec(1, ("2", "1"), ("1", "2"), UNIT)
        assert assemble_S(spec, 0.5).off.tolist() == [2.0]

    def test_same_spectrum_as_A(self):
        np.testing.assert_allclose(dense_eig(assemble_S(A2, 0.7)), dense_eig(assemble_A(A2, 0.7)),
                                   rtol=1e-10)

    def test_similarity_vector(self):
        np.testing.assert_allclose(assemble_D(A1, 0.5), [1, 2, 1], rtol=1e-15)
        assert assemble_D(corpus.CONSTANT, 0.5).tolist() == [1.0, 1.0, 1.0]

    @pytest.mark.parametrize("spec", [A2, *corpus.RANDOM_BD[:6]], ids=lambda s: s.name)
    def test_triple_product(self, spec):
        d = assemble_D(spec, 0.3)
        dense = np.diag(d) @ assemble_A(spec, 0.3).to_dense() @ np.diag(1 / d)
        np.testing.assert_allclose(dense, assemble_S(spec, 0.3).to_dense(), rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("spec", corpus.BD_CORPUS, ids=lambda s: s.name)
    def test_sym_vs_general_eigensolve(self, spec):
        for t in corpus.grid(spec, 5):
            np.testing.assert_allclose(dense_eig(assemble_S(spec, t)),
                                       dense_eig(assemble_A(spec, t)), rtol=1e-10, atol=1e-12)


def _minors(m):
    dense = m.to_dense()
    return np.array([np.linalg.det(dense[:k, :k]) for k in range(1, m.size + 1)])


@pytest.mark.parametrize("spec", [s for s in corpus.BD_CORPUS if s.n <= 6], ids=lambda s: s.name)
def test_leading_minor_recursion(spec):
    t = 0.37 * (spec.domain[1] - spec.domain[0]) + spec.domain[0]
    v = spec.values(t)
    direct = _minors(assemble_A(spec, t))
    delta = [1.0]
    for k in range(1, spec.n + 2):
        delta.append(v.a[k - 1] * delta[k - 1] + np.prod(v.b[:k]))
    np.testing.assert_allclose(direct, delta[1:], rtol=1e-10)
    assert np.all(direct > 0)


class TestRandomWalk:
    def test_B1(self):
        m = assemble_B(B1, 0.25)
        np.testing.assert_allclose(m.sup, [0.8], rtol=1e-15)
        np.testing.assert_allclose(m.sub, [1 / 3], rtol=1e-15)
        assert m.diag.tolist() == [0.0, 0.0]

    def test_coin(self):
        m = assemble_B(RandomWalkSpec(1, ("0.5", "0.5"), UNIT), 0.1)
        assert m.sup.tolist() == [0.5] and m.sub.tolist() == [0.5]

    def test_range(self):
        with pytest.raises(RangeViolation) as info:
            assemble_B(RandomWalkSpec(1, ("0.5", "1.5"), UNIT), 0.5)
        assert info.value.j == 1
        with pytest.raises(RangeViolation):
            assemble_B(RandomWalkSpec(1, ("1", "1"), UNIT), 0.5)
        assemble_B(RandomWalkSpec(1, ("1", "0.5"), UNIT), 0.5)     # c_0 = 1 allowed

    def test_hat_flags_structural_zero(self):
        hat = rw_to_bd_hat(RandomWalkSpec(1, ("1", "t"), UNIT))
        assert hat.b0_identically_zero
        assert not rw_to_bd_hat(B1).b0_identically_zero

    def test_hat_coefficients(self):
        hat = rw_to_bd_hat(B1)
        v = hat.values(0.25)
        np.testing.assert_allclose(v.a, [0.8, 2 / 3], rtol=1e-15)
        np.testing.assert_allclose(v.b, [0.2, 1 / 3], rtol=1e-15)

    @pytest.mark.parametrize("seed", range(4))
    def test_hat_spectrum_shift(self, seed):
        rw = corpus.random_rw(seed, 3)
        np.testing.assert_allclose(dense_eig(assemble_A(rw_to_bd_hat(rw), 0.4)) - 1,
                                   dense_eig(assemble_B(rw, 0.4)), atol=1e-12)

    @pytest.mark.parametrize("spec", corpus.RW_CORPUS, ids=lambda s: s.name)
    def test_spectrum_symmetric(self, spec):
        for t in corpus.grid(spec, 5):
            lam = dense_eig(assemble_B(spec, t))
            np.testing.assert_allclose(lam, -lam[::-1], atol=1e-10)
            assert -1 < lam[0] and lam[-1] < 1
            if spec.n % 2 == 0:
                assert np.min(np.abs(lam)) <= 1e-10

    def test_symmetrised_walk(self):
        np.testing.assert_allclose(assemble_Sw(B1, 0.5).off, [np.sqrt(1 / 3)], rtol=1e-15)

    def test_birth_death_to_walk(self):
        rw = corpus.B0_ZERO.random_walk()
        assert rw.c0_identically_one
        c, _ = rw.values(0.5)
        v = corpus.B0_ZERO.values(0.5)
        np.testing.assert_allclose(c, v.a / (v.a + v.b), rtol=1e-15)


class TestGolubKahan:
    def test_B1_reduces_to_delta0(self):
        w = golub_kahan_reduce(B1)
        assert w.n == 0
        v = w.values(0.5)
        assert v.a[0] == pytest.approx(1 / 3, rel=1e-15)
        lam = dense_eig(assemble_B(B1, 0.5))
        assert lam[-1] == pytest.approx(np.sqrt(1 / 3), rel=1e-12)

    def test_constant_half(self):
        rw = RandomWalkSpec(3, ("0.5",) * 4, UNIT)
        w = golub_kahan_reduce(rw)
        np.testing.assert_allclose(assemble_A(w, 0.5).diag, [0.25, 0.5], rtol=1e-15)
        eB = dense_eig(assemble_B(rw, 0.5))
        ew = np.sqrt(dense_eig(assemble_S(w, 0.5)))
        np.testing.assert_allclose(np.sort(np.concatenate((-ew, ew))), eB, atol=1e-12)

    def test_odd_size_refused(self):
        with pytest.raises(OddOrder):
            golub_kahan_reduce(RandomWalkSpec(2, ("0.5",) * 3, UNIT))


class TestProblemFiles:
    def test_bundled(self):
        from importlib import resources
        root = resources.files("bdspectra") / "problems"
        spec = load_problem(root / "A1.toml")
        assert spec == A1 and spec.name == "A1"
        assert load_problem(root / "B1.toml") == B1

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "x.toml"
        p.write_text('kind = "random_walk"\nn = 1\ndomain = [0, 1]\nc = ["0.5", "0.5"]\nb = []\n')
        with pytest.raises(ProblemFileError) as info:
            load_problem(p)
        assert info.value.key == "b"

    def test_bad_expression_names_key(self, tmp_path):
        p = tmp_path / "x.toml"
        p.write_text('kind = "birth_death"\nn = 1\ndomain = [0, 1]\na = ["1", "1/+t"]\nb = ["0", "1"]\n')
        with pytest.raises(ProblemFileError) as info:
            load_problem(p)
        assert info.value.key == "a[1]" and "offset 2" in str(info.value)

    @pytest.mark.parametrize("doc, key", [
        ({"n": 1}, "kind"),
        ({"kind": "random_walk", "n": -1, "domain": [0, 1], "c": []}, "n"),
        ({"kind": "random_walk", "n": 1, "domain": [1, 0], "c": ["0.5", "0.5"]}, "domain"),
        ({"kind": "random_walk", "n": 1, "domain": [0, 1], "c": ["0.5"]}, "c"),
        ({"kind": "birth_death", "n": 0, "domain": [0, 1], "a": ["1"]}, "b"),
    ])
    def test_schema_errors(self, doc, key):
        with pytest.raises(ProblemFileError) as info:
            problem_from_mapping(doc)
        assert info.value.key == key

    def test_numbers_accepted(self):
        spec = problem_from_mapping({"kind": "birth_death", "n": 0, "domain": [0, 2],
                                     "a": [1.5], "b": [0]})
        assert spec.b0_identically_zero and spec.domain == (0.0, 2.0)

    def test_unreadable(self, tmp_path):
        with pytest.raises(ProblemFileError):
            load_problem(tmp_path / "missing.toml")
        bad = tmp_path / "bad.toml"
        bad.write_text("kind = ")
        with pytest.raises(ProblemFileError):
            load_problem(bad)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(0.02, 0.98))
def test_reflection_reverses_time(seed, t):
    spec = corpus.random_bd(seed)
    r = spec.reflected()
    v, w = spec.values(t), r.values(1.0 - t)
    np.testing.assert_allclose(w.a, v.a, rtol=1e-12)
    np.testing.assert_allclose(w.da, -v.da, rtol=1e-9, atol=1e-12)
