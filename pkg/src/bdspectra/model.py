"""Birth-death and random-walk specifications and their matrix realisations.

A birth-death problem of order ``n`` carries ``n+1`` birth rates ``a_j(t)``
and ``n+1`` death rates ``b_j(t)``; at every ``t`` the matrix ``A(t)`` has
diagonal ``a_j + b_j``, superdiagonal ``a_j`` and subdiagonal ``b_{j+1}``.
A random walk carries ``c_0..c_n`` and realises ``B(t)`` with zero
diagonal, superdiagonal ``c_j`` and subdiagonal ``1 - c_{j+1}``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dsl import CoeffExpr, Dual, _eval, parse_expr
from .errors import (
    DomainError, ExprSyntaxError, OddOrder, PositivityViolation, ProblemFileError,
    RangeViolation, SpecError,
)

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = [
    "BirthDeathSpec", "RandomWalkSpec", "CoeffValues", "TriSym", "TriGeneral",
    "assemble_A", "assemble_S", "assemble_D", "assemble_B", "assemble_Sw",
    "assemble_A_prime", "rw_to_bd_hat", "golub_kahan_reduce", "load_problem",
    "problem_from_mapping",
]


# --------------------------------------------------------------------------
# matrices
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TriSym:
    diag: np.ndarray
    off: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        if self.size > 1:
            m += np.diag(self.off, 1) + np.diag(self.off, -1)
        return m

    def norm_inf(self) -> float:
        row = np.abs(self.diag).copy()
        if self.size > 1:
            row[:-1] += np.abs(self.off)
            row[1:] += np.abs(self.off)
        return float(row.max())

    def leading(self, k: int) -> "TriSym":
        """Leading principal ``k x k`` section."""
        return TriSym(self.diag[:k], self.off[:max(k - 1, 0)])


@dataclass(frozen=True)
class TriGeneral:
    diag: np.ndarray
    sup: np.ndarray
    sub: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        if self.size > 1:
            m += np.diag(self.sup, 1) + np.diag(self.sub, -1)
        return m


# --------------------------------------------------------------------------
# specifications
# --------------------------------------------------------------------------

def _as_expr(e) -> CoeffExpr:
    if isinstance(e, CoeffExpr):
        return e
    if isinstance(e, (int, float)):
        return CoeffExpr.constant(e)
    return parse_expr(e)


def _eval_all(exprs, t):
    x = Dual(float(t), 1.0)
    vals = np.empty(len(exprs))
    ders = np.empty(len(exprs))
    for i, e in enumerate(exprs):
        d = _eval(e.root, x)
        vals[i] = d.value
        ders[i] = d.deriv
    return vals, ders


def _check_domain(domain):
    lo, hi = (float(v) for v in domain)
    if not lo < hi:
        raise SpecError(f"domain ({lo}, {hi}) is empty")
    return lo, hi


def _require_inside(domain, t):
    if not domain[0] < t < domain[1]:
        raise DomainError(f"t outside open domain {domain}", t=t)


@dataclass(frozen=True)
class CoeffValues:
    """Birth and death rates with their derivatives at one ``t``."""

    t: float
    a: np.ndarray
    da: np.ndarray
    b: np.ndarray
    db: np.ndarray
    b0_zero: bool = False

    @property
    def n(self) -> int:
        return self.a.shape[0] - 1


@dataclass(frozen=True)
class BirthDeathSpec:
    """Order-``n`` birth-death problem; matrices are ``(n+1) x (n+1)``."""

    n: int
    a: tuple
    b: tuple
    domain: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        a = tuple(_as_expr(e) for e in self.a)
        b = tuple(_as_expr(e) for e in self.b)
        if self.n < 0:
            raise SpecError("order n must be >= 0")
        if len(a) != self.n + 1 or len(b) != self.n + 1:
            raise SpecError(f"expected {self.n + 1} coefficients in a and b, "
                            f"got {len(a)} and {len(b)}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "domain", _check_domain(self.domain))

    @property
    def size(self) -> int:
        return self.n + 1

    @property
    def b0_identically_zero(self) -> bool:
        """True iff ``b_0`` is written as the literal constant 0."""
        return self.b[0].is_literal(0.0)

    def values(self, t: float, validate: bool = True) -> CoeffValues:
        t = float(t)
        _require_inside(self.domain, t)
        a, da = _eval_all(self.a, t)
        b, db = _eval_all(self.b, t)
        if validate:
            for j in range(self.n + 1):
                if not a[j] > 0.0:
                    raise PositivityViolation(j, "a", float(a[j]), t)
                if j == 0 and not b[0] >= 0.0:
                    raise PositivityViolation(0, "b", float(b[0]), t)
                if j > 0 and not b[j] > 0.0:
                    raise PositivityViolation(j, "b", float(b[j]), t)
        return CoeffValues(t, a, da, b, db, self.b0_identically_zero)

    def reflected(self) -> "BirthDeathSpec":
        """Same problem with time reversed, ``t -> lo + hi - t``."""
        inner = _reflection(self.domain)
        return BirthDeathSpec(self.n, tuple(e.compose(inner) for e in self.a),
                              tuple(e.compose(inner) for e in self.b),
                              self.domain, self.name + "~")

    def random_walk(self) -> "RandomWalkSpec":
        """The random walk with ``c_j = a_j / (a_j + b_j)``."""
        c = []
        for aj, bj in zip(self.a, self.b):
            if bj.is_literal(0.0):
                c.append(CoeffExpr.constant(1.0))
            else:
                c.append(CoeffExpr.combine("/", aj, CoeffExpr.combine("+", aj, bj)))
        return RandomWalkSpec(self.n, tuple(c), self.domain, self.name)


@dataclass(frozen=True)
class RandomWalkSpec:
    n: int
    c: tuple
    domain: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        c = tuple(_as_expr(e) for e in self.c)
        if self.n < 0:
            raise SpecError("order n must be >= 0")
        if len(c) != self.n + 1:
            raise SpecError(f"expected {self.n + 1} coefficients in c, got {len(c)}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "domain", _check_domain(self.domain))

    @property
    def size(self) -> int:
        return self.n + 1

    @property
    def c0_identically_one(self) -> bool:
        return self.c[0].is_literal(1.0)

    def values(self, t: float, validate: bool = True):
        """``(c, dc)`` at ``t``."""
        t = float(t)
        _require_inside(self.domain, t)
        c, dc = _eval_all(self.c, t)
        if validate:
            if not 0.0 < c[0] <= 1.0:
                raise RangeViolation(0, float(c[0]), t)
            for j in range(1, self.n + 1):
                if not 0.0 < c[j] < 1.0:
                    raise RangeViolation(j, float(c[j]), t)
        return c, dc

    def reflected(self) -> "RandomWalkSpec":
        inner = _reflection(self.domain)
        return RandomWalkSpec(self.n, tuple(e.compose(inner) for e in self.c),
                              self.domain, self.name + "~")


def _reflection(domain):
    lo, hi = domain
    return parse_expr(f"{lo + hi!r} - t")


# --------------------------------------------------------------------------
# assembly
# --------------------------------------------------------------------------

def _values(spec_or_values, t):
    if isinstance(spec_or_values, CoeffValues):
        return spec_or_values
    return spec_or_values.values(t)


def assemble_A(spec: BirthDeathSpec, t: float) -> TriGeneral:
    v = _values(spec, t)
    return TriGeneral(v.a + v.b, v.a[:-1].copy(), v.b[1:].copy())


def assemble_A_prime(spec: BirthDeathSpec, t: float) -> TriGeneral:
    """Entrywise derivative ``A'(t)``."""
    v = _values(spec, t)
    return TriGeneral(v.da + v.db, v.da[:-1].copy(), v.db[1:].copy())


def assemble_S(spec: BirthDeathSpec, t: float) -> TriSym:
    """Symmetrised ``S = D A D^{-1}``, built directly from the rates."""
    v = _values(spec, t)
    return TriSym(v.a + v.b, np.sqrt(v.a[:-1] * v.b[1:]))


def assemble_D(spec: BirthDeathSpec, t: float) -> np.ndarray:
    """Diagonal of the similarity ``D`` with ``S = D A D^{-1}``."""
    v = _values(spec, t)
    ratios = v.a[:-1] / v.b[1:]
    return np.concatenate(([1.0], np.sqrt(np.cumprod(ratios))))


def assemble_B(rw: RandomWalkSpec, t: float) -> TriGeneral:
    c, _ = rw.values(t)
    return TriGeneral(np.zeros(rw.size), c[:-1].copy(), 1.0 - c[1:])


def assemble_Sw(rw: RandomWalkSpec, t: float) -> TriSym:
    """Symmetrised random walk, off-diagonals ``sqrt(c_j (1 - c_{j+1}))``."""
    c, _ = rw.values(t)
    return TriSym(np.zeros(rw.size), np.sqrt(c[:-1] * (1.0 - c[1:])))


def _one_minus(e: CoeffExpr) -> CoeffExpr:
    if e.is_literal(1.0):
        return CoeffExpr.constant(0.0)
    return CoeffExpr.combine("-", CoeffExpr.constant(1.0), e)


def rw_to_bd_hat(rw: RandomWalkSpec) -> BirthDeathSpec:
    """Birth-death spec of ``I + B(t)``: rates ``c_j`` and ``1 - c_j``.

    Eigenvalues satisfy ``lambda_k(B, t) = lambda_k(I + B, t) - 1`` and the
    derivatives coincide.
    """
    b = tuple(_one_minus(cj) for cj in rw.c)
    return BirthDeathSpec(rw.n, rw.c, b, rw.domain, rw.name + "^")


def golub_kahan_reduce(rw: RandomWalkSpec) -> BirthDeathSpec:
    """Birth-death spec ``A_w`` whose eigenvalues are the squares of the
    positive eigenvalues of ``B``.

    With ``delta_j = (1 - c_{j+1}) c_j`` the even-indexed products become the
    birth rates ``x_j = delta_{2j}`` and the odd-indexed ones the death rates
    ``y_j = delta_{2j-1}`` (``y_0 = 0``).  Only defined for even size ``n+1``.
    """
    if rw.size % 2:
        raise OddOrder(f"random walk of odd size {rw.size}: 0 is always an eigenvalue; "
                       "remove it and reduce the even-size remainder")
    m = (rw.n - 1) // 2
    delta = [CoeffExpr.combine("*", _one_minus(rw.c[j + 1]), rw.c[j]) for j in range(rw.n)]
    x = tuple(delta[2 * j] for j in range(m + 1))
    y = (CoeffExpr.constant(0.0),) + tuple(delta[2 * j - 1] for j in range(1, m + 1))
    return BirthDeathSpec(m, x, y, rw.domain, rw.name + "_w")


# --------------------------------------------------------------------------
# problem files
# --------------------------------------------------------------------------

_KEYS = {
    "birth_death": {"kind", "n", "domain", "a", "b", "name", "description"},
    "random_walk": {"kind", "n", "domain", "c", "name", "description"},
}


def _expr_list(doc, key, count):
    raw = doc.get(key)
    if raw is None:
        raise ProblemFileError("missing", key)
    if not isinstance(raw, list) or len(raw) != count:
        raise ProblemFileError(f"expected a list of {count} expressions", key)
    out = []
    for j, item in enumerate(raw):
        if isinstance(item, bool) or not isinstance(item, (str, int, float)):
            raise ProblemFileError("entries must be strings or numbers", f"{key}[{j}]")
        try:
            out.append(parse_expr(str(item)))
        except ExprSyntaxError as exc:
            raise ProblemFileError(str(exc), f"{key}[{j}]") from exc
    return tuple(out)


def problem_from_mapping(doc: dict):
    """Build a spec from a decoded problem document."""
    kind = doc.get("kind")
    if kind not in _KEYS:
        raise ProblemFileError(f"must be one of {sorted(_KEYS)}", "kind")
    unknown = set(doc) - _KEYS[kind]
    if unknown:
        raise ProblemFileError(f"unknown key(s) for {kind}", ", ".join(sorted(unknown)))
    n = doc.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise ProblemFileError("must be a non-negative integer", "n")
    domain = doc.get("domain")
    if (not isinstance(domain, list) or len(domain) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in domain)):
        raise ProblemFileError("must be [lo, hi]", "domain")
    if not (math.isfinite(domain[0]) and math.isfinite(domain[1]) and domain[0] < domain[1]):
        raise ProblemFileError("must satisfy lo < hi with finite bounds", "domain")
    name = str(doc.get("name", ""))
    if kind == "birth_death":
        return BirthDeathSpec(n, _expr_list(doc, "a", n + 1), _expr_list(doc, "b", n + 1),
                              tuple(domain), name)
    return RandomWalkSpec(n, _expr_list(doc, "c", n + 1), tuple(domain), name)


def load_problem(path):
    """Read a TOML problem file.  See ``README.md`` for the schema."""
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise ProblemFileError(f"{path} is not valid UTF-8") from exc
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFileError(f"{path}: {exc}") from exc
    spec = problem_from_mapping(doc)
    if not spec.name:
        object.__setattr__(spec, "name", path.stem)
    return spec
