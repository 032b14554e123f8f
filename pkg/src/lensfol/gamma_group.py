"""Exact arithmetic in the group of integer matrices [[eps, 0], [m, delta]],
eps, delta = ±1, i.e. the subgroup of GL(2, Z) whose elements send the
column (0, 1) to ±(0, 1).

Python integers are unbounded, so products never overflow.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .descriptors import GroupDescriptor, Dih, Z, Z2, cyclic, product
from .errors import NotInGamma


@dataclass(frozen=True)
class GammaElem:
    eps: int
    delta: int
    m: int

    def __post_init__(self):
        if self.eps not in (1, -1) or self.delta not in (1, -1):
            raise NotInGamma(f"diagonal entries must be ±1, got {self.eps}, {self.delta}")

    @property
    def matrix(self) -> list:
        return [[self.eps, 0], [self.m, self.delta]]

    def det(self) -> int:
        return self.eps * self.delta

    def __mul__(self, other: "GammaElem") -> "GammaElem":
        return mul(self, other)

    def __pow__(self, n: int) -> "GammaElem":
        return power(self, n)

    def __repr__(self) -> str:
        return f"GammaElem(eps={self.eps}, delta={self.delta}, m={self.m})"


@dataclass(frozen=True)
class GammaWord:
    """delta_hat^m * lambda_hat^b * tau_hat^c."""

    m: int
    b: int
    c: int

    def __post_init__(self):
        if self.b not in (0, 1) or self.c not in (0, 1):
            raise ValueError("b and c are bits")

    def evaluate(self) -> GammaElem:
        return mul(mul(DELTA ** self.m, LAMBDA ** self.b), TAU ** self.c)


E = GammaElem(1, 1, 0)
DELTA = GammaElem(1, 1, 1)
LAMBDA = GammaElem(-1, 1, 0)
MU = GammaElem(1, -1, 0)
TAU = GammaElem(-1, -1, 0)

GENERATORS = {"delta": DELTA, "lambda": LAMBDA, "mu": MU, "tau": TAU, "E": E}


def from_matrix(M: Sequence[Sequence[int]]) -> GammaElem:
    (a, b), (c, d) = M
    if any(int(x) != x for x in (a, b, c, d)):
        raise NotInGamma("entries must be integers")
    if b != 0:
        raise NotInGamma(f"upper-right entry must vanish, got {b}")
    if a not in (1, -1) or d not in (1, -1):
        raise NotInGamma(f"diagonal entries must be ±1, got {a}, {d}")
    return GammaElem(int(a), int(d), int(c))


def mul(a: GammaElem, b: GammaElem) -> GammaElem:
    # [[e1,0],[m1,d1]] [[e2,0],[m2,d2]] = [[e1 e2, 0], [m1 e2 + d1 m2, d1 d2]]
    return GammaElem(a.eps * b.eps, a.delta * b.delta, a.m * b.eps + a.delta * b.m)


def inverse(a: GammaElem) -> GammaElem:
    # the matrix is its own inverse up to the sign of m
    return GammaElem(a.eps, a.delta, -a.m * a.eps * a.delta)


def power(a: GammaElem, n: int) -> GammaElem:
    if n < 0:
        a, n = inverse(a), -n
    result, base = E, a
    while n:
        if n & 1:
            result = mul(result, base)
        base = mul(base, base)
        n >>= 1
    return result


def normal_form(a: GammaElem) -> GammaWord:
    c = 0 if a.delta == 1 else 1
    b = 0 if a.eps * a.delta == 1 else 1
    return GammaWord(m=a.eps * a.m, b=b, c=c)


def word_product(names: Iterable[str]) -> GammaElem:
    """Multiply generator names left to right; a trailing '^-1' inverts."""
    result = E
    for name in names:
        inv = name.endswith("^-1")
        g = GENERATORS[name[:-3] if inv else name]
        result = mul(result, inverse(g) if inv else g)
    return result


# A presentation of the group on generators delta, lambda, tau.  Relators are
# lists of (generator index, exponent).
PRESENTATION_GENERATORS = ("delta", "lambda", "tau")
PRESENTATION_RELATORS = (
    [(1, 2)],                          # lambda^2
    [(1, 1), (0, 1), (1, 1), (0, 1)],  # lambda delta lambda delta
    [(2, 2)],                          # tau^2
    [(2, 1), (0, 1), (2, -1), (0, -1)],  # [tau, delta]
    [(2, 1), (1, 1), (2, -1), (1, -1)],  # [tau, lambda]
)


def abelianization(generators: Sequence[str], relators: Sequence[list]) -> GroupDescriptor:
    """Abelian group presented by the exponent-sum matrix of the relators."""
    # sympy is slow to import and only needed here
    from sympy import ZZ, Matrix
    from sympy.matrices.normalforms import invariant_factors

    n = len(generators)
    rows = []
    for rel in relators:
        row = [0] * n
        for g, e in rel:
            row[g] += e
        rows.append(row)
    rank_free = n
    factors = []
    if rows and any(any(r) for r in rows):
        inv = [int(x) for x in invariant_factors(Matrix(rows), domain=ZZ)]
        nonzero = [d for d in inv if d != 0]
        rank_free = n - len(nonzero)
        factors = [cyclic(abs(d)) for d in nonzero]
    return product(*factors, *([Z] * rank_free))


def pi0_descriptor_gamma() -> GroupDescriptor:
    return product(Dih(Z), Z2)


def gamma_abelianization() -> GroupDescriptor:
    return abelianization(PRESENTATION_GENERATORS, PRESENTATION_RELATORS)


# The defining identities among the generators, as (lhs word, rhs word).
RELATIONS = (
    (("lambda", "lambda"), ("E",)),
    (("mu", "mu"), ("E",)),
    (("lambda", "delta", "lambda"), ("delta^-1",)),
    (("mu", "delta", "mu"), ("delta^-1",)),
    (("tau",), ("lambda", "mu")),
    (("tau",), ("mu", "lambda")),
    (("tau", "delta"), ("delta", "tau")),
)


def relation_failures() -> list:
    """Identities that fail in exact arithmetic (empty when all hold)."""
    return [(lhs, rhs) for lhs, rhs in RELATIONS if word_product(lhs) != word_product(rhs)]


def random_elem(rng, bound: int = 10 ** 6) -> GammaElem:
    return GammaElem(int(rng.choice((-1, 1))), int(rng.choice((-1, 1))),
                     int(rng.integers(-bound, bound + 1)))


def round_trip_failures(rng, samples: int = 1000, bound: int = 10 ** 6) -> int:
    """Pairs whose product differs from the normal form of the product evaluated back."""
    bad = 0
    for _ in range(samples):
        a, b = random_elem(rng, bound), random_elem(rng, bound)
        ab = mul(a, b)
        if normal_form(ab).evaluate() != ab or from_matrix(ab.matrix) != ab:
            bad += 1
        if mul(a, inverse(a)) != E:
            bad += 1
    return bad
