"""Symbolic descriptors for the (small) groups that show up as pi_0 of
diffeomorphism groups: trivial group, Z, Z_n, dihedral extensions, direct
and semidirect products.

Equality is structural on a canonical form: direct products are flattened,
trivial factors dropped and factors sorted by their printed name.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

INFINITE = "infinite"

Order = Union[int, str]


class GroupDescriptor:
    def order(self) -> Order:
        raise NotImplementedError

    def is_finite(self) -> bool:
        return self.order() != INFINITE

    def __mul__(self, other: "GroupDescriptor") -> "GroupDescriptor":
        return product(self, other)

    def __pow__(self, n: int) -> "GroupDescriptor":
        return product(*([self] * n))


@dataclass(frozen=True, eq=True)
class Trivial(GroupDescriptor):
    def order(self) -> Order:
        return 1

    def __str__(self) -> str:
        return "1"


@dataclass(frozen=True, eq=True)
class Integers(GroupDescriptor):
    def order(self) -> Order:
        return INFINITE

    def __str__(self) -> str:
        return "Z"


@dataclass(frozen=True, eq=True)
class Cyclic(GroupDescriptor):
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("use Trivial() for Z_1 and cyclic(n) to normalise")

    def order(self) -> Order:
        return self.n

    def __str__(self) -> str:
        return f"Z_{self.n}"


@dataclass(frozen=True, eq=True)
class Dih(GroupDescriptor):
    """A ⋊ Z_2 with Z_2 acting on the abelian group A by a -> -a."""

    base: GroupDescriptor

    def order(self) -> Order:
        o = self.base.order()
        return INFINITE if o == INFINITE else 2 * o

    def __str__(self) -> str:
        return f"Dih({self.base})"


@dataclass(frozen=True, eq=True)
class Product(GroupDescriptor):
    factors: tuple

    def order(self) -> Order:
        orders = [f.order() for f in self.factors]
        if INFINITE in orders:
            return INFINITE
        return math.prod(orders)

    def __str__(self) -> str:
        parts = []
        i = 0
        fs = self.factors
        while i < len(fs):
            j = i
            while j < len(fs) and fs[j] == fs[i]:
                j += 1
            name = _wrap(fs[i])
            k = j - i
            parts.extend([name] * k if k < 3 else [f"{name}^{k}"])
            i = j
        return " × ".join(parts)


@dataclass(frozen=True, eq=True)
class Semidirect(GroupDescriptor):
    """normal ⋊ acting; `action` is a tag naming the action homomorphism."""

    normal: GroupDescriptor
    acting: GroupDescriptor
    action: str

    def order(self) -> Order:
        a, b = self.normal.order(), self.acting.order()
        if INFINITE in (a, b):
            return INFINITE
        return a * b

    def __str__(self) -> str:
        return f"{_wrap(self.normal)} ⋊ {_wrap(self.acting)}"


def _wrap(g: GroupDescriptor) -> str:
    s = str(g)
    return f"({s})" if " " in s else s


def cyclic(n: int) -> GroupDescriptor:
    if n == 0:
        return Integers()
    if n == 1:
        return Trivial()
    return Cyclic(n)


def product(*gs: GroupDescriptor) -> GroupDescriptor:
    flat = []
    for g in gs:
        if isinstance(g, Product):
            flat.extend(g.factors)
        elif not isinstance(g, Trivial):
            flat.append(g)
    if not flat:
        return Trivial()
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(sorted(flat, key=str)))


def semidirect(normal: GroupDescriptor, acting: GroupDescriptor, action: str) -> GroupDescriptor:
    if isinstance(acting, Trivial):
        return normal
    return Semidirect(normal, acting, action)


Z = Integers()
Z2 = Cyclic(2)
Z4 = Cyclic(4)
