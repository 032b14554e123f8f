"""Arithmetic classification of lens spaces L(p, q).

Everything here is exact integer arithmetic.  The pi_0 table follows the
case analysis p = 0, 1, 2 and p > 2 split by q^2 = ±1 (mod p).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .descriptors import GroupDescriptor, Dih, Z, Z2, Z4, product, semidirect
from .errors import InvalidSpec, NotCoprime
from .gamma_group import pi0_descriptor_gamma

# matrices used for p <= 2, exactly as listed in the classification
SPECIAL_XI = {
    (0, 1): ((-1, 0), (0, 1)),
    (1, 0): ((0, 1), (1, 0)),
    (2, 1): ((1, 2), (1, 1)),
}


@dataclass(frozen=True)
class LensSpec:
    p: int
    q: int
    xi: tuple  # ((r, p), (s, q))

    def __post_init__(self):
        (r, p), (s, q) = self.xi
        if (p, q) != (self.p, self.q):
            raise InvalidSpec("gluing matrix does not match (p, q)")
        if r * q - p * s != -1:
            raise InvalidSpec("gluing matrix must have determinant -1")

    @property
    def r(self) -> int:
        return self.xi[0][0]

    @property
    def s(self) -> int:
        return self.xi[1][0]

    def xi_list(self) -> list:
        return [list(row) for row in self.xi]


def _check_coprime(p: int, q: int) -> None:
    if p < 0:
        raise InvalidSpec(f"p must be non-negative, got {p}")
    if gcd(p, q) != 1:
        raise NotCoprime(f"gcd({p}, {q}) = {gcd(p, q)}")


def normalize(p: int, q: int) -> tuple:
    _check_coprime(p, q)
    if p == 0:
        if q != 1:
            raise InvalidSpec("only L(0, 1) is handled for p = 0")
        return 0, 1
    return p, q % p


def sigma_plus_condition(p: int, q: int) -> bool:
    """Exists s with q^2 + p s = 1."""
    if p == 0:
        return q * q == 1
    return (q * q - 1) % p == 0


def sigma_minus_condition(p: int, q: int) -> bool:
    """Exists s with q^2 - p s = -1."""
    if p == 0:
        return q * q == -1
    return (q * q + 1) % p == 0


def canonical_spec(p: int, q: int) -> LensSpec:
    p, q = normalize(p, q)
    if (p, q) in SPECIAL_XI:
        return LensSpec(p, q, SPECIAL_XI[(p, q)])
    # r q - p s = -1; prefer r = -q (then Xi^2 = E) or r = q (then Xi M Xi = Lambda)
    if sigma_plus_condition(p, q):
        r = -q
    elif sigma_minus_condition(p, q):
        r = q
    else:
        r = (-pow(q, -1, p)) % p
    s, rem = divmod(r * q + 1, p)
    assert rem == 0
    return LensSpec(p, q, ((r, p), (s, q)))


def sigma_plus_exists(spec: LensSpec) -> bool:
    return sigma_plus_condition(spec.p, spec.q)


def sigma_minus_exists(spec: LensSpec) -> bool:
    return sigma_minus_condition(spec.p, spec.q)


def listed_sigmas(spec: LensSpec) -> dict:
    """Which of sigma_+ / sigma_- the case-by-case list declares defined.

    Differs from the arithmetic predicates only for L(0, 1), where the list
    names sigma_- alone although q^2 + p s = 1 holds with s = 0.
    """
    if (spec.p, spec.q) == (0, 1):
        return {"sigma_plus": False, "sigma_minus": True}
    return {"sigma_plus": sigma_plus_exists(spec), "sigma_minus": sigma_minus_exists(spec)}


def isometry_coincidence(spec: LensSpec) -> bool:
    p, q = spec.p, spec.q
    return p > 2 and (q * q - 1) % p != 0 and (q * q + 1) % p != 0


def lens_equivalent(p: int, q: int, q2: int) -> bool:
    _check_coprime(p, q)
    _check_coprime(p, q2)
    if p == 0:
        return q2 == q or q * q2 == 1
    return (q2 - q) % p == 0 or (q * q2 - 1) % p == 0


SIGN_SUM = "sign-sum"  # (a, b, c) . n = (-1)^(a+b+c) n


@dataclass(frozen=True)
class Pi0Table:
    """pi_0 of the model groups and of the diffeomorphism groups they model.

    A      -- group generated by rotations and the listed chart-preserving maps
    A_fol  -- A together with whichever of sigma_± is defined
    D_lp, D_fol_plus, D_fol -- leaf preserving, core preserving foliated, and
              all foliated diffeomorphisms of L(p, q)
    Gamma  -- mapping classes of the solid torus
    """

    groups: dict = field(default_factory=dict)

    def __getitem__(self, key: str) -> GroupDescriptor:
        return self.groups[key]

    def as_strings(self) -> dict:
        return {k: str(v) for k, v in self.groups.items()}


def pi0_groups(spec: LensSpec) -> Pi0Table:
    p, q = spec.p, spec.q
    gamma = pi0_descriptor_gamma()
    if (p, q) == (0, 1):
        a = gamma
        a_fol = semidirect(Z, Z2 ** 3, SIGN_SUM)
    elif (p, q) in ((1, 0), (2, 1)):
        a = product(Z2, Z2)
        a_fol = Dih(Z4)
    elif sigma_plus_exists(spec):
        a = Z2
        a_fol = product(Z2, Z2)
    elif sigma_minus_exists(spec):
        a = Z2
        a_fol = Z4
    else:
        a = Z2
        a_fol = Z2
    return Pi0Table({
        "A": a,
        "A_fol": a_fol,
        "D_lp": a,
        "D_fol_plus": a,
        "D_fol": a_fol,
        "Gamma": gamma,
    })


def classify(p: int, q: int) -> dict:
    """JSON-ready classification report."""
    spec = canonical_spec(p, q)
    listed = listed_sigmas(spec)
    return {
        "p": spec.p,
        "q": spec.q,
        "xi": spec.xi_list(),
        "sigma_plus": sigma_plus_exists(spec),
        "sigma_minus": sigma_minus_exists(spec),
        "sigma_plus_listed": listed["sigma_plus"],
        "sigma_minus_listed": listed["sigma_minus"],
        "isometry_coincide": isometry_coincidence(spec),
        "pi0": pi0_groups(spec).as_strings(),
    }
