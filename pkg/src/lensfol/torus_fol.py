"""Foliated diffeomorphisms of the solid torus T = f^{-1}[0, 1].

Points are batches ``(a, v)`` with ``a`` of shape (N,) holding base angles
and ``v`` of shape (N, n) holding fiber vectors.  A fiber of rank 2 is read
as the complex number z = v[0] + i v[1].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import fn1d
from .errors import (FiberRankNot2, InvalidInput, NotDefinite, NotDiffeo, NotEven,
                     NotFoliated, NotOrientationPreserving)
from .fn1d import Diffeo01, Fn1D
from .gamma_group import GammaElem, inverse as gamma_inverse
from .homog_bundle import TWO_PI, HomogFn

Points = tuple  # (a, v)
CHUNK = 2048
DELTA0_TOL = 1e-8
FOLIATION_TOL = 1e-8


def wrap(a) -> np.ndarray:
    return np.mod(np.asarray(a, float), TWO_PI)


def angle_gap(a, b) -> np.ndarray:
    """Distance on the circle between angles a and b."""
    d = np.mod(np.asarray(a, float) - np.asarray(b, float) + np.pi, TWO_PI) - np.pi
    return np.abs(d)


def point_distance(p: Points, q: Points) -> np.ndarray:
    return angle_gap(p[0], q[0]) + np.linalg.norm(np.asarray(p[1]) - np.asarray(q[1]), axis=-1)


@dataclass(frozen=True)
class TorusMap:
    forward: Callable
    inverse: Callable
    claims: frozenset = frozenset()
    name: str = ""

    def __call__(self, a, v) -> Points:
        return self.forward(np.asarray(a, float), np.asarray(v, float))

    def __matmul__(self, other: "TorusMap") -> "TorusMap":
        f, g = self, other

        def fwd(a, v):
            return f.forward(*g.forward(a, v))

        def inv(a, v):
            return g.inverse(*f.inverse(a, v))

        return TorusMap(fwd, inv, f.claims & g.claims, f"{f.name}∘{g.name}")

    @property
    def inv(self) -> "TorusMap":
        return TorusMap(self.inverse, self.forward, self.claims, f"{self.name}^-1")


def apply(h: TorusMap, a, v, chunk: int = CHUNK) -> Points:
    """h on a large batch, in chunks to bound the memory of nested quadratures."""
    a = np.asarray(a, float)
    v = np.asarray(v, float)
    if len(a) <= chunk:
        return h(a, v)
    parts = [h(a[i:i + chunk], v[i:i + chunk]) for i in range(0, len(a), chunk)]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def identity_map() -> TorusMap:
    ident = lambda a, v: (np.array(a, float), np.array(v, float))
    return TorusMap(ident, ident, frozenset({"foliated", "leaf_preserving", "boundary_fixed"}), "id")


def _rank2(v):
    if v.shape[-1] != 2:
        raise FiberRankNot2(f"fiber rank {v.shape[-1]}")


def _g_forward(A: GammaElem):
    def fwd(a, v):
        _rank2(v)
        z = v[..., 0] + 1j * v[..., 1]
        if A.delta == -1:
            z = np.conj(z)
        z = z * np.exp(1j * A.m * a)
        return wrap(A.eps * a), np.stack([z.real, z.imag], axis=-1)
    return fwd


def g_A(A: GammaElem) -> TorusMap:
    """(alpha, z) -> (alpha^eps, alpha^m z^delta), z^-1 read as conj(z)."""
    return TorusMap(_g_forward(A), _g_forward(gamma_inverse(A)),
                    frozenset({"foliated", "leaf_preserving"}), f"g{A.eps, A.delta, A.m}")


def rotation(alpha: float, beta: float) -> TorusMap:
    def make(s):
        rot = np.exp(1j * s * beta)

        def fwd(a, v):
            _rank2(v)
            z = (v[..., 0] + 1j * v[..., 1]) * rot
            return wrap(a + s * alpha), np.stack([z.real, z.imag], axis=-1)
        return fwd

    return TorusMap(make(1.0), make(-1.0), frozenset({"foliated", "leaf_preserving"}),
                    f"rho({alpha:g},{beta:g})")


def _require_definite(f: HomogFn):
    if not f.is_definite():
        raise NotDefinite("f is not positive off the zero section")


def theta(phi: Diffeo01, f: HomogFn, check: bool = True,
          direct_above: Optional[float] = 1e-2) -> TorusMap:
    """x -> g(f(x))^{1/k} x with g the Hadamard quotient of phi; phi o f = f o theta(phi)."""
    if not phi.preserving:
        raise NotOrientationPreserving("theta needs an orientation preserving phi")
    if check:
        _require_definite(f)
    g = fn1d.hadamard_div(phi, direct_above=direct_above)
    phi_inv = fn1d.invert(phi)
    k = f.k

    def fwd(a, v):
        s = np.clip(f(a, v), 0.0, None)
        return np.array(a, float), g(s)[..., None] ** (1.0 / k) * v

    def inv(a, w):
        s = np.clip(f(a, w), 0.0, 1.0)
        scale = np.broadcast_to(g(phi_inv(s))[..., None] ** (1.0 / k), w.shape)
        # the core is fixed; guards 0/0 when phi'(0) = 0
        return np.array(a, float), np.divide(w, scale, out=np.zeros_like(w), where=scale > 0)

    return TorusMap(fwd, inv, frozenset({"foliated", "boundary_fixed"}), f"theta({phi.name})")


# --- sampling -----------------------------------------------------------------

def random_directions(rng: np.random.Generator, N: int, n: int = 2) -> np.ndarray:
    u = rng.normal(size=(N, n))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def to_level(f: HomogFn, a, u, level) -> np.ndarray:
    """Rescale fiber directions u so that f(a, x) = level."""
    level = np.broadcast_to(np.asarray(level, float), np.shape(a))
    return (level / f(a, u))[..., None] ** (1.0 / f.k) * u


def sample_points(f: HomogFn, N: int, rng: np.random.Generator,
                  levels: tuple = (0.0, 1.0)) -> Points:
    a = rng.uniform(0.0, TWO_PI, N)
    u = random_directions(rng, N, f.n)
    return a, to_level(f, a, u, rng.uniform(*levels, N))


def boundary_points(f: HomogFn, N: int, rng: np.random.Generator) -> Points:
    return sample_points(f, N, rng, (1.0, 1.0))


def leaf_grid(f: HomogFn, leaves: int = 32, per_leaf: int = 64) -> tuple:
    """Stratified points on leaves f = t_j, t_j at cell midpoints of (0, 1].

    Returns (levels, a, v) with a, v of shape (leaves * per_leaf, ...).
    """
    t = (np.arange(leaves) + 0.5) / leaves
    t[-1] = 1.0
    side = max(1, int(round(np.sqrt(per_leaf))))
    na, nb = side, -(-per_leaf // side)
    aa, bb = np.meshgrid((np.arange(na) + 0.5) / na * TWO_PI,
                         (np.arange(nb) + 0.25) / nb * TWO_PI, indexing="ij")
    aa, bb = aa.ravel()[:per_leaf], bb.ravel()[:per_leaf]
    if f.n == 2:
        u = np.stack([np.cos(bb), np.sin(bb)], axis=-1)
    else:
        u = random_directions(np.random.default_rng(0), per_leaf, f.n)
    a = np.tile(aa, leaves)
    U = np.tile(u, (leaves, 1))
    lv = np.repeat(t, per_leaf)
    return lv, a, to_level(f, a, U, lv)


# --- checks ---------------------------------------------------------------------

@dataclass(frozen=True)
class FoliationReport:
    max_spread: float
    leaves: int
    per_leaf: int
    tol: float = FOLIATION_TOL

    @property
    def foliated(self) -> bool:
        return self.max_spread <= self.tol


def is_foliated(h: TorusMap, f0: HomogFn, f1: Optional[HomogFn] = None,
                leaves: int = 32, per_leaf: int = 64, tol: float = FOLIATION_TOL) -> FoliationReport:
    f1 = f0 if f1 is None else f1
    _, a, v = leaf_grid(f0, leaves, per_leaf)
    vals = f1(*apply(h, a, v)).reshape(leaves, per_leaf)
    spread = float(np.max(vals.max(axis=1) - vals.min(axis=1)))
    return FoliationReport(spread, leaves, per_leaf, tol)


def stabilizer_residual(phi: Callable, h: TorusMap, f: HomogFn, samples: int = 4096,
                        seed: int = 0, f1: Optional[HomogFn] = None) -> float:
    """max |phi(f(x)) - f(h(x))| over seeded points of T."""
    f1 = f if f1 is None else f1
    a, v = sample_points(f, samples, np.random.default_rng(seed))
    return float(np.max(np.abs(phi(f(a, v)) - f1(*apply(h, a, v)))))


def map_residual(h1: TorusMap, h2: TorusMap, pts: Points) -> float:
    return float(np.max(point_distance(apply(h1, *pts), apply(h2, *pts))))


# --- extraction sigma -------------------------------------------------------------

def default_ray(f: HomogFn) -> Points:
    """Boundary point over angle 0 along the first eigen-direction of A(0)."""
    A0 = f.quadratic_field().A(np.zeros(1))[0]
    u = np.linalg.eigh(A0)[1][:, 0]
    a = np.zeros(1)
    return a, to_level(f, a, u[None, :], 1.0)


@dataclass(frozen=True)
class SigmaReport:
    min_gamma_prime: float
    delta0: float
    evenness: float
    spread: Optional[float] = None

    @property
    def diffeo(self) -> bool:
        return self.min_gamma_prime > 0.0 and self.delta0 > DELTA0_TOL


def sigma_with_report(h: TorusMap, f0: HomogFn, f1: Optional[HomogFn] = None,
                      ray: Optional[Points] = None, check_foliated: bool = True,
                      reach: float = 1.0) -> tuple:
    """Interval map phi with phi o f0 = f1 o h, read off along the ray t -> t x0.

    ``reach`` limits the ray to |t| <= reach, in which case phi lives on
    [0, reach^2].
    """
    f1 = f0 if f1 is None else f1
    if f0.k != 2:
        raise InvalidInput("the source function must be 2-homogeneous")
    spread = None
    if check_foliated:
        rep = is_foliated(h, f0, f1)
        spread = rep.max_spread
        if not rep.foliated:
            raise NotFoliated(f"leaf spread {spread:.3e}")
    ra, rv = default_ray(f0) if ray is None else ray
    ra = np.asarray(ra, float).reshape(1)
    rv = np.asarray(rv, float).reshape(1, -1)
    rv = to_level(f0, ra, rv, 1.0)

    def gamma_value(t):
        t = np.asarray(t, float)
        flat = t.ravel()
        out = f1(*apply(h, np.full(flat.shape, ra[0]), flat[:, None] * rv[0]))
        return out.reshape(t.shape)

    gamma = Fn1D(gamma_value, -reach, reach, name=f"gamma({h.name})")
    try:
        phi_fn = fn1d.whitney_even_root(gamma)
    except NotEven as exc:
        raise NotFoliated(f"leaf values along the ray are not even: {exc}") from exc
    tt = np.linspace(0.0, reach, 257)[1:]
    report = SigmaReport(float(np.min(gamma.deriv(tt, 1))), 0.5 * gamma.deriv(0.0, 2),
                         fn1d.evenness_defect(gamma), spread)
    if not report.diffeo:
        raise NotDiffeo(f"gamma' min {report.min_gamma_prime:.3e}, delta(0) = {report.delta0:.3e}")
    return phi_fn, report


def sigma(h: TorusMap, f0: HomogFn, f1: Optional[HomogFn] = None,
          ray: Optional[Points] = None, check_foliated: bool = True) -> Diffeo01:
    phi_fn, _ = sigma_with_report(h, f0, f1, ray, check_foliated)
    return Diffeo01(phi_fn)


# --- deformation retraction -------------------------------------------------------

@dataclass
class Retraction:
    """t -> G(h, t) = theta(H(sigma(h^-1), 1 - t)) o h, with sigma(h^-1) computed once."""

    h: TorusMap
    f: HomogFn
    check_foliated: bool = True
    _phi: Diffeo01 = field(init=False, repr=False)

    def __post_init__(self):
        self._phi = sigma(self.h.inv, self.f, check_foliated=self.check_foliated)

    @property
    def phi(self) -> Diffeo01:
        return self._phi

    def __call__(self, t: float) -> TorusMap:
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise InvalidInput(f"t = {t} outside [0, 1]")
        # values of sigma(h^-1) are exact near 0, so divide directly
        G = theta(fn1d.contract_to_id(self._phi, 1.0 - t), self.f, check=False,
                  direct_above=0.0) @ self.h
        return TorusMap(G.forward, G.inverse, self.h.claims, f"G({self.h.name},{t:g})")


def retract(h: TorusMap, t: float, f: HomogFn) -> TorusMap:
    return Retraction(h, f)(t)


def leaf_residual(h: TorusMap, f: HomogFn, samples: int = 4096, seed: int = 0) -> float:
    """max |f(h(x)) - f(x)|; zero iff h is leaf preserving on the samples."""
    return stabilizer_residual(lambda s: s, h, f, samples, seed)
