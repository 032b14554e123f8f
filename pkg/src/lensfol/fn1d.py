"""Smooth functions of one real variable with a derivative oracle.

Functions are vectorised: every callable takes and returns float ndarrays of
any shape.  Derivatives come from analytic callables when supplied and
otherwise from a fourth order finite-difference stencil with step
eps**(1/5) * max(1, |t|), switching to one-sided stencils near the ends of
the domain so that nothing is evaluated outside it.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Callable, Optional

import numpy as np

from .errors import NonzeroAtOrigin, NotEven, NotMonotone

EPS = np.finfo(float).eps
FD_STEP = EPS ** 0.2
QUAD_NODES = 32

PRESERVING = "preserving"
REVERSING = "reversing"

Array = np.ndarray
Func = Callable[[Array], Array]


@lru_cache(maxsize=None)
def gauss_legendre01(n: int = QUAD_NODES) -> tuple:
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=None)
def _fd_weights(offsets: tuple, order: int) -> np.ndarray:
    # sum_j w_j o_j^k / k! = [k == order]
    o = np.asarray(offsets, float)
    k = np.arange(len(o))
    V = o[None, :] ** k[:, None] / np.array([factorial(i) for i in k])[:, None]
    rhs = np.zeros(len(o))
    rhs[order] = 1.0
    return np.linalg.solve(V, rhs)


_CENTRAL = (-2, -1, 0, 1, 2)
_FORWARD = {1: (0, 1, 2, 3, 4), 2: (0, 1, 2, 3, 4, 5)}
_BACKWARD = {k: tuple(-o for o in v) for k, v in _FORWARD.items()}


def finite_difference(fun: Func, t, order: int, lo: float = -np.inf, hi: float = np.inf) -> Array:
    t = np.asarray(t, float)
    h = FD_STEP * np.maximum(1.0, np.abs(t))
    out = np.empty_like(t)
    central = (t - 2 * h >= lo) & (t + 2 * h <= hi)
    forward = ~central & (t - 2 * h < lo)
    backward = ~central & ~forward
    for mask, offsets in ((central, _CENTRAL), (forward, _FORWARD[order]), (backward, _BACKWARD[order])):
        if not mask.any():
            continue
        tm, hm = t[mask], h[mask]
        w = _fd_weights(offsets, order)
        acc = np.zeros_like(tm)
        for o, wk in zip(offsets, w):
            if wk != 0.0:
                acc += wk * fun(tm + o * hm)
        out[mask] = acc / hm ** order
    return out


def _as_array(t):
    arr = np.asarray(t, float)
    return arr, arr.ndim == 0


@dataclass(frozen=True)
class Fn1D:
    value: Func
    lo: float
    hi: float
    d1: Optional[Func] = None
    d2: Optional[Func] = None
    name: str = ""

    def __call__(self, t):
        arr, scalar = _as_array(t)
        out = np.asarray(self.value(arr), float)
        return float(out) if scalar else out

    def deriv(self, t, order: int = 1):
        arr, scalar = _as_array(t)
        if order == 0:
            out = self.value(arr)
        elif order == 1:
            out = self.d1(arr) if self.d1 else finite_difference(self.value, arr, 1, self.lo, self.hi)
        elif order == 2:
            if self.d2:
                out = self.d2(arr)
            elif self.d1:
                out = finite_difference(self.d1, arr, 1, self.lo, self.hi)
            else:
                out = finite_difference(self.value, arr, 2, self.lo, self.hi)
        else:
            raise ValueError("derivatives up to order 2 only")
        out = np.asarray(out, float)
        return float(out) if scalar else out

    def grid(self, n: int) -> Array:
        return np.linspace(self.lo, self.hi, n)

    def check_derivatives(self, n: int = 64) -> float:
        """Largest relative gap between the analytic first and second
        derivatives and finite differences of the value callable."""
        t = self.grid(n)
        worst = 0.0
        for order, fn in ((1, self.d1), (2, self.d2)):
            if fn is None:
                continue
            exact = fn(t)
            approx = finite_difference(self.value, t, order, self.lo, self.hi)
            worst = max(worst, float(np.max(np.abs(exact - approx) / np.maximum(1.0, np.abs(exact)))))
        return worst


def identity_fn(lo: float = 0.0, hi: float = 1.0) -> Fn1D:
    return Fn1D(lambda t: np.array(t, float, copy=True), lo, hi,
                lambda t: np.ones_like(t), lambda t: np.zeros_like(t), "id")


def polynomial(coeffs, lo: float = 0.0, hi: float = 1.0, name: str = "") -> Fn1D:
    """Polynomial with coefficients in increasing degree."""
    P = np.polynomial.Polynomial(coeffs)
    dP, ddP = P.deriv(1), P.deriv(2)
    return Fn1D(P, lo, hi, dP, ddP, name or f"poly{list(coeffs)}")


# --- Hadamard quotient and Whitney division ---------------------------------

def hadamard_div(phi, nodes: int = QUAD_NODES, tol: float = 1e-12,
                 direct_above: Optional[float] = 1e-2) -> Fn1D:
    """g with phi(t) = t g(t), g(t) = int_0^1 phi'(s t) ds.

    For |t| >= direct_above (and t != 0) the quotient phi(t) / t is used
    instead of the quadrature; it is the same function and costs one
    evaluation.  Pass 0 when phi keeps full relative precision near 0, or
    None for quadrature everywhere.
    """
    fn = phi.fn if isinstance(phi, Diffeo01) else phi
    if abs(fn(0.0)) > tol:
        raise NonzeroAtOrigin(f"phi(0) = {fn(0.0)!r}")
    x, w = gauss_legendre01(nodes)
    cut = np.inf if direct_above is None else direct_above

    def split(t, quad, direct):
        t = np.asarray(t, float)
        out = np.empty_like(t)
        far = (np.abs(t) >= cut) & (t != 0.0)
        if far.any():
            out[far] = direct(t[far])
        if (~far).any():
            out[~far] = quad(t[~far])
        return out

    def value(t):
        return split(t, lambda s: fn.deriv(s[:, None] * x, 1) @ w,
                     lambda s: fn(s) / s)

    def d1(t):
        return split(t, lambda s: fn.deriv(s[:, None] * x, 2) @ (w * x),
                     lambda s: (fn.deriv(s, 1) * s - fn(s)) / (s * s))

    return Fn1D(value, fn.lo, fn.hi, d1, None, f"hadamard({fn.name})")


def evenness_defect(gamma: Fn1D, n: int = 257) -> float:
    t = np.linspace(0.0, gamma.hi, n)
    return float(np.max(np.abs(gamma(t) - gamma(-t))))


def whitney_even_root(gamma: Fn1D, s0_factor: float = 1e-4, nodes: int = QUAD_NODES,
                      even_tol: float = 1e-10) -> Fn1D:
    """The unique smooth phi on [0, a^2] with gamma(t) = phi(t^2).

    The value is gamma(sqrt s).  The derivative is gamma'(sqrt s) / (2 sqrt s)
    for s >= s0 = s0_factor * a^2 and 1/2 int_0^1 gamma''(u sqrt s) du below,
    where the quotient loses precision.
    """
    a = gamma.hi
    if abs(gamma.lo + a) > 1e-12 * max(1.0, a):
        raise NotEven("domain must be symmetric about 0")
    defect = evenness_defect(gamma)
    if defect > even_tol:
        raise NotEven(f"max |gamma(t) - gamma(-t)| = {defect:.3e}")
    s0 = s0_factor * a * a
    x, w = gauss_legendre01(nodes)

    def value(s):
        return gamma(np.sqrt(np.maximum(np.asarray(s, float), 0.0)))

    def d1(s):
        s = np.asarray(s, float)
        far = s >= s0
        out = np.empty_like(s)
        if far.any():
            r = np.sqrt(s[far])
            out[far] = gamma.deriv(r, 1) / (2.0 * r)
        near = ~far
        if near.any():
            r = np.sqrt(np.maximum(s[near], 0.0))
            out[near] = 0.5 * (gamma.deriv(r[:, None] * x, 2) @ w)
        return out

    return Fn1D(value, 0.0, a * a, d1, None, f"whitney({gamma.name})")


@dataclass(frozen=True)
class WhitneyBound:
    sup_phi_prime: float
    half_sup_gamma_2: float

    def holds(self, slack: float = 1e-6) -> bool:
        return self.sup_phi_prime <= self.half_sup_gamma_2 + slack


def whitney_bound(gamma: Fn1D, phi: Fn1D, n: int = 512) -> WhitneyBound:
    """sup |phi'| against (1/2) sup |gamma''| on uniform grids."""
    return WhitneyBound(
        float(np.max(np.abs(phi.deriv(phi.grid(n), 1)))),
        0.5 * float(np.max(np.abs(gamma.deriv(np.linspace(0.0, gamma.hi, n), 2)))),
    )


# --- diffeomorphisms of [0, 1] ------------------------------------------------

ENDPOINT_TOL = 1e-8


@dataclass(frozen=True)
class Diffeo01:
    fn: Fn1D
    orientation: str = PRESERVING
    check: bool = True

    def __post_init__(self):
        if self.orientation not in (PRESERVING, REVERSING):
            raise ValueError(f"unknown orientation {self.orientation!r}")
        if self.check:
            self.validate()

    def validate(self, n: int = 256, strict: bool = True) -> None:
        start, end = (0.0, 1.0) if self.orientation == PRESERVING else (1.0, 0.0)
        v0, v1 = self.fn(0.0), self.fn(1.0)
        if abs(v0 - start) > ENDPOINT_TOL or abs(v1 - end) > ENDPOINT_TOL:
            raise NotMonotone(f"endpoints map to {v0!r}, {v1!r} ({self.orientation})")
        d = self.fn.deriv(np.linspace(0.0, 1.0, n), 1)
        sign = 1.0 if self.orientation == PRESERVING else -1.0
        ok = sign * d > 0 if strict else sign * d >= 0
        if not np.all(ok):
            raise NotMonotone("derivative changes sign")

    @property
    def preserving(self) -> bool:
        return self.orientation == PRESERVING

    def __call__(self, t):
        return self.fn(t)

    def deriv(self, t, order: int = 1):
        return self.fn.deriv(t, order)

    @property
    def name(self) -> str:
        return self.fn.name


def diffeo(value: Func, d1: Optional[Func] = None, d2: Optional[Func] = None,
           orientation: str = PRESERVING, name: str = "") -> Diffeo01:
    return Diffeo01(Fn1D(value, 0.0, 1.0, d1, d2, name), orientation)


def identity() -> Diffeo01:
    return Diffeo01(identity_fn())


def reversal() -> Diffeo01:
    return diffeo(lambda t: 1.0 - t, lambda t: -np.ones_like(t), lambda t: np.zeros_like(t),
                  REVERSING, "1-t")


def power_map(k: float) -> Diffeo01:
    """t -> t^k; only a diffeomorphism for k = 1, so built unchecked."""
    fn = Fn1D(lambda t: t ** k, 0.0, 1.0, lambda t: k * t ** (k - 1),
              lambda t: k * (k - 1) * t ** (k - 2), f"t^{k}")
    return Diffeo01(fn, PRESERVING, check=False)


def compose(outer: Diffeo01, inner: Diffeo01) -> Diffeo01:
    f, g = outer, inner

    def value(t):
        return f(g(t))

    def d1(t):
        return f.deriv(g(t), 1) * g.deriv(t, 1)

    def d2(t):
        u = g(t)
        g1 = g.deriv(t, 1)
        return f.deriv(u, 2) * g1 * g1 + f.deriv(u, 1) * g.deriv(t, 2)

    orient = PRESERVING if f.preserving == g.preserving else REVERSING
    return Diffeo01(Fn1D(value, 0.0, 1.0, d1, d2, f"{f.name}∘{g.name}"), orient, check=False)


def contract_to_id(phi: Diffeo01, t: float) -> Diffeo01:
    """(1 - t) phi + t id, written so that the endpoints stay exact."""
    if not phi.preserving:
        raise NotMonotone("contraction is defined on orientation preserving maps")
    t = float(t)

    def value(x):
        x = np.asarray(x, float)
        v = phi(x)
        out = v + t * (x - v)
        # phi may miss an endpoint by an ulp; the contraction must not
        return np.where(x == 0.0, 0.0, np.where(x == 1.0, 1.0, out))

    def d1(x):
        return (1.0 - t) * phi.deriv(x, 1) + t

    def d2(x):
        return (1.0 - t) * phi.deriv(x, 2)

    return Diffeo01(Fn1D(value, 0.0, 1.0, d1, d2, f"H({phi.name},{t:g})"), PRESERVING, check=False)


def _newton_inverse(phi: Diffeo01, y: Array, max_iter: int = 100) -> Array:
    increasing = phi.preserving
    shape = np.shape(y)
    y = np.clip(np.asarray(y, float).ravel(), 0.0, 1.0)
    lo = np.zeros_like(y)
    hi = np.ones_like(y)
    x = y.copy() if increasing else 1.0 - y
    active = np.ones(y.shape, bool)
    for _ in range(max_iter):
        if not active.any():
            break
        xa, ya = x[active], y[active]
        r = phi(xa) - ya
        too_big = (r > 0) if increasing else (r < 0)
        hi_a = np.where(too_big, xa, hi[active])
        lo_a = np.where(too_big, lo[active], xa)
        d = phi.deriv(xa, 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - r / d
        bad = ~np.isfinite(xn) | (xn <= lo_a) | (xn >= hi_a)
        xn = np.where(bad, 0.5 * (lo_a + hi_a), xn)
        converged = (np.abs(r) <= 2 * EPS) | (np.abs(xn - xa) <= 2 * EPS * np.maximum(1.0, np.abs(xa)))
        x[active] = np.where(np.abs(r) <= 2 * EPS, xa, xn)
        lo[active], hi[active] = lo_a, hi_a
        idx = np.flatnonzero(active)
        active[idx[converged]] = False
    return x.reshape(shape)


def invert(phi: Diffeo01) -> Diffeo01:
    if phi.check is False:
        # the bracketed Newton step copes with isolated critical points
        phi.validate(strict=False)

    def value(y):
        return _newton_inverse(phi, np.asarray(y, float))

    def d1(y):
        return 1.0 / phi.deriv(value(y), 1)

    def d2(y):
        x = value(y)
        p1 = phi.deriv(x, 1)
        return -phi.deriv(x, 2) / p1 ** 3

    return Diffeo01(Fn1D(value, 0.0, 1.0, d1, d2, f"inv({phi.name})"), phi.orientation, check=False)


def flip_conjugate(phi: Diffeo01) -> Diffeo01:
    """t -> 1 - phi(1 - t)."""

    def value(t):
        return 1.0 - phi(1.0 - np.asarray(t, float))

    def d1(t):
        return phi.deriv(1.0 - np.asarray(t, float), 1)

    def d2(t):
        return -phi.deriv(1.0 - np.asarray(t, float), 2)

    return Diffeo01(Fn1D(value, 0.0, 1.0, d1, d2, f"flip({phi.name})"), phi.orientation, check=False)


# --- building blocks for seeded random diffeomorphisms ----------------------

def quadratic_bump(b: float) -> Diffeo01:
    """t + b t (1 - t), a diffeomorphism for |b| < 1."""
    return Diffeo01(polynomial([0.0, 1.0 + b, -b], name=f"bump({b:.4g})"))


def exp_warp(lam: float) -> Diffeo01:
    """(e^{lam t} - 1) / (e^{lam} - 1)."""
    if abs(lam) < 1e-8:
        return identity()
    c = np.expm1(lam)
    return diffeo(lambda t: np.expm1(lam * t) / c,
                  lambda t: lam * np.exp(lam * t) / c,
                  lambda t: lam * lam * np.exp(lam * t) / c,
                  name=f"exp({lam:.4g})")


def sine_warp(c: float) -> Diffeo01:
    """t + c sin(2 pi t) / (2 pi), a diffeomorphism for |c| < 1."""
    w = 2.0 * np.pi
    return diffeo(lambda t: t + c * np.sin(w * t) / w,
                  lambda t: 1.0 + c * np.cos(w * t),
                  lambda t: -c * w * np.sin(w * t),
                  name=f"sine({c:.4g})")


def sample_diffeo(rng: np.random.Generator) -> Diffeo01:
    b = rng.uniform(-0.9, 0.9)
    lam = rng.uniform(-3.0, 3.0)
    c = rng.uniform(-0.8, 0.8)
    return compose(quadratic_bump(b), compose(exp_warp(lam), sine_warp(c)))


# --- named functions for command-line specs ---------------------------------

def _named(name: str, a: float) -> Fn1D:
    lo, hi = -a, a
    table = {
        "t2": ([0.0, 0.0, 1.0], None),
        "t3": ([0.0, 0.0, 0.0, 1.0], None),
        "t4": ([0.0, 0.0, 0.0, 0.0, 1.0], None),
        "cos": (None, (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))),
        "cos_minus_1": (None, (lambda t: np.cos(t) - 1.0, lambda t: -np.sin(t), lambda t: -np.cos(t))),
        "gauss": (None, (lambda t: np.exp(-t * t), lambda t: -2 * t * np.exp(-t * t),
                         lambda t: (4 * t * t - 2) * np.exp(-t * t))),
        "sin": (None, (np.sin, np.cos, lambda t: -np.sin(t))),
    }
    if name not in table:
        raise ValueError(f"unknown function {name!r}; known: {sorted(table)}")
    coeffs, fns = table[name]
    if coeffs is not None:
        return polynomial(coeffs, lo, hi, name)
    return Fn1D(fns[0], lo, hi, fns[1], fns[2], name)


def fn_from_spec(spec, a: float = 1.0) -> Fn1D:
    """Build a function on [-a, a] from a name or a JSON-style dict:
    {"kind": "poly", "coeffs": [...]}, {"kind": "cos", "freq": w},
    {"kind": "gauss", "width": w} or {"kind": "<name>"}."""
    if isinstance(spec, str):
        return _named(spec, a)
    kind = spec.get("kind")
    if kind == "poly":
        return polynomial(spec["coeffs"], -a, a, "poly")
    if kind == "cos":
        w = float(spec.get("freq", 1.0))
        return Fn1D(lambda t: np.cos(w * t), -a, a, lambda t: -w * np.sin(w * t),
                    lambda t: -w * w * np.cos(w * t), f"cos({w:g}t)")
    if kind == "gauss":
        w = float(spec.get("width", 1.0))
        k = 1.0 / (w * w)
        return Fn1D(lambda t: np.exp(-k * t * t), -a, a, lambda t: -2 * k * t * np.exp(-k * t * t),
                    lambda t: (4 * k * k * t * t - 2 * k) * np.exp(-k * t * t), f"gauss({w:g})")
    return _named(kind, a)
