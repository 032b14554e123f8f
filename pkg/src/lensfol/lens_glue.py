"""Two solid tori glued along their boundaries, L = T0 ∪_xi T1.

A point of L is stored in one of the two charts.  Chart c is the solid
torus f_c <= 1; the open annulus 0 < f_0 < 1 is identified with
0 < f_1 < 1 through

    xi(x) = (1 - f0(x))^{1/k1} psi(x / f0(x)^{1/k0}),

where psi is the boundary map (a, b) -> Xi (a, b) in angle coordinates,
b being the argument of the fiber vector.  The glued function is f0 on
chart 0 and 1 - f1 on chart 1.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import fn1d
from .errors import (ChartSwapping, IncompatiblePair, InvalidInput, InvalidSpec,
                     NotDefinedForSpec, NotInGamma, OnBoundary, OnCore)
from .fn1d import PRESERVING, REVERSING, Diffeo01, Fn1D
from .gamma_group import DELTA, E, LAMBDA, MU, TAU, GammaElem, from_matrix
from .homog_bundle import TWO_PI, HomogFn
from .lens_arith import LensSpec, canonical_spec, listed_sigmas, sigma_minus_exists, sigma_plus_exists
from .torus_fol import (TorusMap, apply, g_A, identity_map, point_distance, random_directions,
                        rotation, sigma_with_report, theta, to_level, wrap)

P, S = "P", "S"  # chart preserving, chart swapping
COMPAT_TOL = 1e-8
RELATION_TOL = 1e-9
ANNULUS = (0.01, 0.99)
CORE_GAP = 1e-6
REACH = np.sqrt(0.75)


def _int_inverse(M) -> tuple:
    (a, b), (c, d) = M
    det = a * d - b * c
    return ((d * det, -b * det), (-c * det, a * det))


def _matmul(A, B) -> tuple:
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


@dataclass(frozen=True)
class GlueSpec:
    f0: HomogFn
    f1: HomogFn
    xi: tuple  # ((r, p), (s, q))
    lens: Optional[LensSpec] = None

    def __post_init__(self):
        (r, p), (s, q) = self.xi
        if r * q - p * s not in (1, -1):
            raise InvalidSpec("boundary matrix must be invertible over the integers")
        if self.f0.n != 2 or self.f1.n != 2:
            raise InvalidSpec("gluing needs rank 2 fibers")

    @classmethod
    def for_lens(cls, p: int, q: int, f0: Optional[HomogFn] = None,
                 f1: Optional[HomogFn] = None) -> "GlueSpec":
        ls = canonical_spec(p, q)
        z2 = HomogFn.norm_power(2)
        return cls(f0 or z2, f1 or z2, ls.xi, ls)

    @property
    def xi_inv(self) -> tuple:
        return _int_inverse(self.xi)

    def f(self, chart: int) -> HomogFn:
        return self.f0 if chart == 0 else self.f1

    def boundary_angles(self, a, b, inverse: bool = False):
        (r, p), (s, q) = self.xi_inv if inverse else self.xi
        return wrap(r * a + p * b), wrap(s * a + q * b)


def _fiber_angle(v) -> np.ndarray:
    return np.arctan2(v[..., 1], v[..., 0])


def _transition(spec: GlueSpec, a, v, src: int):
    fs, ft = spec.f(src), spec.f(1 - src)
    a = np.asarray(a, float)
    v = np.asarray(v, float)
    lv = fs(a, v)
    if np.any(lv <= 0.0):
        raise OnCore("transition undefined on the core circle")
    if np.any(lv >= 1.0):
        raise OnBoundary("transition undefined on the boundary torus")
    a2, b2 = spec.boundary_angles(a, _fiber_angle(v), inverse=src == 1)
    u = np.stack([np.cos(b2), np.sin(b2)], axis=-1)
    return a2, to_level(ft, a2, u, 1.0 - lv)


def xi(spec: GlueSpec, a, v):
    """Chart 0 -> chart 1 on the annulus; f0(x) + f1(xi(x)) = 1."""
    return _transition(spec, a, v, 0)


def xi_inv(spec: GlueSpec, a, v):
    return _transition(spec, a, v, 1)


def psi(spec: GlueSpec, a, v):
    """Boundary map f0 = 1 -> f1 = 1."""
    a2, b2 = spec.boundary_angles(np.asarray(a, float), _fiber_angle(np.asarray(v, float)))
    return a2, to_level(spec.f1, a2, np.stack([np.cos(b2), np.sin(b2)], axis=-1), 1.0)


@dataclass(frozen=True)
class LensPoints:
    """A batch of points of L, all stored in the same chart."""

    chart: int
    a: np.ndarray
    v: np.ndarray

    def __len__(self):
        return len(self.a)


def glued_f(spec: GlueSpec, pts: LensPoints) -> np.ndarray:
    val = spec.f(pts.chart)(pts.a, pts.v)
    return val if pts.chart == 0 else 1.0 - val


def transfer(spec: GlueSpec, pts: LensPoints) -> LensPoints:
    a, v = _transition(spec, pts.a, pts.v, pts.chart)
    return LensPoints(1 - pts.chart, a, v)


def sample_lens_points(spec: GlueSpec, chart: int, N: int, rng: np.random.Generator,
                       levels: tuple = (CORE_GAP, 1.0 - CORE_GAP)) -> LensPoints:
    """Uniform base angle and fiber direction; f_chart uniform in ``levels``."""
    a = rng.uniform(0.0, TWO_PI, N)
    u = random_directions(rng, N)
    return LensPoints(chart, a, to_level(spec.f(chart), a, u, rng.uniform(*levels, N)))


def lens_distance(spec: GlueSpec, p: LensPoints, q: LensPoints) -> np.ndarray:
    if q.chart != p.chart:
        q = transfer(spec, q)
    return point_distance((p.a, p.v), (q.a, q.v))


# --- maps of L given by chart pairs -------------------------------------------------

@dataclass(frozen=True)
class LensMap:
    """kind P: h_c maps chart c to chart c.  kind S: h_c maps chart c to chart 1 - c."""

    kind: str
    h0: TorusMap
    h1: TorusMap
    name: str = ""

    def __post_init__(self):
        if self.kind not in (P, S):
            raise ValueError(f"unknown kind {self.kind!r}")

    def __call__(self, pts: LensPoints) -> LensPoints:
        h = self.h0 if pts.chart == 0 else self.h1
        a, v = apply(h, pts.a, pts.v)
        return LensPoints(pts.chart if self.kind == P else 1 - pts.chart, a, v)

    def __matmul__(self, other: "LensMap") -> "LensMap":
        if other.kind == P:
            h0, h1 = self.h0 @ other.h0, self.h1 @ other.h1
        else:
            h0, h1 = self.h1 @ other.h0, self.h0 @ other.h1
        kind = P if self.kind == other.kind else S
        return LensMap(kind, h0, h1, f"{self.name}·{other.name}")

    @property
    def inv(self) -> "LensMap":
        if self.kind == P:
            return LensMap(P, self.h0.inv, self.h1.inv, f"{self.name}^-1")
        return LensMap(S, self.h1.inv, self.h0.inv, f"{self.name}^-1")

    def __pow__(self, n: int) -> "LensMap":
        base = self if n >= 0 else self.inv
        out = lens_identity()
        for _ in range(abs(n)):
            out = base @ out
        return out


def lens_identity() -> LensMap:
    return LensMap(P, identity_map(), identity_map(), "id")


def compatibility_residual(spec: GlueSpec, h: LensMap, samples: int = 1000,
                           seed: int = 0) -> float:
    """P: |xi h0 - h1 xi|, S: |xi^-1 h0 - h1 xi| on seeded annulus points of chart 0.

    Infinite when h0 pushes an annulus point onto a core or boundary.
    """
    pts = sample_lens_points(spec, 0, samples, np.random.default_rng(seed), ANNULUS)
    lhs_a, lhs_v = apply(h.h0, pts.a, pts.v)
    try:
        lhs = (xi if h.kind == P else xi_inv)(spec, lhs_a, lhs_v)
    except (OnCore, OnBoundary):
        return float("inf")
    rhs = apply(h.h1, *xi(spec, pts.a, pts.v))
    return float(np.max(point_distance(lhs, rhs)))


def leaf_residual_glued(spec: GlueSpec, h: LensMap, samples: int = 2000, seed: int = 0) -> float:
    """sup |glued_f(h(x)) - glued_f(x)| over points of both charts."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for c in (0, 1):
        pts = sample_lens_points(spec, c, samples, rng, (0.0, 1.0))
        worst = max(worst, float(np.max(np.abs(glued_f(spec, h(pts)) - glued_f(spec, pts)))))
    return worst


def map_distance(spec: GlueSpec, h: LensMap, g: LensMap, samples: int = 1000,
                 seed: int = 0) -> float:
    """Pointwise distance between h and g on seeded points of both charts."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for c in (0, 1):
        pts = sample_lens_points(spec, c, samples, rng)
        worst = max(worst, float(np.max(lens_distance(spec, h(pts), g(pts)))))
    return worst


# --- section and extraction ------------------------------------------------------------

def theta_glued(spec: GlueSpec, phi: Diffeo01,
                direct_above: Optional[float] = 1e-2) -> LensMap:
    """(theta_{f0}(phi); theta_{f1}(1 - phi(1 - t)))."""
    h0 = theta(phi, spec.f0, direct_above=direct_above)
    h1 = theta(fn1d.flip_conjugate(phi), spec.f1, direct_above=direct_above)
    return LensMap(P, h0, h1, f"Theta({phi.name})")


def _chart_sigma(h: TorusMap, f_src: HomogFn, f_dst: HomogFn, check_foliated: bool) -> Fn1D:
    phi, _ = sigma_with_report(h, f_src, f_dst, check_foliated=check_foliated, reach=REACH)
    return phi


def sigma_glued(spec: GlueSpec, h: LensMap, check: bool = True) -> Diffeo01:
    """phi with phi o glued_f = glued_f o h.

    Levels t <= 1/2 are read in chart 0 and levels above in chart 1.
    """
    if spec.f0.k != 2 or spec.f1.k != 2:
        raise InvalidInput("extraction needs 2-homogeneous chart functions")
    if check:
        res = compatibility_residual(spec, h)
        if res > COMPAT_TOL:
            raise IncompatiblePair(f"chart pair residual {res:.3e}")
    if h.kind == P:
        p0 = _chart_sigma(h.h0, spec.f0, spec.f0, check)
        p1 = _chart_sigma(h.h1, spec.f1, spec.f1, check)
        sign, orient = 1.0, PRESERVING
        lo = lambda t: p0(t)
        hi = lambda t: 1.0 - p1(1.0 - t)
    else:
        p0 = _chart_sigma(h.h0, spec.f0, spec.f1, check)
        p1 = _chart_sigma(h.h1, spec.f1, spec.f0, check)
        sign, orient = -1.0, REVERSING
        lo = lambda t: 1.0 - p0(t)
        hi = lambda t: p1(1.0 - t)

    def piecewise(t, low, high):
        t = np.asarray(t, float)
        out = np.empty_like(t)
        m = t <= 0.5
        if m.any():
            out[m] = low(t[m])
        if (~m).any():
            out[~m] = high(t[~m])
        return out

    def value(t):
        return piecewise(t, lo, hi)

    def d1(t):
        return piecewise(t, lambda s: sign * p0.deriv(s, 1), lambda s: sign * p1.deriv(1.0 - s, 1))

    return Diffeo01(Fn1D(value, 0.0, 1.0, d1, None, f"sigma({h.name})"), orient)


@dataclass
class GluedRetraction:
    """t -> Theta(H(sigma(h^-1), 1 - t)) o h on chart preserving maps."""

    spec: GlueSpec
    h: LensMap
    _phi: Diffeo01 = field(init=False, repr=False)

    def __post_init__(self):
        if self.h.kind != P:
            raise ChartSwapping("the retraction is defined on chart preserving maps only")
        self._phi = sigma_glued(self.spec, self.h.inv)

    @property
    def phi(self) -> Diffeo01:
        return self._phi

    def __call__(self, t: float) -> LensMap:
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise InvalidInput(f"t = {t} outside [0, 1]")
        G = theta_glued(self.spec, fn1d.contract_to_id(self._phi, 1.0 - t), direct_above=0.0) @ self.h
        return LensMap(P, G.h0, G.h1, f"G({self.h.name},{t:g})")


def retract_glued(spec: GlueSpec, h: LensMap, t: float) -> LensMap:
    return GluedRetraction(spec, h)(t)


# --- mapping class representatives ------------------------------------------------------

GAMMA_NAMES = {"delta_hat": DELTA, "lambda_hat": LAMBDA, "mu_hat": MU, "tau_hat": TAU}
MCG_NAMES = ("rho(α,β)", "delta_hat", "lambda_hat", "mu_hat", "tau_hat", "theta_hat",
             "sigma_plus", "sigma_minus")
_RHO = re.compile(r"^rho\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)$")


def _conjugate(spec: GlueSpec, A: GammaElem) -> GammaElem:
    """Xi A Xi^-1, the partner of A on chart 1."""
    M = _matmul(_matmul(spec.xi, A.matrix), spec.xi_inv)
    return from_matrix(M)


def _gamma_pair(kind: str, A0: GammaElem, A1: GammaElem, name: str) -> LensMap:
    return LensMap(kind, g_A(A0), g_A(A1), name)


def _lens_key(spec: GlueSpec):
    if spec.lens is None:
        raise NotDefinedForSpec("mapping class representatives need a lens space gluing")
    return spec.lens.p, spec.lens.q


def mcg_diffeo(spec: GlueSpec, name: str) -> LensMap:
    key = _lens_key(spec)
    m = _RHO.match(name.strip())
    if m:
        al, be = float(m.group(1)), float(m.group(2))
        (r, p), (s, q) = spec.xi
        return LensMap(P, rotation(al, be), rotation(r * al + p * be, s * al + q * be), name)
    if name in GAMMA_NAMES:
        A0 = GAMMA_NAMES[name]
        try:
            A1 = _conjugate(spec, A0)
        except NotInGamma as exc:
            raise NotDefinedForSpec(f"{name} is not defined for L{key}") from exc
        return _gamma_pair(P, A0, A1, name)
    if name == "theta_hat":
        if key != (2, 1):
            raise NotDefinedForSpec("theta_hat is defined for L(2,1) only")
        return _gamma_pair(P, LAMBDA * DELTA, DELTA * MU, name)
    listed = listed_sigmas(spec.lens)
    if name == "sigma_plus":
        if not (sigma_plus_exists(spec.lens) or listed["sigma_plus"]):
            raise NotDefinedForSpec(f"sigma_plus is not defined for L{key}")
        if key == (2, 1):
            return _gamma_pair(S, DELTA, DELTA ** -1, name)
        if _matmul(spec.xi, spec.xi) != ((1, 0), (0, 1)):
            raise NotDefinedForSpec(f"no sigma_plus pair for L{key} with this gluing matrix")
        return _gamma_pair(S, E, E, name)
    if name == "sigma_minus":
        if not (sigma_minus_exists(spec.lens) or listed["sigma_minus"]):
            raise NotDefinedForSpec(f"sigma_minus is not defined for L{key}")
        return _gamma_pair(S, LAMBDA, MU, name)
    raise InvalidInput(f"unknown map name {name!r}; expected one of {', '.join(MCG_NAMES)}")


_TOKEN = re.compile(r"^(rho\([^)]*\)|[a-z_]+)(?:\^(-?\d+))?$")


def tokenize(word) -> list:
    """'sigma_plus sigma_minus^-1' or a list of such tokens -> [(name, power)]."""
    if isinstance(word, str):
        word = re.findall(r"rho\([^)]*\)(?:\^-?\d+)?|[^\s*·]+", word)
    out = []
    for tok in word:
        m = _TOKEN.match(tok.strip())
        if not m:
            raise InvalidInput(f"cannot parse {tok!r}")
        out.append((m.group(1), int(m.group(2) or 1)))
    return out


def evaluate_word(spec: GlueSpec, word) -> LensMap:
    """Product w1 w2 ... wn as the composite w1 ∘ w2 ∘ ... ∘ wn."""
    out = lens_identity()
    for name, power in tokenize(word):
        g = lens_identity() if name in ("id", "e") else mcg_diffeo(spec, name)
        out = out @ (g ** power)
    return out


@dataclass(frozen=True)
class RelationResult:
    word: str
    expected: str
    residual: float
    tol: float = RELATION_TOL

    @property
    def verdict(self) -> bool:
        return self.residual <= self.tol

    def as_dict(self) -> dict:
        return {"word": self.word, "expected": self.expected,
                "residual": self.residual, "verdict": "pass" if self.verdict else "fail"}


def _as_text(word) -> str:
    return word if isinstance(word, str) else " ".join(word)


def verify_relation(spec: GlueSpec, word, expected="id", samples: int = 500,
                    seed: int = 0, tol: float = RELATION_TOL) -> RelationResult:
    lhs = evaluate_word(spec, word)
    rhs = evaluate_word(spec, expected)
    return RelationResult(_as_text(word), _as_text(expected),
                          map_distance(spec, lhs, rhs, samples, seed), tol)


def discriminate(spec: GlueSpec, word, candidates: Sequence[str], samples: int = 500,
                 seed: int = 0, tol: float = RELATION_TOL) -> dict:
    """Residual of ``word`` against each candidate and the ones that match."""
    res = {c: verify_relation(spec, word, c, samples, seed, tol).residual for c in candidates}
    return {"word": _as_text(word), "residuals": res,
            "matches": [c for c, r in res.items() if r <= tol]}
