"""Fiberwise homogeneous functions on the trivial bundle S^1 x R^n.

Base points are angles taken modulo 2 pi.  Coefficient fields are finite
Fourier series, so they are smooth, periodic and cheap to differentiate.
All evaluation routines are vectorised over a batch of points: ``y`` has
shape (N,) and ``v`` has shape (N, n).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial
from typing import Callable, Mapping

import numpy as np

from .errors import NotQuadratic, RankMismatch

TWO_PI = 2.0 * np.pi


def base_angle(y) -> np.ndarray:
    return np.mod(np.asarray(y, float), TWO_PI)


@dataclass(frozen=True)
class TrigField:
    """y -> sum_k cos_k cos(k y) + sin_k sin(k y), k = 0, 1, ..."""

    cos: tuple = (0.0,)
    sin: tuple = ()

    @classmethod
    def constant(cls, c: float) -> "TrigField":
        return cls((float(c),), ())

    def __call__(self, y):
        y = np.asarray(y, float)
        out = np.zeros_like(y)
        for k, c in enumerate(self.cos):
            if c:
                out = out + c * np.cos(k * y)
        for k, s in enumerate(self.sin):
            if s:
                out = out + s * np.sin(k * y)
        return out

    def derivative(self) -> "TrigField":
        n = max(len(self.cos), len(self.sin))
        cos = [0.0] * n
        sin = [0.0] * n
        for k, c in enumerate(self.cos):
            sin[k] -= k * c
        for k, s in enumerate(self.sin):
            cos[k] += k * s
        return TrigField(tuple(cos), tuple(sin))

    def scaled(self, a: float) -> "TrigField":
        return TrigField(tuple(a * c for c in self.cos), tuple(a * s for s in self.sin))


@dataclass(frozen=True)
class QuadHomogField:
    """y -> A(y), a smooth 2 pi periodic field of symmetric n x n matrices."""

    n: int
    entries: tuple  # entries[i][j] is a callable of y, symmetric in (i, j)

    def A(self, y) -> np.ndarray:
        y = np.asarray(y, float)
        out = np.empty(y.shape + (self.n, self.n))
        for i in range(self.n):
            for j in range(self.n):
                out[..., i, j] = self.entries[i][j](y)
        return out

    def __call__(self, y, v) -> np.ndarray:
        v = np.asarray(v, float)
        if v.shape[-1] != self.n:
            raise RankMismatch(f"fiber rank {self.n}, vector of length {v.shape[-1]}")
        return np.einsum("...i,...ij,...j->...", v, self.A(y), v)

    @classmethod
    def constant(cls, M) -> "QuadHomogField":
        M = np.asarray(M, float)
        n = M.shape[0]
        return cls(n, tuple(tuple(TrigField.constant(M[i, j]) for j in range(n)) for i in range(n)))

    @classmethod
    def from_fourier(cls, spec: Mapping) -> "QuadHomogField":
        """{"n": 2, "fourier": {"a_11": [[cos...], [sin...]], "a_12": ..., ...}}
        with 1-based indices; a missing a_ij is taken from a_ji or zero."""
        n = int(spec["n"])
        data = spec.get("fourier", {})
        fields = [[TrigField.constant(0.0) for _ in range(n)] for _ in range(n)]
        for key, (cos, sin) in data.items():
            i, j = int(key[2]) - 1, int(key[3]) - 1
            if not (0 <= i < n and 0 <= j < n):
                raise RankMismatch(f"{key} outside rank {n}")
            f = TrigField(tuple(map(float, cos)), tuple(map(float, sin)))
            fields[i][j] = f
            fields[j][i] = f
        return cls(n, tuple(tuple(r) for r in fields))

    @classmethod
    def rotated_diag(cls, d1: float, d2: float, freq: int = 1) -> "QuadHomogField":
        """A(y) = R(k y)^T diag(d1, d2) R(k y), R the rotation matrix.

        Entries: (d1 + d2)/2 ± (d1 - d2)/2 cos(2 k y) on the diagonal and
        -(d1 - d2)/2 sin(2 k y) off it.
        """
        m, h = (d1 + d2) / 2.0, (d1 - d2) / 2.0
        k2 = 2 * freq
        cos_plus = [m] + [0.0] * k2
        cos_plus[k2] += h
        cos_minus = [m] + [0.0] * k2
        cos_minus[k2] -= h
        sin_off = [0.0] * (k2 + 1)
        sin_off[k2] = -h
        a11 = TrigField(tuple(cos_plus), ())
        a22 = TrigField(tuple(cos_minus), ())
        a12 = TrigField((0.0,), tuple(sin_off))
        return cls(2, ((a11, a12), (a12, a22)))

    def symmetry_defect(self, grid: int = 128) -> float:
        A = self.A(np.linspace(0.0, TWO_PI, grid, endpoint=False))
        return float(np.max(np.abs(A - np.swapaxes(A, -1, -2))))


@dataclass(frozen=True)
class DefiniteReport:
    definite: bool
    min_eigenvalue: float


def is_definite(field: QuadHomogField, grid: int = 128) -> DefiniteReport:
    # numpy's symmetric eigensolver; rank is small
    ev = np.linalg.eigvalsh(field.A(np.linspace(0.0, TWO_PI, grid, endpoint=False)))
    lam = float(ev[..., 0].min())
    return DefiniteReport(lam > 0.0, lam)


def monomials(n: int, k: int):
    """Exponent tuples (i_1, ..., i_n) with sum k, in lexicographic order."""
    for combo in itertools.combinations_with_replacement(range(n), k):
        e = [0] * n
        for i in combo:
            e[i] += 1
        yield tuple(e)


@dataclass(frozen=True)
class HomogFn:
    """f(y, v) = sum_I a_I(y) v^I over exponent tuples I of total degree k."""

    k: int
    n: int
    coeffs: tuple  # ((exponent tuple, callable of y), ...)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("degree must be >= 1")
        for e, _ in self.coeffs:
            if len(e) != self.n or sum(e) != self.k:
                raise RankMismatch(f"monomial {e} does not have rank {self.n} and degree {self.k}")

    @classmethod
    def from_dict(cls, k: int, n: int, coeffs: Mapping[tuple, Callable]) -> "HomogFn":
        return cls(k, n, tuple((tuple(e), c) for e, c in coeffs.items()))

    @classmethod
    def from_quadratic(cls, field: QuadHomogField) -> "HomogFn":
        n = field.n
        terms = []
        for e in monomials(n, 2):
            idx = [i for i, p in enumerate(e) for _ in range(p)]
            i, j = idx
            f = field.entries[i][j]
            terms.append((e, f if i == j else _Scaled(f, 2.0)))
        return cls(2, n, tuple(terms))

    @classmethod
    def norm_power(cls, k: int, n: int = 2) -> "HomogFn":
        """|v|^k for even k, expanded into monomials."""
        if k % 2:
            raise ValueError("|v|^k is a polynomial only for even k")
        m = k // 2
        terms = []
        for e in monomials(n, m):
            c = factorial(m)
            for p in e:
                c //= factorial(p)
            terms.append((tuple(2 * p for p in e), TrigField.constant(float(c))))
        return cls(k, n, tuple(terms))

    def _check(self, v):
        v = np.asarray(v, float)
        if v.shape[-1] != self.n:
            raise RankMismatch(f"fiber rank {self.n}, vector of length {v.shape[-1]}")
        return v

    def __call__(self, y, v) -> np.ndarray:
        v = self._check(v)
        y = np.asarray(y, float)
        out = np.zeros(v.shape[:-1])
        for e, a in self.coeffs:
            mono = np.ones(v.shape[:-1])
            for i, p in enumerate(e):
                if p:
                    mono = mono * v[..., i] ** p
            out = out + a(y) * mono
        return out

    def grad_v(self, y, v) -> np.ndarray:
        v = self._check(v)
        y = np.asarray(y, float)
        out = np.zeros(v.shape)
        for e, a in self.coeffs:
            ay = a(y)
            for i, p in enumerate(e):
                if not p:
                    continue
                term = p * ay
                for j, q in enumerate(e):
                    r = q - 1 if j == i else q
                    if r:
                        term = term * v[..., j] ** r
                out[..., i] += term
        return out

    def quadratic_field(self) -> QuadHomogField:
        if self.k != 2:
            raise NotQuadratic("only degree 2 functions have a matrix field")
        n = self.n
        ent = [[_Zero() for _ in range(n)] for _ in range(n)]
        for e, a in self.coeffs:
            idx = [i for i, p in enumerate(e) for _ in range(p)]
            i, j = idx
            if i == j:
                ent[i][i] = a
            else:
                half = _Scaled(a, 0.5)
                ent[i][j] = ent[j][i] = half
        return QuadHomogField(n, tuple(tuple(r) for r in ent))

    def min_on_unit_sphere(self, base_grid: int = 128, dirs: int = 64) -> float:
        y = np.linspace(0.0, TWO_PI, base_grid, endpoint=False)
        if self.n == 1:
            u = np.array([[1.0], [-1.0]])
        elif self.n == 2:
            b = np.linspace(0.0, TWO_PI, dirs, endpoint=False)
            u = np.stack([np.cos(b), np.sin(b)], axis=-1)
        else:
            u = np.random.default_rng(0).normal(size=(dirs * self.n, self.n))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
        Y = np.repeat(y, len(u))
        U = np.tile(u, (len(y), 1))
        return float(np.min(self(Y, U)))

    def is_definite(self) -> bool:
        if self.k == 2:
            return is_definite(self.quadratic_field()).definite
        return self.min_on_unit_sphere() > 0.0


class _Scaled:
    def __init__(self, f, c):
        self.f, self.c = f, c

    def __call__(self, y):
        return self.c * self.f(y)


class _Zero:
    def __call__(self, y):
        return np.zeros_like(np.asarray(y, float))


def eval_homog(f: HomogFn, y, v):
    return f(y, v)


def check_homogeneity(f: Callable, k: int, samples: int = 64, n: int = 2,
                      seed: int = 0, ts=(0.0, 0.5, 2.0)) -> float:
    """max |f(t v) - t^k f(v)| over random v and the probe factors t."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        v = rng.normal(size=n)
        fv = f(v)
        for t in ts:
            worst = max(worst, abs(f(t * v) - t ** k * fv))
    return float(worst)


def polarize(f: Callable, n: int, samples: int = 32, tol: float = 1e-10, seed: int = 0) -> np.ndarray:
    """Symmetric A with f(v) = v A v^T, from f(e_i + e_j) - f(e_i) - f(e_j) = 2 a_ij."""
    I = np.eye(n)
    diag = np.array([f(I[i]) for i in range(n)], float)
    A = np.diag(diag)
    for i in range(n):
        for j in range(i + 1, n):
            A[i, j] = A[j, i] = 0.5 * (f(I[i] + I[j]) - diag[i] - diag[j])
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        v = rng.normal(size=n)
        fv = f(v)
        if abs(fv - v @ A @ v) > tol * max(1.0, abs(fv)):
            raise NotQuadratic(f"reconstruction residual {abs(fv - v @ A @ v):.3e}")
    return A


def euler_witness(f: HomogFn, y, v) -> np.ndarray:
    """|f - (1/k) sum_i v_i df/dv_i|, vanishing for k-homogeneous f."""
    v = np.asarray(v, float)
    g = f.grad_v(y, v)
    return np.abs(f(y, v) - np.sum(v * g, axis=-1) / f.k)
