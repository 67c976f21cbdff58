"""Radial kernels on Z_{m+1}^d and their exact convolution calculus.

A radial kernel is a function depending only on the Hamming weight, stored
as the d+1 per-point values c_0..c_d.  All the machinery here works at the
weight level: convolution goes through the Hamming-scheme intersection
numbers, multiplier profiles through Krawtchouk-type character sums, both
computed by per-coordinate generating polynomials in exact integer
arithmetic.  Nothing in this module ever touches the full group, so d in
the hundreds is fine.

Multiplier convention: profiles carry the *unnormalized* symbol
lambda(S) = sum_u g(u) xi^{-S.u}, so lambda_0 equals the kernel mass and
the convolution law (g*f)^ = lambda_g . fhat holds against the normalized
transform of :mod:`hammax.groups`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from hammax.groups import GroupSpec, sphere_size


@dataclass(frozen=True)
class RadialKernel:
    """A weight-dependent scalar kernel: value at u is weights[|u|]."""

    spec: GroupSpec
    weights: np.ndarray  # shape (d+1,), float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.spec.d + 1,):
            raise ValueError(
                f"expected {self.spec.d + 1} weight coefficients, got {w.shape}"
            )
        object.__setattr__(self, "weights", w)

    @property
    def mass(self) -> float:
        """Total mass sum_k c_k |{|u| = k}|."""
        return float(
            sum(
                c * sphere_size(self.spec, k)
                for k, c in enumerate(self.weights)
            )
        )

    def is_probability(self, tol: float = 1e-12) -> bool:
        return bool(np.all(self.weights >= 0)) and abs(self.mass - 1.0) <= tol

    def to_field_values(self, weight_table: np.ndarray) -> np.ndarray:
        """Expand to per-point values given a precomputed weight table."""
        return self.weights[weight_table]


@dataclass(frozen=True)
class MultiplierProfile:
    """Unnormalized Fourier symbol of a radial kernel, by frequency weight."""

    spec: GroupSpec
    values: np.ndarray  # shape (d+1,)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.spec.d + 1,):
            raise ValueError(
                f"expected {self.spec.d + 1} profile values, got {v.shape}"
            )
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class IntersectionTable:
    """Hamming-scheme intersection numbers.

    p[k, a, b] counts the v with |v| = a and |u - v| = b for any fixed u of
    weight k.  Stored as exact Python integers (object dtype).
    """

    spec: GroupSpec
    p: np.ndarray  # shape (d+1, d+1, d+1), dtype=object


def _poly_mul(f: list[list[int]], g: list[list[int]]) -> list[list[int]]:
    """Multiply two bivariate integer polynomials given as coeff[i][j] x^i y^j."""
    rows = len(f) + len(g) - 1
    cols = len(f[0]) + len(g[0]) - 1
    out = [[0] * cols for _ in range(rows)]
    for i, frow in enumerate(f):
        for j, c in enumerate(frow):
            if c == 0:
                continue
            for a, grow in enumerate(g):
                for b, e in enumerate(grow):
                    if e:
                        out[i + a][j + b] += c * e
    return out


def _poly_pow(base: list[list[int]], exp: int) -> list[list[int]]:
    result = [[1]]
    for _ in range(exp):
        result = _poly_mul(result, base)
    return result


def intersection_table(spec: GroupSpec) -> IntersectionTable:
    """Compute all intersection numbers in O(d^4), independent of group size.

    For u of weight k, classify coordinates: where u_i = 0 a matching v_i
    is 0 (term 1) or one of m nonzero values (term m*x*y); where u_i != 0,
    v_i can be 0 (term y), equal to u_i (term x), or one of the other m-1
    nonzero values (term x*y).  So the bivariate generating polynomial is
    (1 + m x y)^(d-k) (y + x + (m-1) x y)^k with x tracking |v| and y
    tracking |u - v|.
    """
    d, m = spec.d, spec.m
    table = np.zeros((d + 1, d + 1, d + 1), dtype=object)
    zero_factor = [[1, 0], [0, m]]  # 1 + m x y
    nonzero_factor = [[0, 1], [1, m - 1]]  # y + x + (m-1) x y
    for k in range(d + 1):
        poly = _poly_mul(_poly_pow(zero_factor, d - k), _poly_pow(nonzero_factor, k))
        for a, row in enumerate(poly):
            for b, c in enumerate(row):
                if a <= d and b <= d:
                    table[k, a, b] = c
    return IntersectionTable(spec=spec, p=table)


_TABLE_CACHE: dict[tuple[int, int], IntersectionTable] = {}


def cached_intersection_table(spec: GroupSpec) -> IntersectionTable:
    key = (spec.m, spec.d)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = intersection_table(spec)
    return _TABLE_CACHE[key]


# -- kernel constructors ---------------------------------------------------


def delta_kernel(spec: GroupSpec) -> RadialKernel:
    """The identity element delta_0 of the convolution algebra."""
    w = np.zeros(spec.d + 1)
    w[0] = 1.0
    return RadialKernel(spec, w)


def sphere_kernel(spec: GroupSpec, k: int) -> RadialKernel:
    """sigma_k, the L_1-normalized indicator of the k-sphere."""
    if not 0 <= k <= spec.d:
        raise ValueError(f"sphere radius {k} out of range [0, {spec.d}]")
    w = np.zeros(spec.d + 1)
    w[k] = 1.0 / sphere_size(spec, k)
    return RadialKernel(spec, w)


def eta_kernel(spec: GroupSpec, eta: float) -> RadialKernel:
    """The product probability kernel with c_k = (eta/m)^k (1-eta)^(d-k)."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    k = np.arange(spec.d + 1)
    w = (eta / spec.m) ** k * (1.0 - eta) ** (spec.d - k)
    return RadialKernel(spec, w)


def smoothed_local_kernel(spec: GroupSpec, K: int) -> RadialKernel:
    """(K+1)^{-1} sum_{k<=K} sigma_k."""
    if not 0 <= K <= spec.d:
        raise ValueError(f"K = {K} out of range [0, {spec.d}]")
    w = np.zeros(spec.d + 1)
    for k in range(K + 1):
        w[k] += 1.0 / sphere_size(spec, k)
    return RadialKernel(spec, w / (K + 1))


def smoothed_distant_kernel(spec: GroupSpec, K: int) -> RadialKernel:
    """(K+1)^{-1} sum_{k<=K} sigma_{d-k}."""
    if not 0 <= K <= spec.d:
        raise ValueError(f"K = {K} out of range [0, {spec.d}]")
    w = np.zeros(spec.d + 1)
    for k in range(K + 1):
        w[spec.d - k] += 1.0 / sphere_size(spec, spec.d - k)
    return RadialKernel(spec, w / (K + 1))


def averaged_eta_kernel(spec: GroupSpec, P: float) -> RadialKernel:
    """The kernel of the eta-average (1/P) int_0^P mu_eta^d d(eta).

    The weight coefficients are incomplete Beta integrals,
    c_k = (1/P) m^{-k} int_0^P eta^k (1-eta)^(d-k) d(eta), evaluated via the
    regularized incomplete beta function (exact up to floating point).
    """
    rho = spec.m / (spec.m + 1)
    if not 0.0 < P <= rho:
        raise ValueError(f"P must lie in (0, {rho}], got {P}")
    d, m = spec.d, spec.m
    k = np.arange(d + 1)
    # int_0^P eta^k (1-eta)^(d-k) = B(k+1, d-k+1) * I_P(k+1, d-k+1)
    complete = np.array([math.factorial(j) * math.factorial(d - j) /
                         math.factorial(d + 1) for j in k])
    w = betainc(k + 1.0, d - k + 1.0, P) * complete / (P * m**k.astype(float))
    return RadialKernel(spec, w)


# -- operations ------------------------------------------------------------


def radial_convolve(g: RadialKernel, h: RadialKernel) -> RadialKernel:
    """Exact radial convolution via intersection numbers."""
    if g.spec != h.spec:
        raise ValueError("kernels live on different groups")
    spec = g.spec
    table = cached_intersection_table(spec).p
    d = spec.d
    out = np.zeros(d + 1)
    for k in range(d + 1):
        acc = 0.0
        for a in range(d + 1):
            ga = g.weights[a]
            if ga == 0.0:
                continue
            row = table[k, a]
            acc += ga * sum(
                float(row[b]) * h.weights[b] for b in range(d + 1) if row[b]
            )
        out[k] = acc
    return RadialKernel(spec, out)


def krawtchouk_matrix(spec: GroupSpec) -> np.ndarray:
    """K[k, j] = sum over the k-sphere of xi^{-S.u} at any frequency weight j.

    Per coordinate the character sum contributes (1 + m x) when the
    frequency coordinate is zero and (1 - x) otherwise, so
    K[k, j] = [x^k] (1 + m x)^(d-j) (1 - x)^j.  Exact integers.
    """
    d, m = spec.d, spec.m
    K = np.zeros((d + 1, d + 1), dtype=object)
    for j in range(d + 1):
        poly = [1]
        for _ in range(d - j):
            new = [0] * (len(poly) + 1)
            for i, c in enumerate(poly):
                new[i] += c
                new[i + 1] += m * c
            poly = new
        for _ in range(j):
            new = [0] * (len(poly) + 1)
            for i, c in enumerate(poly):
                new[i] += c
                new[i + 1] -= c
            poly = new
        for k in range(d + 1):
            K[k, j] = poly[k]
    return K


_KRAW_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _cached_krawtchouk(spec: GroupSpec) -> np.ndarray:
    key = (spec.m, spec.d)
    if key not in _KRAW_CACHE:
        _KRAW_CACHE[key] = krawtchouk_matrix(spec).astype(float)
    return _KRAW_CACHE[key]


def multiplier_profile(g: RadialKernel) -> MultiplierProfile:
    """The unnormalized symbol lambda_j = sum_k c_k K_k(j)."""
    K = _cached_krawtchouk(g.spec)
    return MultiplierProfile(g.spec, g.weights @ K)


def eta_symbol(spec: GroupSpec, eta: float) -> np.ndarray:
    """Closed-form symbol (1 - (m+1) eta / m)^j of the eta kernel."""
    base = 1.0 - (spec.m + 1) * eta / spec.m
    return base ** np.arange(spec.d + 1, dtype=float)


def domination_report(g: RadialKernel, h: RadialKernel) -> dict:
    """Smallest C with g <= C h pointwise, or dominates=False if none."""
    if g.spec != h.spec:
        raise ValueError("kernels live on different groups")
    ratio = 0.0
    for gk, hk in zip(g.weights, h.weights):
        if gk <= 0.0:
            continue
        if hk <= 0.0:
            return {"dominates": False, "min_ratio": math.inf}
        ratio = max(ratio, gk / hk)
    return {"dominates": True, "min_ratio": ratio}


def default_p_grid(spec: GroupSpec, num: int = 64) -> np.ndarray:
    """Log-spaced grid of P values in (1e-3 * rho, rho]."""
    rho = spec.m / (spec.m + 1)
    return np.geomspace(1e-3 * rho, rho, num)


def best_domination_search(spec: GroupSpec, K: int, P_grid=None) -> dict:
    """Grid-minimize the pointwise domination constant of the local smoothed
    kernel by the eta-averaged kernel."""
    if P_grid is None:
        P_grid = default_p_grid(spec)
    P_grid = np.atleast_1d(np.asarray(P_grid, dtype=float))
    if P_grid.size == 0:
        raise ValueError("empty P grid")
    g = smoothed_local_kernel(spec, K)
    best_P, best_C = None, math.inf
    for P in P_grid:
        rep = domination_report(g, averaged_eta_kernel(spec, float(P)))
        if rep["min_ratio"] < best_C:
            best_P, best_C = float(P), rep["min_ratio"]
    return {"P_star": best_P, "C_star": best_C}


def distant_domination_constant(spec: GroupSpec, L: int) -> float:
    """Empirical constant in the distant-kernel comparison.

    Pointwise ratio of (floor(L/m)+1)^{-1} sum_{l<=L/m} sigma_{d-l} against
    (L+1)^{-1} sum_{l<=L} sigma_l * sigma_d.
    """
    d, m = spec.d, spec.m
    if not 0 <= L <= m * d / (m + 1):
        raise ValueError(f"L = {L} out of range [0, {m * d / (m + 1)}]")
    lhs = np.zeros(d + 1)
    top = int(L // m)
    for l in range(top + 1):
        lhs += sphere_kernel(spec, d - l).weights
    lhs /= top + 1
    sigma_d = sphere_kernel(spec, d)
    rhs = np.zeros(d + 1)
    for l in range(L + 1):
        rhs += radial_convolve(sphere_kernel(spec, l), sigma_d).weights
    rhs /= L + 1
    rep = domination_report(RadialKernel(spec, lhs), RadialKernel(spec, rhs))
    return rep["min_ratio"]
