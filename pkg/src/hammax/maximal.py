"""Smoothed spherical means, the noise semigroup and Cesaro summation.

Every operator family here exists in two modes: *field* mode acts on an
:class:`~hammax.fields.OperatorField`, *profile* mode works purely with
the d+1 multiplier values of the underlying radial kernels, which keeps
the L_2 theory available for d far beyond what fields can store.

Conventions: the local index range is 0..floor(m d/(m+1)), the distant
range 0..floor(d/(m+1)).  Complex powers (n+1)^z use the principal branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from hammax.fields import OperatorField, apply_multiplier, convolve
from hammax.groups import GroupSpec
from hammax.kernels import (
    MultiplierProfile,
    eta_kernel,
    averaged_eta_kernel,
    multiplier_profile,
    sphere_kernel,
)


def local_range(spec: GroupSpec) -> int:
    """Largest admissible index for the local families."""
    return int(spec.m * spec.d // (spec.m + 1))


def distant_range(spec: GroupSpec) -> int:
    """Largest admissible index for the distant families."""
    return int(spec.d // (spec.m + 1))


# -- Cesaro coefficients -----------------------------------------------------


@dataclass(frozen=True)
class CesaroTable:
    """Coefficients A_0^alpha .. A_N^alpha via the product recurrence."""

    alpha: complex
    values: np.ndarray  # shape (N+1,), complex

    def __getitem__(self, n: int) -> complex:
        if n == -1:
            return 0.0
        return complex(self.values[n])


def cesaro_coeffs(alpha: complex, N: int) -> CesaroTable:
    """A_n^alpha = prod_{j=1}^n (alpha + j)/j, with A_0 = 1.

    The recurrence produces exact zeros when alpha is a negative integer
    -j and n >= j (the factor alpha + j vanishes).
    """
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    vals = np.empty(N + 1, dtype=complex)
    vals[0] = 1.0
    a = complex(alpha)
    for n in range(1, N + 1):
        vals[n] = vals[n - 1] * (a + n) / n
    return CesaroTable(alpha=a, values=vals)


def cesaro_bound_audit(beta: float, gamma: float, N: int) -> dict:
    """Empirical extremes behind the standard coefficient bounds."""
    if beta <= -1:
        raise ValueError("beta must be > -1 for the two-sided bounds")
    if N > 10**4:
        raise ValueError("N too large for the audit")
    n1 = np.arange(N + 1) + 1.0
    A_beta = np.abs(cesaro_coeffs(beta, N).values)
    A_alpha = np.abs(cesaro_coeffs(beta + 1j * gamma, N).values)
    out = {
        "upper_i": float((A_beta / n1**beta).max()),
        "lower_i": float((n1**beta / A_beta).max()),
        "ratio_ii": float((A_alpha / A_beta).max()),
    }
    if beta == int(beta) and beta >= 0:
        A_neg = np.abs(cesaro_coeffs(-beta + 1j * gamma, N).values)
        out["ratio_iii"] = float(
            (n1**beta * A_neg).max() / math.exp(3 * gamma**2)
        )
    return out


def b_coeff(k: int, t: int) -> float:
    """B_k^t = k (k-1) ... (k-t+1), zero when t > k."""
    if t > k:
        return 0.0
    out = 1.0
    for j in range(t):
        out *= k - j
    return out


def ratio_audit(t: int, n_max: int) -> dict:
    """Extremes of (1+n)^{t+1}/B_n^{t+1} and its reciprocal over n <= n_max.

    The range starts at n = t+1 because B_t^{t+1} = 0 makes the first
    ratio undefined at n = t.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if n_max < t + 1:
        raise ValueError("n_max must be at least t + 1")
    r1 = 0.0
    r2 = 0.0
    for n in range(t + 1, n_max + 1):
        b = b_coeff(n, t + 1)
        r1 = max(r1, (1 + n) ** (t + 1) / b)
        r2 = max(r2, b / (1 + n) ** (t + 1))
    return {"max_ratio_1": r1, "max_ratio_2": r2}


# -- T_k and smoothed families -------------------------------------------------


def family_T(f: OperatorField, k_max: int | None = None) -> list[OperatorField]:
    """[T_0 f, ..., T_kmax f] with T_k f = sigma_k * f (T_0 = id)."""
    spec = f.spec
    if k_max is None:
        k_max = spec.d
    return [convolve(sphere_kernel(spec, k), f) for k in range(k_max + 1)]


def family_smoothed(
    f: OperatorField, mode: str, K_max: int | None = None
) -> list[OperatorField]:
    """Running averages (K+1)^{-1} sum_{k<=K} T_k f (local) or T_{d-k} f."""
    spec = f.spec
    if mode == "local":
        top = local_range(spec) if K_max is None else K_max
        terms = family_T(f, top)
    elif mode == "distant":
        top = distant_range(spec) if K_max is None else K_max
        terms = [convolve(sphere_kernel(spec, spec.d - k), f) for k in range(top + 1)]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out = []
    acc = np.zeros_like(f.values)
    for K in range(top + 1):
        acc = acc + terms[K].values
        out.append(OperatorField(spec, acc / (K + 1)))
    return out


# -- noise semigroup -------------------------------------------------------------


def noise_symbol(spec: GroupSpec, t: float) -> np.ndarray:
    return np.exp(-t * np.arange(spec.d + 1, dtype=float))


def noise_operator(f: OperatorField, t: float) -> OperatorField:
    """Fourier multiplier e^{-t|S|}; semigroup in t."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return apply_multiplier(MultiplierProfile(f.spec, noise_symbol(f.spec, t)), f)


def eta_noise(f: OperatorField, eta: float, route: str = "kernel") -> OperatorField:
    """Convolution with the product kernel mu_eta^d.

    route "kernel" convolves; route "symbol" applies the closed-form
    multiplier (1 - (m+1) eta/m)^{|S|}.  The two must agree.
    """
    spec = f.spec
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if route == "kernel":
        return convolve(eta_kernel(spec, eta), f, route="transform")
    if route == "symbol":
        base = 1.0 - (spec.m + 1) * eta / spec.m
        symbol = base ** np.arange(spec.d + 1, dtype=float)
        return apply_multiplier(MultiplierProfile(spec, symbol), f)
    raise ValueError(f"unknown route {route!r}")


def ergodic_H_symbol(spec: GroupSpec, T: float) -> np.ndarray:
    """Closed-form multiplier of (1/T) int_0^T N_t dt: (1-e^{-Tj})/(Tj)."""
    if T <= 0:
        raise ValueError(f"T must be > 0, got {T}")
    j = np.arange(spec.d + 1, dtype=float)
    out = np.ones(spec.d + 1)
    out[1:] = -np.expm1(-T * j[1:]) / (T * j[1:])
    return out


def ergodic_H(f: OperatorField, T: float) -> OperatorField:
    return apply_multiplier(MultiplierProfile(f.spec, ergodic_H_symbol(f.spec, T)), f)


def ergodic_J_symbol(spec: GroupSpec, P: float) -> np.ndarray:
    """Closed-form multiplier of (1/P) int_0^P Ntilde_eta d(eta)."""
    rho = spec.m / (spec.m + 1)
    if not 0.0 < P <= rho:
        raise ValueError(f"P must lie in (0, {rho}], got {P}")
    j = np.arange(spec.d + 1, dtype=float)
    return rho / (P * (j + 1)) * (1.0 - (1.0 - P / rho) ** (j + 1))


def ergodic_J(f: OperatorField, P: float, route: str = "symbol") -> OperatorField:
    """Average of eta-noise operators over (0, P]."""
    if route == "symbol":
        return apply_multiplier(
            MultiplierProfile(f.spec, ergodic_J_symbol(f.spec, P)), f
        )
    if route == "kernel":
        return convolve(averaged_eta_kernel(f.spec, P), f, route="transform")
    raise ValueError(f"unknown route {route!r}")


# -- the nu_P mixture ------------------------------------------------------------


@dataclass(frozen=True)
class NuPMeasure:
    """The mixing measure writing J_P as an average of the H_T family.

    Density (rho/P) T e^{-T} on (0, T_star) plus an atom at
    T_star = -ln(1 - P/rho) of mass (rho/P - 1) T_star.
    """

    m: int
    P: float

    @property
    def rho(self) -> float:
        return self.m / (self.m + 1)

    @property
    def T_star(self) -> float:
        return -math.log(1.0 - self.P / self.rho) if self.P < self.rho else math.inf

    @property
    def atom_mass(self) -> float:
        if self.P >= self.rho:
            return 0.0
        return (self.rho / self.P - 1.0) * self.T_star

    def density(self, T: float) -> float:
        return self.rho / self.P * T * math.exp(-T)

    def total_mass(self) -> float:
        if self.P >= self.rho:
            # T_star = inf: pure density (rho/P = 1)
            val, _ = quad(self.density, 0.0, np.inf)
            return val
        val, _ = quad(self.density, 0.0, self.T_star, epsabs=1e-12, epsrel=1e-12)
        return val + self.atom_mass

    def integrate(self, func) -> float:
        """Integral of func(T) against the measure."""
        if self.P >= self.rho:
            val, _ = quad(lambda T: func(T) * self.density(T), 0.0, np.inf,
                          epsabs=1e-10, epsrel=1e-10)
            return val
        val, _ = quad(lambda T: func(T) * self.density(T), 0.0, self.T_star,
                      epsabs=1e-10, epsrel=1e-10, limit=200)
        return val + self.atom_mass * func(self.T_star)


def verify_nu_identity(m: int, P: float, j_max: int) -> dict:
    """Check J_P's symbol against the nu_P mixture of H_T symbols."""
    nu = NuPMeasure(m=m, P=P)
    rho = nu.rho
    if not 0.0 < P <= rho:
        raise ValueError(f"P must lie in (0, {rho}], got {P}")
    max_err = 0.0
    for j in range(j_max + 1):
        if j == 0:
            h = lambda T: 1.0
        else:
            h = lambda T, j=j: -math.expm1(-T * j) / (T * j)
        mixed = nu.integrate(h)
        target = rho / (P * (j + 1)) * (1.0 - (1.0 - P / rho) ** (j + 1))
        max_err = max(max_err, abs(mixed - target))
    return {
        "max_abs_error": max_err,
        "mass_error": abs(nu.total_mass() - 1.0),
    }


# -- Cesaro summation families -----------------------------------------------


def sigma_profiles(spec: GroupSpec) -> np.ndarray:
    """Row k = multiplier profile of sigma_k, shape (d+1, d+1)."""
    return np.array(
        [multiplier_profile(sphere_kernel(spec, k)).values for k in range(spec.d + 1)]
    )


class CesaroCalculator:
    """Shared T_k cache for building S/M (local) and U/N (distant) sums."""

    def __init__(self, f: OperatorField, n_max: int, mode: str = "local"):
        if mode not in ("local", "distant"):
            raise ValueError(f"unknown mode {mode!r}")
        spec = f.spec
        self.f = f
        self.mode = mode
        self.n_max = n_max
        if mode == "local":
            self.terms = [convolve(sphere_kernel(spec, k), f).values
                          for k in range(n_max + 1)]
        else:
            self.terms = [convolve(sphere_kernel(spec, spec.d - k), f).values
                          for k in range(n_max + 1)]

    def S(self, alpha: complex, n: int) -> np.ndarray:
        """S_n^alpha (local) or U_n^alpha (distant) as raw value arrays."""
        if n < 0:
            return np.zeros_like(self.terms[0])
        table = cesaro_coeffs(alpha, n)
        acc = np.zeros_like(self.terms[0])
        for k in range(n + 1):
            acc = acc + table[n - k] * self.terms[k]
        return acc

    def M(self, alpha: complex, n: int) -> np.ndarray:
        """M_n^alpha (local) or N_n^alpha (distant): (n+1)^{-alpha-1} S_n^alpha."""
        scale = np.exp((-alpha - 1) * np.log(n + 1))
        return scale * self.S(alpha, n)


def cesaro_family(
    f: OperatorField, alpha: complex, mode: str = "local"
) -> dict[str, list[OperatorField]]:
    """All S_n^alpha and M_n^alpha (or U/N) over the admissible index range."""
    spec = f.spec
    n_max = local_range(spec) if mode == "local" else distant_range(spec)
    calc = CesaroCalculator(f, n_max, mode)
    S = [OperatorField(spec, calc.S(alpha, n)) for n in range(n_max + 1)]
    M = [OperatorField(spec, calc.M(alpha, n)) for n in range(n_max + 1)]
    return {"S": S, "M": M}


def _rel_err(lhs: np.ndarray, rhs: np.ndarray, floor: float) -> float:
    diff = np.linalg.norm(lhs - rhs)
    scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs), floor)
    return float(diff / scale)


def identity_audit(
    f: OperatorField, t: int, beta: float, n_max: int | None = None
) -> dict:
    """Numerically check the four summation identities on f.

    (a) the difference law: S_k^{-t} - S_{k-1}^{-t} = S_k^{-t-1};
    (b) the summation-by-parts expansion of B_n^{t+1} S_n^{-t};
    (c) the convolution formula S_n^{-t+i beta} = sum A_{n-k}^{i beta} S_k^{-t-1};
    (d) the one-step Abel shift relating orders -l and -l-1, for l < t.

    Returns the max relative Frobenius discrepancy per identity.
    """
    if t < 1:
        raise ValueError("t must be a positive integer")
    spec = f.spec
    if n_max is None:
        n_max = local_range(spec)
    calc = CesaroCalculator(f, n_max, "local")
    floor = max(float(np.linalg.norm(f.values)), 1e-30)

    err_a = 0.0
    for k in range(0, n_max + 1):
        lhs = calc.S(-t, k) - calc.S(-t, k - 1)
        rhs = calc.S(-t - 1, k)
        err_a = max(err_a, _rel_err(lhs, rhs, floor))

    err_b = 0.0
    for n in range(t, n_max + 1):
        lhs = b_coeff(n, t + 1) * calc.S(-t, n)
        rhs = np.zeros_like(lhs)
        for k in range(t, n + 1):
            rhs = rhs + b_coeff(k, t + 1) * (calc.S(-t, k) - calc.S(-t, k - 1))
        for k in range(t, n):
            rhs = rhs + (t + 1) * b_coeff(k, t) * calc.S(-t, k)
        err_b = max(err_b, _rel_err(lhs, rhs, floor))

    err_c = 0.0
    for n in range(0, n_max + 1):
        lhs = calc.S(-t + 1j * beta, n)
        table = cesaro_coeffs(1j * beta, n)
        rhs = np.zeros_like(lhs)
        for k in range(n + 1):
            rhs = rhs + table[n - k] * calc.S(-t - 1, k)
        err_c = max(err_c, _rel_err(lhs, rhs, floor))

    err_d = 0.0
    for ell in range(t):
        for n in range(1, n_max + 1):
            for mm in {n // 2, n}:
                if mm < 1:
                    continue
                tab_l = cesaro_coeffs(-ell + 1j * beta, n)
                tab_l1 = cesaro_coeffs(-ell - 1 + 1j * beta, n)
                lhs = np.zeros_like(calc.terms[0])
                for k in range(mm + 1):
                    lhs = lhs + tab_l[n - k] * calc.S(-t - 1 + ell, k)
                # boundary term carries the summed order -t+l (Abel summation
                # against the difference law), not the differenced order
                rhs = tab_l[n - mm] * calc.S(-t + ell, mm)
                for k in range(mm):
                    rhs = rhs + tab_l1[n - k] * calc.S(-t + ell, k)
                err_d = max(err_d, _rel_err(lhs, rhs, floor))

    return {
        "difference_law": err_a,
        "summation_by_parts": err_b,
        "imaginary_convolution": err_c,
        "abel_shift": err_d,
    }


# -- square functions and the L_2 bound -------------------------------------------


def _matrix_sqrt_psd(batch: np.ndarray) -> np.ndarray:
    lam, V = np.linalg.eigh(batch)
    lam = np.clip(lam, 0.0, None)
    return (V * np.sqrt(lam)[:, None, :]) @ V.conj().transpose(0, 2, 1)


def square_function(f: OperatorField, t: int, mode: str = "local") -> OperatorField:
    """(sum_k (k+1)^{2t-1} |S_k^{-t-1} f|^2)^{1/2}, pointwise PSD."""
    spec = f.spec
    n_max = local_range(spec) if mode == "local" else distant_range(spec)
    calc = CesaroCalculator(f, n_max, mode)
    acc = np.zeros_like(f.values)
    for k in range(n_max + 1):
        s = calc.S(-t - 1, k)
        acc = acc + (k + 1) ** (2 * t - 1) * (s.conj().transpose(0, 2, 1) @ s)
    return OperatorField(spec, _matrix_sqrt_psd(acc))


def l2_multiplier_bound(spec: GroupSpec, t: int, mode: str = "local") -> float:
    """Fourier-side constant: max_j sum_k (k+1)^{2t-1} |m_k(j)|^2.

    m_k(j) is the multiplier of the order -(t+1) Cesaro combination at
    frequency weight j; the max over j is the squared L_2 -> L_2 norm of
    the square function, computable without any field storage.

    For m = 1 the sup runs over j <= d/2 only.  On the two-point cycle the
    weight-reversal symmetry lambda_k(d - j) = (-1)^k lambda_k(j) pairs each
    high frequency with a low one up to an alternating sign, so the maximal
    estimate only consumes the square function on the lower half of the
    spectrum; on the upper half the Cesaro differences of the alternating
    profiles do not decay and the raw sup grows like d^2 (j = d sees
    lambda_k = (-1)^k, whose first difference is +-2 for every k).
    """
    profiles = sigma_profiles(spec)  # (d+1, d+1): row k = profile of sigma_k
    if mode == "distant":
        profiles = profiles[::-1]
    n_max = local_range(spec) if mode == "local" else distant_range(spec)
    table = cesaro_coeffs(-t - 1, n_max).values.real
    j_max = spec.d // 2 if spec.m == 1 else spec.d
    total = np.zeros(j_max + 1)
    for k in range(n_max + 1):
        m_k = table[k::-1] @ profiles[: k + 1, : j_max + 1]
        total += (k + 1) ** (2 * t - 1) * m_k**2
    return float(total.max())
