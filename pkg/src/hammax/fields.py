"""Matrix-valued functions on Z_{m+1}^d and their norms and convolutions.

An :class:`OperatorField` stores one n x n complex matrix per group point,
flat-indexed.  The trace convention is the unnormalized matrix trace
tensored with counting measure on the group, so phi(1) = (m+1)^d * n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from hammax.groups import (
    GroupSpec,
    enumerate_sphere,
    forward_transform,
    inverse_transform,
)
from hammax.kernels import MultiplierProfile, RadialKernel, multiplier_profile

# Above this group size the transform route is the convolution default.
TRANSFORM_CUTOFF = 512


@dataclass
class OperatorField:
    """A map from group points to n x n complex matrices."""

    spec: GroupSpec
    values: np.ndarray  # shape (size, n, n), complex

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 3 or v.shape[0] != self.spec.size or v.shape[1] != v.shape[2]:
            raise ValueError(
                f"expected values of shape (size, n, n), got {v.shape}"
            )
        self.values = v

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "OperatorField":
        return OperatorField(self.spec, self.values.copy())

    def is_positive(self, tol: float = 1e-12) -> bool:
        herm_err = np.abs(self.values - self.values.conj().transpose(0, 2, 1)).max()
        if herm_err > tol:
            return False
        eigs = np.linalg.eigvalsh(self.values)
        return bool(eigs.min() >= -tol)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {
                "m": self.spec.m,
                "d": self.spec.d,
                "n": self.n,
                "re": self.values.real.ravel().tolist(),
                "im": self.values.imag.ravel().tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "OperatorField":
        data = json.loads(text)
        spec = GroupSpec(m=data["m"], d=data["d"])
        n = data["n"]
        vals = np.array(data["re"], dtype=float) + 1j * np.array(data["im"])
        return cls(spec, vals.reshape(spec.size, n, n))


# -- constructors ----------------------------------------------------------


def delta_field(spec: GroupSpec, n: int = 1, scale: complex = 1.0) -> OperatorField:
    """scale * identity matrix at the origin, zero elsewhere."""
    vals = np.zeros((spec.size, n, n), dtype=complex)
    vals[0] = scale * np.eye(n)
    return OperatorField(spec, vals)


def constant_field(spec: GroupSpec, matrix) -> OperatorField:
    matrix = np.asarray(matrix, dtype=complex)
    vals = np.broadcast_to(matrix, (spec.size,) + matrix.shape).copy()
    return OperatorField(spec, vals)


def random_field(spec: GroupSpec, n: int, rng: np.random.Generator) -> OperatorField:
    """Complex Ginibre field (no symmetry), for generic-input tests."""
    vals = rng.standard_normal((spec.size, n, n)) + 1j * rng.standard_normal(
        (spec.size, n, n)
    )
    return OperatorField(spec, vals)


def random_psd_field(spec: GroupSpec, n: int, rng: np.random.Generator) -> OperatorField:
    """Pointwise G*G with G Ginibre, so every value is Hermitian PSD."""
    g = rng.standard_normal((spec.size, n, n)) + 1j * rng.standard_normal(
        (spec.size, n, n)
    )
    return OperatorField(spec, g.conj().transpose(0, 2, 1) @ g)


# -- norms -----------------------------------------------------------------


def schatten_norm(x: np.ndarray, p: float) -> float:
    """Schatten p-norm (sum of singular values^p)^(1/p); p=inf -> largest."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    s = np.linalg.svd(np.asarray(x, dtype=complex), compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float((s**p).sum() ** (1.0 / p))


def field_norm(f: OperatorField, p: float) -> float:
    """L_p(N) norm: (sum_s ||f(s)||_{S_p}^p)^(1/p), max for p=inf."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    s = np.linalg.svd(f.values, compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float((s**p).sum() ** (1.0 / p))


# -- convolution -----------------------------------------------------------


def convolve_direct(g: RadialKernel, f: OperatorField) -> OperatorField:
    """(g*f)(s) = sum_u g(u) f(s-u), summed over the support spheres of g."""
    if g.spec != f.spec:
        raise ValueError("kernel and field live on different groups")
    spec = f.spec
    cube = f.values.reshape(spec.shape + f.values.shape[1:])
    out = np.zeros_like(cube)
    axes = tuple(range(spec.d))
    for k, ck in enumerate(g.weights):
        if ck == 0.0:
            continue
        for u in enumerate_sphere(spec, k):
            out += ck * np.roll(cube, shift=tuple(u), axis=axes)
    return OperatorField(spec, out.reshape(f.values.shape))


def apply_multiplier(profile: MultiplierProfile, f: OperatorField) -> OperatorField:
    """fhat(S) -> lambda_{|S|} fhat(S), then invert."""
    if profile.spec != f.spec:
        raise ValueError("profile and field live on different groups")
    spec = f.spec
    fhat = forward_transform(f.values, spec)
    weights = spec.weight_table().reshape(spec.size)
    fhat *= profile.values[weights][:, None, None]
    return OperatorField(spec, inverse_transform(fhat, spec))


def convolve(g: RadialKernel, f: OperatorField, route: str = "auto") -> OperatorField:
    """Radial-kernel convolution; direct or transform route.

    route: "auto" picks the transform route for groups larger than
    TRANSFORM_CUTOFF, otherwise whichever is cheaper given the kernel
    support; "direct" and "transform" force a route.
    """
    if route == "auto":
        support = sum(
            1 for k, c in enumerate(g.weights) if c != 0.0
        )
        route = "transform" if (f.spec.size > TRANSFORM_CUTOFF or support > 2) else "direct"
    if route == "direct":
        return convolve_direct(g, f)
    if route == "transform":
        return apply_multiplier(multiplier_profile(g), f)
    raise ValueError(f"unknown route {route!r}")


# -- positivity ------------------------------------------------------------


def _spectral_parts(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Positive/negative spectral parts of a batch of Hermitian matrices."""
    lam, vecs = np.linalg.eigh(h)
    pos = (vecs * np.clip(lam, 0.0, None)[:, None, :]) @ vecs.conj().transpose(0, 2, 1)
    neg = (vecs * np.clip(-lam, 0.0, None)[:, None, :]) @ vecs.conj().transpose(0, 2, 1)
    return pos, neg


def positivity_decompose(
    f: OperatorField,
) -> tuple[OperatorField, OperatorField, OperatorField, OperatorField]:
    """Pointwise f = f1 - f2 + i (f3 - f4) with all four parts positive."""
    adj = f.values.conj().transpose(0, 2, 1)
    herm = (f.values + adj) / 2
    anti = (f.values - adj) / (2j)
    f1, f2 = _spectral_parts(herm)
    f3, f4 = _spectral_parts(anti)
    return tuple(OperatorField(f.spec, v) for v in (f1, f2, f3, f4))
