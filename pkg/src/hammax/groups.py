"""The group Z_{m+1}^d: points, spheres, characters, Fourier transform.

Points are length-d residue vectors mod (m+1).  Internally most routines
work with either explicit coordinate arrays or with flat mixed-radix
indices in [0, (m+1)^d); the helpers below convert between the two.

The transform uses the symmetric (m+1)^{-d/2} normalization:

    fhat(S) = (m+1)^{-d/2} * sum_u f(u) xi^{-S.u},   xi = exp(2 pi i/(m+1))
    f(u)    = (m+1)^{-d/2} * sum_S fhat(S) xi^{S.u}

so the expansion f(u) = sum_S fhat(S) chi_S(u) holds with the L_2-normalized
characters chi_S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator

import numpy as np

MAX_GROUP_SIZE = 2**31


class GroupSizeError(ValueError):
    """Raised when (m+1)^d does not fit in the supported index range."""


@dataclass(frozen=True)
class GroupSpec:
    """The group Z_{m+1}^d with the Hamming (l_0) metric."""

    m: int
    d: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if (self.m + 1) ** self.d > MAX_GROUP_SIZE:
            raise GroupSizeError(
                f"(m+1)^d = {self.m + 1}^{self.d} exceeds the index range"
            )

    @property
    def q(self) -> int:
        """The modulus m+1 of each cyclic factor."""
        return self.m + 1

    @property
    def size(self) -> int:
        return self.q**self.d

    @property
    def shape(self) -> tuple[int, ...]:
        """The d-dimensional array shape (q, q, ..., q)."""
        return (self.q,) * self.d

    # -- point encoding ----------------------------------------------------

    def index_of(self, coords) -> int:
        """Flat mixed-radix index of a coordinate vector."""
        coords = np.asarray(coords, dtype=np.int64)
        if coords.shape != (self.d,):
            raise ValueError(f"expected {self.d} coordinates, got {coords.shape}")
        if np.any(coords < 0) or np.any(coords > self.m):
            raise ValueError("coordinates must lie in [0, m]")
        idx = 0
        for c in coords:
            idx = idx * self.q + int(c)
        return idx

    def coords_of(self, index: int) -> np.ndarray:
        """Coordinate vector of a flat index (inverse of :meth:`index_of`)."""
        if not 0 <= index < self.size:
            raise ValueError(f"index {index} out of range")
        out = np.empty(self.d, dtype=np.int64)
        for i in range(self.d - 1, -1, -1):
            out[i] = index % self.q
            index //= self.q
        return out

    def negate(self, coords) -> np.ndarray:
        """Coordinate-wise negation mod m+1."""
        return (-np.asarray(coords, dtype=np.int64)) % self.q

    def add(self, u, v) -> np.ndarray:
        return (np.asarray(u, dtype=np.int64) + np.asarray(v)) % self.q

    # -- weight structure --------------------------------------------------

    def weight_table(self) -> np.ndarray:
        """Hamming weight of every point, as an array of shape `self.shape`."""
        table = np.zeros(self.shape, dtype=np.int64)
        for axis in range(self.d):
            axis_shape = [1] * self.d
            axis_shape[axis] = self.q
            nonzero = (np.arange(self.q) != 0).astype(np.int64)
            table = table + nonzero.reshape(axis_shape)
        return table


def hamming_weight(u) -> int:
    """Number of nonzero coordinates of u."""
    return int(np.count_nonzero(np.asarray(u)))


def sphere_size(spec: GroupSpec, k: int) -> int:
    """Cardinality C(d,k) m^k of the Hamming sphere {|u| = k}."""
    if not 0 <= k <= spec.d:
        raise ValueError(f"sphere radius {k} out of range [0, {spec.d}]")
    return math.comb(spec.d, k) * spec.m**k


def enumerate_sphere(spec: GroupSpec, k: int) -> Iterator[np.ndarray]:
    """Yield each point of Hamming weight k exactly once."""
    if not 0 <= k <= spec.d:
        raise ValueError(f"sphere radius {k} out of range [0, {spec.d}]")
    nonzero = range(1, spec.q)
    for support in combinations(range(spec.d), k):
        for values in product(nonzero, repeat=k):
            u = np.zeros(spec.d, dtype=np.int64)
            u[list(support)] = values
            yield u


def character(spec: GroupSpec, S, u) -> complex:
    """The L_2-normalized character chi_S(u) = (m+1)^{-d/2} xi^{S.u}."""
    S = np.asarray(S, dtype=np.int64)
    u = np.asarray(u, dtype=np.int64)
    phase = int(np.dot(S, u)) % spec.q
    xi = np.exp(2j * np.pi * phase / spec.q)
    return complex(xi / spec.q ** (spec.d / 2))


def forward_transform(values: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """Group Fourier transform of a (possibly matrix-valued) array.

    `values` has shape (size, ...) with the leading axis indexed by flat
    group index; the trailing axes (e.g. matrix entries) transform
    entrywise.  Returns an array of the same shape indexed by frequency.
    """
    trailing = values.shape[1:]
    cube = values.reshape(spec.shape + trailing)
    out = np.fft.fftn(cube, axes=tuple(range(spec.d)))
    out *= spec.q ** (-spec.d / 2)
    return out.reshape((spec.size,) + trailing)


def inverse_transform(values: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """Inverse of :func:`forward_transform`."""
    trailing = values.shape[1:]
    cube = values.reshape(spec.shape + trailing)
    out = np.fft.ifftn(cube, axes=tuple(range(spec.d)))
    out *= spec.q ** (spec.d / 2)
    return out.reshape((spec.size,) + trailing)


def naive_forward_transform(values: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """O(size^2) double-sum transform, kept as an independent oracle."""
    size = spec.size
    coords = np.array([spec.coords_of(i) for i in range(size)])
    phases = coords @ coords.T % spec.q
    kernel = np.exp(-2j * np.pi * phases / spec.q) * spec.q ** (-spec.d / 2)
    flat = values.reshape(size, -1)
    return (kernel @ flat).reshape(values.shape)


def naive_inverse_transform(values: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """O(size^2) synthesis sum, oracle counterpart of the inverse."""
    size = spec.size
    coords = np.array([spec.coords_of(i) for i in range(size)])
    phases = coords @ coords.T % spec.q
    kernel = np.exp(2j * np.pi * phases / spec.q) * spec.q ** (-spec.d / 2)
    flat = values.reshape(size, -1)
    return (kernel @ flat).reshape(values.shape)
