"""Characters and transforms on Z/N and F_2^n.

Normalization is the averaging one: ``fhat(r) = E_x f(x) e(xr/N)`` with
``e(t) = exp(2 pi i t)`` on Z/N, and ``fhat(r) = E_x f(x) (-1)^<x,r>`` on
the boolean cube.  With it Parseval reads ``sum_r |fhat(r)|^2 = E_x |f(x)|^2``
and the inverse is ``f(x) = sum_r fhat(r) conj(e(xr/N))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .groups import (
    BOOLEAN_CUBE,
    CYCLIC,
    Group,
    SignedIndicator,
    SubsetMask,
    make_group,
    require_odd_prime,
    same_group,
)
from .tolerances import TOL

DIRECT_DFT_MAX = 4096
_CACHED_MATRIX_MAX = 1024


class UnsupportedGroupError(ValueError):
    pass


class NumericInstabilityError(ArithmeticError):
    """Float transform too inaccurate to round to the exact integer."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    group: Group
    coeffs: np.ndarray

    def inverse(self) -> np.ndarray:
        return inverse_transform(self)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.coeffs)


@dataclass(frozen=True, eq=False)
class QuadraticCharacter:
    p: int
    values: np.ndarray

    def __call__(self, a):
        return self.values[np.asarray(a) % self.p]


def _require_abelian(group: Group) -> None:
    if group.kind not in (CYCLIC, BOOLEAN_CUBE):
        raise UnsupportedGroupError(f"Fourier transform unsupported for {group.kind} groups")


@lru_cache(maxsize=16)
def _dft_matrix(n: int) -> np.ndarray:
    k = np.arange(n)
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    w = roots[np.outer(k, k) % n]
    w.setflags(write=False)
    return w


def _direct_dft(f: np.ndarray) -> np.ndarray:
    n = f.shape[-1]
    if n <= _CACHED_MATRIX_MAX:
        return f @ _dft_matrix(n).T / n
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    x = np.arange(n)
    out = np.empty(f.shape, dtype=complex)
    step = 256
    for r0 in range(0, n, step):
        r = np.arange(r0, min(n, r0 + step))
        w = roots[np.outer(r, x) % n]
        out[..., r0 : r0 + r.size] = f @ w.T
    return out / n


def walsh_hadamard(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis."""
    a = np.array(a)
    n = a.shape[-1]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    lead = a.shape[:-1]
    h = 1
    while h < n:
        v = a.reshape(*lead, n // (2 * h), 2, h)
        x = v[..., 0, :]
        y = v[..., 1, :]
        a = np.stack((x + y, x - y), axis=-2).reshape(*lead, n)
        h *= 2
    return a


def transform(f, group: Group, method: str = "auto") -> Spectrum:
    """Fourier coefficients of ``f`` (length-N vector, or a batch along the last axis)."""
    _require_abelian(group)
    f = np.asarray(f)
    if f.shape[-1] != group.size:
        raise ValueError("function length does not match group order")
    if group.kind == BOOLEAN_CUBE:
        return Spectrum(group, walsh_hadamard(f.astype(float)) / group.size)
    if method == "auto":
        method = "direct" if group.size <= DIRECT_DFT_MAX else "fft"
    if method == "direct":
        coeffs = _direct_dft(f.astype(complex))
    elif method == "fft":
        coeffs = np.fft.ifft(f, axis=-1)
    else:
        raise ValueError(f"unknown transform method {method!r}")
    return Spectrum(group, coeffs)


def inverse_transform(spectrum: Spectrum) -> np.ndarray:
    group = spectrum.group
    if group.kind == BOOLEAN_CUBE:
        return walsh_hadamard(spectrum.coeffs)
    return np.fft.fft(spectrum.coeffs, axis=-1)


def quadratic_character(p: int) -> QuadraticCharacter:
    """Legendre symbol mod ``p`` via Euler's criterion; chi(0) = 0."""
    p = require_odd_prime(p)
    e = (p - 1) // 2
    vals = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        vals[a] = 1 if pow(a, e, p) == 1 else -1
    vals.setflags(write=False)
    return QuadraticCharacter(p, vals)


def gauss_sum_profile(p: int) -> np.ndarray:
    """Moduli |chihat(r)| for r = 0..p-1; every nonzero r gives p**-0.5."""
    chi = quadratic_character(p)
    return transform(chi.values, make_group(CYCLIC, p)).moduli


def _function_values(f, group: Group) -> np.ndarray:
    if isinstance(f, SignedIndicator):
        v = f.values
    elif isinstance(f, QuadraticCharacter):
        v = f.values
    elif isinstance(f, SubsetMask):
        v = f.bits.astype(np.int64)
    else:
        v = np.asarray(f)
    if v.shape != (group.size,):
        raise ValueError("function length does not match group order")
    return v


def _split_spectrum(f, group: Group):
    fh = transform(_function_values(f, group), group).moduli
    zero = fh[0] if fh[0] > TOL.mean_zero else 0.0
    rest = float(fh[1:].max()) if group.size > 1 else 0.0
    return fh, float(zero), rest


def fourier_discrepancy_bound(X: SubsetMask, Y: SubsetMask, f) -> float:
    """Upper bound for ``|sum_{x in X, y in Y} f(xy)|`` from the spectrum of ``f``.

    ``|fhat(0)| |X||Y| + N max_{r != 0} |fhat(r)| sqrt(|X||Y|)``; for the
    quadratic character on Z/p this is ``sqrt(p |X||Y|)``.
    """
    group = same_group(X, Y)
    _require_abelian(group)
    _, zero, rest = _split_spectrum(f, group)
    xy = X.cardinality * Y.cardinality
    return zero * xy + group.size * rest * math.sqrt(xy)


def cauchy_schwarz_intermediate(X: SubsetMask, Y: SubsetMask, f) -> float:
    """``N^2 max|fhat| sum_r |1_X hat(r)| |1_Y hat(r)|``, before Cauchy-Schwarz.

    When ``fhat(0) != 0`` the zero frequency is kept as the exact term
    ``|fhat(0)| |X||Y|`` and the sum runs over r != 0.
    """
    group = same_group(X, Y)
    _require_abelian(group)
    _, zero, rest = _split_spectrum(f, group)
    xh = transform(X.bits.astype(float), group).moduli
    yh = transform(Y.bits.astype(float), group).moduli
    n2 = group.size**2
    if zero == 0.0:
        return n2 * rest * float(np.dot(xh, yh))
    return zero * X.cardinality * Y.cardinality + n2 * rest * float(np.dot(xh[1:], yh[1:]))


def character_sum(X: SubsetMask, Y: SubsetMask, f) -> int:
    """Exact ``sum_z r(z) f(z)`` for integer-valued ``f``."""
    group = same_group(X, Y)
    v = _function_values(f, group)
    prods = group.op(X.elements[:, None], Y.elements[None, :])
    return int(v[prods].sum())


def fast_energy(X: SubsetMask, Y: SubsetMask, group: Group | None = None) -> int:
    """``sum_z r(z)^2`` through the transform (Parseval)."""
    group = same_group(X, Y) if group is None else group
    _require_abelian(group)
    n = group.size
    if group.kind == BOOLEAN_CUBE and n <= 4096:
        # integer WHT: entries <= N, so N * (N^2)^2 stays inside int64
        wx = walsh_hadamard(X.bits.astype(np.int64))
        wy = walsh_hadamard(Y.bits.astype(np.int64))
        total = int(np.sum((wx * wy) ** 2))
        return total // n
    if group.kind == BOOLEAN_CUBE:
        prod = walsh_hadamard(X.bits.astype(float)) * walsh_hadamard(Y.bits.astype(float))
        value = float(np.sum(prod**2)) / n
    else:
        prod = np.fft.fft(X.bits.astype(float)) * np.fft.fft(Y.bits.astype(float))
        value = float(np.sum(np.abs(prod) ** 2)) / n
    result = round(value)
    if abs(value - result) >= TOL.rounding_guard:
        raise NumericInstabilityError(
            f"transform energy {value!r} too far from an integer; fall back to direct counting"
        )
    return int(result)
