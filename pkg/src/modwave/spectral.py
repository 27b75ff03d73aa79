"""Periodic grid, Fourier calculus, flat Hilbert transform and discrete Sobolev norms.

All fields live on a uniform periodic grid of n points on [0, L).  Fourier
coefficients follow the convention

    f(alpha) = sum_m  fhat_m  exp(i xi_m alpha),      xi_m = 2 pi m / L,

so fhat = fft(samples)/n in numpy ordering.  Parseval then reads
int |f|^2 dalpha = L * sum |fhat_m|^2, and constants have Sobolev norm
sqrt(L).  The sign convention sgn(0) = 0 is used in every sign multiplier,
so the flat Hilbert transform annihilates constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

SymbolLike = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


class SpectralError(ValueError):
    """Raised on invalid grids, incompatible fields or non-finite data."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: nodes alpha_j = j L / n, integer modes m."""

    n_points: int
    length: float

    def __post_init__(self):
        if self.n_points < 2 or self.n_points % 2 != 0:
            raise SpectralError(f"n_points must be even and >= 2, got {self.n_points}")
        if not (self.length > 0):
            raise SpectralError(f"length must be positive, got {self.length}")

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_points) * (self.length / self.n_points)

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers in numpy fft ordering (Nyquist stored as -n/2)."""
        return np.fft.fftfreq(self.n_points, 1.0 / self.n_points)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * self.modes / self.length

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2


@dataclass(frozen=True)
class Field:
    """Complex samples of a function of alpha on a Grid."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.shape != (self.grid.n_points,):
            raise SpectralError(
                f"samples shape {arr.shape} does not match grid with {self.grid.n_points} points"
            )
        object.__setattr__(self, "samples", arr)

    # arithmetic preserves grid identity
    def _like(self, samples: np.ndarray) -> "Field":
        return Field(self.grid, samples)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise SpectralError("fields live on different grids")
            return other.samples
        return np.asarray(other, dtype=np.complex128)

    def __add__(self, other):
        return self._like(self.samples + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._like(self.samples - self._coerce(other))

    def __rsub__(self, other):
        return self._like(self._coerce(other) - self.samples)

    def __mul__(self, other):
        return self._like(self.samples * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._like(self.samples / self._coerce(other))

    def __neg__(self):
        return self._like(-self.samples)

    def conj(self) -> "Field":
        return self._like(np.conj(self.samples))

    @property
    def real(self) -> np.ndarray:
        return self.samples.real

    @property
    def imag(self) -> np.ndarray:
        return self.samples.imag

    def hat(self) -> np.ndarray:
        """Fourier coefficients fhat_m (numpy ordering)."""
        return np.fft.fft(self.samples) / self.grid.n_points

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples)))


def field_from_hat(grid: Grid, fhat: np.ndarray) -> Field:
    return Field(grid, np.fft.ifft(fhat * grid.n_points))


def constant_field(grid: Grid, value: complex) -> Field:
    return Field(grid, np.full(grid.n_points, value, dtype=np.complex128))


def fourier_multiplier(f: Field, symbol: SymbolLike) -> Field:
    """Apply fhat_m -> symbol(xi_m) fhat_m.

    `symbol` is either a callable on the wavenumber array or a precomputed
    array of multiplier values in fft ordering.  Odd symbols must be zeroed
    at the Nyquist slot by the caller; the named helpers below do this.
    """
    if not f.is_finite():
        raise SpectralError("fourier_multiplier: field contains non-finite samples")
    sym = symbol(f.grid.wavenumbers) if callable(symbol) else np.asarray(symbol)
    if sym.shape != (f.grid.n_points,):
        raise SpectralError("multiplier symbol has wrong length")
    return field_from_hat(f.grid, sym * f.hat())


def _sign_symbol(grid: Grid) -> np.ndarray:
    # sgn(0) = 0; Nyquist zeroed (odd multiplier)
    sym = np.sign(grid.wavenumbers)
    sym[grid.nyquist_index] = 0.0
    return sym


def flat_hilbert(f: Field) -> Field:
    """Flat Hilbert transform: multiplier -sgn(xi), sgn(0) = 0."""
    return fourier_multiplier(f, -_sign_symbol(f.grid))


def conj_flat_hilbert(f: Field) -> Field:
    """conj o flat_hilbert o conj; equivalently multiplier +sgn(xi)."""
    return fourier_multiplier(f, _sign_symbol(f.grid))


def derivative(f: Field, order: int = 1) -> Field:
    """Spectral derivative (i xi)^order; odd orders zero the Nyquist mode."""
    if order < 0:
        raise SpectralError("derivative order must be nonnegative")
    if order == 0:
        return f
    sym = (1j * f.grid.wavenumbers) ** order
    if order % 2 == 1:
        sym[f.grid.nyquist_index] = 0.0
    return fourier_multiplier(f, sym)


def half_derivative(f: Field) -> Field:
    """Multiplier |xi|^(1/2)."""
    return fourier_multiplier(f, np.sqrt(np.abs(f.grid.wavenumbers)))


def sobolev_norm(f: Field, s: float = 0.0) -> float:
    """H^s norm: sqrt(L sum (1 + xi^2)^s |fhat|^2)."""
    w = (1.0 + f.grid.wavenumbers**2) ** (s / 2.0)
    return float(np.sqrt(f.grid.length * np.sum(np.abs(w * f.hat()) ** 2)))


def homogeneous_norm(f: Field, s: float) -> float:
    """Homogeneous norm: sqrt(L sum |xi|^(2s) |fhat|^2)."""
    w = np.abs(f.grid.wavenumbers) ** s
    return float(np.sqrt(f.grid.length * np.sum(np.abs(w * f.hat()) ** 2)))


def sup_norm(f: Field) -> float:
    return float(np.max(np.abs(f.samples)))


def wsinf_norm(f: Field, s: int) -> float:
    """W^{s,inf} norm: sum over j <= s of sup |d^j f|."""
    return sum(sup_norm(derivative(f, j)) for j in range(int(s) + 1))


def projections(f: Field) -> tuple[Field, Field]:
    """Antiholomorphic / holomorphic traces: (1/2(I - H0) f, 1/2(I + H0) f).

    Their sum reproduces f exactly; the zero mode splits evenly.
    """
    hf = flat_hilbert(f)
    return 0.5 * (f - hf), 0.5 * (f + hf)


def l2_inner(f: Field, g: Field) -> complex:
    """int f conj(g) dalpha via the trapezoidal rule (spectrally exact)."""
    if f.grid != g.grid:
        raise SpectralError("fields live on different grids")
    return complex(f.grid.spacing * np.sum(f.samples * np.conj(g.samples)))


def mean(f: Field) -> complex:
    return complex(np.mean(f.samples))


def krasny_filter(f: Field, floor: float = 1e-13) -> Field:
    """Zero all modes with |fhat| < floor * max|fhat| (spectral noise floor)."""
    if floor <= 0.0:
        return f
    fhat = f.hat()
    cutoff = floor * np.max(np.abs(fhat))
    fhat = np.where(np.abs(fhat) < cutoff, 0.0, fhat)
    return field_from_hat(f.grid, fhat)


def translate(f: Field, delta: float) -> Field:
    """Evaluate f(alpha + delta) on the grid via the shift multiplier."""
    return field_from_hat(f.grid, f.hat() * np.exp(1j * f.grid.wavenumbers * delta))


def evaluate_at(f: Field, points: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of f at arbitrary points.

    The Nyquist mode is split evenly between +n/2 and -n/2 so that real
    fields interpolate to real values.
    """
    fhat = f.hat().copy()
    modes = f.grid.modes.copy()
    n = f.grid.n_points
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    k = 2.0 * np.pi * modes / f.grid.length
    ny = f.grid.nyquist_index
    phases = np.exp(1j * np.outer(pts, k))
    vals = phases @ fhat
    # symmetrize the Nyquist contribution: replace e^{-i k_ny x} by cos(k_ny x)
    k_ny = 2.0 * np.pi * (n // 2) / f.grid.length
    vals += fhat[ny] * (np.cos(k_ny * pts) - np.exp(-1j * k_ny * pts))
    return vals if np.ndim(points) else vals[0]
