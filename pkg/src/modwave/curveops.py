"""Curve-attached Hilbert transform, principal-value quadrature and product kernels.

The ambient curves are graphs-with-drift gamma(alpha) = alpha + p(alpha) with p
periodic, so the line kernel 1/(gamma(a) - gamma(b)) periodizes by summing over
images gamma(b) + nL:

    sum_n 1/(D - nL)        = (pi/L) cot(pi D / L)
    sum_n 1/(D - nL)^2      = (pi/L)^2 / sin^2(pi D / L)
    sum_n 1/(D - nL)^3      = (pi/L)^3 cot(pi D / L) / sin^2(pi D / L)

with D = gamma(a) - gamma(b) the full complex difference.  Singular kernels use
the alternating-point trapezoidal rule (sum over nodes of opposite parity with
weight 2h), which reproduces the flat Hilbert multiplier exactly on resolved
modes; nonsingular product kernels use the full trapezoidal rule with the
analytic diagonal limit  prod A_j'(a) / gamma'(a)^p  times weight h.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .spectral import Field, Grid, SpectralError, derivative, l2_inner


class ChordArcError(RuntimeError):
    """Curve fails the chord-arc bounds; carries the offending node pair."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None,
                 ratio: float | None = None):
        super().__init__(message)
        self.pair = pair
        self.ratio = ratio


class IterationError(RuntimeError):
    """Fixed-point solve failed to contract (small-data regime left)."""


class Curve:
    """Parametrized interface gamma(alpha) = alpha + offset(alpha), offset periodic.

    Caches the alternating-point Hilbert matrix and the periodized denominator
    matrices, keyed by power, so repeated kernel applications on one curve are
    single mat-vecs.
    """

    def __init__(self, grid: Grid, offset: Field):
        if offset.grid != grid:
            raise SpectralError("curve offset lives on a different grid")
        self.grid = grid
        self.offset = offset
        self.gamma = offset.samples + grid.nodes
        self.gamma_prime = 1.0 + derivative(offset, 1).samples
        self._phi: dict[int, np.ndarray] = {}
        self._hilbert_matrix: np.ndarray | None = None
        self._conjugate: Curve | None = None

    @classmethod
    def from_gamma(cls, grid: Grid, gamma_samples: np.ndarray) -> "Curve":
        return cls(grid, Field(grid, np.asarray(gamma_samples) - grid.nodes))

    @classmethod
    def flat(cls, grid: Grid) -> "Curve":
        return cls(grid, Field(grid, np.zeros(grid.n_points)))

    def conjugate(self) -> "Curve":
        if self._conjugate is None:
            self._conjugate = Curve(self.grid, self.offset.conj())
            self._conjugate._conjugate = self
        return self._conjugate

    def gamma_field(self) -> Field:
        return Field(self.grid, self.gamma)

    # -- periodized denominators ------------------------------------------------

    def _difference(self) -> np.ndarray:
        return self.gamma[:, None] - self.gamma[None, :]

    def phi(self, power: int) -> np.ndarray:
        """Matrix of sum_n (gamma_i - gamma_j - nL)^(-power); diagonal zeroed."""
        if power not in (1, 2, 3):
            raise ValueError(f"denominator power {power} not supported")
        cached = self._phi.get(power)
        if cached is not None:
            return cached
        n = self.grid.n_points
        c = np.pi / self.grid.length
        theta = c * self._difference()
        np.fill_diagonal(theta, 0.25 * np.pi)  # dummy, diagonal zeroed below
        sin = np.sin(theta)
        if power == 1:
            mat = c * np.cos(theta) / sin
        elif power == 2:
            mat = c**2 / sin**2
        else:
            mat = c**3 * np.cos(theta) / sin**3
        np.fill_diagonal(mat, 0.0)
        self._phi[power] = mat
        return mat

    def hilbert_matrix(self) -> np.ndarray:
        """Matrix M with (H_gamma f)_i = sum_j M_ij f_j (alternating-point rule)."""
        if self._hilbert_matrix is None:
            n = self.grid.n_points
            h = self.grid.spacing
            idx = np.arange(n)
            parity = ((idx[:, None] - idx[None, :]) % 2).astype(float)
            mat = self.phi(1) * parity * self.gamma_prime[None, :]
            self._hilbert_matrix = (2.0 * h / (np.pi * 1j)) * mat
        return self._hilbert_matrix

    # -- chord-arc monitoring ----------------------------------------------------

    def chord_arc_constants(self, stride: int = 1) -> tuple[float, float, tuple[int, int]]:
        """(nu, N, worst-pair) over strided node pairs plus all adjacent pairs."""
        L = self.grid.length
        sel = np.arange(0, self.grid.n_points, max(1, stride))
        g = self.gamma[sel]
        a = self.grid.nodes[sel]
        da = a[:, None] - a[None, :]
        shift = np.round(da / L) * L
        da = da - shift
        dg = g[:, None] - g[None, :] - shift
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(dg) / np.abs(da)
        np.fill_diagonal(ratio, 1.0)
        # adjacent pairs at full resolution catch local pinching between strides
        adj = np.abs(np.diff(np.append(self.gamma, self.gamma[0] + L))) / self.grid.spacing
        i_min = int(np.argmin(ratio))
        pair = (int(sel[i_min // len(sel)]), int(sel[i_min % len(sel)]))
        nu = min(float(ratio.min()), float(adj.min()))
        if adj.min() < ratio.min():
            j = int(np.argmin(adj))
            pair = (j, (j + 1) % self.grid.n_points)
        return nu, max(float(ratio.max()), float(adj.max())), pair

    def require_chord_arc(self, min_ratio: float = 0.1, max_ratio: float = 10.0,
                          stride: int = 1) -> tuple[float, float]:
        nu, big, pair = self.chord_arc_constants(stride)
        if nu < min_ratio or big > max_ratio:
            # full pair scan only on failure, to report the true worst offender
            if stride > 1:
                nu, big, pair = self.chord_arc_constants(1)
            raise ChordArcError(
                f"chord-arc violation: ratio range [{nu:.3e}, {big:.3e}] at nodes {pair}",
                pair=pair, ratio=nu,
            )
        return nu, big


def curve_hilbert(curve: Curve, f: Field) -> Field:
    """H_gamma f = (1/pi i) pv int gamma_beta / (gamma(a) - gamma(b)) f(b) db."""
    if f.grid != curve.grid:
        raise SpectralError("field grid does not match curve grid")
    return Field(curve.grid, curve.hilbert_matrix() @ f.samples)


def conj_curve_hilbert(curve: Curve, f: Field) -> Field:
    """The conjugated operator Hbar f = conj(H_gamma conj(f))."""
    return curve_hilbert(curve, f.conj()).conj()


def s1_apply(curve: Curve, a_fields: Sequence[Field], f: Field,
             denom_power: int | None = None) -> Field:
    """Singular product kernel: int prod_j (A_j(a) - A_j(b)) Phi_p(D) f(b) db.

    p defaults to len(a_fields) + 1 so the kernel carries one net 1/D
    singularity; evaluated with the alternating-point rule.  No 1/(pi i)
    prefactor is applied.
    """
    p = denom_power if denom_power is not None else len(a_fields) + 1
    if p < len(a_fields) + 1:
        raise ValueError("s1 kernel must be singular; use s2_apply for smooth kernels")
    n = curve.grid.n_points
    idx = np.arange(n)
    parity = ((idx[:, None] - idx[None, :]) % 2).astype(float)
    ker = curve.phi(p) * parity
    for a in a_fields:
        ker = ker * (a.samples[:, None] - a.samples[None, :])
    return Field(curve.grid, 2.0 * curve.grid.spacing * (ker @ f.samples))


def s2_apply(curve: Curve, a_fields: Sequence[Field], f: Field,
             denom_power: int | None = None) -> Field:
    """Smooth product kernel: int prod_j (A_j(a) - A_j(b)) Phi_p(D) f'(b) db.

    p defaults to len(a_fields); requires p <= len(a_fields) so the diagonal
    is a removable singularity, valued prod A_j'(a) / gamma'(a)^p (extra
    difference factors make the diagonal vanish).  Full trapezoidal rule;
    no 1/(pi i) prefactor.
    """
    m = len(a_fields)
    p = denom_power if denom_power is not None else m
    if p > m:
        raise ValueError("s2 kernel would be singular; use s1_apply")
    ker = curve.phi(p).copy()
    for a in a_fields:
        ker = ker * (a.samples[:, None] - a.samples[None, :])
    f_prime = derivative(f, 1).samples
    out = ker @ f_prime
    if p == m:
        diag = np.ones(curve.grid.n_points, dtype=np.complex128)
        for a in a_fields:
            diag = diag * derivative(a, 1).samples
        out = out + diag / curve.gamma_prime**p * f_prime
    return Field(curve.grid, curve.grid.spacing * out)


def commutator(curve: Curve, g: Field, f: Field) -> Field:
    """[g, H_gamma](f_alpha / gamma_alpha) = (1/pi i) int (g(a)-g(b)) Phi_1(D) f'(b) db."""
    return (1.0 / (np.pi * 1j)) * s2_apply(curve, [g], f)


def solve_real_part(curve: Curve, rhs: Field, weight: Field | None = None,
                    tol: float = 1e-12, max_iter: int = 100,
                    initial: Field | None = None) -> Field:
    """Solve (I - H_gamma)(w f) = rhs for real f (w real-free weight, default 1).

    Fixed-point iteration f <- Re((rhs + H(w f)) / w); on a flat curve the
    real part of H_0 acting on real fields vanishes, so the first iterate is
    already exact and the contraction rate for near-flat curves is O(|offset'|).
    """
    grid = curve.grid
    w = weight.samples if weight is not None else np.ones(grid.n_points)
    f = initial.samples.real.copy() if initial is not None else (rhs.samples / w).real
    mat = curve.hilbert_matrix()
    sq_h = np.sqrt(grid.spacing)
    delta = np.inf
    for _ in range(max_iter):
        nxt = ((rhs.samples + mat @ (w * f)) / w).real
        delta = sq_h * np.linalg.norm(nxt - f)
        f = nxt
        if delta < tol:
            return Field(grid, f.astype(np.complex128))
    raise IterationError(
        f"solve_real_part did not converge in {max_iter} iterations "
        f"(last increment {delta:.2e}); curve may be outside the perturbative regime"
    )


def project_antiholomorphic(curve: Curve, f: Field) -> Field:
    """1/2 (I + Hbar_gamma) f: the trace component antiholomorphic below gamma."""
    return 0.5 * (f + conj_curve_hilbert(curve, f))


def project_holomorphic(curve: Curve, f: Field) -> Field:
    """1/2 (I - H_gamma) f: the component holomorphic above the curve."""
    return 0.5 * (f - curve_hilbert(curve, f))


def curve_mean(curve: Curve, f: Field) -> complex:
    """(1/L) int f gamma' db: the constant mode in the curve-adapted splitting.

    H_gamma^2 = I holds exactly on fields with vanishing curve mean; on a
    general field the involution defect is precisely this constant.
    """
    return l2_inner(Field(curve.grid, f.samples * curve.gamma_prime),
                    Field(curve.grid, np.ones(curve.grid.n_points))) / curve.grid.length
