"""Auxiliary water-wave quantities computed from a curve/velocity snapshot.

The transformed system carries a transport coefficient b and a normalized
pressure weight A, both real, recovered from the interface and velocity
through commutator identities:

    (I - H) b = -[u, H] (conj(zeta)_a - 1) / zeta_a
    (I - H) A = 1 + i [w, H] (conj(zeta)_a - 1)/zeta_a + i [u, H] d_a conj(u) / zeta_a

with u = D_t zeta, w = D_t^2 zeta, closed algebraically by w = i A zeta_a - i.
A and w are solved jointly by a fixed-point iteration started at A = 1.  The
cubic nonlinearity G, its transport derivative, a_t/a and D_t b are direct
transcriptions of the corresponding commutator/squared-difference displays,
all routed through the generic product kernels of `curveops`.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import TYPE_CHECKING

import numpy as np

from .curveops import (
    Curve,
    IterationError,
    commutator,
    conj_curve_hilbert,
    curve_hilbert,
    s2_apply,
    solve_real_part,
)
from .spectral import Field, Grid, derivative, l2_inner, sobolev_norm

if TYPE_CHECKING:
    from .packet import PacketState, WavePacket

_PI_I = np.pi * 1j


class RegimeError(RuntimeError):
    """State left the small-data regime (A < 1/2 or non-contracting solves)."""


@dataclass
class CurveState:
    """True-solution bundle: interface curve, velocity u = D_t zeta, optional
    velocity-potential trace, with derived b, A, w cached after computation."""

    curve: Curve
    u: Field
    time: float = 0.0
    psi: Field | None = None
    b: Field | None = dc_field(default=None, repr=False)
    A: Field | None = dc_field(default=None, repr=False)
    w: Field | None = dc_field(default=None, repr=False)

    @property
    def grid(self) -> Grid:
        return self.curve.grid

    @property
    def xi(self) -> Field:
        return self.curve.offset

    def zeta_alpha(self) -> np.ndarray:
        return self.curve.gamma_prime

    def coherence(self) -> float:
        """L2 size of (I - Hbar_zeta) u; an invariant zero of the exact flow."""
        defect = self.u - conj_curve_hilbert(self.curve, self.u)
        return float(np.sqrt(np.real(l2_inner(defect, defect))))


def still_water(grid: Grid) -> CurveState:
    zero = Field(grid, np.zeros(grid.n_points))
    return CurveState(curve=Curve(grid, zero), u=zero, psi=zero)


def state_from_packet(ps: "PacketState") -> CurveState:
    """Treat the approximation bundle as a curve/velocity snapshot."""
    return CurveState(curve=Curve(ps.grid, ps.xi_tilde), u=ps.dt_zeta,
                      time=ps.time, psi=ps.psi_tilde)


def compute_b(state: CurveState, initial: Field | None = None) -> Field:
    c = state.curve
    rhs = -commutator(c, state.u, state.xi.conj())
    b = solve_real_part(c, rhs, initial=initial)
    state.b = b
    return b


def compute_A(state: CurveState, initial: Field | None = None,
              tol: float = 1e-12, max_iter: int = 50) -> Field:
    """Solve the A formula jointly with the closure w = i A zeta_a - i."""
    c = state.curve
    grid = state.grid
    u_bar = state.u.conj()
    xi_bar = state.xi.conj()
    a = initial if initial is not None else Field(grid, np.ones(grid.n_points))
    term_u = 1j * commutator(c, state.u, u_bar)
    sq_h = np.sqrt(grid.spacing)
    for _ in range(max_iter):
        w = Field(grid, 1j * a.samples.real * c.gamma_prime - 1j)
        rhs = 1.0 + 1j * commutator(c, w, xi_bar) + term_u
        a_next = solve_real_part(c, rhs, initial=a)
        drift = sq_h * np.linalg.norm(a_next.samples.real - a.samples.real)
        a = a_next
        if drift < tol:
            break
    else:
        raise IterationError(f"A fixed point stalled at increment {drift:.2e}")
    if float(np.min(a.samples.real)) < 0.5:
        raise RegimeError(f"A dropped to {float(np.min(a.samples.real)):.3f} < 1/2")
    state.A = a
    state.w = Field(grid, 1j * a.samples.real * c.gamma_prime - 1j)
    return a


def ensure_b_A(state: CurveState, b0: Field | None = None,
               a0: Field | None = None) -> tuple[Field, Field, Field]:
    b = state.b if state.b is not None else compute_b(state, initial=b0)
    if state.A is None:
        compute_A(state, initial=a0)
    return b, state.A, state.w


def compute_G(state: CurveState) -> Field:
    """G = -2[u, H(1/zeta_a) + Hbar(1/conj(zeta)_a)] d_a u
    + (1/pi i) int (Du/Dzeta)^2 (zeta_b - conj(zeta)_b) db."""
    c = state.curve
    u = state.u
    mixed = (-2.0 / _PI_I) * s2_apply(c, [u], u) + (2.0 / _PI_I) * s2_apply(c.conjugate(), [u], u)
    square = (1.0 / _PI_I) * s2_apply(c, [u, u], state.xi - state.xi.conj())
    return mixed + square


def compute_DtG(state: CurveState) -> Field:
    c = state.curve
    cc = c.conjugate()
    u = state.u
    _, _, w = ensure_b_A(state)
    im_xi = Field(state.grid, state.xi.samples.imag.astype(np.complex128))
    im_u = Field(state.grid, u.samples.imag.astype(np.complex128))
    out = (-2.0 / _PI_I) * (s2_apply(c, [w], u) - s2_apply(cc, [w], u))
    out = out + (-2.0 / _PI_I) * (s2_apply(c, [u], w) - s2_apply(cc, [u], w))
    out = out + (2.0 / _PI_I) * s2_apply(c, [u, u], u)
    out = out + (-2.0 / _PI_I) * s2_apply(cc, [u, u.conj()], u)
    out = out + (4.0 / np.pi) * s2_apply(c, [u, w], im_xi)
    out = out + (2.0 / np.pi) * s2_apply(c, [u, u], im_u)
    out = out + (-4.0 / np.pi) * s2_apply(c, [u, u, u], im_xi)
    return out


def compute_at_over_a(state: CurveState) -> Field:
    """Recover a_t/a (composed with the coordinate change) from
    (I - H)(A conj(zeta)_a theta) = 2i[w,H] d_a conj(u)/zeta_a
    + 2i[u,H] d_a conj(w)/zeta_a - (1/pi) int (Du/Dzeta)^2 d_b conj(u) db."""
    c = state.curve
    u = state.u
    _, a, w = ensure_b_A(state)
    rhs = (2j * commutator(c, w, u.conj()) + 2j * commutator(c, u, w.conj())
           - (1.0 / np.pi) * s2_apply(c, [u, u], u.conj()))
    weight = Field(state.grid, a.samples.real * np.conj(c.gamma_prime))
    return solve_real_part(c, rhs, weight=weight)


def compute_Dtb(state: CurveState) -> Field:
    c = state.curve
    u = state.u
    b, _, w = ensure_b_A(state)
    rhs = (commutator(c, u, 2.0 * b - u.conj())
           - commutator(c, w, state.xi.conj())
           + (1.0 / _PI_I) * s2_apply(c, [u, u], state.xi.conj()))
    return solve_real_part(c, rhs)


# -- remainder diagnostics ----------------------------------------------------


def _dt_commuted(n: int, dt_f: Field, f: Field, b_alpha: Field) -> Field:
    """D_t d^n f from D_t f: D_t d^n = d^n D_t - sum_l d^(n-l)(b_a d^l)."""
    out = derivative(dt_f, n)
    for l in range(1, n + 1):
        out = out - derivative(b_alpha * derivative(f, l), n - l)
    return out


def _holomorphic_quadratic_form(f: Field) -> float:
    """i int f conj(f)_a da = L sum_m xi_m |fhat_m|^2 (manifestly real)."""
    fh = f.hat()
    return float(f.grid.length * np.sum(f.grid.wavenumbers * np.abs(fh) ** 2))


@dataclass(frozen=True)
class RemainderReport:
    E_s: float
    rho: Field
    sigma: Field
    energy_total: float
    energy_components: tuple[tuple[float, float], ...]  # (E_n, F_n) for n = 0..s
    quadratic_forms: tuple[float, ...]  # i int phi^(n) conj(phi^(n))_a da


def _fd_weights_1(stencil_vals, dt):
    m2, m1, _, p1, p2 = stencil_vals
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * dt)


def _fd_weights_2(stencil_vals, dt):
    m2, m1, c0, p1, p2 = stencil_vals
    return (-m2 + 16.0 * m1 - 30.0 * c0 + 16.0 * p1 - p2) / (12.0 * dt**2)


def remainder_diagnostics(state: CurveState, wave_packet: "WavePacket", s: int = 4,
                          packet_state: "PacketState | None" = None,
                          fd_step: float = 1e-3) -> RemainderReport:
    """Remainder size E_s and the energy sum over (E_n, F_n), n = 0..s.

    r = zeta - zeta~ and D_t r = u - D~_t zeta~ - (b - b~) zeta~_a; the sigma
    diagnostic uses the expanded operator H~ (not H_{zeta~}), with its
    transport derivative formed by temporal differencing of the analytic bundle.
    """
    from .residual import apply_expanded_hilbert

    c = state.curve
    grid = state.grid
    ps = packet_state if packet_state is not None else wave_packet.state(state.time)
    if ps.grid != grid:
        raise ValueError("state and packet live on different grids")
    b, a, _ = ensure_b_A(state)
    b_alpha = derivative(b, 1)
    inv_a = 1.0 / a.samples.real

    r = state.xi - ps.xi_tilde
    zeta_tilde_alpha = 1.0 + derivative(ps.xi_tilde, 1).samples
    dt_r = state.u - ps.dt_zeta - Field(grid, (b.samples - ps.b_tilde.samples) * zeta_tilde_alpha)
    E_s_half = sobolev_norm(derivative(r, 1), s) + sobolev_norm(dt_r, s)
    E_s = E_s_half**2

    rho = 0.5 * (r - curve_hilbert(c, r))
    dt_rho = 0.5 * (dt_r - curve_hilbert(c, dt_r)) - 0.5 * commutator(c, state.u, r)

    # I-script = D_t (I - H) xi - D~_t (I - H~) xi~, via the packet stencil
    def packet_antihol(t: float):
        p = ps if t == state.time else wave_packet.state(t)
        return (p.xi_tilde - apply_expanded_hilbert(p.epsilon, p.zeta1, p.zeta2, p.xi_tilde), p)

    stencil = [packet_antihol(state.time + j * fd_step)[0].samples
               for j in (-2, -1, 0, 1, 2)]
    a_center = Field(grid, stencil[2])
    a_t = Field(grid, _fd_weights_1(stencil, fd_step))
    a_tt = Field(grid, _fd_weights_2(stencil, fd_step))
    bt_s = ps.b_tilde.samples.real
    da_center = derivative(a_center, 1)
    tilde_dt_A = a_t + Field(grid, bt_s * da_center.samples)

    dt_xi_exact = state.u - b
    dt_antihol = (dt_xi_exact - curve_hilbert(c, dt_xi_exact)) - commutator(c, state.u, state.xi)
    script_i = dt_antihol - tilde_dt_A
    sigma = 0.25 * (script_i - curve_hilbert(c, script_i))

    # D_t sigma: uses P (I - H) xi = G as the defining substitution for D_t^2(I-H)xi
    g_here = compute_G(state)
    antihol_xi = state.xi - curve_hilbert(c, state.xi)
    dt2_antihol = g_here + Field(grid, 1j * a.samples.real * derivative(antihol_xi, 1).samples)
    dtb_tilde_s = ps.dt_b_tilde.samples.real
    tilde_dt2_A = (a_tt + Field(grid, 2.0 * bt_s * derivative(a_t, 1).samples)
                   + Field(grid, bt_s**2 * derivative(a_center, 2).samples)
                   + Field(grid, dtb_tilde_s * da_center.samples))
    dt_tilde_part = tilde_dt2_A + Field(
        grid, (b.samples.real - bt_s) * derivative(tilde_dt_A, 1).samples)
    dt_script_i = dt2_antihol - dt_tilde_part
    dt_sigma = 0.25 * (dt_script_i - curve_hilbert(c, dt_script_i)) \
        - 0.25 * commutator(c, state.u, script_i)

    comps = []
    qforms = []
    h = grid.spacing
    for n in range(int(s) + 1):
        rho_n = derivative(rho, n)
        dt_rho_n = _dt_commuted(n, dt_rho, rho, b_alpha)
        phi_n = 0.5 * (rho_n - curve_hilbert(c, rho_n))
        q = _holomorphic_quadratic_form(phi_n)
        e_n = float(h * np.sum(inv_a * np.abs(dt_rho_n.samples) ** 2)) + q
        sigma_n = derivative(sigma, n)
        dt_sigma_n = _dt_commuted(n, dt_sigma, sigma, b_alpha)
        f_n = float(h * np.sum(inv_a * np.abs(dt_sigma_n.samples) ** 2)) \
            + _holomorphic_quadratic_form(sigma_n)
        comps.append((e_n, f_n))
        qforms.append(q)

    total = float(sum(e + f for e, f in comps))
    return RemainderReport(E_s=E_s, rho=rho, sigma=sigma, energy_total=total,
                           energy_components=tuple(comps), quadratic_forms=tuple(qforms))
