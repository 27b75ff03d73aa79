"""Third-order wave-packet approximation bundle.

Given an envelope B(X, T) solving the focusing cubic NLS and a carrier with
k > 0, assembles on the fast grid (phase phi = k alpha + omega t, slow
variables X = eps (alpha + omega' t), T = eps^2 t):

    zeta~ = alpha + eps B e^{i phi}
                  + eps^2 (ik/2)(I - Hbar0)|B|^2
                  + eps^3 ( -(k^2/2) conj(B) |B|^2 e^{-i phi}
                            + (1/2)(I - Hbar0)(conj(B) B_X) )

    b~    = eps^2 (-k omega |B|^2)
          + eps^3 ( Re(2 i omega k^2 B |B|^2 e^{i phi})
                    + (3/4) i omega (B conj(B)_X - conj(B) B_X)
                    - (1/4) i omega Hbar0(B conj(B)_X + conj(B) B_X) )

    A~    = 1

    Psi~  = eps ( B e^{i phi} / (2 omega) + cc )
          + eps^2 ( -B_X e^{i phi} / (4 i k omega) + cc + (i omega / 2) H0 |B|^2 )
          + eps^3 ( (-3 B_XX / (16 k^2 omega) + (k^2 / (2 omega)) B |B|^2) e^{i phi} + cc )

    lambda~ = (I - H~) Psi~,   H~ = H0 + eps H1 + eps^2 H2.

Time derivatives are closed-form: d/dt acts on the phase (factor i omega), on
X (factor eps omega') and on T (factor eps^2, eliminated through the envelope
equation 2i B_T = omega'' B_XX - k^2 omega B |B|^2), after which
D~_t = d_t + b~ d_alpha is assembled spectrally.  Slow-variable multipliers
(Hbar0 etc.) act identically on the slow and fast grids because sign symbols
are dilation invariant, so all algebra happens on translated fast-grid arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nls import Carrier, Envelope, NLSTrajectory
from .spectral import (
    Field,
    Grid,
    SpectralError,
    conj_flat_hilbert,
    derivative,
    flat_hilbert,
    translate,
)

Triple = tuple[np.ndarray, np.ndarray, np.ndarray]


class PacketError(ValueError):
    pass


@dataclass(frozen=True)
class PacketState:
    """The approximation bundle at one fast time t (profiles zeta1, zeta2 carry
    no epsilon factors)."""

    grid: Grid
    carrier: Carrier
    epsilon: float
    time: float
    zeta_tilde: Field
    xi_tilde: Field
    dt_zeta: Field
    dt2_zeta: Field
    b_tilde: Field
    a_tilde: float
    psi_tilde: Field
    lambda_tilde: Field
    zeta1: Field
    zeta2: Field
    dt_b_tilde: Field
    dt_psi_tilde: Field


def _mul(u, v) -> Triple:
    return (u[0] * v[0],
            u[1] * v[0] + u[0] * v[1],
            u[2] * v[0] + 2.0 * u[1] * v[1] + u[0] * v[2])


def _conj(u) -> Triple:
    return tuple(np.conj(c) for c in u)


class WavePacket:
    """Builds PacketState bundles from an NLS envelope trajectory.

    The slow grid must satisfy L_slow = eps * L_fast with equal point counts,
    and the carrier must fit the fast domain: k L_fast / (2 pi) integer.
    """

    def __init__(self, fast_grid: Grid, epsilon: float, trajectory: NLSTrajectory):
        carrier = trajectory._cache[0].carrier
        slow_grid = trajectory._cache[0].grid
        if epsilon <= 0:
            raise PacketError("epsilon must be positive")
        m = carrier.k * fast_grid.length / (2.0 * np.pi)
        if abs(m - round(m)) > 1e-9 or round(m) < 1:
            raise PacketError(
                f"carrier does not fit the domain: k L / 2 pi = {m:.6f} must be a positive integer"
            )
        if slow_grid.n_points != fast_grid.n_points:
            raise PacketError("slow and fast grids must have equal point counts")
        if abs(slow_grid.length - epsilon * fast_grid.length) > 1e-9 * slow_grid.length:
            raise PacketError(
                f"slow length {slow_grid.length} != eps * fast length {epsilon * fast_grid.length}"
            )
        self.grid = fast_grid
        self.slow_grid = slow_grid
        self.carrier = carrier
        self.epsilon = float(epsilon)
        self.trajectory = trajectory

    # -- envelope jet -------------------------------------------------------

    def _jet(self, t: float) -> dict[str, np.ndarray]:
        """Envelope and its X/T derivatives, evaluated at X = eps(alpha + omega' t)."""
        c = self.carrier
        eps = self.epsilon
        env = self.trajectory.at(eps**2 * t)
        g = self.slow_grid
        b = Field(g, env.samples)
        cnl = c.k**2 * c.omega

        def dx(f: Field) -> Field:
            return derivative(f, 1)

        bx, bxx = dx(b), derivative(b, 2)
        bxxx = derivative(b, 3)
        bt = Field(g, -0.5j * (c.omega_double_prime * bxx.samples
                               - cnl * b.samples * np.abs(b.samples) ** 2))
        btx, btxx = dx(bt), derivative(bt, 2)
        btt = Field(g, -0.5j * (c.omega_double_prime * btxx.samples
                                - cnl * (2.0 * np.abs(b.samples) ** 2 * bt.samples
                                         + b.samples**2 * np.conj(bt.samples))))
        bttx = dx(btt)
        shift = eps * c.omega_prime * t
        out = {}
        for name, fld in [("b", b), ("bx", bx), ("bxx", bxx), ("bxxx", bxxx),
                          ("bt", bt), ("btx", btx), ("btxx", btxx),
                          ("btt", btt), ("bttx", bttx)]:
            out[name] = translate(fld, shift).samples
        return out

    def _fast(self, samples: np.ndarray) -> Field:
        return Field(self.grid, samples)

    def state(self, t: float) -> PacketState:
        c, eps, grid = self.carrier, self.epsilon, self.grid
        k, om, omp = c.k, c.omega, c.omega_prime
        jet = self._jet(t)

        # co-moving slow derivative D1 = eps omega' d_X + eps^2 d_T, twice
        tb: Triple = (jet["b"],
                      eps * omp * jet["bx"] + eps**2 * jet["bt"],
                      (eps * omp) ** 2 * jet["bxx"] + 2.0 * eps**3 * omp * jet["btx"]
                      + eps**4 * jet["btt"])
        tbx: Triple = (jet["bx"],
                       eps * omp * jet["bxx"] + eps**2 * jet["btx"],
                       (eps * omp) ** 2 * jet["bxxx"] + 2.0 * eps**3 * omp * jet["btxx"]
                       + eps**4 * jet["bttx"])
        tbxx_val = jet["bxx"]
        tbxx_d1 = eps * omp * jet["bxxx"] + eps**2 * jet["btxx"]

        tb_c = _conj(tb)
        g2 = _mul(tb, tb_c)            # |B|^2
        g3 = _mul(tb_c, g2)            # conj(B) |B|^2
        g4 = _mul(tb_c, tbx)           # conj(B) B_X
        g5 = _mul(tb, g2)              # B |B|^2
        g6 = _mul(tb, _conj(tbx))      # B conj(B)_X

        def hbar(arr: np.ndarray) -> np.ndarray:
            return conj_flat_hilbert(self._fast(arr)).samples

        def h0(arr: np.ndarray) -> np.ndarray:
            return flat_hilbert(self._fast(arr)).samples

        def anti(arr: np.ndarray) -> np.ndarray:   # (I - Hbar0)
            return arr - hbar(arr)

        phase = np.exp(1j * (k * grid.nodes + om * t))
        phase_c = np.conj(phase)

        def order_zeta(j: int) -> np.ndarray:
            """j-th time derivative (j = 0, 1, 2) of xi~, term by term."""
            if j == 0:
                e1, e3m = tb[0], g3[0]
            elif j == 1:
                e1 = tb[1] + 1j * om * tb[0]
                e3m = g3[1] - 1j * om * g3[0]
            else:
                e1 = tb[2] + 2j * om * tb[1] - om**2 * tb[0]
                e3m = g3[2] - 2j * om * g3[1] - om**2 * g3[0]
            return (eps * e1 * phase
                    + eps**2 * 0.5j * k * anti(g2[j])
                    + eps**3 * (-0.5 * k**2 * e3m * phase_c + 0.5 * anti(g4[j])))

        xi = order_zeta(0)
        dt_xi = order_zeta(1)
        dtt_xi = order_zeta(2)

        def b_tilde_at(j: int) -> np.ndarray:
            if j == 0:
                e5 = g5[0]
            else:
                e5 = g5[1] + 1j * om * g5[0]
            g6j = g6[j]
            val = (-eps**2 * k * om * g2[j]
                   + eps**3 * (np.real(2j * om * k**2 * e5 * phase)
                               + 0.75j * om * (g6j - np.conj(g6j))
                               - 0.25j * om * hbar(g6j + np.conj(g6j))))
            worst = float(np.max(np.abs(val.imag)))
            if worst > 1e-10:
                raise PacketError(f"b~ reality defect {worst:.2e}: assembly is broken")
            return val.real

        b_val = b_tilde_at(0)
        b_dt = b_tilde_at(1)

        def psi_terms(j: int) -> np.ndarray:
            if j == 0:
                e1, e2, e3 = tb[0], tbx[0], (-3.0 / (16.0 * k**2 * om)) * tbxx_val \
                    + (k**2 / (2.0 * om)) * g5[0]
            else:
                e1 = tb[1] + 1j * om * tb[0]
                e2 = tbx[1] + 1j * om * tbx[0]
                e3 = (-3.0 / (16.0 * k**2 * om)) * (tbxx_d1 + 1j * om * tbxx_val) \
                    + (k**2 / (2.0 * om)) * (g5[1] + 1j * om * g5[0])
            cc = lambda z: z + np.conj(z)
            val = (eps * cc(e1 * phase / (2.0 * om))
                   + eps**2 * (cc(-e2 * phase / (4j * k * om)) + 0.5j * om * h0(g2[j]))
                   + eps**3 * cc(e3 * phase))
            worst = float(np.max(np.abs(val.imag)))
            if worst > 1e-12:
                raise PacketError(f"Psi~ reality defect {worst:.2e}: assembly is broken")
            return val.real

        psi_val = psi_terms(0)
        psi_dt = psi_terms(1)

        xi_f = self._fast(xi)
        xi_a = derivative(xi_f, 1).samples
        zeta_a = 1.0 + xi_a
        dt_xi_a = derivative(self._fast(dt_xi), 1).samples
        xi_aa = derivative(xi_f, 2).samples
        b_a = derivative(self._fast(b_val.astype(np.complex128)), 1).samples.real
        dtb_total = b_dt + b_val * b_a

        dt_zeta = dt_xi + b_val * zeta_a
        dt2_zeta = (dtt_xi + 2.0 * b_val * dt_xi_a + b_val**2 * xi_aa
                    + dtb_total * zeta_a)

        psi_f = self._fast(psi_val.astype(np.complex128))
        psi_a = derivative(psi_f, 1).samples.real
        dt_psi = psi_dt + b_val * psi_a

        zeta1 = self._fast(tb[0] * phase)
        zeta2 = self._fast(0.5j * k * anti(g2[0]))

        from .residual import apply_expanded_hilbert  # deferred: residual owns H~

        lam = psi_f - apply_expanded_hilbert(eps, zeta1, zeta2, psi_f)

        return PacketState(
            grid=grid, carrier=c, epsilon=eps, time=t,
            zeta_tilde=self._fast(xi + grid.nodes),
            xi_tilde=xi_f,
            dt_zeta=self._fast(dt_zeta),
            dt2_zeta=self._fast(dt2_zeta),
            b_tilde=self._fast(b_val.astype(np.complex128)),
            a_tilde=1.0,
            psi_tilde=psi_f,
            lambda_tilde=lam,
            zeta1=zeta1,
            zeta2=zeta2,
            dt_b_tilde=self._fast(dtb_total.astype(np.complex128)),
            dt_psi_tilde=self._fast(dt_psi.astype(np.complex128)),
        )

    def envelope_at(self, t: float) -> Envelope:
        return self.trajectory.at(self.epsilon**2 * t)


def slow_grid_for(fast_grid: Grid, epsilon: float) -> Grid:
    return Grid(fast_grid.n_points, epsilon * fast_grid.length)


def packet_state_to_csv(state: PacketState, path) -> None:
    cols = {
        "alpha": state.grid.nodes,
        "re_zeta": state.zeta_tilde.real, "im_zeta": state.zeta_tilde.imag,
        "re_dt_zeta": state.dt_zeta.real, "im_dt_zeta": state.dt_zeta.imag,
        "re_dt2_zeta": state.dt2_zeta.real, "im_dt2_zeta": state.dt2_zeta.imag,
        "b_tilde": state.b_tilde.real,
        "psi_tilde": state.psi_tilde.real,
        "re_lambda": state.lambda_tilde.real, "im_lambda": state.lambda_tilde.imag,
    }
    data = np.column_stack(list(cols.values()))
    np.savetxt(path, data, delimiter=",", header=",".join(cols), comments="")
