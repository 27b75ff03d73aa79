"""Carrier dispersion bookkeeping and the focusing cubic NLS envelope solver.

The envelope B(X, T) obeys

    2i B_T - omega'' B_XX + k^2 omega B |B|^2 = 0,

which is focusing since omega'' < 0 for every carrier wavenumber k > 0.
The solver is a Strang split step: half a linear step (multiplier
exp(i omega'' xi^2 dT / 4), sign pinned by the constant-envelope and
soliton oracles), a full nonlinear phase rotation
B -> B exp(i k^2 omega |B|^2 dT / 2), then another half linear step.
Mass int |B|^2 dX is conserved exactly by both substeps; the Hamiltonian
int (-omega'' |B_X|^2 / 2 - k^2 omega |B|^4 / 4) dX is conserved to O(dT^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .spectral import Field, Grid, SpectralError, derivative, l2_inner


class CarrierError(ValueError):
    pass


class EnvelopeError(ValueError):
    pass


@dataclass(frozen=True)
class Carrier:
    """Deep-water carrier wave: omega^2 = k, omega' = 1/(2 sqrt k), omega'' = -1/(4 k^(3/2))."""

    k: float
    omega: float
    omega_prime: float
    omega_double_prime: float


def dispersion(k: float) -> Carrier:
    if not (k > 0):
        raise CarrierError(f"carrier wavenumber must be positive, got {k}")
    sq = math.sqrt(k)
    return Carrier(k=k, omega=sq, omega_prime=0.5 / sq, omega_double_prime=-0.25 / k**1.5)


@dataclass(frozen=True)
class Envelope:
    """NLS state B(X, T) on a slow grid, tagged with its carrier."""

    grid: Grid
    samples: np.ndarray
    time: float
    carrier: Carrier

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.shape != (self.grid.n_points,):
            raise EnvelopeError("envelope samples do not match grid")
        object.__setattr__(self, "samples", arr)

    def field(self) -> Field:
        return Field(self.grid, self.samples)


def mass(env: Envelope) -> float:
    return float(np.real(l2_inner(env.field(), env.field())))


def hamiltonian(env: Envelope) -> float:
    c = env.carrier
    bx = derivative(env.field(), 1)
    kin = -0.5 * c.omega_double_prime * np.real(l2_inner(bx, bx))
    quart = -0.25 * c.k**2 * c.omega * env.grid.spacing * np.sum(np.abs(env.samples) ** 4)
    return float(kin + quart)


def default_time_step(grid: Grid, carrier: Carrier) -> float:
    dx = grid.spacing
    return min(1e-3, dx**2 / abs(carrier.omega_double_prime) / 10.0)


def nls_step(env: Envelope, dT: float) -> Envelope:
    """One Strang split step of size dT (dT may be negative: the map is reversible)."""
    c = env.carrier
    xi2 = env.grid.wavenumbers**2
    half_linear = np.exp(0.25j * c.omega_double_prime * xi2 * dT)
    b = np.fft.ifft(half_linear * np.fft.fft(env.samples))
    b = b * np.exp(0.5j * c.k**2 * c.omega * np.abs(b) ** 2 * dT)
    b = np.fft.ifft(half_linear * np.fft.fft(b))
    if not np.all(np.isfinite(b)):
        raise EnvelopeError(f"NLS step produced non-finite values at T = {env.time}")
    return replace(env, samples=b, time=env.time + dT)


def check_envelope_tails(samples: np.ndarray, threshold: float = 1e-13) -> None:
    peak = np.max(np.abs(samples))
    edge = max(abs(samples[0]), abs(samples[-1]))
    if peak > 0 and edge > threshold * max(1.0, peak):
        raise EnvelopeError(
            f"envelope tails {edge:.2e} exceed the periodization threshold {threshold:.0e}"
        )


def sech_envelope(grid: Grid, carrier: Carrier, eta: float, time: float = 0.0) -> Envelope:
    """Plain sech profile eta sech(beta (X - L/2)) with the soliton width beta."""
    beta, _ = soliton_parameters(eta, carrier)
    x = grid.nodes - 0.5 * grid.length
    samples = eta / np.cosh(beta * x)
    check_envelope_tails(samples)
    return Envelope(grid, samples.astype(np.complex128), time, carrier)


def gaussian_envelope(grid: Grid, carrier: Carrier, eta: float, width: float = 1.0,
                      time: float = 0.0) -> Envelope:
    x = grid.nodes - 0.5 * grid.length
    samples = eta * np.exp(-((x / width) ** 2))
    check_envelope_tails(samples)
    return Envelope(grid, samples.astype(np.complex128), time, carrier)


def soliton_parameters(eta: float, carrier: Carrier) -> tuple[float, float]:
    """Soliton width and phase rate: beta = eta sqrt(c/2a), sigma = c eta^2 / 4,
    for a = -omega'' and c = k^2 omega (obtained by substituting
    eta sech(beta X) e^(i sigma T) into the envelope equation)."""
    a = -carrier.omega_double_prime
    cnl = carrier.k**2 * carrier.omega
    return eta * math.sqrt(cnl / (2.0 * a)), cnl * eta**2 / 4.0


def nls_residual(env: Envelope, b_t: np.ndarray) -> np.ndarray:
    """Pointwise residual of 2i B_T - omega'' B_XX + k^2 omega B |B|^2 for a given B_T."""
    c = env.carrier
    bxx = derivative(env.field(), 2).samples
    return (2j * b_t - c.omega_double_prime * bxx
            + c.k**2 * c.omega * env.samples * np.abs(env.samples) ** 2)


def soliton(eta: float, carrier: Carrier, grid: Grid, residual_tol: float = 1e-10) -> Envelope:
    """Exact soliton at T = 0; validates the parameter relations by substitution."""
    if eta <= 0:
        raise EnvelopeError("soliton amplitude must be positive")
    env = soliton_at(eta, carrier, grid, 0.0)
    _, sigma = soliton_parameters(eta, carrier)
    resid = nls_residual(env, 1j * sigma * env.samples)
    worst = float(np.max(np.abs(resid)))
    if worst > residual_tol:
        raise EnvelopeError(
            f"soliton ansatz residual {worst:.2e} exceeds {residual_tol:.0e}; "
            "grid too short or parameters inconsistent"
        )
    return env


def soliton_at(eta: float, carrier: Carrier, grid: Grid, T: float) -> Envelope:
    """Closed-form soliton eta sech(beta (X - L/2)) e^(i sigma T)."""
    beta, sigma = soliton_parameters(eta, carrier)
    x = grid.nodes - 0.5 * grid.length
    samples = (eta / np.cosh(beta * x)) * np.exp(1j * sigma * T)
    check_envelope_tails(samples)
    return Envelope(grid, samples, T, carrier)


class NLSTrajectory:
    """Steps an initial envelope and serves B(T) at arbitrary slow times.

    States at whole-step boundaries are cached; a query takes one partial
    Strang step off the nearest boundary below (or a backward partial step
    for small negative T, as needed by temporal differencing around t = 0).
    """

    def __init__(self, b0: Envelope, dT: float | None = None):
        if b0.time != 0.0:
            raise EnvelopeError("trajectory must start at T = 0")
        self.dT = float(dT) if dT is not None else default_time_step(b0.grid, b0.carrier)
        if self.dT <= 0:
            raise EnvelopeError("dT must be positive")
        self._cache: list[Envelope] = [b0]
        self.mass_series: list[tuple[float, float]] = [(0.0, mass(b0))]
        self.hamiltonian_series: list[tuple[float, float]] = [(0.0, hamiltonian(b0))]

    def _extend_to(self, steps: int) -> None:
        while len(self._cache) <= steps:
            nxt = nls_step(self._cache[-1], self.dT)
            self._cache.append(nxt)
            self.mass_series.append((nxt.time, mass(nxt)))
            self.hamiltonian_series.append((nxt.time, hamiltonian(nxt)))

    def at(self, T: float) -> Envelope:
        if T < 0:
            return nls_step(self._cache[0], T) if T != 0.0 else self._cache[0]
        j = int(math.floor(T / self.dT + 1e-12))
        self._extend_to(j)
        base = self._cache[j]
        tau = T - j * self.dT
        if abs(tau) < 1e-14 * max(1.0, abs(T)):
            return base
        return nls_step(base, tau)


def nls_solve(b0: Envelope, t_final: float, dT: float | None = None) -> NLSTrajectory:
    traj = NLSTrajectory(b0, dT)
    if t_final > 0:
        traj._extend_to(int(math.floor(t_final / traj.dT + 1e-12)))
    return traj


def envelope_to_csv(env: Envelope, path) -> None:
    data = np.column_stack([env.grid.nodes, env.samples.real, env.samples.imag])
    header = "X,ReB,ImB"
    np.savetxt(path, data, delimiter=",", header=header, comments="")


def envelope_from_csv(path, grid: Grid, carrier: Carrier, time: float = 0.0) -> Envelope:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if data.shape[0] != grid.n_points:
        raise EnvelopeError(
            f"envelope file has {data.shape[0]} rows, grid expects {grid.n_points}"
        )
    if not np.allclose(data[:, 0], grid.nodes, atol=1e-10 * grid.length):
        raise SpectralError("envelope file nodes do not match the slow grid")
    samples = data[:, 1] + 1j * data[:, 2]
    check_envelope_tails(samples)
    return Envelope(grid, samples, time, carrier)
