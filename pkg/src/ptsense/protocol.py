"""Drive schedule and sensing map.

The coupling is swept from a large value at both ends of the window down to
a minimum ("pin") at mid-window,

    J(t) = (J_l - J_p) cos(pi t / T + pi/2) + J_l,

so the relative dissipation rate beta(t) = gamma / J(t) approaches the
exceptional line beta = 1 most closely at t = T/2 with beta_dot = 0 there.
The accumulated coupling phase is Phi(t) = integral of the detuning; only
the constant-detuning case Phi = delta * t is wired into the protocol
helpers, but ``phi_of_t`` accepts any callable detuning for future
waveforms.

Units: rad/s for angular frequencies, seconds for times (configuration
ingestion converts from 2*pi*kHz and microseconds; see ``ptsense.config``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DegenerateInputError, OutOfWindowError, ZeroCoefficientError


@dataclass(frozen=True)
class ModulationProtocol:
    """Pin/tail coupling sweep: minimum j_pin at T/2, j_tail at both ends."""

    j_pin: float
    j_tail: float
    t_total: float

    def __post_init__(self):
        if not (0 < self.j_pin <= self.j_tail):
            raise ValueError("require 0 < j_pin <= j_tail")
        if self.t_total <= 0:
            raise ValueError("require t_total > 0")

    @property
    def t_pin(self) -> float:
        return 0.5 * self.t_total


@dataclass(frozen=True)
class ProtocolState:
    """All instantaneous protocol quantities at one time."""

    t: float
    j: float
    jdot: float
    beta: float
    betadot: float
    phi: float
    phidot: float


@dataclass(frozen=True)
class SensingScenario:
    """Map between a signed field component and the detuning it produces.

    delta = eta * (b0 + b1) + omega0 - omega_field; on resonance
    (eta*b0 + omega0 = omega_field) this reduces to delta = eta * b1.
    """

    eta: float
    b0: float = 0.0
    omega0: float = 0.0
    omega_field: float = 0.0
    b1: float = 0.0


def _check_window(p: ModulationProtocol, t: float) -> None:
    if not (0.0 <= t <= p.t_total):
        raise OutOfWindowError(f"t = {t} outside protocol window [0, {p.t_total}]")


def j_of_t(p: ModulationProtocol, t: float) -> tuple[float, float]:
    """Coupling J(t) and its exact derivative; errors outside [0, T]."""
    _check_window(p, t)
    x = math.pi * t / p.t_total
    j = p.j_tail - (p.j_tail - p.j_pin) * math.sin(x)
    jdot = -(p.j_tail - p.j_pin) * (math.pi / p.t_total) * math.cos(x)
    return j, jdot


def beta_of_t(gamma: float, p: ModulationProtocol, t: float) -> tuple[float, float]:
    """Relative dissipation rate beta = gamma / J(t) and its derivative."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    j, jdot = j_of_t(p, t)
    if gamma == 0.0:
        return 0.0, 0.0
    return gamma / j, -gamma * jdot / (j * j)


def phi_of_t(delta: float, t: float) -> tuple[float, float]:
    """Accumulated phase for constant detuning: (delta * t, delta)."""
    return delta * t, delta


def phi_of_t_integrated(
    delta_fn: Callable[[float], float], t: float, n_steps: int = 2048
) -> tuple[float, float]:
    """Phase for an arbitrary detuning waveform, by composite Simpson rule.

    Hook for non-constant detunings; the constant case should use
    ``phi_of_t`` which is exact.
    """
    if t == 0.0:
        return 0.0, delta_fn(0.0)
    n = max(2, n_steps + (n_steps % 2))
    h = t / n
    acc = delta_fn(0.0) + delta_fn(t)
    acc += 4.0 * sum(delta_fn((2 * k - 1) * h) for k in range(1, n // 2 + 1))
    acc += 2.0 * sum(delta_fn(2 * k * h) for k in range(1, n // 2))
    return acc * h / 3.0, delta_fn(t)


def protocol_state(gamma: float, p: ModulationProtocol, delta: float, t: float) -> ProtocolState:
    """Consistent bundle of J, beta, Phi and their rates at time t."""
    j, jdot = j_of_t(p, t)
    beta, betadot = beta_of_t(gamma, p, t)
    phi, phidot = phi_of_t(delta, t)
    return ProtocolState(t, j, jdot, beta, betadot, phi, phidot)


@dataclass(frozen=True)
class CriticalityReport:
    """Pin-point diagnostics for the near-critical drive conditions."""

    beta_pin: float
    one_minus_beta_sq: float
    betadot_pin: float
    critical: bool
    betadot_stationary: bool
    xi_pin: float


def criticality_check(
    gamma: float,
    p: ModulationProtocol,
    eps_beta: float = 1e-4,
    eps_betadot: float | None = None,
) -> CriticalityReport:
    """Evaluate the near-critical conditions at the pin: 1 - beta^2 -> 0+ and
    betadot -> 0.

    ``eps_betadot`` defaults to 1e-9 times the maximum |betadot| over the
    window. The amplification factor xi at the pin is included for context.
    """
    from .geometry import amplification_factor

    t_pin = p.t_pin
    beta_p, betadot_p = beta_of_t(gamma, p, t_pin)
    if eps_betadot is None:
        bmax = max(
            abs(beta_of_t(gamma, p, k * p.t_total / 256)[1]) for k in range(257)
        )
        eps_betadot = 1e-9 * bmax if bmax > 0 else 1e-30
    one_minus = 1.0 - beta_p * beta_p
    xi = amplification_factor(beta_p) if one_minus > 1e-12 else math.inf
    return CriticalityReport(
        beta_pin=beta_p,
        one_minus_beta_sq=one_minus,
        betadot_pin=betadot_p,
        critical=one_minus <= eps_beta,
        betadot_stationary=abs(betadot_p) <= eps_betadot,
        xi_pin=xi,
    )


def adiabaticity_parameter(j: float, jdot: float, delta: float) -> float:
    """|Jdot * delta| / (delta^2 + J^2)^(3/2); zero means perfectly adiabatic."""
    if j == 0.0 and delta == 0.0:
        raise DegenerateInputError("J = delta = 0 leaves the parameter undefined")
    return abs(jdot * delta) / (delta * delta + j * j) ** 1.5


def detuning_from_field(s: SensingScenario) -> float:
    """Signed detuning produced by the scenario's field values."""
    return s.eta * (s.b0 + s.b1) + s.omega0 - s.omega_field


def field_from_detuning(delta: float, eta: float) -> float:
    """Invert the resonant sensing map: b1 = delta / eta (sign preserved)."""
    if eta == 0.0:
        raise ZeroCoefficientError("eta = 0 cannot be inverted")
    return delta / eta
