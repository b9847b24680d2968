"""Time evolution of the two-level state under the driven gain/loss model.

Two independent routes integrate the same physics:

* lab frame, i dpsi/dt = H(t) psi, by adaptive Dormand-Prince 5(4) or by
  fixed-step midpoint matrix exponentials (the oracle);
* eigenbasis amplitudes, d alpha_m/dt = i sum_n [A_mn - H_mn] alpha_n, with
  the non-Abelian connection A evaluated numerically from the eigenframe at
  every stage.

Populations are post-selected: P_z = |c1|^2 / ||psi||^2, matching population
readout on a qubit after non-unitary evolution. Branch amplitudes are taken
against the canonical eigenframe gauge (real positive first component),
which is smooth everywhere in the symmetric regime, so recorded frames are
gauge-continuous by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import BrokenRegimeError, StepUnderflowError, ZeroStateError
from .model import EigenFrame, Regime, SystemParams, cpt_inner, cpt_metric, eigensystem

ADAPTIVE_RK = "adaptive_rk"
PIECEWISE_EXPONENTIAL = "piecewise_exponential"

INITIAL_STATES = ("phi1", "phi2", "ket0", "ket1", "minus_x", "plus_x")


@dataclass(frozen=True)
class IntegratorConfig:
    """Error control and recording knobs for one evolution.

    ``max_step = None`` resolves to T/1000 for the adaptive route and to
    T/20000 for the piecewise-exponential oracle (which takes
    round(T/max_step) fixed steps).
    """

    method: str = ADAPTIVE_RK
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float | None = None
    min_step: float = 1e-16
    record_stride: int = 8

    def __post_init__(self):
        if self.method not in (ADAPTIVE_RK, PIECEWISE_EXPONENTIAL):
            raise ValueError(f"unknown method {self.method!r}")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be > 0")
        if self.max_step is not None and not (0 < self.min_step <= self.max_step):
            raise ValueError("require 0 < min_step <= max_step")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


def oracle_config(record_stride: int = 64) -> IntegratorConfig:
    """Fixed-step exponential-propagator oracle at the default fine step."""
    return IntegratorConfig(method=PIECEWISE_EXPONENTIAL, record_stride=record_stride)


@dataclass(frozen=True)
class Trajectory:
    """Recorded evolution: lab states, eigenbasis amplitudes, populations."""

    times: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    p_z: np.ndarray = field(repr=False)
    frames: tuple[EigenFrame, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_psi(self) -> np.ndarray:
        return self.psi[-1]

    @property
    def final_p_z(self) -> float:
        return float(self.p_z[-1])

    @property
    def final_branch_populations(self) -> tuple[float, float]:
        return branch_populations(self.alpha[-1])


def prepare_initial(which: str, frame0: EigenFrame) -> np.ndarray:
    """Initial state by name: an eigenbranch of frame0 or a fixed basis state."""
    if which == "phi1":
        return frame0.phi1.copy()
    if which == "phi2":
        return frame0.phi2.copy()
    if which == "ket0":
        return np.array([1.0, 0.0], dtype=complex)
    if which == "ket1":
        return np.array([0.0, 1.0], dtype=complex)
    if which == "minus_x":
        return np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)
    if which == "plus_x":
        return np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    raise ValueError(f"unknown initial state {which!r}; expected one of {INITIAL_STATES}")


def population_z(psi: np.ndarray) -> float:
    """Post-selected population of |1>: |c1|^2 / (|c0|^2 + |c1|^2)."""
    n0, n1 = abs(psi[0]) ** 2, abs(psi[1]) ** 2
    if n0 + n1 == 0.0:
        raise ZeroStateError("population of the zero state is undefined")
    return float(n1 / (n0 + n1))


def branch_populations(alpha: np.ndarray) -> tuple[float, float]:
    """Normalized (|alpha_1|^2, |alpha_2|^2); errors on the zero amplitude pair."""
    n1, n2 = abs(alpha[0]) ** 2, abs(alpha[1]) ** 2
    if n1 + n2 == 0.0:
        raise ZeroStateError("branch populations of the zero amplitude pair are undefined")
    return float(n1 / (n1 + n2)), float(n2 / (n1 + n2))


def decompose(psi: np.ndarray, frame: EigenFrame, metric: np.ndarray) -> tuple[complex, complex]:
    """Eigenbasis amplitudes alpha_n = <phi_n|psi>; exact inverse of
    psi = alpha_1 phi_1 + alpha_2 phi_2 for CPT-orthonormal frames."""
    if frame.regime is not Regime.SYMMETRIC:
        raise BrokenRegimeError("decomposition requires a symmetric-regime frame")
    return cpt_inner(frame.phi1, psi, metric), cpt_inner(frame.phi2, psi, metric)


def _resolve_max_step(cfg: IntegratorConfig, t_total: float) -> float:
    if cfg.max_step is not None:
        return cfg.max_step
    return t_total / 1000.0 if cfg.method == ADAPTIVE_RK else t_total / 20000.0


def _run_kernel(sys: SystemParams, y: np.ndarray, cfg: IntegratorConfig, kind: int):
    p = sys.protocol
    max_step = _resolve_max_step(cfg, p.t_total)
    if cfg.method == PIECEWISE_EXPONENTIAL:
        if kind != 0:
            raise ValueError("the exponential propagator applies to the lab frame only")
        n_steps = max(1, round(p.t_total / max_step))
        times, ys, n, status, t_fail = _kernels.evolve_expm(
            sys.gamma, p.j_pin, p.j_tail, p.t_total, sys.delta,
            complex(y[0]), complex(y[1]), n_steps, cfg.record_stride,
        )
    else:
        times, ys, n, status, t_fail = _kernels.evolve_rk45(
            kind, sys.gamma, p.j_pin, p.j_tail, p.t_total, sys.delta,
            complex(y[0]), complex(y[1]), cfg.rtol, cfg.atol,
            max_step, cfg.min_step, cfg.record_stride, 0.05,
        )
    if status == _kernels.STEP_UNDERFLOW:
        raise StepUnderflowError(
            f"step control fell below min_step = {cfg.min_step} at t = {t_fail:.6e} s", t_fail
        )
    if status == _kernels.TOO_MANY_STEPS:
        raise StepUnderflowError(
            f"step budget exhausted at t = {t_fail:.6e} s (tolerances too tight?)", t_fail
        )
    return times[:n].copy(), ys[:n].copy()


def _frames_along(sys: SystemParams, times: np.ndarray) -> tuple[EigenFrame, ...]:
    p = sys.protocol
    out = []
    for t in times:
        j = p.j_tail - (p.j_tail - p.j_pin) * math.sin(math.pi * t / p.t_total)
        out.append(eigensystem(sys.gamma, j, sys.delta * t))
    return tuple(out)


def _assemble(sys: SystemParams, times: np.ndarray, psi: np.ndarray) -> Trajectory:
    frames = _frames_along(sys, times)
    p = sys.protocol
    alpha = np.empty_like(psi)
    for k, (t, fr) in enumerate(zip(times, frames)):
        j = p.j_tail - (p.j_tail - p.j_pin) * math.sin(math.pi * t / p.t_total)
        metric = cpt_metric(sys.gamma, j, sys.delta * t)
        a1, a2 = decompose(psi[k], fr, metric)
        alpha[k, 0], alpha[k, 1] = a1, a2
    p_z = np.abs(psi[:, 1]) ** 2 / (np.abs(psi[:, 0]) ** 2 + np.abs(psi[:, 1]) ** 2)
    return Trajectory(times, psi, alpha, p_z, frames)


def evolve_lab(sys: SystemParams, init: np.ndarray, cfg: IntegratorConfig) -> Trajectory:
    """Integrate i dpsi/dt = H(t) psi over the full protocol window.

    Raises ``StepUnderflowError`` (with the failure time) if error control
    cannot proceed at the configured floor.
    """
    init = np.asarray(init, dtype=complex)
    if np.linalg.norm(init) == 0.0:
        raise ZeroStateError("initial state must be nonzero")
    times, psi = _run_kernel(sys, init, cfg, kind=0)
    return _assemble(sys, times, psi)


def evolve_eigenbasis(
    sys: SystemParams, init_alpha: tuple[complex, complex], cfg: IntegratorConfig
) -> Trajectory:
    """Integrate the eigenbasis amplitude equations with the numeric connection.

    The connection is re-evaluated at every integrator stage by central
    differences of the canonical eigenframe (stencil min(0.05 h, 1e-8 s)).
    The lab state is reconstructed as psi = alpha_1 phi_1 + alpha_2 phi_2 on
    the record grid.
    """
    a = np.asarray(init_alpha, dtype=complex)
    if np.linalg.norm(a) == 0.0:
        raise ZeroStateError("initial amplitudes must be nonzero")
    if cfg.method != ADAPTIVE_RK:
        cfg = replace(cfg, method=ADAPTIVE_RK)
    times, alpha = _run_kernel(sys, a, cfg, kind=1)
    frames = _frames_along(sys, times)
    psi = np.empty_like(alpha)
    for k, fr in enumerate(frames):
        psi[k] = alpha[k, 0] * fr.phi1 + alpha[k, 1] * fr.phi2
    p_z = np.abs(psi[:, 1]) ** 2 / (np.abs(psi[:, 0]) ** 2 + np.abs(psi[:, 1]) ** 2)
    return Trajectory(times, psi, alpha, p_z, frames)
