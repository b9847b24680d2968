"""Two-level gain/loss model: Hamiltonian, CPT metric, and eigenframes.

The model is H = i*gamma*sigma_z + J cos(Phi) sigma_x + J sin(Phi) sigma_y,
i.e. entries [[i*gamma, J e^{-i Phi}], [J e^{i Phi}, -i*gamma]], with all
angular frequencies in rad/s. For J > gamma the spectrum is real (symmetric
regime); eigenvalues and eigenvectors coalesce on the exceptional line
J = gamma; below it the spectrum is an imaginary conjugate pair (broken
regime).

In the symmetric regime a time-dependent metric renders the instantaneous
eigenvectors orthonormal under the inner product

    <a|b> = a^dag P^T C^T b,      P = sigma_x.

The phase orientation of C is pinned by that orthonormality requirement:
with

    C = [[i*gamma*e^{+i Phi}, J], [J, -i*gamma*e^{-i Phi}]] / sqrt(J^2 - gamma^2)

the effective form P^T C^T is Hermitian positive definite and the
eigenvector Gram matrix is the identity to machine precision for every
(gamma, J, Phi) with J > gamma (the opposite phase orientation fails this
at the 1e-1 level away from Phi = 0; see tests). At gamma = 0 the metric
reduces to sigma_x and the inner product to the standard one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BrokenRegimeError, EPProximityError, SelfOrthogonalError
from .protocol import ModulationProtocol

EP_GUARD = 1e-12
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


class Regime(enum.Enum):
    SYMMETRIC = "symmetric"
    EP = "ep"
    BROKEN = "broken"


@dataclass(frozen=True)
class SystemParams:
    """Static parameters of one evolution: gain/loss strength, drive schedule,
    constant detuning (Phi(t) = delta * t)."""

    gamma: float
    protocol: ModulationProtocol
    delta: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")


@dataclass(frozen=True)
class EigenFrame:
    """Instantaneous eigensystem at one (gamma, J, Phi) point.

    ``phi1`` carries ``e_plus`` and ``phi2`` carries ``e_minus``; at gamma=0,
    Phi=0 they are |+>_x and |->_x. In the symmetric regime the vectors are
    CPT-normalized; in the broken regime they are Euclidean-normalized.
    """

    e_plus: complex
    e_minus: complex
    phi1: np.ndarray = field(repr=False)
    phi2: np.ndarray = field(repr=False)
    regime: Regime


def classify_regime(gamma: float, j: float, guard: float = EP_GUARD) -> Regime:
    """Regime flag from the sign of J - gamma, with a guard band around J = gamma."""
    if j <= 0:
        return Regime.BROKEN if gamma > 0 else Regime.EP
    if abs(1.0 - (gamma / j) ** 2) < guard:
        return Regime.EP
    return Regime.SYMMETRIC if j > gamma else Regime.BROKEN


def hamiltonian_at(gamma: float, j: float, phi: float) -> np.ndarray:
    """H = i*gamma*sigma_z + J cos(Phi) sigma_x + J sin(Phi) sigma_y."""
    off = j * np.exp(-1j * phi)
    return np.array([[1j * gamma, off], [np.conj(off), -1j * gamma]])


def _check_symmetric(gamma: float, j: float, guard: float) -> None:
    if j <= 0 or j <= gamma:
        if j > 0 and abs(1.0 - (gamma / j) ** 2) < guard:
            raise EPProximityError(
                f"1 - beta^2 = {1.0 - (gamma / j) ** 2:.3e} inside guard band {guard:.1e}"
            )
        raise BrokenRegimeError(f"J = {j} <= gamma = {gamma}: real-spectrum regime required")
    rel = 1.0 - (gamma / j) ** 2
    if rel < guard:
        raise EPProximityError(f"1 - beta^2 = {rel:.3e} inside guard band {guard:.1e}")


def cpt_metric(gamma: float, j: float, phi: float, guard: float = EP_GUARD) -> np.ndarray:
    """Orthonormalizing metric C(t) of the symmetric regime.

    Raises ``EPProximityError`` inside the guard band around J = gamma and
    ``BrokenRegimeError`` for J <= gamma.
    """
    _check_symmetric(gamma, j, guard)
    e = math.sqrt(j * j - gamma * gamma)
    d = 1j * gamma * np.exp(1j * phi)
    return np.array([[d, j], [j, -np.conj(d)]]) / e


def cpt_inner(a: np.ndarray, b: np.ndarray, metric: np.ndarray) -> complex:
    """<a|b> = a^dag sigma_x^T C^T b; conjugate-linear in a, linear in b."""
    return complex(np.conj(a) @ (SIGMA_X.T @ metric.T) @ b)


def cpt_normalize(v: np.ndarray, metric: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Scale v so its self inner product is 1 (direction preserved).

    Raises ``SelfOrthogonalError`` when <v|v> vanishes relative to the
    Euclidean scale of v, which happens for the coalesced eigenvector
    approaching the exceptional line.
    """
    n2 = cpt_inner(v, v, metric)
    scale = float(np.linalg.norm(v)) ** 2 * float(np.linalg.norm(metric))
    if abs(n2) <= tol * scale:
        raise SelfOrthogonalError(f"<v|v> = {n2:.3e} is zero within tolerance")
    import cmath

    return v / cmath.sqrt(n2)


def eigensystem(
    gamma: float,
    j: float,
    phi: float,
    gauge_ref: EigenFrame | None = None,
    guard: float = EP_GUARD,
) -> EigenFrame:
    """Gauge-fixed eigenframe of ``hamiltonian_at(gamma, j, phi)``.

    Closed form: the branch with eigenvalue ``s*E`` (E = sqrt(J^2 - gamma^2),
    s = +-1) is proportional to ``(J, (s*E - i*gamma) e^{i Phi})``. In the
    symmetric regime the CPT-normalized vector with real positive first
    component is ``(J, (s*E - i*gamma) e^{i Phi}) / sqrt(2 J E)``, a globally
    smooth section, which is the default gauge. With ``gauge_ref`` each branch
    is additionally phase-rotated to maximize Re <phi_ref|phi_new> so frames
    chained along a trajectory stay continuous.

    Raises ``EPProximityError`` inside the guard band. In the broken regime
    e_plus = +i|E| (descending-imaginary tie break) and the vectors are
    Euclidean-normalized.
    """
    regime = classify_regime(gamma, j, guard)
    if regime is Regime.EP:
        raise EPProximityError(f"J = {j}, gamma = {gamma} within EP guard band")

    ph = np.exp(1j * phi)
    if regime is Regime.SYMMETRIC:
        e = math.sqrt(j * j - gamma * gamma)
        norm = 1.0 / math.sqrt(2.0 * j * e)
        v1 = np.array([j, (e - 1j * gamma) * ph]) * norm
        v2 = np.array([j, (-e - 1j * gamma) * ph]) * norm
        e_plus, e_minus = complex(e), complex(-e)
    else:
        kap = math.sqrt(gamma * gamma - j * j)
        e_plus, e_minus = 1j * kap, -1j * kap
        v1 = np.array([j, (e_plus - 1j * gamma) * ph])
        v2 = np.array([j, (e_minus - 1j * gamma) * ph])
        v1 = v1 / np.linalg.norm(v1)
        v2 = v2 / np.linalg.norm(v2)

    if gauge_ref is not None and regime is Regime.SYMMETRIC:
        metric = cpt_metric(gamma, j, phi, guard)
        v1 = _align_phase(gauge_ref.phi1, v1, metric)
        v2 = _align_phase(gauge_ref.phi2, v2, metric)

    return EigenFrame(e_plus, e_minus, v1, v2, regime)


def _align_phase(ref: np.ndarray, new: np.ndarray, metric: np.ndarray) -> np.ndarray:
    z = cpt_inner(ref, new, metric)
    if abs(z) == 0.0:
        return new
    return new * (np.conj(z) / abs(z))
