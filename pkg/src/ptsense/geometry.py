"""Quantum geometry of the CPT-orthonormalized eigenframe.

Closed forms used throughout (w = sqrt(1 - beta^2), xi = 1/(2w), branch
sign s = +1 for branch 1 on +E, s = -1 for branch 2 on -E):

* intraband connection  A_nn = s * i*gamma*Phidot / (2 sqrt(J^2-g^2)) - Phidot/2
  (plus a branch-antisymmetric real term -s*gamma*Jdot/(2 J sqrt(J^2-g^2))
  in the canonical gauge when J is swept);
* quantum metric components from interband products,
  g_PhiPhi = xi^2, g_betaPhi = 0 (symmetrized), g_betabeta = -4 xi^4;
* scalar metric closed form  g(beta, zeta) = zeta/(2w) - 1/(2 w^3 zeta),
  which equals (g_PhiPhi * zeta + g_betabeta / zeta) / xi exactly.

The sign carried by each branch of A_nn is not a convention here: it is
forced by the orthonormalizing metric (see ptsense.model) and verified
against finite differences of the actual eigenframe in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EPProximityError, StepTooLargeError, ZeroCoefficientError
from .linalg import eig2
from .model import EP_GUARD, EigenFrame, Regime, classify_regime, cpt_inner, cpt_metric, eigensystem
from .protocol import ModulationProtocol, protocol_state


def amplification_factor(beta: float, guard: float = EP_GUARD) -> float:
    """xi = 1 / (2 sqrt(1 - beta^2)); diverges approaching the exceptional line."""
    rel = 1.0 - beta * beta
    if rel < guard:
        raise EPProximityError(f"1 - beta^2 = {rel:.3e} inside guard band")
    return 0.5 / math.sqrt(rel)


def quantum_metric_closed(beta: float, zeta: float, guard: float = EP_GUARD) -> float:
    """Scalar quantum metric g(beta, zeta) = zeta/(2w) - 1/(2 w^3 zeta).

    Odd in zeta and asymptotically xi*zeta for large |zeta|; negative for
    small |zeta| (the geometry is not positive definite). ``zeta = +-inf``
    returns the matching signed infinity.
    """
    rel = 1.0 - beta * beta
    if rel < guard:
        raise EPProximityError(f"1 - beta^2 = {rel:.3e} inside guard band")
    if zeta == 0.0:
        raise ZeroCoefficientError("zeta = 0 leaves the closed-form metric undefined")
    if math.isinf(zeta):
        return math.copysign(math.inf, zeta)
    w = math.sqrt(rel)
    return zeta / (2.0 * w) - 1.0 / (2.0 * w**3 * zeta)


def quantum_metric_from_components(
    g_phiphi: float, g_betabeta: float, beta: float, zeta: float
) -> float:
    """Combination of per-parameter metric components equal to the closed form.

    (g_PhiPhi * zeta + g_betabeta / zeta) / xi reproduces
    ``quantum_metric_closed`` exactly; the naive time pullback
    g_PhiPhi*zeta + 2 g_betaPhi + g_betabeta/zeta does not (it carries an
    extra overall factor xi and a cross term; see tests).
    """
    xi = amplification_factor(beta)
    return (g_phiphi * zeta + g_betabeta / zeta) / xi


def intraband_diagonal_closed(gamma: float, j: float, phidot: float, n: int) -> complex:
    """Closed-form diagonal connection A_nn for branch n in {1, 2}.

    Im A_nn = s_n * gamma * Phidot / (2 sqrt(J^2 - gamma^2)) with s_1 = +1,
    s_2 = -1; Re A_nn = -Phidot/2 (the J-sweep real term is zero at fixed J).
    The imaginary part is invariant under phase regauging and flips sign
    exactly under Phidot -> -Phidot.
    """
    if n not in (1, 2):
        raise ValueError("branch index n must be 1 or 2")
    if classify_regime(gamma, j) is not Regime.SYMMETRIC:
        raise EPProximityError(f"J = {j}, gamma = {gamma} not in the symmetric regime")
    e = math.sqrt(j * j - gamma * gamma)
    s = 1.0 if n == 1 else -1.0
    return complex(-0.5 * phidot, s * gamma * phidot / (2.0 * e))


def _connection_from_frames(
    fr0: EigenFrame,
    d_phi1: np.ndarray,
    d_phi2: np.ndarray,
    metric: np.ndarray,
) -> np.ndarray:
    a = np.empty((2, 2), dtype=complex)
    a[0, 0] = 1j * cpt_inner(fr0.phi1, d_phi1, metric)
    a[0, 1] = 1j * cpt_inner(fr0.phi1, d_phi2, metric)
    a[1, 0] = 1j * cpt_inner(fr0.phi2, d_phi1, metric)
    a[1, 1] = 1j * cpt_inner(fr0.phi2, d_phi2, metric)
    return a


def _stencil_frames(frame_fn, x0: float, h: float, lo: float | None, hi: float | None):
    """Frames and first-derivative weights for a second-order stencil at x0.

    Central where possible, one-sided when x0 sits within h of a bound.
    Returns (fr0, d_phi1, d_phi2).
    """
    fr0 = frame_fn(x0)
    use_central = (lo is None or x0 - h >= lo) and (hi is None or x0 + h <= hi)
    if use_central:
        fp, fm = frame_fn(x0 + h), frame_fn(x0 - h)
        d1 = (fp.phi1 - fm.phi1) / (2.0 * h)
        d2 = (fp.phi2 - fm.phi2) / (2.0 * h)
        probes = (fp, fm)
    else:
        s = 1.0 if (lo is not None and x0 - h < lo) else -1.0
        f1, f2 = frame_fn(x0 + s * h), frame_fn(x0 + 2.0 * s * h)
        d1 = s * (-3.0 * fr0.phi1 + 4.0 * f1.phi1 - f2.phi1) / (2.0 * h)
        d2 = s * (-3.0 * fr0.phi2 + 4.0 * f1.phi2 - f2.phi2) / (2.0 * h)
        probes = (f1, f2)
    # canonical sections are smooth; a collapsed overlap means the stencil
    # jumped a branch or crossed the EP guard
    for pr in probes:
        if abs(np.vdot(fr0.phi1, pr.phi1)) < 0.5 * np.linalg.norm(fr0.phi1) * np.linalg.norm(pr.phi1):
            raise StepTooLargeError(f"eigenframe changed discontinuously across stencil step {h}")
    return fr0, d1, d2


def berry_connection_numeric(
    gamma: float,
    p: ModulationProtocol,
    delta: float,
    t: float,
    h: float | None = None,
) -> np.ndarray:
    """Full 2x2 connection A_mn = i <phi_m | d/dt phi_n> along the protocol.

    Frames come from the canonical gauge section, differentiated with a
    second-order stencil (one-sided at the window ends). Default step is
    1e-4 * T.
    """
    if h is None:
        h = 1e-4 * p.t_total

    def frame_at(tau: float) -> EigenFrame:
        x = math.pi * tau / p.t_total
        j = p.j_tail - (p.j_tail - p.j_pin) * math.sin(x)
        return eigensystem(gamma, j, delta * tau)

    fr0, d1, d2 = _stencil_frames(frame_at, t, h, 0.0, p.t_total)
    st = protocol_state(gamma, p, delta, min(max(t, 0.0), p.t_total))
    metric = cpt_metric(gamma, st.j, st.phi)
    return _connection_from_frames(fr0, d1, d2, metric)


@dataclass(frozen=True)
class QGTResult:
    """Per-band quantum geometric tensor and metric components in (beta, Phi).

    ``t_*`` components follow the definition route
    T_ij = <d_i phi | d_j phi> - A_i A_j; ``g_*`` follow the interband-product
    route g_ij = Re[A_i^{nm} A_j^{mn}] with the cross component symmetrized.
    The two routes agree for the Phi-Phi component; for beta-beta they differ
    in sign (the connection is not Hermitian once the metric varies with the
    parameters), which is why the closed-form comparison pins the g_* route.
    """

    band: int
    t_betabeta: complex
    t_betaphi: complex
    t_phiphi: complex
    g_betabeta: float
    g_betaphi: float
    g_phiphi: float


def qgt_numeric(
    gamma: float,
    p: ModulationProtocol,
    delta: float,
    t: float,
    band: int = 1,
    h_beta: float = 1e-5,
    h_phi: float = 1e-5,
) -> QGTResult:
    """Quantum geometric tensor at the protocol point, by finite differences.

    The eigenframe is differentiated along the coordinates (beta, Phi) of
    the frame family: stepping beta means adjusting J at fixed gamma
    (J' = gamma / beta'), stepping Phi rotates the coupling phase. At
    gamma = 0 a J adjustment never moves beta, so all beta derivatives are
    identically zero and the frame family depends on Phi alone.
    """
    if band not in (1, 2):
        raise ValueError("band must be 1 or 2")
    st = protocol_state(gamma, p, delta, t)
    beta0, phi0 = st.beta, st.phi
    if classify_regime(gamma, st.j) is not Regime.SYMMETRIC:
        raise EPProximityError("QGT requires the symmetric regime outside the guard band")

    def frame_bp(beta: float, phi: float) -> EigenFrame:
        j = gamma / beta if beta > 0.0 else st.j
        return eigensystem(gamma, j, phi)

    fr0 = frame_bp(beta0, phi0)
    metric = cpt_metric(gamma, st.j, phi0)

    _, dp1, dp2 = _stencil_frames(lambda x: frame_bp(beta0, x), phi0, h_phi, None, None)
    if gamma == 0.0:
        db1 = np.zeros(2, dtype=complex)
        db2 = np.zeros(2, dtype=complex)
    else:
        guard_hi = 1.0 - math.sqrt(EP_GUARD)
        _, db1, db2 = _stencil_frames(
            lambda x: frame_bp(x, phi0), beta0, h_beta, 1e-12, guard_hi
        )

    def inner(a, b):
        return cpt_inner(a, b, metric)

    d_init = {"beta": (db1, db2), "phi": (dp1, dp2)}
    own = d_init["beta"][band - 1], d_init["phi"][band - 1]
    other = d_init["beta"][2 - band], d_init["phi"][2 - band]
    phi_n = fr0.phi1 if band == 1 else fr0.phi2
    phi_m = fr0.phi2 if band == 1 else fr0.phi1

    # intraband and interband connections per parameter
    a_nn = [1j * inner(phi_n, d) for d in own]           # A_i^{nn}
    a_mn = [1j * inner(phi_m, d) for d in own]           # A_i^{mn}
    a_nm = [1j * inner(phi_n, d) for d in other]         # A_i^{nm}

    def t_route(i, j):
        return inner(own[i], own[j]) - a_nn[i] * a_nn[j]

    def g_route(i, j):
        return 0.5 * ((a_nm[i] * a_mn[j]).real + (a_nm[j] * a_mn[i]).real)

    return QGTResult(
        band=band,
        t_betabeta=t_route(0, 0),
        t_betaphi=t_route(0, 1),
        t_phiphi=t_route(1, 1),
        g_betabeta=g_route(0, 0),
        g_betaphi=g_route(0, 1),
        g_phiphi=g_route(1, 1),
    )


@dataclass(frozen=True)
class LTIResult:
    """Stability eigenvalues of M = i(A - H) for the locally frozen system.

    ``re_closed_plus`` is the closed-form prediction
    +gamma (J^2-g^2) Phidot / sqrt(4 (J^2-g^2)^3 - g^2 Jdot^2), or None when
    the radicand is not positive (``radicand_negative`` diagnostic set; the
    numeric eigenvalues are still valid).
    """

    lambda_plus: complex
    lambda_minus: complex
    re_closed_plus: float | None
    radicand: float
    radicand_negative: bool


def lti_eigenvalues(gamma: float, j: float, jdot: float, phidot: float) -> LTIResult:
    """Eigenvalues of the frozen evolution generator M = i(A - diag(E, -E)).

    The connection is evaluated numerically along the local path
    J(tau) = J + Jdot*tau, Phi(tau) = Phidot*tau. Before assembling M the
    branch-diagonal real parts of A are removed: they are pure gauge (a
    per-branch phase regauging shifts them arbitrarily), and the stability
    spectrum is only gauge-canonical once they are fixed to zero. Re lambda
    then matches the closed form to leading order in Phidot/E.
    """
    if classify_regime(gamma, j) is not Regime.SYMMETRIC:
        raise EPProximityError("stability analysis requires the symmetric regime")

    rate = max(abs(phidot), abs(jdot) / j, 1.0)
    h = 1e-4 / rate

    def frame_at(tau: float) -> EigenFrame:
        return eigensystem(gamma, j + jdot * tau, phidot * tau)

    fr0, d1, d2 = _stencil_frames(frame_at, 0.0, h, None, None)
    metric = cpt_metric(gamma, j, 0.0)
    a = _connection_from_frames(fr0, d1, d2, metric)
    a[0, 0] -= a[0, 0].real
    a[1, 1] -= a[1, 1].real

    e = math.sqrt(j * j - gamma * gamma)
    m = 1j * (a - np.diag([e, -e]).astype(complex))
    lam = eig2(m)
    lam_p, lam_m = (lam.e1, lam.e2) if lam.e1.real >= lam.e2.real else (lam.e2, lam.e1)

    rad = 4.0 * (j * j - gamma * gamma) ** 3 - gamma * gamma * jdot * jdot
    if rad > 0.0:
        re_closed = gamma * (j * j - gamma * gamma) * phidot / math.sqrt(rad)
        return LTIResult(lam_p, lam_m, re_closed, rad, False)
    return LTIResult(lam_p, lam_m, None, rad, True)


@dataclass(frozen=True)
class GeometrySample:
    """All geometric quantities at one protocol instant.

    ``zeta`` is signed-infinite where betadot = 0 (the pin, or everywhere at
    gamma = 0) and ``g_closed`` is NaN there; ``status`` marks points inside
    the EP guard band, which carry no other data.
    """

    t: float
    conn: np.ndarray | None = field(repr=False)
    g_closed: float
    g_numeric_phiphi: float
    g_numeric_betabeta: float
    g_numeric_betaphi: float
    xi: float
    zeta: float
    lambda_re_plus: float
    lambda_re_minus: float
    status: str = "ok"


_EP_MARKER = None


def geometry_scan(
    gamma: float,
    p: ModulationProtocol,
    delta: float,
    t_grid: np.ndarray,
) -> list[GeometrySample]:
    """Evaluate the full geometry along the protocol; guard-band points become
    markers instead of errors."""
    out = []
    for t in np.asarray(t_grid, dtype=float):
        st = protocol_state(gamma, p, delta, t)
        if classify_regime(gamma, st.j) is not Regime.SYMMETRIC:
            out.append(
                GeometrySample(
                    t=float(t), conn=_EP_MARKER, g_closed=math.nan,
                    g_numeric_phiphi=math.nan, g_numeric_betabeta=math.nan,
                    g_numeric_betaphi=math.nan, xi=math.inf, zeta=math.nan,
                    lambda_re_plus=math.nan, lambda_re_minus=math.nan,
                    status="ep_guard",
                )
            )
            continue
        conn = berry_connection_numeric(gamma, p, delta, t)
        xi = amplification_factor(st.beta)
        if st.betadot == 0.0:
            zeta = math.copysign(math.inf, st.phidot) if st.phidot != 0.0 else math.nan
        else:
            zeta = st.phidot / st.betadot
        if math.isfinite(zeta) and zeta != 0.0:
            g_closed = quantum_metric_closed(st.beta, zeta)
        else:
            g_closed = math.nan
        q = qgt_numeric(gamma, p, delta, t)
        lti = lti_eigenvalues(gamma, st.j, st.jdot, st.phidot)
        out.append(
            GeometrySample(
                t=float(t), conn=conn, g_closed=g_closed,
                g_numeric_phiphi=q.g_phiphi, g_numeric_betabeta=q.g_betabeta,
                g_numeric_betaphi=q.g_betaphi, xi=xi, zeta=zeta,
                lambda_re_plus=lti.lambda_plus.real,
                lambda_re_minus=lti.lambda_minus.real,
            )
        )
    return out
