"""Scalar integration kernels, JIT-compiled when numba is available.

Everything here is written against plain float/complex scalars and
preallocated arrays so numba can compile it; the public modules in this
package wrap these kernels with dataclasses and numpy surfaces. The kernels
evaluate the drive schedule by its closed form directly (no window checks,
so derivative stencils may poke marginally past the window ends; the public
API enforces the window).

Integration routes:

* ``evolve_rk45`` -- embedded Dormand-Prince 5(4) pair with PI-free step
  control, either on the lab-frame state (kind=0, i dpsi/dt = H psi) or on
  the eigenbasis amplitudes (kind=1, d alpha/dt = i (A - H_diag) alpha with
  the connection A evaluated by finite differences of the canonical
  eigenframe each stage).
* ``evolve_expm`` -- fixed-step midpoint-sampled matrix-exponential
  propagation, used as the independent oracle.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

# status codes shared with dynamics.py
OK = 0
STEP_UNDERFLOW = 1
TOO_MANY_STEPS = 2

MAX_STEPS = 400_000

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# b5 - b4 (error estimator weights), k7 evaluated at the 5th-order solution
_E1 = 35.0 / 384.0 - 5179.0 / 57600.0
_E3 = 500.0 / 1113.0 - 7571.0 / 16695.0
_E4 = 125.0 / 192.0 - 393.0 / 640.0
_E5 = -2187.0 / 6784.0 + 92097.0 / 339200.0
_E6 = 11.0 / 84.0 - 187.0 / 2100.0
_E7 = -1.0 / 40.0


@njit(cache=True)
def j_and_jdot(j_pin: float, j_tail: float, t_total: float, t: float):
    x = math.pi * t / t_total
    j = j_tail - (j_tail - j_pin) * math.sin(x)
    jdot = -(j_tail - j_pin) * (math.pi / t_total) * math.cos(x)
    return j, jdot


@njit(cache=True)
def frame_scalars(gamma: float, j: float, phi: float):
    """Canonical CPT-normalized eigenframe (symmetric regime closed form).

    Returns (E, v1_0, v1_1, v2_0, v2_1) with branch 1 on +E.
    """
    e = math.sqrt(j * j - gamma * gamma)
    ph = cmath.exp(1j * phi)
    n = 1.0 / math.sqrt(2.0 * j * e)
    v10 = n * j + 0j
    v11 = n * (e - 1j * gamma) * ph
    v20 = n * j + 0j
    v21 = n * (-e - 1j * gamma) * ph
    return e, v10, v11, v20, v21


@njit(cache=True)
def cpt_inner_scalars(
    a0: complex, a1: complex, b0: complex, b1: complex, gamma: float, j: float, phi: float
):
    """<a|b> with the effective form W = sigma_x^T C^T written out:
    W = [[J, -i g e^{-i Phi}], [i g e^{i Phi}, J]] / sqrt(J^2 - g^2)."""
    e = math.sqrt(j * j - gamma * gamma)
    w01 = -1j * gamma * cmath.exp(-1j * phi)
    return (
        a0.conjugate() * (j * b0 + w01 * b1) + a1.conjugate() * (w01.conjugate() * b0 + j * b1)
    ) / e


@njit(cache=True)
def connection_scalars(
    gamma: float, j_pin: float, j_tail: float, t_total: float, delta: float, t: float, h: float
):
    """Full 2x2 Berry connection A_mn = i <phi_m | d/dt phi_n> at time t.

    Central difference of the canonical (smooth) eigenframe section; falls
    back to a second-order one-sided stencil when t is within h of the
    window ends. Returns (E, A11, A12, A21, A22).
    """
    j0, _ = j_and_jdot(j_pin, j_tail, t_total, t)
    phi0 = delta * t
    e0, u10, u11, u20, u21 = frame_scalars(gamma, j0, phi0)

    if t - h >= 0.0 and t + h <= t_total:
        jp, _ = j_and_jdot(j_pin, j_tail, t_total, t + h)
        jm, _ = j_and_jdot(j_pin, j_tail, t_total, t - h)
        _, a10, a11, a20, a21 = frame_scalars(gamma, jp, delta * (t + h))
        _, b10, b11, b20, b21 = frame_scalars(gamma, jm, delta * (t - h))
        d10 = (a10 - b10) / (2.0 * h)
        d11 = (a11 - b11) / (2.0 * h)
        d20 = (a20 - b20) / (2.0 * h)
        d21 = (a21 - b21) / (2.0 * h)
    else:
        s = 1.0 if t - h < 0.0 else -1.0
        j1, _ = j_and_jdot(j_pin, j_tail, t_total, t + s * h)
        j2, _ = j_and_jdot(j_pin, j_tail, t_total, t + 2.0 * s * h)
        _, a10, a11, a20, a21 = frame_scalars(gamma, j1, delta * (t + s * h))
        _, b10, b11, b20, b21 = frame_scalars(gamma, j2, delta * (t + 2.0 * s * h))
        d10 = s * (-3.0 * u10 + 4.0 * a10 - b10) / (2.0 * h)
        d11 = s * (-3.0 * u11 + 4.0 * a11 - b11) / (2.0 * h)
        d20 = s * (-3.0 * u20 + 4.0 * a20 - b20) / (2.0 * h)
        d21 = s * (-3.0 * u21 + 4.0 * a21 - b21) / (2.0 * h)

    a11_ = 1j * cpt_inner_scalars(u10, u11, d10, d11, gamma, j0, phi0)
    a12_ = 1j * cpt_inner_scalars(u10, u11, d20, d21, gamma, j0, phi0)
    a21_ = 1j * cpt_inner_scalars(u20, u21, d10, d11, gamma, j0, phi0)
    a22_ = 1j * cpt_inner_scalars(u20, u21, d20, d21, gamma, j0, phi0)
    return e0, a11_, a12_, a21_, a22_


@njit(cache=True)
def _rhs(
    kind: int,
    gamma: float,
    j_pin: float,
    j_tail: float,
    t_total: float,
    delta: float,
    t: float,
    y0: complex,
    y1: complex,
    stencil_h: float,
):
    if kind == 0:
        # lab frame: -i H psi
        j, _ = j_and_jdot(j_pin, j_tail, t_total, t)
        off = j * cmath.exp(-1j * delta * t)
        d0 = -1j * (1j * gamma * y0 + off * y1)
        d1 = -1j * (off.conjugate() * y0 - 1j * gamma * y1)
        return d0, d1
    # eigenbasis: i (A - diag(E, -E)) alpha
    e, a11, a12, a21, a22 = connection_scalars(
        gamma, j_pin, j_tail, t_total, delta, t, stencil_h
    )
    d0 = 1j * ((a11 - e) * y0 + a12 * y1)
    d1 = 1j * (a21 * y0 + (a22 + e) * y1)
    return d0, d1


@njit(cache=True)
def evolve_rk45(
    kind: int,
    gamma: float,
    j_pin: float,
    j_tail: float,
    t_total: float,
    delta: float,
    y0: complex,
    y1: complex,
    rtol: float,
    atol: float,
    max_step: float,
    min_step: float,
    record_stride: int,
    stencil_cap: float,
):
    """Adaptive Dormand-Prince 5(4) integration over [0, t_total].

    Records every ``record_stride``-th accepted step (plus both endpoints).
    Returns (times, ys, n_records, status, t_fail); ys has shape (cap, 2).
    """
    cap = MAX_STEPS // record_stride + 8
    times = np.empty(cap)
    ys = np.empty((cap, 2), dtype=np.complex128)
    times[0] = 0.0
    ys[0, 0] = y0
    ys[0, 1] = y1
    n_rec = 1

    t = 0.0
    h = min(max_step, t_total / 1000.0)
    n_accepted = 0
    status = OK
    t_fail = 0.0

    while t < t_total:
        if h > max_step:
            h = max_step
        if t + h > t_total:
            h = t_total - t
        sh = min(stencil_cap * h, 1e-8)

        k10, k11 = _rhs(kind, gamma, j_pin, j_tail, t_total, delta, t, y0, y1, sh)
        k20, k21 = _rhs(
            kind, gamma, j_pin, j_tail, t_total, delta, t + _C2 * h,
            y0 + h * _A21 * k10, y1 + h * _A21 * k11, sh,
        )
        k30, k31 = _rhs(
            kind, gamma, j_pin, j_tail, t_total, delta, t + _C3 * h,
            y0 + h * (_A31 * k10 + _A32 * k20), y1 + h * (_A31 * k11 + _A32 * k21), sh,
        )
        k40, k41 = _rhs(
            kind, gamma, j_pin, j_tail, t_total, delta, t + _C4 * h,
            y0 + h * (_A41 * k10 + _A42 * k20 + _A43 * k30),
            y1 + h * (_A41 * k11 + _A42 * k21 + _A43 * k31), sh,
        )
        k50, k51 = _rhs(
            kind, gamma, j_pin, j_tail, t_total, delta, t + _C5 * h,
            y0 + h * (_A51 * k10 + _A52 * k20 + _A53 * k30 + _A54 * k40),
            y1 + h * (_A51 * k11 + _A52 * k21 + _A53 * k31 + _A54 * k41), sh,
        )
        k60, k61 = _rhs(
            kind, gamma, j_pin, j_tail, t_total, delta, t + h,
            y0 + h * (_A61 * k10 + _A62 * k20 + _A63 * k30 + _A64 * k40 + _A65 * k50),
            y1 + h * (_A61 * k11 + _A62 * k21 + _A63 * k31 + _A64 * k41 + _A65 * k51), sh,
        )
        y5_0 = y0 + h * (_B1 * k10 + _B3 * k30 + _B4 * k40 + _B5 * k50 + _B6 * k60)
        y5_1 = y1 + h * (_B1 * k11 + _B3 * k31 + _B4 * k41 + _B5 * k51 + _B6 * k61)
        k70, k71 = _rhs(kind, gamma, j_pin, j_tail, t_total, delta, t + h, y5_0, y5_1, sh)

        e0 = h * (_E1 * k10 + _E3 * k30 + _E4 * k40 + _E5 * k50 + _E6 * k60 + _E7 * k70)
        e1 = h * (_E1 * k11 + _E3 * k31 + _E4 * k41 + _E5 * k51 + _E6 * k61 + _E7 * k71)
        s0 = atol + rtol * max(abs(y0), abs(y5_0))
        s1 = atol + rtol * max(abs(y1), abs(y5_1))
        err = math.sqrt(0.5 * ((abs(e0) / s0) ** 2 + (abs(e1) / s1) ** 2))

        if err <= 1.0:
            t = t + h
            y0, y1 = y5_0, y5_1
            n_accepted += 1
            if n_accepted % record_stride == 0 or t >= t_total:
                if n_rec < cap:
                    times[n_rec] = t
                    ys[n_rec, 0] = y0
                    ys[n_rec, 1] = y1
                    n_rec += 1
            if n_accepted >= MAX_STEPS:
                status = TOO_MANY_STEPS
                t_fail = t
                break
            fac = 0.9 * err ** -0.2 if err > 0.0 else 5.0
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h = h * min(5.0, max(0.2, fac))
        if h < min_step and t < t_total:
            status = STEP_UNDERFLOW
            t_fail = t
            break

    return times, ys, n_rec, status, t_fail


@njit(cache=True)
def evolve_expm(
    gamma: float,
    j_pin: float,
    j_tail: float,
    t_total: float,
    delta: float,
    y0: complex,
    y1: complex,
    n_steps: int,
    record_stride: int,
):
    """Fixed-step propagation by exact exponentials of the midpoint Hamiltonian.

    H is traceless, so exp(-i h H) = cos(d) I - i h sinc-like(d) H with
    d = h sqrt(J^2 - gamma^2 + 0j); all scalars, no eigendecomposition.
    """
    cap = n_steps // record_stride + 8
    times = np.empty(cap)
    ys = np.empty((cap, 2), dtype=np.complex128)
    times[0] = 0.0
    ys[0, 0] = y0
    ys[0, 1] = y1
    n_rec = 1

    h = t_total / n_steps
    for k in range(n_steps):
        tm = (k + 0.5) * h
        j, _ = j_and_jdot(j_pin, j_tail, t_total, tm)
        phi = delta * tm
        # M = -i h H, traceless; delta^2 = -det(M) = -h^2 (J^2 - gamma^2)
        d2 = -h * h * (j * j - gamma * gamma) + 0j
        d = cmath.sqrt(d2)
        if abs(d) < 1e-4:
            sinhc = 1.0 + d2 / 6.0 + d2 * d2 / 120.0
            coshd = 1.0 + d2 / 2.0 + d2 * d2 / 24.0
        else:
            sinhc = cmath.sinh(d) / d
            coshd = cmath.cosh(d)
        m00 = -1j * h * (1j * gamma)
        m01 = -1j * h * j * cmath.exp(-1j * phi)
        m10 = -1j * h * j * cmath.exp(1j * phi)
        u00 = coshd + sinhc * m00
        u01 = sinhc * m01
        u10 = sinhc * m10
        u11 = coshd - sinhc * m00
        y0, y1 = u00 * y0 + u01 * y1, u10 * y0 + u11 * y1
        if (k + 1) % record_stride == 0 or k == n_steps - 1:
            if n_rec < cap:
                times[n_rec] = (k + 1) * h
                ys[n_rec, 0] = y0
                ys[n_rec, 1] = y1
                n_rec += 1

    return times, ys, n_rec, OK, 0.0
