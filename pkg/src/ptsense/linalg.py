"""Exact-size complex linear algebra for 2x2 operators.

Everything here works with closed forms: a 2x2 eigenproblem reduces to a
quadratic and the matrix exponential to trace/determinant scalars, so no
iterative solver (and none of its conditioning surprises near degeneracies)
is involved.
"""

from __future__ import annotations

import cmath
from typing import NamedTuple

import numpy as np

DEGENERACY_RTOL = 1e-12


class Eig2Result(NamedTuple):
    """Eigenpairs of a 2x2 matrix, ordered by descending (Re, Im) eigenvalue.

    ``degenerate`` is set when the eigenvalue gap is below tolerance; in that
    case both slots hold the repeated eigenvalue and the single coalesced
    eigenvector (duplicated).
    """

    e1: complex
    e2: complex
    v1: np.ndarray
    v2: np.ndarray
    degenerate: bool


def _phase_fix(v: np.ndarray) -> np.ndarray:
    """Normalize and rotate so the largest-magnitude component is real positive."""
    v = v / np.linalg.norm(v)
    k = 0 if abs(v[0]) >= abs(v[1]) else 1
    ph = v[k] / abs(v[k])
    return v / ph


def eig2(m: np.ndarray, degeneracy_rtol: float = DEGENERACY_RTOL) -> Eig2Result:
    """Eigendecomposition of a complex 2x2 matrix via the characteristic quadratic.

    Eigenvalues are ``s +- d`` with ``s = tr(m)/2`` and ``d = sqrt(s^2 - det m)``,
    ordered by descending real part, then descending imaginary part. Eigenvectors
    are Euclidean-normalized with a deterministic phase. A gap below
    ``degeneracy_rtol * scale`` flags the result degenerate and returns the
    coalesced eigenvector twice.
    """
    m = np.asarray(m, dtype=complex)
    s = 0.5 * (m[0, 0] + m[1, 1])
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    d = cmath.sqrt(s * s - det)
    ea, eb = s + d, s - d
    if (ea.real, ea.imag) < (eb.real, eb.imag):
        ea, eb = eb, ea

    scale = max(abs(m).max(), 1e-300)
    if abs(ea - eb) <= degeneracy_rtol * scale:
        v = _eigvec(m, s, scale)
        return Eig2Result(s, s, v, v.copy(), True)
    return Eig2Result(ea, eb, _eigvec(m, ea, scale), _eigvec(m, eb, scale), False)


def _eigvec(m: np.ndarray, lam: complex, scale: float) -> np.ndarray:
    # Rows of (m - lam I) are both orthogonal to the eigenvector; use the
    # larger one for conditioning, falling back to a basis vector for
    # diagonal matrices.
    r0 = np.array([m[0, 0] - lam, m[0, 1]])
    r1 = np.array([m[1, 0], m[1, 1] - lam])
    r = r0 if np.linalg.norm(r0) >= np.linalg.norm(r1) else r1
    if np.linalg.norm(r) <= 1e-14 * scale:
        return np.array([1.0 + 0j, 0.0 + 0j])
    v = np.array([-r[1], r[0]])
    return _phase_fix(v)


def expm2(m: np.ndarray) -> np.ndarray:
    """Matrix exponential of a complex 2x2 matrix, exact closed form.

    Splitting ``m = s I + n`` with traceless ``n`` gives
    ``exp(m) = e^s (cosh(d) I + sinhc(d) n)`` where ``d^2 = s^2 - det m``.
    ``sinhc`` is evaluated by series near ``d = 0``, so eigenvalue coalescence
    costs no accuracy.
    """
    m = np.asarray(m, dtype=complex)
    s = 0.5 * (m[0, 0] + m[1, 1])
    n = m - s * np.eye(2)
    d2 = n[0, 0] * n[0, 0] + n[0, 1] * n[1, 0]
    d = cmath.sqrt(d2)
    if abs(d) < 1e-4:
        # sinh(d)/d = 1 + d^2/6 + d^4/120 + ...; d^6 term < 1e-29 here
        sinhc = 1.0 + d2 / 6.0 + d2 * d2 / 120.0
        coshd = 1.0 + d2 / 2.0 + d2 * d2 / 24.0
    else:
        sinhc = cmath.sinh(d) / d
        coshd = cmath.cosh(d)
    return cmath.exp(s) * (coshd * np.eye(2) + sinhc * n)
