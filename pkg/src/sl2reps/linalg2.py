"""2x2 complex matrices, the Lie algebra sl2 and the Cartan projection.

Group elements are plain ``(2, 2)`` complex numpy arrays and Lie algebra
vectors are ``(3,)`` complex arrays of coordinates in the basis

    H = [[1, 0], [0, -1]],  E = [[0, 1], [0, 0]],  F = [[0, 0], [1, 0]].

Every 3x3 adjoint matrix and every cocycle coordinate in the package uses
this basis.
"""

import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NumericDegradationError

DET_TOL = 1e-9

H = np.array([[1, 0], [0, -1]], dtype=complex)
E = np.array([[0, 1], [0, 0]], dtype=complex)
F = np.array([[0, 0], [1, 0]], dtype=complex)
BASIS = (H, E, F)

_I2 = np.eye(2, dtype=complex)


def identity():
    return _I2.copy()


def as_sl2(m, det_tol=DET_TOL):
    """Validate ``m`` as an element of SL2(C) and return it as a complex array."""
    g = np.asarray(m, dtype=complex)
    if g.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise NumericDegradationError("non-finite matrix entry")
    d = det(g)
    if abs(d - 1) > det_tol:
        raise NumericDegradationError(f"determinant {d:.3g} is not 1 (tol {det_tol:g})")
    return g


def det(g):
    return g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]


def normalize_det(g):
    """Rescale an invertible matrix to determinant one."""
    return g / np.sqrt(det(g))


def _check_drift(g, det_tol):
    if abs(det(g) - 1) > 10 * det_tol:
        raise NumericDegradationError(
            f"determinant drifted to {det(g):.6g} (allowed {10 * det_tol:g})"
        )


def mul(g, h, det_tol=DET_TOL):
    out = g @ h
    _check_drift(out, det_tol)
    return out


def inv(g, det_tol=None):
    """Inverse by the adjugate; exact when det(g) = 1."""
    out = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])
    if det_tol is not None:
        _check_drift(g, det_tol)
    return out


# --- sl2 --------------------------------------------------------------------


def vec_to_matrix(v):
    h, e, f = v
    return np.array([[h, e], [f, -h]], dtype=complex)


def matrix_to_vec(X):
    """Coordinates of the traceless part of ``X``."""
    return np.array([(X[0, 0] - X[1, 1]) / 2, X[0, 1], X[1, 0]], dtype=complex)


def bracket(X, Y):
    return X @ Y - Y @ X


def _sinhc(lam):
    if abs(lam) < 1e-4:
        l2 = lam * lam
        return 1 + l2 / 6 + l2 * l2 / 120
    return np.sinh(lam) / lam


def exp_traceless(v):
    """Matrix exponential of the traceless matrix with coordinates ``v``.

    Uses X^2 = -det(X) I, so exp(X) = cosh(l) I + sinh(l)/l X with l^2 = -det X.
    """
    X = vec_to_matrix(v)
    lam = np.sqrt(complex(-det(X)))
    return np.cosh(lam) * _I2 + _sinhc(lam) * X


def adjoint_matrix(g):
    """Matrix of X -> g X g^{-1} on sl2 in the (H, E, F) basis."""
    gi = inv(g)
    return np.column_stack([matrix_to_vec(g @ B @ gi) for B in BASIS])


def killing_pairing(X, Y):
    """Killing form 4 tr(XY); arguments are coordinate vectors."""
    return 4 * np.trace(vec_to_matrix(X) @ vec_to_matrix(Y))


# --- Cartan projection ------------------------------------------------------


def cartan_mu(g):
    """log of the largest singular value of ``g`` (assumes det g = 1).

    With sigma_2 = 1/sigma_1 one has sigma_1 - sigma_2 = 2 sinh(mu), and for
    a 2x2 matrix sigma_1 - sigma_2 = sqrt(|a - conj d|^2 + |b + conj c|^2).
    This form has no cancellation near SU(2): it is exactly 0 on matrices
    whose entries satisfy d = conj(a), c = -conj(b).
    """
    a, b, c, d = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    gap = math.hypot(abs(a - d.conjugate()), abs(b + c.conjugate()))
    return math.asinh(gap / 2)


def singular_values(g):
    """Both singular values (largest first) of an SL2 element."""
    mu = cartan_mu(g)
    return math.exp(mu), math.exp(-mu)


# --- invariant Hermitian forms ----------------------------------------------


def _herm_from_real(x):
    p, s, qr, qi = x
    return np.array([[p, qr + 1j * qi], [qr - 1j * qi, s]], dtype=complex)


def _real_from_herm(M):
    return np.array([M[0, 0].real, M[1, 1].real, M[0, 1].real, M[0, 1].imag])


def _min_eig_ratio_real(x):
    """lambda_min / max|lambda| of the Hermitian forms with real coordinates ``x[..., 4]``."""
    x = np.asarray(x, dtype=float)
    p, s, qr, qi = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    mid = (p + s) / 2
    rad = np.hypot(np.hypot((p - s) / 2, qr), qi)
    lo, hi = mid - rad, mid + rad
    big = np.maximum(np.abs(lo), np.abs(hi))
    return np.where(big > 0, lo / np.where(big > 0, big, 1.0), 0.0)


def _min_eig_ratio(Hm):
    return float(_min_eig_ratio_real(_real_from_herm(Hm)))


def invariant_hermitian_form(mats, tol=1e-8):
    """Find H > 0 with g^H H g = H for every g in ``mats``, or return None.

    The invariance condition is real-linear on the 4-dimensional space of
    2x2 Hermitian matrices; its kernel is computed by SVD and then searched
    for a positive-definite member.  A returned H certifies that the group
    generated by ``mats`` lies in a conjugate of SU(2).
    """
    mats = [np.asarray(g, dtype=complex) for g in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    rows = []
    for g in mats:
        block = np.empty((4, 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = 1.0
            Hk = _herm_from_real(e)
            block[:, k] = _real_from_herm(g.conj().T @ Hk @ g - Hk)
        rows.append(block)
    A = np.vstack(rows)
    _, s, vt = np.linalg.svd(A)
    scale = max(1.0, max(np.linalg.norm(g) ** 2 for g in mats))
    kernel = vt[np.sum(s > 1e-9 * scale):]
    dim = kernel.shape[0]
    if dim == 0:
        return None

    candidates = []
    if dim == 1:
        candidates = [kernel[0], -kernel[0]]
    elif dim == 2:
        def ratio(t):
            t = np.asarray(t)[..., None]
            return _min_eig_ratio_real(np.cos(t) * kernel[0] + np.sin(t) * kernel[1])

        step = 2 * np.pi / 720
        grid = np.arange(720) * step
        best = grid[int(np.argmax(ratio(grid)))]
        res = minimize_scalar(lambda t: -ratio(t), bounds=(best - step, best + step),
                              method="bounded", options={"xatol": 1e-12})
        if -res.fun > ratio(best):
            best = res.x
        candidates = [np.cos(best) * kernel[0] + np.sin(best) * kernel[1]]
    else:
        # projection of the identity form, then the basis directions
        ident = _real_from_herm(_I2)
        candidates = [kernel.T @ (kernel @ ident)]
        candidates += [sign * k for k in kernel for sign in (1, -1)]

    for x in candidates:
        Hm = _herm_from_real(x)
        if _min_eig_ratio(Hm) <= 1e-10:
            continue
        Hm = Hm / np.linalg.norm(Hm)
        err = max(np.linalg.norm(g.conj().T @ Hm @ g - Hm) for g in mats)
        if err < tol:
            return Hm
    return None
