"""su(2) and its complexification sl(2,C), in coordinates.

Algebra elements are stored as coordinate triples in the basis (e1, e2, e3)
of su(2) normalized so that [e_i, e_j] = e_k cyclically; concretely
e_k = -(i/2) sigma_k in the 2x2 realization.  In this basis the bracket is
the cross product and the invariant positive-definite form B is the
Euclidean dot product (B(e_i, e_j) = delta_ij, a positive rescaling of the
Killing form).  Complexified elements carry complex coordinates; the
anti-involution tau fixing the compact real form is coordinate-wise complex
conjugation.

Arrays of shape (..., 3) are treated as fields of algebra elements, so all
operations broadcast.
"""

from __future__ import annotations

import numpy as np

# 2x2 realization, used only for group elements (gauge transformations).
_SIGMA = np.array(
    [
        [[0.0 + 0j, 1.0 + 0j], [1.0 + 0j, 0.0 + 0j]],
        [[0.0 + 0j, -1j], [1j, 0.0 + 0j]],
        [[1.0 + 0j, 0.0 + 0j], [0.0 + 0j, -1.0 + 0j]],
    ]
)
_E_MAT = -0.5j * _SIGMA  # e_k = -(i/2) sigma_k


def bracket(x, y):
    """Lie bracket [x, y]; the cross product in (e1,e2,e3) coordinates.

    Works for real su(2) and complex sl(2,C) coordinate arrays alike.
    """
    return np.cross(x, y)


def form_B(x, y):
    """Invariant form B(x, y) = sum_i x_i y_i (complex-bilinear on sl(2,C))."""
    x = np.asarray(x)
    y = np.asarray(y)
    return np.sum(x * y, axis=-1)


def tau(x):
    """Anti-involution fixing su(2): coordinate-wise complex conjugation."""
    return np.conj(x)


def norm(x):
    """Euclidean norm of the coordinate array (B-norm for real elements)."""
    return float(np.linalg.norm(np.asarray(x).ravel()))


def to_matrix(x):
    """2x2 complex matrix of an algebra element (coordinates -> -(i/2) x.sigma)."""
    x = np.asarray(x, dtype=complex)
    return np.einsum("...k,kij->...ij", x, _E_MAT)


def exp_su2(x):
    """Group exponential of su(2) coordinates, as 2x2 SU(2) matrices.

    Closed form: exp(theta * n.e) = cos(theta/2) I - i sin(theta/2) n.sigma
    for a unit vector n, where theta = |x|.
    """
    x = np.asarray(x, dtype=float)
    theta = np.linalg.norm(x, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        nhat = np.where(theta[..., None] > 0, x / np.maximum(theta, 1e-300)[..., None], 0.0)
    c = np.cos(theta / 2.0)[..., None, None]
    s = np.sin(theta / 2.0)[..., None, None]
    nsigma = np.einsum("...k,kij->...ij", nhat, _SIGMA)
    eye = np.broadcast_to(np.eye(2, dtype=complex), nsigma.shape)
    return c * eye - 1j * s * nsigma


def exp_sl2(z):
    """Exponential of complex su(2) coordinates (elements of sl(2,C)).

    (z.e)^2 = -(z.z)/4 I, so exp = cos(theta/2) I + sinc(theta/2) (z.e)
    with theta = sqrt(z.z) on any branch.
    """
    z = np.asarray(z, dtype=complex)
    x = np.einsum("...k,kij->...ij", z, _E_MAT)
    theta2 = np.sqrt(np.sum(z * z, axis=-1) + 0j) / 2.0
    c = np.cos(theta2)[..., None, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(np.abs(theta2) > 1e-12, np.sin(theta2) / np.where(np.abs(theta2) > 1e-12, theta2, 1.0), 1.0)
    eye = np.broadcast_to(np.eye(2, dtype=complex), x.shape)
    return c * eye + s[..., None, None] * x


def _inv2(g):
    """Inverse of det-1 2x2 matrices (adjugate)."""
    out = np.empty_like(g)
    out[..., 0, 0] = g[..., 1, 1]
    out[..., 1, 1] = g[..., 0, 0]
    out[..., 0, 1] = -g[..., 0, 1]
    out[..., 1, 0] = -g[..., 1, 0]
    return out


def adjoint_matrix(g, unitary: bool = True):
    """Adjoint action of g on algebra coordinates, as 3x3 matrices
    (rotations for g in SU(2), complex for general SL(2,C)).

    Columns are the coordinates of g e_k g^{-1}.
    """
    g = np.asarray(g, dtype=complex)
    ginv = np.conj(np.swapaxes(g, -1, -2)) if unitary else _inv2(g)
    cols = []
    for k in range(3):
        m = g @ _E_MAT[k] @ ginv
        # Decompose m = sum_j c_j e_j using tr(e_j e_k) = -delta_jk / 2.
        c = [-2.0 * np.trace(m @ _E_MAT[j], axis1=-2, axis2=-1) for j in range(3)]
        col = np.stack(c, axis=-1)
        cols.append(col.real if unitary else col)
    return np.stack(cols, axis=-1)


def log_sl2(g):
    """Principal logarithm of SL(2,C) matrices near the identity, as complex
    coordinates.

    Decompose g = c I + (s n).e with c = tr/2 and read the angle from
    arctan(w/c) for w^2 = (s n).(s n); stable near the identity.
    """
    g = np.asarray(g, dtype=complex)
    c = np.trace(g, axis1=-2, axis2=-1) / 2.0
    x = g - c[..., None, None] * np.eye(2, dtype=complex)
    sn = np.stack(
        [-2.0 * np.trace(x @ _E_MAT[j], axis1=-2, axis2=-1) for j in range(3)], axis=-1
    )
    w = np.sqrt(np.sum(sn * sn, axis=-1) + 0j)
    # sn = (sin t2 / t2) z and w = 2 sin t2, c = cos t2 for g = exp(z.e)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta2 = np.where(
            np.abs(w) > 1e-30, np.arctan(w / (2.0 * np.where(np.abs(c) > 1e-30, c, 1.0))), 0.0
        )
        fac = np.where(np.abs(w) > 1e-30, 2.0 * theta2 / np.where(np.abs(w) > 1e-30, w, 1.0), 1.0)
    return fac[..., None] * sn


def log_su2(g):
    """Inverse of exp_su2 on the principal branch, as su(2) coordinates.

    Uses atan2 of (|sin-part|, cos-part), which stays accurate near the
    identity where arccos would lose half the digits.
    """
    g = np.asarray(g, dtype=complex)
    c = np.trace(g, axis1=-2, axis2=-1).real / 2.0
    # sin(theta/2) * n from the traceless anti-hermitian part
    n1 = -np.imag(g[..., 0, 1])
    n2 = -np.real(g[..., 0, 1])
    n3 = -np.imag(g[..., 0, 0] - g[..., 1, 1]) / 2.0
    sn = np.stack([n1, n2, n3], axis=-1)
    s = np.linalg.norm(sn, axis=-1)
    theta = 2.0 * np.arctan2(s, c)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(s[..., None] > 1e-300, sn / np.maximum(s, 1e-300)[..., None], 0.0)
    return theta[..., None] * unit
