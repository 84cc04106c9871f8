"""Cochain calculus and per-face geometry on a SurfaceMesh.

Representations
---------------
Degree-0 cochains are (V, ...) arrays, degree-1 cochains (E, ...) arrays of
edge integrals, degree-2 cochains (F, ...) arrays of face integrals.  The
trailing axes carry coefficients (nothing for reals, 3 for su(2)/sl(2,C)
coordinates).

A ``FaceForm1`` is the per-face constant covector representation of a 1-form:
an (F, 2, ...) array of components in the face chart's (dx, dy) frame.  The
two representations are linked by ``whitney`` (face average of the Whitney
interpolant, exact on constant forms) and ``unwhitney`` (reference-metric
projection back to edge cochains; a left inverse of ``whitney`` away from the
checkerboard kernel of the face-averaged interpolation).

Complex structures J are (F, 2, 2) matrices acting on chart vectors.  The
form action is ``J w = -w o J``; plain composition ``w o C`` is ``compose``.
All metric pairings of 1-forms go through ``pair_j``:

    <w1, w2> = integral of B(w1 ^ J w2),

which is symmetric and positive definite for orientation-compatible J.
"""

from __future__ import annotations

import numpy as np

from .mesh import MeshError, SurfaceMesh

# ---------------------------------------------------------------------------
# cochain basics
# ---------------------------------------------------------------------------


def coboundary(mesh: SurfaceMesh, c: np.ndarray, degree: int) -> np.ndarray:
    """Discrete exterior derivative on degree-0 or degree-1 cochains."""
    c = np.asarray(c)
    if degree == 0:
        mat = mesh.d0
    elif degree == 1:
        mat = mesh.d1
    else:
        raise ValueError("coboundary is defined on degrees 0 and 1 only")
    flat = c.reshape(c.shape[0], -1)
    out = mat @ flat
    return out.reshape((mat.shape[0],) + c.shape[1:])


def whitney(mesh: SurfaceMesh, w: np.ndarray) -> np.ndarray:
    """Face-averaged Whitney interpolant of a 1-cochain, as (F, 2, ...)."""
    w = np.asarray(w)
    vals = w[mesh.face_edges] * mesh.face_signs.reshape(
        mesh.face_signs.shape + (1,) * (w.ndim - 1)
    )
    cov = mesh.whitney_covectors
    return np.einsum("fle,fl...->fe...", cov, vals)


def unwhitney(mesh: SurfaceMesh, form: np.ndarray) -> np.ndarray:
    """Face form -> edge cochain.

    The Whitney-representable part inverts exactly (reference-metric least
    squares, so unwhitney(whitney(w)) is an orthogonal projection of w); the
    transverse remainder is integrated along each edge with the two adjacent
    face values averaged.  Splitting this way keeps the conversion a left
    inverse up to the checkerboard kernel while staying local (and therefore
    coboundary-stable) on content the Whitney range cannot see.
    """
    form = np.asarray(form)
    flat = form.reshape(form.shape[0] * 2, -1)
    w = mesh._unwhitney_pinv @ flat
    w = w.reshape((mesh.ne,) + form.shape[2:])
    residual_form = form - whitney(mesh, w)
    return w + constant_form_cochain(mesh, residual_form)


def face_average(mesh: SurfaceMesh, u: np.ndarray) -> np.ndarray:
    """Average vertex values over each face's corners."""
    u = np.asarray(u)
    flat = u.reshape(u.shape[0], -1)
    out = mesh.face_average @ flat
    return out.reshape((mesh.nf,) + u.shape[1:])


def scatter_face_to_vertex(mesh: SurfaceMesh, vals: np.ndarray) -> np.ndarray:
    """Transpose of face_average: distribute per-face values to corners /3."""
    vals = np.asarray(vals)
    flat = vals.reshape(vals.shape[0], -1)
    out = mesh.face_average.T @ flat
    return out.reshape((mesh.nv,) + vals.shape[1:])


def constant_form_cochain(mesh: SurfaceMesh, form: np.ndarray) -> np.ndarray:
    """Edge integrals of a per-face constant form (tangentially averaged on
    the two sides, weighted equally)."""
    form = np.asarray(form)
    seg = np.roll(mesh.corners, -1, axis=1) - mesh.corners  # (F,3,2)
    vals = np.einsum("flx,fx...->fl...", seg, form)
    vals = vals * mesh.face_signs.reshape((mesh.nf, 3) + (1,) * (form.ndim - 2))
    out = np.zeros((mesh.ne,) + form.shape[2:], dtype=form.dtype)
    np.add.at(out, mesh.face_edges.ravel(), vals.reshape((3 * mesh.nf,) + form.shape[2:]))
    return 0.5 * out


# ---------------------------------------------------------------------------
# wedge pairings
# ---------------------------------------------------------------------------


def _dens(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    """Per-face density of B(w1 ^ w2) relative to chart dx^dy."""
    a = w1[:, 0] * w2[:, 1] - w1[:, 1] * w2[:, 0]
    if a.ndim > 1:
        a = a.reshape(a.shape[0], -1).sum(axis=1)
    return a


def pair_integral(mesh: SurfaceMesh, w1: np.ndarray, w2: np.ndarray, pairing: str = "B"):
    """Integral of B(w1 ^ w2) over the surface for face forms w1, w2."""
    w1 = np.asarray(w1)
    w2 = np.asarray(w2)
    if w1.shape != w2.shape and pairing == "B":
        raise ValueError(f"incompatible coefficient shapes {w1.shape} vs {w2.shape}")
    val = np.sum(mesh.chart_areas * _dens(w1, w2))
    if pairing == "B":
        return val
    if pairing == "trace-real":
        return float(np.real(val))
    raise ValueError(f"unknown pairing {pairing!r}")


def apply_J(J: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Form action J w = -w o J of a complex structure on a face form."""
    return -np.einsum("fm...,fmx->fx...", w, J)


def compose(w: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Plain composition w(C) of a face form with a per-face endomorphism."""
    return np.einsum("fm...,fmx->fx...", w, c)


def pair_j(mesh: SurfaceMesh, J: np.ndarray, w1: np.ndarray, w2: np.ndarray):
    """Metric pairing: integral of B(w1 ^ J w2); symmetric in (w1, w2)."""
    return pair_integral(mesh, w1, apply_J(J, w2))


def ip0(mesh: SurfaceMesh, u1: np.ndarray, u2: np.ndarray):
    """Lumped degree-0 inner product with the vertex masses."""
    u1 = np.asarray(u1)
    u2 = np.asarray(u2)
    prod = u1 * u2
    if prod.ndim > 1:
        prod = prod.reshape(prod.shape[0], -1).sum(axis=1)
    return np.sum(mesh.vertex_mass * prod)


def ip1(mesh: SurfaceMesh, J: np.ndarray, w1: np.ndarray, w2: np.ndarray):
    """Degree-1 inner product of edge cochains through the face rep."""
    return pair_j(mesh, J, whitney(mesh, w1), whitney(mesh, w2))


def mean_zero(mesh: SurfaceMesh, f: np.ndarray) -> np.ndarray:
    """Project a real vertex function to zero mean against the masses."""
    f = np.asarray(f, dtype=float)
    return f - ip0(mesh, f, np.ones(mesh.nv)) / mesh.total_volume


# ---------------------------------------------------------------------------
# complex structures and the induced metric
# ---------------------------------------------------------------------------


def reference_J(mesh: SurfaceMesh) -> np.ndarray:
    """Chart rotation by +90 degrees on every face (compatible, and flat for
    the built translation-surface meshes away from the cone vertex)."""
    J = np.zeros((mesh.nf, 2, 2))
    J[:, 0, 1] = -1.0
    J[:, 1, 0] = 1.0
    return J


def normalize_J(J: np.ndarray) -> np.ndarray:
    """Rescale a traceless matrix field to J^2 = -1 (divide by sqrt(det))."""
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    if np.any(det <= 0):
        raise MeshError("matrix field leaves the J-normalizable cone")
    return J / np.sqrt(det)[:, None, None]

def validate_J(mesh: SurfaceMesh, J: np.ndarray, tol: float = 1e-12) -> None:
    J2 = np.einsum("fij,fjk->fik", J, J)
    err = np.abs(J2 + np.eye(2)).max()
    if err > tol * 10:
        raise MeshError(f"J^2 + 1 = {err:.2e}")
    g = metric_from_J(mesh, J)
    if np.any(g[:, 0, 0] <= 0) or np.any(np.linalg.det(g) <= 0):
        raise MeshError("J is not compatible with the orientation")


def metric_from_J(mesh: SurfaceMesh, J: np.ndarray) -> np.ndarray:
    """Per-face metric g = omega(., J.), as (F,2,2) symmetric matrices."""
    rho = mesh.omega_density
    omega = np.zeros((mesh.nf, 2, 2))
    omega[:, 0, 1] = rho
    omega[:, 1, 0] = -rho
    return np.einsum("fij,fjk->fik", omega, J)


def j_gram(mesh: SurfaceMesh, J: np.ndarray) -> np.ndarray:
    """Covector Gram matrices M with dens(p ^ Jq) = p M q^T (symmetric,
    positive definite for compatible J)."""
    m = np.empty((mesh.nf, 2, 2))
    m[:, 0, 0] = -J[:, 0, 1]
    m[:, 0, 1] = J[:, 0, 0]
    m[:, 1, 0] = J[:, 0, 0]
    m[:, 1, 1] = J[:, 1, 0]
    return m


def anticommuting_projection(J: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Project a matrix field onto {X : XJ + JX = 0}."""
    return 0.5 * (M + np.einsum("fij,fjk,fkl->fil", J, M, J))


def anticommuting_basis(mesh: SurfaceMesh, J: np.ndarray) -> np.ndarray:
    """(F,2,2,2): per face, a tr-orthonormal basis of J-anticommuting
    matrices (the tangent directions of the space of complex structures)."""
    cand = np.zeros((2, mesh.nf, 2, 2))
    cand[0, :, 0, 0] = 1.0
    cand[0, :, 1, 1] = -1.0
    cand[1, :, 0, 1] = 1.0
    cand[1, :, 1, 0] = 1.0
    out = np.zeros((mesh.nf, 2, 2, 2))
    for k in range(2):
        x = anticommuting_projection(J, cand[k])
        for j in range(k):
            prev = out[:, j]
            coef = 0.5 * np.einsum("fij,fji->f", x, prev)
            x = x - coef[:, None, None] * prev
        nrm = np.sqrt(0.5 * np.einsum("fij,fji->f", x, x))
        out[:, k] = x / nrm[:, None, None]
    return out


def random_compatible_J(
    mesh: SurfaceMesh,
    rng: np.random.Generator,
    amplitude: float = 0.3,
    smoothing: int = 2,
):
    """Seeded random compatible complex structure near the reference one.

    The coefficient field is lightly smoothed: with fully independent
    per-face metrics the shared edge lengths of the induced cone metric can
    violate the triangle inequality.
    """
    from .mesh import smooth_face

    J = reference_J(mesh)
    coef = rng.standard_normal((mesh.nf, 2))
    if smoothing:
        coef = smooth_face(mesh, coef, smoothing)
    coef *= amplitude / max(1e-12, np.abs(coef).max())
    # det(J0 + P) = 1 - |coef|^2 for symmetric traceless P; stay in the cone
    r = np.hypot(coef[:, 0], coef[:, 1])
    coef *= np.minimum(1.0, 0.85 / np.maximum(r, 1e-30))[:, None]
    pert = np.zeros((mesh.nf, 2, 2))
    pert[:, 0, 0] = coef[:, 0]
    pert[:, 1, 1] = -coef[:, 0]
    pert[:, 0, 1] = coef[:, 1]
    pert[:, 1, 0] = coef[:, 1]
    return normalize_J(J + pert)


# ---------------------------------------------------------------------------
# curvature: angle defects of the per-face flat metric
# ---------------------------------------------------------------------------


def edge_lengths_sq(mesh: SurfaceMesh, J: np.ndarray) -> np.ndarray:
    """Squared edge lengths of the metric g = omega(., J.), averaged over the
    two adjacent faces so every face sees consistent lengths."""
    g = metric_from_J(mesh, J)
    if np.any(g[:, 0, 0] <= 0) or np.any(np.linalg.det(g) <= 0):
        bad = np.nonzero((g[:, 0, 0] <= 0) | (np.linalg.det(g) <= 0))[0]
        raise MeshError(f"degenerate metric on faces {bad.tolist()}")
    seg = np.roll(mesh.corners, -1, axis=1) - mesh.corners  # (F,3,2) slot vectors
    l2f = np.einsum("fli,fij,flj->fl", seg, g, seg)
    out = np.zeros(mesh.ne)
    np.add.at(out, mesh.face_edges.ravel(), 0.5 * l2f.ravel())
    return out


def corner_angles(mesh: SurfaceMesh, J: np.ndarray) -> np.ndarray:
    """(F,3) corner angles of the piecewise-flat metric with the shared edge
    lengths of edge_lengths_sq, via the law of cosines.

    Sharing lengths per edge makes the glued surface an honest cone metric:
    angle sums are exactly pi per face, so the total defect telescopes to
    2 pi chi and the defect curvature is consistent for smooth metrics.
    """
    l2 = edge_lengths_sq(mesh, J)[mesh.face_edges]  # (F,3) slot i: vertices i->i+1
    ang = np.empty((mesh.nf, 3))
    for i in range(3):
        a2 = l2[:, i]  # edge at vertices (i, i+1)
        b2 = l2[:, (i + 2) % 3]  # edge at vertices (i+2, i) -> incident to i
        c2 = l2[:, (i + 1) % 3]  # opposite edge
        cosang = (a2 + b2 - c2) / (2.0 * np.sqrt(a2 * b2))
        if np.any(np.abs(cosang) > 1.0 + 1e-9):
            bad = np.nonzero(np.abs(cosang) > 1.0 + 1e-9)[0]
            raise MeshError(f"edge lengths violate the triangle inequality on faces {bad.tolist()}")
        ang[:, i] = np.arccos(np.clip(cosang, -1.0, 1.0))
    return ang


def scalar_curvature(mesh: SurfaceMesh, J: np.ndarray) -> np.ndarray:
    """Vertex scalar curvature S_v = 2 (2 pi - angle sum) / m_v.

    The total curvature sum_v S_v m_v telescopes to 4 pi chi exactly, so the
    constant-curvature target is mesh.cc_target = 4 pi chi / V.
    """
    ang = corner_angles(mesh, J)
    defect = np.full(mesh.nv, 2.0 * np.pi)
    np.subtract.at(defect, mesh.faces.ravel(), ang.ravel())
    return 2.0 * defect / mesh.vertex_mass


# ---------------------------------------------------------------------------
# Hamiltonian vector fields and Lie derivatives of J
# ---------------------------------------------------------------------------


def gradient_form(mesh: SurfaceMesh, f: np.ndarray) -> np.ndarray:
    """Per-face covector df (exact: the Whitney interpolant of df is the
    affine gradient)."""
    return whitney(mesh, coboundary(mesh, f, 0))


def hamiltonian_field(mesh: SurfaceMesh, f: np.ndarray, check_mean: bool = True) -> np.ndarray:
    """Per-face vector field eta_f with i_eta omega = df.

    Orientation convention: omega(e1, e2) > 0 in every chart, so
    eta = (df_y, -df_x) / omega_density.
    """
    if check_mean:
        mean = ip0(mesh, np.asarray(f, dtype=float), np.ones(mesh.nv))
        if abs(mean) > 1e-8 * (1.0 + float(np.max(np.abs(f)))):
            raise ValueError("hamiltonian_field requires a mean-zero function")
    df = gradient_form(mesh, f)
    rho = mesh.omega_density
    return np.stack([df[:, 1] / rho, -df[:, 0] / rho], axis=1)


def contract_form(form: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pointwise contraction form(y) of a face form with a face vector."""
    return np.einsum("fm...,fm->f...", form, y)


def contract_two_form(mesh: SurfaceMesh, r: np.ndarray, y: np.ndarray) -> np.ndarray:
    """i_y of a 2-cochain r, as a face form.

    The chart density of r is r / chart_area, and i_y(dens dx^dy) is the
    covector dens * (-y_2, y_1).
    """
    r = np.asarray(r)
    tail = (1,) * (r.ndim - 1)
    dens = r / mesh.chart_areas.reshape((mesh.nf,) + tail)
    out = np.empty((mesh.nf, 2) + r.shape[1:], dtype=r.dtype)
    out[:, 0] = -y[:, 1].reshape((mesh.nf,) + tail) * dens
    out[:, 1] = y[:, 0].reshape((mesh.nf,) + tail) * dens
    return out


def _lsq_samples(mesh: SurfaceMesh, f: int, rings: int = 2):
    """(positions, [(face, R, t)]) of the unfolded neighborhood of face f."""
    items = [(f, np.eye(2), np.zeros(2))]
    seen = {f}
    frontier = [(f, np.eye(2), np.zeros(2))]
    for _ in range(rings):
        new = []
        for g, R, t in frontier:
            for h, R2, t2 in mesh.unfold_maps[g]:
                if h in seen:
                    continue
                seen.add(h)
                Rn = R @ R2
                tn = R @ t2 + t
                item = (h, Rn, tn)
                items.append(item)
                new.append(item)
        frontier = new
    return items


_REC_CACHE: dict = {}


def lie_reconstruction_matrix(mesh: SurfaceMesh, J: np.ndarray, rings: int = 2):
    """Sparse matrix of the linear map y -> L_y J.

    L_y J = (y . grad) J - (Dy) J + J (Dy) with Dy and grad J from the same
    least-squares affine fits over unfolded face neighborhoods.  Rows are the
    flattened (F, 2, 2) output, columns the flattened (F, 2) vector field.
    Cached per (mesh, J) content.
    """
    import hashlib

    import scipy.sparse as sp

    key = (id(mesh), hashlib.sha1(np.ascontiguousarray(J)).hexdigest(), rings)
    hit = _REC_CACHE.get(key)
    if hit is not None:
        return hit
    bary = mesh.face_barycenters
    rows, cols, vals = [], [], []

    def put(f, ij, g, comp, val):
        rows.append(4 * f + ij)
        cols.append(2 * g + comp)
        vals.append(val)

    for f in range(mesh.nf):
        items = _lsq_samples(mesh, f, rings)
        n = len(items)
        A = np.ones((n, 3))
        jvals = np.empty((n, 4))
        for row, (g, R, t) in enumerate(items):
            A[row, 1:] = R @ bary[g] + t - bary[f]
            jvals[row] = (R @ J[g] @ R.T).ravel()
        pls = np.linalg.pinv(A)  # (3, n) least-squares solution operator
        dJ = pls[1:] @ jvals  # (2, 4) gradients of J entries
        # (y . grad)J term: coefficient on y_f
        for xdir in range(2):
            m = dJ[xdir].reshape(2, 2)
            for i in range(2):
                for j in range(2):
                    put(f, 2 * i + j, f, xdir, m[i, j])
        # [J, Dy]-type terms: Dy[i, j] = sum_row pls[1+j, row] * (R_row y_g)[i]
        Jf = J[f]
        for row, (g, R, t) in enumerate(items):
            for jdir in range(2):
                w = pls[1 + jdir, row]
                for comp in range(2):
                    # d(Dy[i, jdir]) / d y_g[comp] = w * R[i, comp]
                    for i in range(2):
                        dDy = w * R[i, comp]
                        # -(Dy J)[i, :] and (J Dy)[:, jdir]
                        for jj in range(2):
                            put(f, 2 * i + jj, g, comp, -dDy * Jf[jdir, jj])
                        for ii in range(2):
                            put(f, 2 * ii + jdir, g, comp, Jf[ii, i] * dDy)
    mat = sp.csr_matrix(
        (vals, (rows, cols)), shape=(4 * mesh.nf, 2 * mesh.nf)
    )
    if len(_REC_CACHE) > 8:
        _REC_CACHE.clear()
    _REC_CACHE[key] = mat
    return mat


def lie_derivative_J(mesh: SurfaceMesh, y: np.ndarray, J: np.ndarray, rings: int = 2) -> np.ndarray:
    """L_y J by least-squares gradient reconstruction over unfolded face
    neighborhoods: L_y J = (y . grad) J - (Dy) J + J (Dy).

    The result anticommutes with J only to reconstruction accuracy; identities
    involving it are first-order in the mesh size.
    """
    mat = lie_reconstruction_matrix(mesh, J, rings)
    return (mat @ np.asarray(y, dtype=float).ravel()).reshape(mesh.nf, 2, 2)


def hamiltonian_field_matrix(mesh: SurfaceMesh):
    """Sparse matrix of f -> eta_f (flattened (F,2) rows): eta is the
    omega-dual of the per-face gradient, (df_y, -df_x) / omega_density."""
    import scipy.sparse as sp

    grad = mesh._whitney_matrix @ mesh.d0  # (2F, V): per-face df components
    rot = sp.kron(
        sp.diags(1.0 / mesh.omega_density), np.array([[0.0, 1.0], [-1.0, 0.0]]), format="csr"
    )
    return rot @ grad
