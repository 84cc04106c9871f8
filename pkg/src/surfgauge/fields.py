"""Gauge fields on the trivialized SU(2)-bundle over a SurfaceMesh.

A configuration is a triple (J, A, psi): a per-face complex structure, an
su(2)-valued connection 1-cochain, and an su(2)-valued 1-cochain (the
unitary Higgs field).  The complex connection is D = A + i psi.

Connections are algebra-valued in a fixed trivialization (small-field
gauge), so curvature is the Maurer-Cartan expression

    F_A = dA + (1/2) [W A ^ W A]

with the wedge-bracket evaluated in the per-face representation and
integrated per face.  Tangent vectors keep their 1-form legs in both
representations: edge cochains move configurations, face forms feed every
2-form and metric; the conversions are whitney/unwhitney.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import dec, lie
from .mesh import SurfaceMesh

CONFIG_FORMAT_VERSION = 1

SYSTEMS = ("Flat", "Harmonicity", "Hitchin", "CoupledHarmonic", "CoupledHitchin")


# ---------------------------------------------------------------------------
# configurations and tangent vectors
# ---------------------------------------------------------------------------


@dataclass
class Configuration:
    """A point (J, A, psi) of the discrete configuration space."""

    mesh: SurfaceMesh
    J: np.ndarray  # (F,2,2)
    A: np.ndarray  # (E,3)
    psi: np.ndarray  # (E,3)

    def copy(self) -> "Configuration":
        return Configuration(self.mesh, self.J.copy(), self.A.copy(), self.psi.copy())

    def validate(self) -> None:
        dec.validate_J(self.mesh, self.J)
        if self.A.shape != (self.mesh.ne, 3) or self.psi.shape != (self.mesh.ne, 3):
            raise ValueError("connection/Higgs cochains have wrong shape")

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        mesh_ref = self.mesh.meta or {
            "kind": "raw",
            "nv": self.mesh.nv,
            "genus": self.mesh.genus,
        }
        return {
            "version": CONFIG_FORMAT_VERSION,
            "mesh": mesh_ref,
            "J": self.J.ravel().tolist(),
            "A": self.A.ravel().tolist(),
            "psi": self.psi.ravel().tolist(),
        }

    @staticmethod
    def from_dict(data: dict, mesh: SurfaceMesh | None = None) -> "Configuration":
        if "version" not in data:
            raise ValueError("configuration document lacks a version field")
        if data["version"] != CONFIG_FORMAT_VERSION:
            raise ValueError(f"unsupported configuration version {data['version']}")
        if mesh is None:
            from .mesh import build_surface

            ref = data["mesh"]
            if ref.get("kind") != "builtin":
                raise ValueError("cannot rebuild a non-builtin mesh; pass it explicitly")
            mesh = build_surface(ref["genus"], ref["refinement"])
        J = np.array(data["J"], dtype=float).reshape(mesh.nf, 2, 2)
        A = np.array(data["A"], dtype=float).reshape(mesh.ne, 3)
        psi = np.array(data["psi"], dtype=float).reshape(mesh.ne, 3)
        return Configuration(mesh, J, A, psi)

    def content_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()[:16]


class TangentVector:
    """A variation (Jdot, a, psidot) of a configuration.

    Jdot anticommutes with J per face.  The 1-form legs are kept as face
    forms; when the vector was built from edge cochains those are retained,
    so the vector can also move a configuration without projection loss.
    """

    __slots__ = ("jdot", "a_face", "psidot_face", "a_cochain", "psidot_cochain")

    def __init__(self, jdot, a_face, psidot_face, a_cochain=None, psidot_cochain=None):
        self.jdot = jdot
        self.a_face = a_face
        self.psidot_face = psidot_face
        self.a_cochain = a_cochain
        self.psidot_cochain = psidot_cochain

    @staticmethod
    def from_cochains(mesh: SurfaceMesh, jdot, a, psidot) -> "TangentVector":
        a = np.asarray(a, dtype=float)
        psidot = np.asarray(psidot, dtype=float)
        return TangentVector(
            np.asarray(jdot, dtype=float),
            dec.whitney(mesh, a),
            dec.whitney(mesh, psidot),
            a,
            psidot,
        )

    @staticmethod
    def zero(mesh: SurfaceMesh) -> "TangentVector":
        return TangentVector.from_cochains(
            mesh, np.zeros((mesh.nf, 2, 2)), np.zeros((mesh.ne, 3)), np.zeros((mesh.ne, 3))
        )

    def has_cochains(self) -> bool:
        return self.a_cochain is not None and self.psidot_cochain is not None

    def cochains(self, mesh: SurfaceMesh):
        """Edge-cochain legs (projected via unwhitney when not stored)."""
        a = self.a_cochain if self.a_cochain is not None else dec.unwhitney(mesh, self.a_face)
        p = (
            self.psidot_cochain
            if self.psidot_cochain is not None
            else dec.unwhitney(mesh, self.psidot_face)
        )
        return a, p

    def __add__(self, other: "TangentVector") -> "TangentVector":
        ac = pc = None
        if self.has_cochains() and other.has_cochains():
            ac = self.a_cochain + other.a_cochain
            pc = self.psidot_cochain + other.psidot_cochain
        return TangentVector(
            self.jdot + other.jdot,
            self.a_face + other.a_face,
            self.psidot_face + other.psidot_face,
            ac,
            pc,
        )

    def __sub__(self, other: "TangentVector") -> "TangentVector":
        return self + (other * -1.0)

    def __mul__(self, s: float) -> "TangentVector":
        ac = None if self.a_cochain is None else s * self.a_cochain
        pc = None if self.psidot_cochain is None else s * self.psidot_cochain
        return TangentVector(s * self.jdot, s * self.a_face, s * self.psidot_face, ac, pc)

    __rmul__ = __mul__

    def norm(self, mesh: SurfaceMesh) -> float:
        n2 = np.sum(self.jdot**2) + np.sum(np.abs(self.a_face) ** 2) + np.sum(
            np.abs(self.psidot_face) ** 2
        )
        return float(np.sqrt(n2))


def move(x: Configuration, v: TangentVector, t: float) -> Configuration:
    """x + t v with the J-leg retracted back to J^2 = -1 (normalize by
    sqrt(det); exact first-order contact since Jdot is traceless)."""
    a, p = v.cochains(x.mesh)
    return Configuration(
        x.mesh,
        dec.normalize_J(x.J + t * v.jdot),
        x.A + t * a,
        x.psi + t * p,
    )


def random_tangent(x: Configuration, rng: np.random.Generator, amplitude: float = 1.0):
    """Seeded random cochain tangent vector with anticommuting J-leg."""
    mesh = x.mesh
    jdot = dec.anticommuting_projection(x.J, rng.standard_normal((mesh.nf, 2, 2)))
    return TangentVector.from_cochains(
        mesh,
        amplitude * jdot,
        amplitude * rng.standard_normal((mesh.ne, 3)),
        amplitude * rng.standard_normal((mesh.ne, 3)),
    )


def random_configuration(mesh: SurfaceMesh, rng: np.random.Generator, amplitude: float = 0.5):
    return Configuration(
        mesh,
        dec.random_compatible_J(mesh, rng, amplitude=0.3 * amplitude),
        amplitude * rng.standard_normal((mesh.ne, 3)),
        amplitude * rng.standard_normal((mesh.ne, 3)),
    )


# ---------------------------------------------------------------------------
# curvature and covariant calculus
# ---------------------------------------------------------------------------


def wedge_bracket(mesh: SurfaceMesh, w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    """2-cochain of [w1 ^ w2] for face forms w1, w2 (symmetric in w1, w2)."""
    dens = np.cross(w1[:, 0], w2[:, 1]) - np.cross(w1[:, 1], w2[:, 0])
    return mesh.chart_areas[:, None] * dens


def curvature(mesh: SurfaceMesh, A: np.ndarray) -> np.ndarray:
    """F_A = dA + (1/2)[W A ^ W A] as an algebra-valued 2-cochain."""
    W = dec.whitney(mesh, A)
    return dec.coboundary(mesh, A, 1) + 0.5 * wedge_bracket(mesh, W, W)


def covariant_d(mesh: SurfaceMesh, A: np.ndarray, c: np.ndarray, degree: int) -> np.ndarray:
    """d_A c = dc + [A ^ c].

    Degree 0: the bracket is taken per face against the corner-averaged
    value and projected back to edges (see covariant_d_face for the
    unprojected operator that the codifferential transposes).  Degree 1:
    the wedge-bracket of the face representatives.
    """
    if degree == 0:
        return dec.unwhitney(mesh, covariant_d_face(mesh, A, c))
    if degree == 1:
        WA = dec.whitney(mesh, A)
        Wc = dec.whitney(mesh, c)
        return dec.coboundary(mesh, c, 1) + wedge_bracket(mesh, WA, Wc)
    raise ValueError("covariant_d is defined on degrees 0 and 1 only")


def covariant_d_face(mesh: SurfaceMesh, A: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Face form of d_A u for a 0-cochain u: W(du) + [W A, u_bar] with the
    face-averaged value of u.  This is the operator whose exact adjoint is
    the codifferential."""
    WA = dec.whitney(mesh, A)
    ubar = dec.face_average(mesh, u)
    grad = dec.whitney(mesh, dec.coboundary(mesh, u, 0))
    brk = np.stack([np.cross(WA[:, 0], ubar), np.cross(WA[:, 1], ubar)], axis=1)
    return grad + brk


def codifferential(mesh: SurfaceMesh, J: np.ndarray, A: np.ndarray, psi: np.ndarray):
    """The 0-cochain d_A* psi: exact adjoint of u -> d_A u under the lumped
    degree-0 product and the J-metric face pairing,

        <d_A* psi, u>_0 = integral of B(d_A u ^ J psi)  for all u.

    Assembled by transposition, so the identity holds to round-off.
    """
    W = dec.whitney(mesh, psi)
    M = dec.j_gram(mesh, J)
    # Y = chart_area * M @ W: the pair_j-weighted copy of psi
    Y = mesh.chart_areas[:, None, None] * np.einsum("fxy,fy...->fx...", M, W)
    # edge part: transpose of w -> W(dw)
    T1 = np.zeros((mesh.ne, 3))
    contrib = np.einsum("flx,fxk->flk", mesh.whitney_covectors, Y)
    np.add.at(T1, mesh.face_edges.ravel(), (mesh.face_signs[..., None] * contrib).reshape(-1, 3))
    vec_d = mesh.d0.T @ T1
    # bracket part: B([WA,x], u*Y) = B(u, [Y, WA])
    WA = dec.whitney(mesh, A)
    Z = np.cross(Y[:, 0], WA[:, 0]) + np.cross(Y[:, 1], WA[:, 1])
    vec_b = dec.scatter_face_to_vertex(mesh, Z)
    return (vec_d + vec_b) / mesh.vertex_mass[:, None]


def d_a_jpsi(mesh: SurfaceMesh, J: np.ndarray, A: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """The 2-cochain d_A(J psi), with J psi projected to an edge cochain."""
    jpsi = dec.unwhitney(mesh, dec.apply_J(J, dec.whitney(mesh, psi)))
    return covariant_d(mesh, A, jpsi, 1)


# ---------------------------------------------------------------------------
# the circle correspondence psi <-> phi
# ---------------------------------------------------------------------------


def to_complex(mesh: SurfaceMesh, J: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Complex Higgs field of a unitary one: the (1,0) face form
    phi = (1/2)(i W psi - J W psi), normalized so that to_unitary inverts it.
    """
    W = dec.whitney(mesh, psi)
    return 0.5 * (1j * W - dec.apply_J(J, W))


def to_unitary(mesh: SurfaceMesh, phi: np.ndarray) -> np.ndarray:
    """Unitary Higgs field psi = -i (phi - tau phi) = 2 Im phi, returned as
    an edge cochain (exact inverse of to_complex on the Whitney range)."""
    return dec.unwhitney(mesh, 2.0 * np.imag(phi))


def is_one_zero(mesh: SurfaceMesh, J: np.ndarray, phi: np.ndarray, tol: float = 1e-12) -> bool:
    """Check the (1,0) property phi o J = i phi per face."""
    comp = dec.compose(phi, J)
    return bool(np.abs(comp - 1j * phi).max() <= tol * (1.0 + np.abs(phi).max()))


# ---------------------------------------------------------------------------
# gauge transformations
# ---------------------------------------------------------------------------


def gauge_transform(x: Configuration, g: np.ndarray) -> Configuration:
    """Act by a K-valued vertex field g (2x2 SU(2) matrices, one per vertex).

    Edges transport by the endpoint-averaged adjoint action plus the
    Maurer-Cartan increment on the connection leg:

        A_e -> Ad_avg(A_e) - log(g_head g_tail^{-1}),
        psi_e -> Ad_avg(psi_e).

    Exact conjugation for constant g; first order in the vertex variation
    otherwise.
    """
    mesh = x.mesh
    g = np.asarray(g)
    if g.shape != (mesh.nv, 2, 2):
        raise ValueError("gauge field must be (V,2,2) SU(2) matrices")
    err = np.abs(g @ np.conj(np.swapaxes(g, 1, 2)) - np.eye(2)).max()
    if err > 1e-8:
        raise ValueError("gauge field is not unitary")
    ad = lie.adjoint_matrix(g)  # (V,3,3)
    t, h = mesh.edges[:, 0], mesh.edges[:, 1]
    ad_avg = 0.5 * (ad[t] + ad[h])
    mc = lie.log_su2(g[h] @ np.conj(np.swapaxes(g[t], 1, 2)))
    A = np.einsum("eij,ej->ei", ad_avg, x.A) - mc
    psi = np.einsum("eij,ej->ei", ad_avg, x.psi)
    return Configuration(mesh, x.J.copy(), A, psi)


def gauge_from_algebra(xi: np.ndarray) -> np.ndarray:
    """Vertex field exp(xi) for su(2) coordinates xi of shape (V,3)."""
    return lie.exp_su2(xi)


def complex_gauge_transform(x: Configuration, u: np.ndarray) -> Configuration:
    """Act by g = exp(i u) for an su(2)-coordinate vertex field u: the
    Hermitian directions of the complexified gauge group (the harmonic-
    reduction flow moves along these).  Same edge rule as gauge_transform,
    with the complex adjoint and Maurer-Cartan term; the new (A, psi) are
    the real/imaginary coordinate parts of the transported D."""
    mesh = x.mesh
    g = lie.exp_sl2(1j * np.asarray(u, dtype=complex))
    ad = lie.adjoint_matrix(g, unitary=False)
    t, h = mesh.edges[:, 0], mesh.edges[:, 1]
    ad_avg = 0.5 * (ad[t] + ad[h])
    mc = lie.log_sl2(g[h] @ lie._inv2(g[t]))
    D = x.A + 1j * x.psi
    Dp = np.einsum("eij,ej->ei", ad_avg, D) - mc
    return Configuration(mesh, x.J.copy(), np.real(Dp), np.imag(Dp))


# ---------------------------------------------------------------------------
# residuals of the five systems
# ---------------------------------------------------------------------------


def flat_residual(x: Configuration) -> dict:
    """F_D for the complex connection D = A + i psi."""
    mesh = x.mesh
    D = x.A + 1j * x.psi
    WD = dec.whitney(mesh, D)
    FD = dec.coboundary(mesh, D, 1) + 0.5 * wedge_bracket(mesh, WD, WD)
    return {"F_D": FD}


def harmonicity_residual(x: Configuration) -> dict:
    """F_A - (1/2)[psi^psi], d_A psi, and d_A(J psi) (all 2-cochains; the
    third is the Hodge form of d_A* psi = 0 via *psi = J psi)."""
    mesh = x.mesh
    Wpsi = dec.whitney(mesh, x.psi)
    curv = curvature(mesh, x.A) - 0.5 * wedge_bracket(mesh, Wpsi, Wpsi)
    dpsi = covariant_d(mesh, x.A, x.psi, 1)
    return {
        "curvature": curv,
        "d_psi": dpsi,
        "d_jpsi": d_a_jpsi(mesh, x.J, x.A, x.psi),
    }


def hitchin_residual(x: Configuration) -> dict:
    """F_A - [phi ^ tau phi] and dbar_A phi, with phi = the (1,0) part of
    the unitary Higgs field (complex 2-cochain; on a surface d_A phi has no
    (2,0) part, so d_A phi is the Dolbeault residual)."""
    mesh = x.mesh
    phi = to_complex(mesh, x.J, x.psi)
    WA = dec.whitney(mesh, x.A)
    curv = curvature(mesh, x.A) - np.real(wedge_bracket(mesh, phi, np.conj(phi)))
    phic = dec.unwhitney(mesh, phi)
    dbar = dec.coboundary(mesh, phic, 1) + wedge_bracket(mesh, WA, dec.whitney(mesh, phic))
    return {"curvature": curv, "dbar_phi": dbar}


def _grad_wrt_L(mesh, J, Psi, coeff: float, psi_on_left: bool) -> np.ndarray:
    """Gradient with respect to the raw (F,2,2) matrix field L of

        coeff * integral of B(Psi(J P(L)) ^ Psi)        (psi_on_left)
        coeff * integral of B(Psi ^ Psi(J P(L)))        (otherwise)

    where P is the pointwise projection onto J-anticommuting matrices.  Used
    to transpose Lie-derivative chains in the extended moment maps.
    """
    sign = 1.0 if psi_on_left else -1.0
    # d dens(Q ^ Psi)/dQ[x,k]: x=0 -> +Psi[1,k], x=1 -> -Psi[0,k]
    Z = np.stack([Psi[:, 1], -Psi[:, 0]], axis=1)  # (F,2,3)
    # dens/dM[m,x] = B(Z[x], Psi[m])
    GM = np.einsum("fxk,fmk->fmx", Z, Psi)
    GN = np.einsum("frm,fmx->frx", np.swapaxes(J, 1, 2), GM)
    Jt = np.swapaxes(J, 1, 2)
    GL = 0.5 * (GN + np.einsum("fij,fjk,fkl->fil", Jt, GN, Jt))
    return sign * coeff * mesh.chart_areas[:, None, None] * GL


def _eta_covector_to_vertex(mesh, l_cov: np.ndarray) -> np.ndarray:
    """Riesz vector (lumped masses, mean zero) of f -> sum_f l_cov . eta_f."""
    hmat = dec.hamiltonian_field_matrix(mesh)
    vec = (hmat.T @ l_cov.ravel()) / mesh.vertex_mass
    return dec.mean_zero(mesh, vec)


def coupled_scalar_coupling(x: Configuration) -> np.ndarray:
    """Riesz vector (lumped masses, mean zero) of the alpha-coupling part of
    the extended moment map on the harmonic side,

        kappa(f) = (1/2) d nu (bbJ P(f, 0)),

    with nu = |psi|^2 the squared Higgs norm.  Writing the action explicitly,

        kappa(f) = -<i_eta F_A, psi>_J + (1/2) B(psi ^ psi(J L_eta J)),

    assembled by transposing the exact linear chains f -> eta -> (i_eta F_A,
    L_eta J), so the moment map and the coupled scalar residual are one
    object.
    """
    mesh = x.mesh
    J = x.J
    Psi = dec.whitney(mesh, x.psi)
    M = dec.j_gram(mesh, J)
    Y = mesh.chart_areas[:, None, None] * np.einsum("fxy,fy...->fx...", M, Psi)
    FA = curvature(mesh, x.A)
    densF = FA / mesh.chart_areas[:, None]
    # -pair_j(i_eta F, Psi): i_eta F = (-eta_2 densF, eta_1 densF)
    l1 = np.empty((mesh.nf, 2))
    l1[:, 0] = -np.einsum("fk,fk->f", densF, Y[:, 1])
    l1[:, 1] = np.einsum("fk,fk->f", densF, Y[:, 0])
    # (1/2) B(psi ^ psi(J P(L))): gradient wrt L, then through L = Rec(eta)
    GL = _grad_wrt_L(mesh, J, Psi, 0.5, psi_on_left=False)
    rec = dec.lie_reconstruction_matrix(mesh, J)
    l2 = (rec.T @ GL.ravel()).reshape(mesh.nf, 2)
    return _eta_covector_to_vertex(mesh, l1 + l2)


def residual(system: str, x: Configuration, alpha: float = 0.0, eps: int = 1) -> dict:
    """Left-hand sides of the selected equation system, as named cochains.

    The scalar equations carry the Gauss-Bonnet constant subtracted (via the
    mean-zero projection; the constant is mesh.cc_target).  The coupled
    Hitchin scalar residual has no alpha term: the coupling vanishes
    identically on the Higgs locus.
    """
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}")
    if eps not in (-1, 1):
        raise ValueError("eps must be -1 or +1")
    mesh = x.mesh
    if system == "Flat":
        return flat_residual(x)
    if system == "Harmonicity":
        return harmonicity_residual(x)
    if system == "Hitchin":
        return hitchin_residual(x)
    if system == "CoupledHarmonic":
        res = harmonicity_residual(x)
        S = dec.scalar_curvature(mesh, x.J)
        scalar = eps * dec.mean_zero(mesh, S) - alpha * coupled_scalar_coupling(x)
        return {
            "curvature": res["curvature"],
            "d_psi": res["d_psi"],
            "dstar_psi": codifferential(mesh, x.J, x.A, x.psi),
            "scalar": scalar,
        }
    # CoupledHitchin
    res = hitchin_residual(x)
    S = dec.scalar_curvature(mesh, x.J)
    return {
        "curvature": res["curvature"],
        "dbar_phi": res["dbar_phi"],
        "scalar": eps * dec.mean_zero(mesh, S),
    }


def residual_norms(mesh: SurfaceMesh, res: dict) -> dict:
    """L2-style norm of each residual component plus the total."""
    out = {}
    total = 0.0
    for name, val in res.items():
        val = np.asarray(val)
        if val.shape[0] == mesh.nf:
            n2 = np.sum(np.abs(val) ** 2 / mesh.areas.reshape((mesh.nf,) + (1,) * (val.ndim - 1)))
        else:
            w = mesh.vertex_mass.reshape((mesh.nv,) + (1,) * (val.ndim - 1))
            n2 = np.sum(w * np.abs(val) ** 2)
        out[name] = float(np.sqrt(n2))
        total += float(n2)
    out["total"] = float(np.sqrt(total))
    return out
