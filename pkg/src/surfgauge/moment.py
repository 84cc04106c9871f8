"""Moment maps, infinitesimal actions, adjoints, and the operator L.

The moment maps for the selectors with group parameters (f, u) are stored as
S^0-vectors (vec_f, vec_u) so that

    <mu(x), zeta> = ip0(vec_f, f) + ip0(vec_u, u),

assembled by transposition from the same face-level operators that define
the residuals.  In particular the extended_J moment vector is literally
(-scalar_residual, -alpha * dstar_residual): vanishing of the moment for all
parameters IS the corresponding equations.

The u-part of every action is built per face against the corner-averaged
value of u, matching the transposed assembly; this makes the Hamiltonian
identity <d mu[v], zeta> = omega(zeta . x, v) exact (up to the finite
difference on the left) for pure-gauge parameters.  The f-parts involve the
Hamiltonian vector field and the reconstructed Lie derivative of J, and hold
at first order under refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dec, kahler, lie
from .fields import (
    Configuration,
    TangentVector,
    codifferential,
    coupled_scalar_coupling,
    covariant_d_face,
    curvature,
    flat_residual,
    harmonicity_residual,
    move,
)
from .mesh import SurfaceMesh

SELECTORS = ("flat", "corlette", "scalar", "extended_J", "extended_I")
ACTIONS = ("P", "Pt", "Pc", "Pc0")


@dataclass
class GaugeParameter:
    """Extended gauge-algebra element.

    f: mean-zero real vertex function (Hamiltonian part), u: su(2) vertex
    field.  For the extended complex group (flat selector) the pair
    (y, uc) replaces (f, u): a per-face vector field and a complexified
    vertex field (the A-vertical part of the parameter).
    """

    f: np.ndarray | None = None
    u: np.ndarray | None = None
    y: np.ndarray | None = None
    uc: np.ndarray | None = None

    def validate(self, mesh: SurfaceMesh) -> None:
        if self.f is not None:
            mean = dec.ip0(mesh, self.f, np.ones(mesh.nv))
            if abs(mean) > 1e-10 * (1.0 + float(np.abs(self.f).max())):
                raise ValueError("gauge parameter f must be mean-zero")


def random_parameter(
    mesh: SurfaceMesh,
    rng: np.random.Generator,
    sel: str = "extended_J",
    with_f: bool = True,
    amplitude: float = 1.0,
) -> GaugeParameter:
    if sel == "flat":
        return GaugeParameter(
            y=amplitude * rng.standard_normal((mesh.nf, 2)),
            uc=amplitude * (rng.standard_normal((mesh.nv, 3)) + 1j * rng.standard_normal((mesh.nv, 3))),
        )
    f = dec.mean_zero(mesh, amplitude * rng.standard_normal(mesh.nv)) if with_f else None
    u = amplitude * rng.standard_normal((mesh.nv, 3))
    if sel == "scalar":
        return GaugeParameter(f=f if f is not None else dec.mean_zero(mesh, rng.standard_normal(mesh.nv)))
    if sel == "corlette":
        return GaugeParameter(u=u)
    return GaugeParameter(f=f, u=u)


def vertex_average(mesh: SurfaceMesh, vals: np.ndarray) -> np.ndarray:
    """Mass-weighted vertex average of per-face values (adjoint partner of
    the face average)."""
    tail = (1,) * (np.asarray(vals).ndim - 1)
    weighted = vals * mesh.areas.reshape((mesh.nf,) + tail)
    out = dec.scatter_face_to_vertex(mesh, weighted)
    return out / mesh.vertex_mass.reshape((mesh.nv,) + tail)


# ---------------------------------------------------------------------------
# moment maps
# ---------------------------------------------------------------------------


def moment_vector(sel: str, x: Configuration, alpha: float = 0.0, eps: int = 1):
    """(vec_f, vec_u) with <mu, (f,u)> = ip0(vec_f, f) + ip0(vec_u, u)."""
    mesh = x.mesh
    if sel == "corlette":
        return np.zeros(mesh.nv), -codifferential(mesh, x.J, x.A, x.psi)
    if sel == "scalar":
        return -dec.mean_zero(mesh, dec.scalar_curvature(mesh, x.J)), np.zeros((mesh.nv, 3))
    if sel == "extended_J":
        S = dec.scalar_curvature(mesh, x.J)
        vec_f = -eps * dec.mean_zero(mesh, S) + alpha * coupled_scalar_coupling(x)
        vec_u = -alpha * codifferential(mesh, x.J, x.A, x.psi)
        return vec_f, vec_u
    if sel == "extended_I":
        return _extended_I_vector(x, alpha, eps)
    raise ValueError(f"moment_vector undefined for selector {sel!r}")


def _extended_I_vector(x: Configuration, alpha: float, eps: int):
    """Moment vector of the Hitchin-side extended action, assembled from the
    structural decomposition sigma_I = pi2* omega_I + d lambda:

        <mu, zeta> = -eps int f S omega
                     + alpha Re B(F_D, D zeta) - alpha lambda(P zeta),

    with D zeta = (u + WA(eta)) + i psi(eta) and the exact correction
    1-form lambda(v) = (1/4) B(psi(J Jdot_v) ^ psi).
    """
    from .fields import _eta_covector_to_vertex, _grad_wrt_L

    mesh = x.mesh
    J = x.J
    res = harmonicity_residual(x)
    ReF = res["curvature"]
    dpsi = res["d_psi"]
    WA = dec.whitney(mesh, x.A)
    Psi = dec.whitney(mesh, x.psi)

    vec_u = alpha * dec.scatter_face_to_vertex(mesh, ReF) / mesh.vertex_mass[:, None]

    S = dec.scalar_curvature(mesh, J)
    # Re B(F_D, D zeta)-chain on eta: B(ReF, WA(eta)) - B(Im F_D, psi(eta))
    l_cov = np.einsum("fk,fxk->fx", ReF, WA) - np.einsum("fk,fxk->fx", dpsi, Psi)
    # -lambda(P(f,0)) = +(1/4) B(psi(J P(L_eta J)) ^ psi)
    GL = _grad_wrt_L(mesh, J, Psi, 0.25, psi_on_left=True)
    rec = dec.lie_reconstruction_matrix(mesh, J)
    l_cov = l_cov + (rec.T @ GL.ravel()).reshape(mesh.nf, 2)
    vec_f = -eps * dec.mean_zero(mesh, S) + alpha * _eta_covector_to_vertex(mesh, l_cov)
    return vec_f, vec_u


def moment_eval(sel: str, x: Configuration, zeta: GaugeParameter, alpha: float = 0.0, eps: int = 1):
    """<mu(x), zeta> (complex for the flat selector)."""
    if sel not in SELECTORS:
        raise ValueError(f"unknown selector {sel!r}")
    mesh = x.mesh
    zeta.validate(mesh)
    if sel == "flat":
        if zeta.uc is None and zeta.y is None:
            raise ValueError("flat selector needs a complexified parameter (y, uc)")
        FD = flat_residual(x)["F_D"]
        uc = zeta.uc if zeta.uc is not None else np.zeros((mesh.nv, 3), dtype=complex)
        # uc is the D-vertical part of the parameter, so mu = B(F_D, D zeta)
        # is independent of the covered vector field y.
        return complex(np.sum(FD * dec.face_average(mesh, uc)))
    if zeta.u is not None and zeta.uc is not None:
        raise ValueError("parameter mixes real and complex parts")
    vec_f, vec_u = moment_vector(sel, x, alpha, eps)
    out = 0.0
    if zeta.f is not None:
        out += dec.ip0(mesh, vec_f, zeta.f)
    if zeta.u is not None:
        out += dec.ip0(mesh, vec_u, zeta.u)
    return float(out)


# ---------------------------------------------------------------------------
# infinitesimal actions
# ---------------------------------------------------------------------------


def action_T(x: Configuration, zeta: GaugeParameter) -> GaugeParameter:
    """T(f,u) = (f, u + 2 psi(J eta_f)): the reparametrization with
    Im P-tilde = Im P (invertible; see action_T_inv)."""
    mesh = x.mesh
    if zeta.f is None:
        return GaugeParameter(f=None, u=zeta.u)
    eta = dec.hamiltonian_field(mesh, zeta.f)
    Wpsi = dec.whitney(mesh, x.psi)
    corr = 2.0 * vertex_average(mesh, np.einsum("fxk,fx->fk", Wpsi, _jvec(x.J, eta)))
    u = corr if zeta.u is None else zeta.u + corr
    return GaugeParameter(f=zeta.f, u=u)


def _jvec(J: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pointwise J y for a per-face vector field."""
    return np.einsum("fij,fj->fi", J, y)


def action_T_inv(x: Configuration, zeta: GaugeParameter) -> GaugeParameter:
    mesh = x.mesh
    if zeta.f is None:
        return GaugeParameter(f=None, u=zeta.u)
    eta = dec.hamiltonian_field(mesh, zeta.f)
    Wpsi = dec.whitney(mesh, x.psi)
    corr = 2.0 * vertex_average(mesh, np.einsum("fxk,fx->fk", Wpsi, _jvec(x.J, eta)))
    u = -corr if zeta.u is None else zeta.u - corr
    return GaugeParameter(f=zeta.f, u=u)


def infinitesimal_action(variant: str, x: Configuration, zeta: GaugeParameter) -> TangentVector:
    """The actions P, P-tilde (Pt), and the complex-group actions Pc, Pc0.

    P(f, u) = -(L_eta J, d_A u + i_eta F_A, d_A(i_eta psi) + [psi, u]);
    Pt = P o T.  Pc is zeta.D = -d_D(D zeta) - i_y F_D in the A-split
    parametrization D zeta = uc + i psi(y); Pc0 is the Higgs-complex action.
    The 1-form legs are face forms (the u-brackets against corner averages),
    which is what makes the pure-gauge Hamiltonian identities exact.
    """
    if variant not in ACTIONS:
        raise ValueError(f"unknown action variant {variant!r}")
    mesh = x.mesh
    J = x.J
    zeta.validate(mesh)
    Wpsi = dec.whitney(mesh, x.psi)
    zero_face = np.zeros((mesh.nf, 2, 3))
    zero_j = np.zeros((mesh.nf, 2, 2))

    if variant == "Pc":
        # zeta . D = -d_D(D zeta) - i_y F_D, with uc the D-vertical part
        y = zeta.y if zeta.y is not None else np.zeros((mesh.nf, 2))
        uc = zeta.uc if zeta.uc is not None else np.zeros((mesh.nv, 3), dtype=complex)
        jd = -_lie_term(mesh, y, J) if zeta.y is not None else zero_j
        D = x.A + 1j * x.psi
        dD = covariant_d_face(mesh, D, uc)
        FD = flat_residual(x)["F_D"]
        tot = -(dD + dec.contract_two_form(mesh, FD, y))
        return TangentVector(jd, np.real(tot), np.imag(tot))

    if variant == "Pc0":
        y = zeta.y if zeta.y is not None else np.zeros((mesh.nf, 2))
        uc = zeta.uc if zeta.uc is not None else np.zeros((mesh.nv, 3), dtype=complex)
        u0, u1 = np.real(uc), np.imag(uc)
        jd = -_lie_term(mesh, y, J) if zeta.y is not None else zero_j
        FA = curvature(mesh, x.A)
        a = -(
            covariant_d_face(mesh, x.A, u0)
            + dec.apply_J(J, covariant_d_face(mesh, x.A, u1))
            + dec.contract_two_form(mesh, FA, y)
        )
        u0b = dec.face_average(mesh, u0)
        u1b = dec.face_average(mesh, u1)
        dpsi = harmonicity_residual(x)["d_psi"]
        p = -(
            np.stack([np.cross(u0b, Wpsi[:, 0]), np.cross(u0b, Wpsi[:, 1])], axis=1)
            + _bracket_face(u1b, dec.apply_J(J, Wpsi))
            + dec.contract_two_form(mesh, dpsi, y)
        )
        return TangentVector(jd, a, p)

    # P / Pt
    zz = action_T(x, zeta) if variant == "Pt" else zeta
    f = zz.f
    u = zz.u
    jd = zero_j
    a = zero_face.copy()
    p = zero_face.copy()
    if u is not None:
        ub = dec.face_average(mesh, u)
        a = a - covariant_d_face(mesh, x.A, u)
        p = p - _bracket_face(ub, Wpsi)
    if f is not None and np.abs(f).max() > 0:
        eta = dec.hamiltonian_field(mesh, f)
        jd = -dec.anticommuting_projection(J, dec.lie_derivative_J(mesh, eta, J))
        FA = curvature(mesh, x.A)
        a = a - dec.contract_two_form(mesh, FA, eta)
        psi_eta = vertex_average(mesh, np.einsum("fxk,fx->fk", Wpsi, eta))
        p = p - covariant_d_face(mesh, x.A, psi_eta)
    return TangentVector(jd, a, p)


def _bracket_face(ub: np.ndarray, W: np.ndarray) -> np.ndarray:
    """[W, ub] per face for a face form W and per-face algebra value ub."""
    return np.stack([np.cross(W[:, 0], ub), np.cross(W[:, 1], ub)], axis=1)


def _lie_term(mesh, y, J):
    return dec.anticommuting_projection(J, dec.lie_derivative_J(mesh, y, J))


# ---------------------------------------------------------------------------
# finite differences of moments, adjoints, the operator L
# ---------------------------------------------------------------------------


def fd_moment_derivative(
    sel, x: Configuration, zeta: GaugeParameter, v: TangentVector, alpha=0.0, eps=1, h=1e-4, use_richardson=True
):
    """Central-difference directional derivative of moment_eval along v,
    with one Richardson halving; the step is scaled so the configuration
    perturbation has size ~h."""
    scale = h / (1.0 + v.norm(x.mesh))

    def val(hh):
        p = moment_eval(sel, move(x, v, hh), zeta, alpha, eps)
        m = moment_eval(sel, move(x, v, -hh), zeta, alpha, eps)
        return (p - m) / (2 * hh)

    if use_richardson:
        return (4.0 * val(scale / 2) - val(scale)) / 3.0
    return val(scale)


def hamiltonian_check(
    sel: str,
    x: Configuration,
    zeta: GaugeParameter,
    v: TangentVector,
    alpha: float = 0.0,
    eps: int = 1,
    h: float = 1e-4,
) -> dict:
    """FD check of <d mu(x)[v], zeta> = omega(zeta . x, v).

    Pure-gauge parameters (f = 0) with vertical v pass at round-off plus FD
    error; parameters with f != 0 involve the reconstructed Lie derivative
    and converge at first order under refinement.  The corlette selector is
    the fibrewise statement: v should be vertical.

    The flat parameter is labelled by its D-vertical part uc, which drifts
    as D moves: holding the group element fixed means d(D zeta) = (W Ddot)(y),
    so that term is added to the parametrized derivative.  With it the flat
    identity is exact for every (y, uc) and every v.
    """
    lhs = fd_moment_derivative(sel, x, zeta, v, alpha, eps, h)
    if sel == "flat":
        if zeta.y is not None:
            FD = flat_residual(x)["F_D"]
            WDdot = v.a_face + 1j * v.psidot_face
            lhs = lhs + complex(
                np.sum(FD * np.einsum("fxk,fx->fk", WDdot, zeta.y))
            )
        act = infinitesimal_action("Pc", x, zeta)
    elif sel == "scalar":
        eta = dec.hamiltonian_field(x.mesh, zeta.f)
        act = TangentVector(
            -_lie_term(x.mesh, eta, x.J),
            np.zeros((x.mesh.nf, 2, 3)),
            np.zeros((x.mesh.nf, 2, 3)),
        )
    else:
        act = infinitesimal_action("P", x, zeta)
    rhs = kahler.eval_form(kahler.form_for_moment(sel), x, act, v, alpha, eps)
    err = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs), 1e-12)
    return {"selector": sel, "lhs": lhs, "rhs": rhs, "abs_error": err, "rel_error": err / scale}


def equivariance_check(sel, x: Configuration, g: np.ndarray, zeta: GaugeParameter, alpha=0.0, eps=1):
    """|mu(g x, Ad_g zeta) - mu(x, zeta)| for a constant gauge rotation."""
    from .fields import gauge_transform

    mesh = x.mesh
    gfield = np.broadcast_to(g, (mesh.nv, 2, 2)).copy()
    gx = gauge_transform(x, gfield)
    ad = lie.adjoint_matrix(g)
    z2 = GaugeParameter(
        f=None if zeta.f is None else zeta.f.copy(),
        u=None if zeta.u is None else zeta.u @ ad.T,
        y=None if zeta.y is None else zeta.y.copy(),
        uc=None if zeta.uc is None else zeta.uc @ ad.T,
    )
    a = moment_eval(sel, gx, z2, alpha, eps)
    b = moment_eval(sel, x, zeta, alpha, eps)
    return abs(a - b)


def action_T_transpose(x: Configuration, vec_f: np.ndarray, vec_u: np.ndarray):
    """Transpose of T(f,u) = (f, u + 2 psi(J eta_f)) under ip0: the
    f-component picks up the eta-chain of the u-covector."""
    from .fields import _eta_covector_to_vertex

    mesh = x.mesh
    Psi = dec.whitney(mesh, x.psi)
    cbar = dec.face_average(mesh, vec_u)
    # functional on f: 2 sum_f area B(Psi(J eta_f), cbar_f)
    row = 2.0 * mesh.areas[:, None] * np.einsum("fxk,fk->fx", Psi, cbar)
    l_cov = np.einsum("fx,fxy->fy", row, x.J)
    return vec_f + _eta_covector_to_vertex(mesh, l_cov), vec_u


def adjoint_action(
    family: str,
    x: Configuration,
    alpha: float,
    eps: int,
    v: TangentVector,
    h: float = 1e-4,
):
    """Formal adjoint via the moment map's derivative along the rotated
    vector: the S^0-vector of d mu(x)[S v], where S is the family's total
    structure.

    By the Hamiltonian identity this is the adjoint of the unmodified
    action P; the J family returns the adjoint of the modified action
    Pt = P o T by composing with T's transpose, so that
    ip0(adjoint(v), zeta) = g_{alpha,eps}(v, Pt zeta) for the J family and
    = g(v, P zeta) for the I family, to FD accuracy.
    """
    sel = "extended_J" if family == "J" else "extended_I"
    struct = "total_J" if family == "J" else "total_I"
    sv = kahler.apply_structure(struct, x, v)
    mesh = x.mesh
    scale = h / (1.0 + sv.norm(mesh))

    def vecs(hh):
        fp, up = moment_vector(sel, move(x, sv, hh), alpha, eps)
        fm, um = moment_vector(sel, move(x, sv, -hh), alpha, eps)
        return (fp - fm) / (2 * hh), (up - um) / (2 * hh)

    f1, u1 = vecs(scale)
    f2, u2 = vecs(scale / 2)
    vec_f, vec_u = (4 * f2 - f1) / 3.0, (4 * u2 - u1) / 3.0
    if family == "J":
        return action_T_transpose(x, vec_f, vec_u)
    return vec_f, vec_u


# -- S^0 coordinates ----------------------------------------------------------


class S0Basis:
    """ip0-orthonormal coordinates on S^0 = meanzero functions + su(2) fields."""

    def __init__(self, mesh: SurfaceMesh):
        self.mesh = mesh
        m = mesh.vertex_mass
        z = np.eye(mesh.nv) - np.outer(np.ones(mesh.nv), m) / mesh.total_volume
        q, r = np.linalg.qr(np.sqrt(m)[:, None] * z)
        keep = np.abs(np.diag(r)) > 1e-10
        self.qf = q[:, keep]  # (V, V-1), orthonormal in R^V
        self.sqrt_m = np.sqrt(m)
        self.dim_f = self.qf.shape[1]
        self.dim = self.dim_f + 3 * mesh.nv

    def pack(self, vec_f: np.ndarray, vec_u: np.ndarray) -> np.ndarray:
        cf = self.qf.T @ (self.sqrt_m * vec_f)
        cu = (self.sqrt_m[:, None] * vec_u).ravel()
        return np.concatenate([cf, cu])

    def unpack(self, c: np.ndarray) -> GaugeParameter:
        f = (self.qf @ c[: self.dim_f]) / self.sqrt_m
        u = (c[self.dim_f :].reshape(self.mesh.nv, 3)) / self.sqrt_m[:, None]
        return GaugeParameter(f=dec.mean_zero(self.mesh, f), u=u)


def operator_script_L(
    family: str,
    x: Configuration,
    alpha: float,
    eps: int,
    cap: int = 3000,
) -> dict:
    """Dense matrix of L = Pt* Pt (J family) / P*_{alpha,eps} P (I family)
    on ip0-orthonormal S^0 coordinates, with singular values and the
    numerical kernel at threshold 1e-8 * sigma_max.

    Columns are assembled as adjoint o action with the adjoint realized by
    exact transposition against the metric Gram (the finite-difference
    adjoint_action agrees to its tier but would pollute the symmetry of the
    Hamiltonian-function block, which is refinement-limited on coarse
    meshes).
    """
    from . import solve as _solve

    mesh = x.mesh
    basis = S0Basis(mesh)
    if basis.dim > cap:
        raise ValueError(f"S^0 dimension {basis.dim} exceeds cap {cap}")
    jb = dec.anticommuting_basis(mesh, x.J)
    P, s0 = _solve.action_matrix(family, x, jb)
    G = _solve.form_gram(family, x, alpha, eps, jb)
    L = P.T @ G @ P
    s = np.linalg.svd(L, compute_uv=False)
    thresh = 1e-8 * s[0]
    sym = np.linalg.norm(L - L.T) / max(np.linalg.norm(L), 1e-30)
    return {
        "matrix": L,
        "basis": s0,
        "singular_values": s,
        "kernel_dim": int(np.sum(s < thresh)),
        "threshold": thresh,
        "symmetry": float(sym),
    }


def kernel_report_json(family: str, rep: dict) -> dict:
    """JSON-ready kernel report: selector, tolerances, singular values."""
    return {
        "selector": family,
        "kernel_dim": rep["kernel_dim"],
        "threshold": float(rep["threshold"]),
        "symmetry": rep["symmetry"],
        "singular_values": [float(v) for v in rep["singular_values"]],
    }
