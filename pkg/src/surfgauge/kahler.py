"""Complex structures, 2-forms, and metrics on the configuration space.

Every formula here is per-face algebra in the face-form representation, so
the algebraic identities (quaternion relations, fibre restrictions, the
g/omega compatibility g(v,w) = omega(v, Sw)) hold to round-off.  Checks that
differentiate along the configuration space (dd^c potentials, closedness,
Ehresmann curvature commutators, Nijenhuis tensors) use central finite
differences on the reduced face state (J, W psi): none of the 2-forms
depends on the connection or on edge representatives, so moving the face
state is projection-free and leaves only the differencing error, halved
once by a Richardson step where requested.

Conventions: for a total or fibre structure S the metric is
g(v, w) = omega(v, S w); the fibre triple is

    I(a, pd) = (J a, -J pd),   J(a, pd) = (-pd, a),   K = I J,

and the total structures are bbJ(Jd, a, pd) = (J Jd, -pd, a) and
bbI(Jd, a, pd) = (J Jd, J a, -J pd + psi(Jd)).
"""

from __future__ import annotations

import numpy as np

from . import dec
from .fields import Configuration, TangentVector
from .mesh import SurfaceMesh

STRUCTURES = ("fibre_I", "fibre_J", "fibre_K", "total_J", "total_I")

FORMS = (
    "omega_I",
    "omega_J",
    "omega_K",
    "Omega_J_complex",
    "fujiki",
    "sigma_J",
    "sigma_J_adapted",
    "sigma_I",
    "coupled_J",
    "coupled_I",
    "pi2_omega_A",
    "omega_J_moduli",
    "omega_I_moduli",
    "hk_metric",
    "g_fujiki",
    "g_coupled_J",
    "g_coupled_I",
)

_COUPLED = ("coupled_J", "coupled_I", "g_coupled_J", "g_coupled_I", "omega_J_moduli", "omega_I_moduli")


def _mm(a, b):
    return np.einsum("fij,fjk->fik", a, b)


# ---------------------------------------------------------------------------
# structures
# ---------------------------------------------------------------------------


def _structure_core(sel, mesh, J, Psi, v: TangentVector) -> TangentVector:
    if sel == "fibre_I":
        return TangentVector(
            np.zeros_like(v.jdot), dec.apply_J(J, v.a_face), -dec.apply_J(J, v.psidot_face)
        )
    if sel == "fibre_J":
        return TangentVector(
            np.zeros_like(v.jdot),
            -v.psidot_face,
            v.a_face,
            None if v.psidot_cochain is None else -v.psidot_cochain,
            v.a_cochain,
        )
    if sel == "fibre_K":
        return TangentVector(
            np.zeros_like(v.jdot), -dec.apply_J(J, v.psidot_face), -dec.apply_J(J, v.a_face)
        )
    if sel == "total_J":
        return TangentVector(
            _mm(J, v.jdot),
            -v.psidot_face,
            v.a_face,
            None if v.psidot_cochain is None else -v.psidot_cochain,
            v.a_cochain,
        )
    if sel == "total_I":
        return TangentVector(
            _mm(J, v.jdot),
            dec.apply_J(J, v.a_face),
            -dec.apply_J(J, v.psidot_face) + dec.compose(Psi, v.jdot),
        )
    raise ValueError(f"unknown structure {sel!r}")


def apply_structure(sel: str, x: Configuration, v: TangentVector) -> TangentVector:
    """Apply a fibre or total complex structure to a tangent vector.

    Fibre selectors require a vertical vector (Jdot = 0).  fibre_J and
    total_J permute legs and preserve stored cochains; the I/K actions are
    per-face and return face-form legs.
    """
    if sel not in STRUCTURES:
        raise ValueError(f"unknown structure {sel!r}")
    if sel.startswith("fibre") and np.any(v.jdot != 0.0):
        raise ValueError("fibre structures act on vertical vectors (Jdot = 0)")
    return _structure_core(sel, x.mesh, x.J, dec.whitney(x.mesh, x.psi), v)


# ---------------------------------------------------------------------------
# forms and metrics
# ---------------------------------------------------------------------------


def _fujiki(mesh, J, j1, j2, with_J=True):
    if with_J:
        tr = np.einsum("fij,fjk,fki->f", J, j1, j2)
    else:
        tr = np.einsum("fij,fji->f", j1, j2)
    return 0.5 * float(np.sum(mesh.areas * tr))


def _form_core(sel, mesh, J, Psi, v1, v2, alpha, eps):
    a1, p1 = v1.a_face, v1.psidot_face
    a2, p2 = v2.a_face, v2.psidot_face
    j1, j2 = v1.jdot, v2.jdot

    def pear(u, w):
        return dec.pair_integral(mesh, u, w)

    def pj(u, w):
        return dec.pair_j(mesh, J, u, w)

    if sel in _COUPLED:
        if eps not in (-1, 1):
            raise ValueError("eps must be -1 or +1")
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")

    if sel == "omega_I":
        return pear(a1, a2) - pear(p1, p2)
    if sel == "omega_J":
        return pj(a1, p2) - pj(p1, a2)
    if sel == "omega_K":
        return -pear(a1, p2) - pear(p1, a2)
    if sel == "Omega_J_complex":
        return complex(pear(a1 + 1j * p1, a2 + 1j * p2))
    if sel == "fujiki":
        return _fujiki(mesh, J, j1, j2, with_J=True)
    if sel == "g_fujiki":
        return _fujiki(mesh, J, j1, j2, with_J=False)
    if sel == "pi2_omega_A":
        return pear(a1, a2)
    if sel == "hk_metric":
        return pj(a1, a2) + pj(p1, p2)

    psi_j1 = dec.compose(Psi, j1)
    psi_j2 = dec.compose(Psi, j2)

    if sel == "sigma_J":
        jp1 = dec.apply_J(J, p1)
        jp2 = dec.apply_J(J, p2)
        return (
            pear(a1, jp2 - psi_j2)
            - pear(a2, jp1 - psi_j1)
            - pear(jp1 - 0.5 * psi_j1, psi_j2)
            + pear(jp2 - 0.5 * psi_j2, psi_j1)
        )
    if sel == "sigma_J_adapted":
        jpsi = dec.apply_J(J, Psi)
        b1 = a1 - psi_j1
        b2 = a2 - psi_j2
        c1 = p1 - dec.compose(jpsi, j1)
        c2 = p2 - dec.compose(jpsi, j2)
        return pj(b1, c2) - pj(c1, b2) - pear(psi_j1, psi_j2)
    if sel == "sigma_I":
        q1 = p1 + 0.5 * dec.compose(Psi, _mm(J, j1))
        q2 = p2 + 0.5 * dec.compose(Psi, _mm(J, j2))
        return pear(a1, a2) - pear(q1, q2) - 0.25 * pear(psi_j1, psi_j2)
    if sel == "coupled_J":
        return eps * _fujiki(mesh, J, j1, j2) + alpha * _form_core(
            "sigma_J", mesh, J, Psi, v1, v2, alpha, eps
        )
    if sel == "coupled_I":
        return eps * _fujiki(mesh, J, j1, j2) + alpha * _form_core(
            "sigma_I", mesh, J, Psi, v1, v2, alpha, eps
        )
    if sel == "omega_J_moduli":
        return eps * _fujiki(mesh, J, j1, j2) + alpha * _form_core(
            "sigma_J_adapted", mesh, J, Psi, v1, v2, alpha, eps
        )
    if sel == "omega_I_moduli":
        pjj1 = dec.compose(Psi, _mm(J, j1))
        pjj2 = dec.compose(Psi, _mm(J, j2))
        return eps * _fujiki(mesh, J, j1, j2) + alpha * (
            pear(a1, a2)
            - pear(p1, p2)
            - 0.5 * pear(pjj1, p2)
            - 0.5 * pear(p1, pjj2)
            - 0.5 * pear(psi_j1, psi_j2)
        )
    if sel == "g_coupled_J":
        jpsi = dec.apply_J(J, Psi)
        b1 = a1 - psi_j1
        b2 = a2 - psi_j2
        c1 = p1 - dec.compose(jpsi, j1)
        c2 = p2 - dec.compose(jpsi, j2)
        return eps * _fujiki(mesh, J, j1, j2, with_J=False) + alpha * (
            pj(b1, b2) + pj(c1, c2) - pj(psi_j1, psi_j2)
        )
    if sel == "g_coupled_I":
        q1 = p1 + 0.5 * dec.compose(Psi, _mm(J, j1))
        q2 = p2 + 0.5 * dec.compose(Psi, _mm(J, j2))
        return eps * _fujiki(mesh, J, j1, j2, with_J=False) + alpha * (
            pj(a1, a2) + pj(q1, q2) - 0.25 * pj(psi_j1, psi_j2)
        )
    raise ValueError(f"unknown form selector {sel!r}")


def eval_form(sel, x: Configuration, v1, v2, alpha: float = 0.0, eps: int = 1):
    """Evaluate a 2-form or metric selector at x on a pair of tangents."""
    return _form_core(sel, x.mesh, x.J, dec.whitney(x.mesh, x.psi), v1, v2, alpha, eps)


def form_for_moment(sel: str) -> str:
    """Symplectic form paired with each moment selector."""
    return {
        "flat": "Omega_J_complex",
        "corlette": "omega_J",
        "scalar": "fujiki",
        "extended_J": "coupled_J",
        "extended_I": "coupled_I",
    }[sel]


# ---------------------------------------------------------------------------
# horizontal / vertical splitting and Ehresmann curvature
# ---------------------------------------------------------------------------


def _horizontal_core(family, mesh, J, Psi, v: TangentVector):
    if family == "J":
        ha = dec.compose(Psi, v.jdot)
        hp = dec.compose(dec.apply_J(J, Psi), v.jdot)
    elif family == "I":
        ha = np.zeros_like(v.a_face)
        hp = -0.5 * dec.compose(Psi, _mm(J, v.jdot))
    else:
        raise ValueError("family must be 'J' or 'I'")
    horizontal = TangentVector(v.jdot, ha, hp)
    vertical = TangentVector(np.zeros_like(v.jdot), v.a_face - ha, v.psidot_face - hp)
    return horizontal, vertical


def horizontal_project(family: str, x: Configuration, v: TangentVector):
    """Split v into (horizontal, vertical) for the family's connection:
    H^J = {(Jd, psi(Jd), (J psi)(Jd))},  H^I = {(Jd, 0, -psi(J Jd)/2)}."""
    return _horizontal_core(family, x.mesh, x.J, dec.whitney(x.mesh, x.psi), v)


def horizontal_lift(family: str, x: Configuration, jdot: np.ndarray) -> TangentVector:
    zeros = np.zeros((x.mesh.nf, 2, 3))
    h, _ = horizontal_project(family, x, TangentVector(jdot, zeros, zeros.copy()))
    return h


def vertical_project(family: str, x: Configuration, v: TangentVector) -> TangentVector:
    return horizontal_project(family, x, v)[1]


def ehresmann_curvature_closed(family: str, x: Configuration, jdot1, jdot2) -> TangentVector:
    """Closed-form connection curvature.

    J family: (0, (J psi)([Jd2, Jd1]), 0) = (0, psi(J [Jd1, Jd2]), 0); the
    J-twist on psi is the one the commutator of horizontal lifts actually
    produces (and the one the existence proof uses).  I family:
    (0, 0, psi([Jd1, Jd2])/4).
    """
    mesh = x.mesh
    Psi = dec.whitney(mesh, x.psi)
    comm = _mm(jdot1, jdot2) - _mm(jdot2, jdot1)
    zero = np.zeros((mesh.nf, 2, 3))
    if family == "J":
        return TangentVector(
            np.zeros((mesh.nf, 2, 2)), dec.compose(Psi, _mm(x.J, comm)), zero
        )
    if family == "I":
        return TangentVector(np.zeros((mesh.nf, 2, 2)), zero, 0.25 * dec.compose(Psi, comm))
    raise ValueError("family must be 'J' or 'I'")


# ---------------------------------------------------------------------------
# face-state finite differences
# ---------------------------------------------------------------------------


class FaceState:
    """Reduced state (J, Psi = W psi): everything the forms depend on.
    Face-state moves are exact, so FD checks see only differencing error."""

    __slots__ = ("mesh", "J", "Psi")

    def __init__(self, mesh: SurfaceMesh, J: np.ndarray, Psi: np.ndarray):
        self.mesh = mesh
        self.J = J
        self.Psi = Psi

    @staticmethod
    def of(x: Configuration) -> "FaceState":
        return FaceState(x.mesh, x.J, dec.whitney(x.mesh, x.psi))

    def move(self, v: TangentVector, t: float) -> "FaceState":
        return FaceState(
            self.mesh, dec.normalize_J(self.J + t * v.jdot), self.Psi + t * v.psidot_face
        )

    def transport(self, v: TangentVector) -> TangentVector:
        """Constant extension: same 1-form legs, J-leg re-projected to
        anticommute with this state's J."""
        return TangentVector(
            dec.anticommuting_projection(self.J, v.jdot), v.a_face, v.psidot_face
        )

    def form(self, sel, v1, v2, alpha=0.0, eps=1):
        return _form_core(sel, self.mesh, self.J, self.Psi, v1, v2, alpha, eps)

    def structure(self, sel, v):
        return _structure_core(sel, self.mesh, self.J, self.Psi, v)

    def horizontal_lift(self, family, jdot) -> TangentVector:
        zeros = np.zeros((self.mesh.nf, 2, 3))
        jd = dec.anticommuting_projection(self.J, jdot)
        h, _ = _horizontal_core(family, self.mesh, self.J, self.Psi, TangentVector(jd, zeros, zeros.copy()))
        return h

    def vertical(self, family, v) -> TangentVector:
        return _horizontal_core(family, self.mesh, self.J, self.Psi, v)[1]


def _fd_scale(state: FaceState) -> float:
    return 1.0 + float(np.abs(state.Psi).max()) + 1.0


def fd_bracket(state: FaceState, field1, field2, h: float) -> TangentVector:
    """Lie bracket [V1, V2](state) of two tangent-vector fields given as
    callables state -> TangentVector, by central differences of the fields
    along each other's values."""
    v1 = field1(state)
    v2 = field2(state)

    def d_along(field, w):
        p = field(state.move(w, h))
        m = field(state.move(w, -h))
        return (p - m) * (1.0 / (2 * h))

    return d_along(field2, v1) - d_along(field1, v2)


def richardson(eval_at_h, h: float):
    """One Richardson step for a central-difference quantity f(h) with
    leading error O(h^2): (4 f(h/2) - f(h)) / 3."""
    return (4.0 * eval_at_h(h / 2.0) - eval_at_h(h)) / 3.0


# -- potentials -------------------------------------------------------------


def norm_psi_sq(state: FaceState) -> float:
    """nu = |psi|_L2^2 = integral of B(psi ^ J psi)."""
    return float(dec.pair_j(state.mesh, state.J, state.Psi, state.Psi))


def d_nu(state: FaceState, v: TangentVector) -> float:
    """Exact directional derivative of nu: 2 <psidot, psi>_J - B(psi ^ psi(Jdot))."""
    mesh = state.mesh
    t1 = 2.0 * dec.pair_j(mesh, state.J, v.psidot_face, state.Psi)
    t2 = dec.pair_integral(mesh, state.Psi, dec.compose(state.Psi, v.jdot))
    return float(t1 - t2)


def dc_nu(state: FaceState, v: TangentVector, structure: str) -> float:
    """d^c nu (v) = -d nu (S v) for the chosen total structure."""
    return -d_nu(state, state.structure(structure, v))


def ddc_nu(
    state: FaceState,
    v1: TangentVector,
    v2: TangentVector,
    structure: str = "total_J",
    h: float = 1e-4,
    use_richardson: bool = True,
) -> float:
    """dd^c nu (v1, v2) via v1(dc(V2)) - v2(dc(V1)) - dc([V1, V2]) with
    constant extensions V_i; only the J-leg projection makes the bracket
    nonzero."""

    def field(v):
        return lambda s: s.transport(v)

    def value(hh):
        def deriv(va, vb):
            p = state.move(va, hh)
            m = state.move(va, -hh)
            return (dc_nu(p, p.transport(vb), structure) - dc_nu(m, m.transport(vb), structure)) / (
                2 * hh
            )

        br = fd_bracket(state, field(v1), field(v2), hh)
        return deriv(v1, v2) - deriv(v2, v1) - dc_nu(state, br, structure)

    hh = h * _fd_scale(state)
    return richardson(value, hh) if use_richardson else value(hh)


def potential_and_ddc(
    x: Configuration,
    which: str,
    v1: TangentVector,
    v2: TangentVector,
    alpha: float = 0.0,
    eps: int = 1,
    h: float = 1e-4,
) -> dict:
    """Compare a claimed potential identity against the explicit formulas.

    which = 'sigma_J-potential':     sigma_J = (1/2) dd^c_J nu
    which = 'sigma_I-decomposition': sigma_I = pi2*omega_A + (1/4) dd^c_I nu
    which = 'Phi':                   coupled_J - eps fujiki = (alpha/2) dd^c_J nu
    """
    state = FaceState.of(x)
    if which == "sigma_J-potential":
        lhs = state.form("sigma_J", v1, v2)
        rhs = 0.5 * ddc_nu(state, v1, v2, "total_J", h)
    elif which == "sigma_I-decomposition":
        lhs = state.form("sigma_I", v1, v2) - state.form("pi2_omega_A", v1, v2)
        rhs = 0.25 * ddc_nu(state, v1, v2, "total_I", h)
    elif which == "Phi":
        if alpha <= 0:
            raise ValueError("Phi check needs alpha > 0")
        lhs = state.form("coupled_J", v1, v2, alpha, eps) - eps * state.form("fujiki", v1, v2)
        rhs = 0.5 * alpha * ddc_nu(state, v1, v2, "total_J", h)
    else:
        raise ValueError(f"unknown potential check {which!r}")
    scale = max(abs(lhs), abs(rhs), 1e-14)
    import hashlib

    ih = hashlib.sha256(
        np.concatenate([x.J.ravel(), x.psi.ravel(), v1.jdot.ravel(), v2.jdot.ravel()]).tobytes()
    ).hexdigest()[:12]
    return {
        "selector": which,
        "which": which,
        "inputs_hash": ih,
        "value": float(lhs),
        "oracle": float(rhs),
        "abs_error": float(abs(lhs - rhs)),
        "rel_error": float(abs(lhs - rhs) / scale),
        "tier": "finite-difference",
    }


# -- closedness, curvature commutator, Kaehler-fibration identity ------------


def form_closedness(
    x: Configuration,
    sel: str,
    v1: TangentVector,
    v2: TangentVector,
    v3: TangentVector,
    alpha: float = 0.0,
    eps: int = 1,
    h: float = 1e-4,
) -> float:
    """d sigma (v1,v2,v3) for constant extensions, by central differences;
    vanishes to FD tolerance for the closed selectors."""
    state = FaceState.of(x)
    vs = (v1, v2, v3)

    def field(v):
        return lambda s: s.transport(v)

    def value(hh):
        total = 0.0
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            p = state.move(vs[i], hh)
            m = state.move(vs[i], -hh)
            dterm = (
                p.form(sel, p.transport(vs[j]), p.transport(vs[k]), alpha, eps)
                - m.form(sel, m.transport(vs[j]), m.transport(vs[k]), alpha, eps)
            ) / (2 * hh)
            br = fd_bracket(state, field(vs[i]), field(vs[j]), hh)
            bterm = state.form(sel, br, vs[k], alpha, eps)
            total += dterm - bterm
        return total

    return richardson(value, h * _fd_scale(state))


def ehresmann_curvature(
    family: str,
    x: Configuration,
    jdot1: np.ndarray,
    jdot2: np.ndarray,
    h: float = 1e-4,
) -> dict:
    """Closed-form curvature and its finite-difference commutator check:
    F(v1, v2) = -Gamma [V1, V2] for the horizontal-lift fields V_i."""
    state = FaceState.of(x)
    closed = ehresmann_curvature_closed(family, x, jdot1, jdot2)

    def field(jd):
        return lambda s: s.horizontal_lift(family, jd)

    def value_vec(hh):
        br = fd_bracket(state, field(jdot1), field(jdot2), hh)
        return state.vertical(family, br) * -1.0

    hh = h * (1.0 + float(np.abs(jdot1).max() + np.abs(jdot2).max()))
    v_h = value_vec(hh)
    v_h2 = value_vec(hh / 2.0)
    fd = (v_h2 * (4.0 / 3.0)) + (v_h * (-1.0 / 3.0))
    diff = fd - closed
    scale = max(closed.norm(x.mesh), 1e-14)
    return {
        "closed": closed,
        "fd": fd,
        "abs_error": diff.norm(x.mesh),
        "rel_error": diff.norm(x.mesh) / scale,
    }


def kfib_identity_residual(
    family: str,
    x: Configuration,
    jdot1: np.ndarray,
    jdot2: np.ndarray,
    w: TangentVector,
    alpha_form: str | None = None,
    h: float = 1e-4,
) -> float:
    """Residual of omega_hat(F(v1,v2), Gamma w) = -d(sigma(v1^G, v2^G))(Gamma w)
    on a probe w, both sides by the face-state machinery."""
    state = FaceState.of(x)
    fib = "omega_J" if family == "J" else "omega_I"
    sigma = "sigma_J" if family == "J" else "sigma_I"
    F = ehresmann_curvature_closed(family, x, jdot1, jdot2)
    gw = state.vertical(family, state.transport(w))
    lhs = state.form(fib, F, gw)

    def value(hh):
        p = state.move(gw, hh)
        m = state.move(gw, -hh)

        def sig(s):
            h1 = s.horizontal_lift(family, jdot1)
            h2 = s.horizontal_lift(family, jdot2)
            return s.form(sigma, h1, h2)

        return (sig(p) - sig(m)) / (2 * hh)

    rhs = -richardson(value, h * _fd_scale(state))
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-12)


# -- Nijenhuis tensor of the total-I structure --------------------------------


def nijenhuis_residual(
    x: Configuration, v1: TangentVector, v2: TangentVector, h: float = 1e-4
) -> float:
    """|N_I(v1, v2)| with constant-extension brackets by finite differences."""
    state = FaceState.of(x)

    def field(v):
        return lambda s: s.transport(v)

    def ifield(v):
        return lambda s: s.structure("total_I", s.transport(v))

    def value_vec(hh):
        t1 = fd_bracket(state, ifield(v1), ifield(v2), hh)
        t2 = state.structure("total_I", fd_bracket(state, ifield(v1), field(v2), hh))
        t3 = state.structure("total_I", fd_bracket(state, field(v1), ifield(v2), hh))
        t4 = fd_bracket(state, field(v1), field(v2), hh)
        return t1 - t2 - t3 - t4

    hh = h * _fd_scale(state)
    v_h = value_vec(hh)
    v_h2 = value_vec(hh / 2.0)
    n = (v_h2 * (4.0 / 3.0)) + (v_h * (-1.0 / 3.0))
    scale = max(v1.norm(x.mesh) * v2.norm(x.mesh), 1e-14)
    return n.norm(x.mesh) / scale


# -- signature probe ----------------------------------------------------------


def signature_probe(
    family: str,
    x: Configuration,
    jdot: np.ndarray,
    lambdas: np.ndarray,
    alpha: float,
    eps: int,
) -> dict:
    """g_{alpha,eps}(v_l, v_l) for horizontal lifts v_l at (J, A, l*psi).

    The dependence is exactly quadratic, g(l) = eps*c0 - alpha*c2*l^2 with
    c0 = g_fujiki(jdot, jdot) > 0 and c2 >= 0 (c2 scaled by 1/4 for the I
    family); the probe returns the fit, the sign-change point for eps = +1,
    and a definiteness certificate for eps = -1.
    """
    if np.all(np.asarray(lambdas) == 0) or np.abs(jdot).max() == 0 or np.abs(x.psi).max() == 0:
        raise ValueError("signature probe needs psi != 0, jdot != 0 and a lambda grid")
    gsel = "g_coupled_J" if family == "J" else "g_coupled_I"
    mesh = x.mesh
    vals = []
    for lam in lambdas:
        xl = Configuration(mesh, x.J, x.A, lam * x.psi)
        v = horizontal_lift(family, xl, jdot)
        vals.append(eval_form(gsel, xl, v, v, alpha, eps))
    vals = np.array(vals)
    lam2 = np.asarray(lambdas, dtype=float) ** 2
    coef = np.polynomial.polynomial.polyfit(lam2, vals, 1)
    fit = coef[0] + coef[1] * lam2
    resid = float(np.abs(fit - vals).max())
    c0 = float(coef[0])
    c2 = float(-coef[1] / alpha) if alpha > 0 else 0.0
    out = {
        "lambdas": np.asarray(lambdas, dtype=float),
        "values": vals,
        "c0": c0,
        "c2": c2,
        "fit_residual": resid,
    }
    if eps == 1 and c2 > 0:
        out["lambda0"] = float(np.sqrt(max(c0, 0.0) / (alpha * c2)))
    if eps == -1:
        out["negative_definite"] = bool(np.all(vals < 0))
    return out
