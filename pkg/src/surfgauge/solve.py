"""Nonlinear solvers, gauge fixing, and moduli-space metrics.

Everything is dense and desk-scale: Gauss-Newton with Armijo backtracking
and minimum-norm least-squares steps (the equation systems carry gauge
degeneracy), SVD nullspaces for moduli bases, and exactly transposed Gram
matrices for the gauge-fixing decomposition.

Coordinates:
  * configuration moves use dofs [Jdot coefficients (2F, per-face
    orthonormal anticommuting basis), a (3E), psidot (3E)];
  * gauge fixing and the coupled metrics live in face-form dofs
    [Jdot coeffs (2F), a-face (6F), psidot-face (6F)], where the metric
    Grams are exact sparse matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from . import dec, kahler, moment
from .fields import (
    Configuration,
    TangentVector,
    codifferential,
    complex_gauge_transform,
    curvature,
    flat_residual,
    move,
    residual,
    residual_norms,
)
from .mesh import SurfaceMesh


@dataclass
class SolverConfig:
    max_iter: int = 200
    tol: float = 1e-9
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    newton_threshold: float = 1e-1
    alpha_schedule: tuple = ()
    seed: int = 0
    levenberg: float = 1e-12
    cap: int = 3000
    phi_bound: float = 1e3
    fd_step: float = 1e-6

    def validate(self) -> None:
        if self.tol <= 0 or self.max_iter <= 0:
            raise ValueError("tolerances and budgets must be positive")
        sched = list(self.alpha_schedule)
        if sched and not (
            all(a <= b for a, b in zip(sched, sched[1:]))
            or all(a >= b for a, b in zip(sched, sched[1:]))
        ):
            raise ValueError("alpha schedule must be monotone")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual_norm: float
    message: str = ""
    trace: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# generic damped Gauss-Newton on a residual map
# ---------------------------------------------------------------------------


def _gauss_newton(x0, res_fn, mv_fn, ndof, cfg: SolverConfig, name: str):
    """Levenberg-Marquardt on |res|^2 with FD Jacobians and minimum-norm
    undamped steps (the systems carry gauge kernels).  res_fn: state ->
    vector; mv_fn: (state, dofvec, t) -> state.  Accepted steps decrease
    the objective (monotone by construction)."""
    x = x0
    r = res_fn(x)
    trace = [(0, float(np.linalg.norm(r)), 0.0)]
    lam = 0.0
    for it in range(1, cfg.max_iter + 1):
        nrm = float(np.linalg.norm(r))
        if nrm < cfg.tol:
            return x, SolveReport(True, it - 1, nrm, f"{name}: converged", trace)
        h = cfg.fd_step
        jac = np.empty((len(r), ndof))
        for k in range(ndof):
            e = np.zeros(ndof)
            e[k] = 1.0
            jac[:, k] = (res_fn(mv_fn(x, e, h)) - res_fn(mv_fn(x, e, -h))) / (2 * h)
        phi0 = nrm * nrm
        ok = False
        step_norm = 0.0
        for _ in range(cfg.max_backtracks):
            if lam == 0.0:
                step, *_ = np.linalg.lstsq(jac, -r, rcond=1e-10)
            else:
                jtj = jac.T @ jac
                step = np.linalg.solve(
                    jtj + lam * (np.trace(jtj) / ndof) * np.eye(ndof), -jac.T @ r
                )
            try:
                cand = mv_fn(x, step, 1.0)
                rc = res_fn(cand)
            except Exception:
                lam = max(10.0 * lam, 1e-6)
                continue
            if float(rc @ rc) < phi0 * (1.0 - cfg.armijo_c):
                x, r = cand, rc
                step_norm = float(np.linalg.norm(step))
                lam = lam / 3.0 if lam > 1e-12 else 0.0
                ok = True
                break
            lam = max(10.0 * lam, 1e-6)
        trace.append((it, float(np.linalg.norm(r)), step_norm))
        if not ok:
            nn = float(np.linalg.norm(r))
            return x, SolveReport(nn < cfg.tol, it, nn, f"{name}: line search stalled", trace)
    nrm = float(np.linalg.norm(res_fn(x)))
    return x, SolveReport(nrm < cfg.tol, cfg.max_iter, nrm, f"{name}: budget exhausted", trace)


# ---------------------------------------------------------------------------
# constant scalar curvature
# ---------------------------------------------------------------------------


def _cc_residual(mesh, J):
    S = dec.scalar_curvature(mesh, J)
    return np.sqrt(mesh.vertex_mass) * (S - mesh.cc_target)


def solve_cc_metric(mesh: SurfaceMesh, J0: np.ndarray, cfg: SolverConfig | None = None):
    """Drive the scalar curvature to the Gauss-Bonnet constant.

    Projected gradient flow of 0.5 |S - c|_0^2 over per-face complex
    structures, switching to damped Gauss-Newton below cfg.newton_threshold;
    terminates when max_v |S_v - c| < cfg.tol.  Steps that break the metric
    positivity or the triangle inequality are rejected by the line search.
    """
    cfg = cfg or SolverConfig(tol=1e-8)
    cfg.validate()
    J = J0.copy()
    trace = []
    h = cfg.fd_step

    def objective(Jm):
        r = _cc_residual(mesh, Jm)
        return 0.5 * float(r @ r)

    def sup_res(Jm):
        return float(np.abs(dec.scalar_curvature(mesh, Jm) - mesh.cc_target).max())

    def fd_jacobian(J, basis):
        cols = np.empty((mesh.nv, 2 * mesh.nf))
        for k in range(2):
            for f in range(mesh.nf):
                Jp = J.copy()
                Jp[f] = J[f] + h * basis[f, k]
                Jm_ = J.copy()
                Jm_[f] = J[f] - h * basis[f, k]
                cols[:, k * mesh.nf + f] = (
                    _cc_residual(mesh, dec.normalize_J(Jp))
                    - _cc_residual(mesh, dec.normalize_J(Jm_))
                ) / (2 * h)
        return cols

    for it in range(cfg.max_iter):
        sup = sup_res(J)
        phi = objective(J)
        trace.append((it, phi, sup))
        if sup < cfg.tol:
            return J, SolveReport(True, it, sup, "cc: converged", trace)
        basis = dec.anticommuting_basis(mesh, J)
        r0 = _cc_residual(mesh, J)
        jac = fd_jacobian(J, basis)
        if sup < cfg.newton_threshold:
            step, *_ = np.linalg.lstsq(jac, -r0, rcond=1e-12)
        else:
            step = -(jac.T @ r0)
            step /= max(np.linalg.norm(step), 1e-30)
        coeff = step.reshape(2, mesh.nf)
        t = 1.0
        ok = False
        for _ in range(cfg.max_backtracks):
            cand = J + t * np.einsum("kf,fkij->fij", coeff, basis)
            try:
                cand = dec.normalize_J(cand)
                val = objective(cand)
            except Exception:
                t *= cfg.backtrack
                continue
            if val < phi * (1.0 - cfg.armijo_c * t):
                J = cand
                ok = True
                break
            t *= cfg.backtrack
        if not ok:
            return J, SolveReport(False, it, sup_res(J), "cc: line search stalled", trace)
    return J, SolveReport(sup_res(J) < cfg.tol, cfg.max_iter, sup_res(J), "cc: budget exhausted", trace)


# ---------------------------------------------------------------------------
# flat connections and harmonic reductions
# ---------------------------------------------------------------------------


def solve_flat_connection(
    mesh: SurfaceMesh,
    cfg: SolverConfig | None = None,
    rng: np.random.Generator | None = None,
    amplitude: float = 0.9,
    attempts: int = 8,
):
    """Find an irreducible flat su(2) connection: Gauss-Newton on
    F_A = dA + [WA^WA]/2 = 0 from seeded random starts, keeping the first
    solution whose covariant-derivative u-block has trivial kernel."""
    cfg = cfg or SolverConfig(tol=1e-11, max_iter=100)
    rng = rng or np.random.default_rng(cfg.seed)
    best = None
    for _ in range(attempts):
        A0 = amplitude * rng.standard_normal((mesh.ne, 3))

        def res(A):
            return curvature(mesh, A).ravel()

        def mv(A, e, t):
            return A + t * e.reshape(mesh.ne, 3)

        A, rep = _gauss_newton(A0, res, mv, 3 * mesh.ne, cfg, "flat")
        if not rep.converged:
            continue
        smin = _irreducibility_margin(mesh, A)
        if smin > 1e-6:
            return A, rep, smin
        best = (A, rep, smin)
    if best is None:
        raise RuntimeError("no flat connection found")
    return best


def _irreducibility_margin(mesh, A):
    """Smallest singular value of u -> d_A u (trivial kernel = irreducible)."""
    from .fields import covariant_d_face

    cols = []
    for v in range(mesh.nv):
        for k in range(3):
            u = np.zeros((mesh.nv, 3))
            u[v, k] = 1.0
            cols.append(covariant_d_face(mesh, A, u).ravel())
    mat = np.stack(cols, axis=1)
    s = np.linalg.svd(mat, compute_uv=False)
    return float(s[-1])


def _harmonicity_pack(x: Configuration) -> np.ndarray:
    """Weighted stack of the harmonicity residuals plus the codifferential
    (the moment-map form of the coclosedness equation)."""
    mesh = x.mesh
    out = residual("Harmonicity", x)
    wf = 1.0 / np.sqrt(mesh.areas)
    wv = np.sqrt(mesh.vertex_mass)
    cod = codifferential(mesh, x.J, x.A, x.psi)
    return np.concatenate(
        [
            (out["curvature"] * wf[:, None]).ravel(),
            (out["d_psi"] * wf[:, None]).ravel(),
            (out["d_jpsi"] * wf[:, None]).ravel(),
            (cod * wv[:, None]).ravel(),
        ]
    )


def solve_harmonic(x0: Configuration, cfg: SolverConfig | None = None):
    """Harmonic representative of a flat complex connection.

    Phase 1 flows along the Hermitian gauge directions exp(i u), Gauss-
    Newton in u on the Corlette moment |d_A* psi|_0^2 (the Kempf-Ness
    descent).  The discrete finite gauge moves preserve flatness only to
    first order, so phase 2 polishes on shell: minimum-norm Gauss-Newton
    over (A, psi) on the full harmonicity system (flatness, d_A psi,
    d_A(J psi), d_A* psi) from the orbit point.  Reports a reducible stall
    distinctly; the flat residual must not degrade beyond 10x the input.
    """
    cfg = cfg or SolverConfig(tol=1e-10, max_iter=120)
    cfg.validate()
    mesh = x0.mesh
    flat0 = residual_norms(mesh, flat_residual(x0))["total"]

    def weighted(u):
        xu = complex_gauge_transform(x0, u.reshape(mesh.nv, 3))
        return (np.sqrt(mesh.vertex_mass)[:, None] * codifferential(mesh, xu.J, xu.A, xu.psi)).ravel()

    def mv(u, e, t):
        return u + t * e

    if np.linalg.norm(_harmonicity_pack(x0)) < cfg.tol:
        return x0, SolveReport(True, 0, float(np.linalg.norm(_harmonicity_pack(x0))), "harmonic: already harmonic")

    ucfg = SolverConfig(tol=max(cfg.tol, 1e-9), max_iter=min(cfg.max_iter, 50), fd_step=1e-6)
    u, rep1 = _gauss_newton(np.zeros(3 * mesh.nv), weighted, mv, 3 * mesh.nv, ucfg, "harmonic/orbit")
    x = complex_gauge_transform(x0, u.reshape(mesh.nv, 3))

    def res(st):
        return _harmonicity_pack(st)

    def mv2(st, e, t):
        a = e[: 3 * mesh.ne].reshape(mesh.ne, 3)
        p = e[3 * mesh.ne :].reshape(mesh.ne, 3)
        return Configuration(mesh, st.J, st.A + t * a, st.psi + t * p)

    x, rep = _gauss_newton(x, res, mv2, 6 * mesh.ne, cfg, "harmonic/polish")
    rep.trace = rep1.trace + rep.trace
    flat1 = residual_norms(mesh, flat_residual(x))["total"]
    if flat1 > 10 * max(flat0, 1e-12):
        rep.message += "; flat residual degraded beyond 10x input"
        rep.converged = False
    if not rep.converged and "stalled" in rep.message:
        grad_small = np.linalg.norm(weighted(u)) < 1e-6
        if grad_small:
            rep.message += " (reducible-locus stall: gradient vanished above tolerance)"
    return x, rep


def solve_hitchin(
    J: np.ndarray,
    A0: np.ndarray,
    phi0: np.ndarray,
    cfg: SolverConfig | None = None,
    mesh: SurfaceMesh | None = None,
):
    """Minimize the summed squared Hitchin residuals over (A, psi) with
    phi = the (1,0) part of psi; returns (A, phi)."""
    from .fields import to_complex, to_unitary

    cfg = cfg or SolverConfig(tol=1e-10, max_iter=150)
    cfg.validate()
    if mesh is None:
        raise ValueError("pass the mesh")
    psi0 = to_unitary(mesh, phi0)
    state0 = np.concatenate([A0.ravel(), psi0.ravel()])

    def unpack(svec):
        A = svec[: 3 * mesh.ne].reshape(mesh.ne, 3)
        psi = svec[3 * mesh.ne :].reshape(mesh.ne, 3)
        return Configuration(mesh, J, A, psi)

    def res(svec):
        x = unpack(svec)
        if np.linalg.norm(x.psi) > cfg.phi_bound:
            raise RuntimeError("Higgs field diverged")
        out = residual("Hitchin", x)
        return np.concatenate(
            [out["curvature"].ravel(), out["dbar_phi"].ravel().view(float)]
        )

    def mv(svec, e, t):
        return svec + t * e

    svec, rep = _gauss_newton(state0, res, mv, 6 * mesh.ne, cfg, "hitchin")
    x = unpack(svec)
    # the Hitchin system sees psi only through its face form; return the
    # canonical representative with the invisible ker(whitney) part removed
    x = Configuration(mesh, x.J, x.A, dec.unwhitney(mesh, dec.whitney(mesh, x.psi)))
    return (x.A, to_complex(mesh, J, x.psi)), rep, x


# ---------------------------------------------------------------------------
# full-system packing and the alpha-continuation
# ---------------------------------------------------------------------------


def config_dofs(x: Configuration):
    """Orthonormal anticommuting basis for Jdot plus raw cochain slots."""
    return dec.anticommuting_basis(x.mesh, x.J)


def move_config(x: Configuration, basis, dofvec: np.ndarray, t: float) -> Configuration:
    mesh = x.mesh
    nj = 2 * mesh.nf
    coeff = dofvec[:nj].reshape(mesh.nf, 2)
    jdot = np.einsum("fk,fkij->fij", coeff, basis)
    a = dofvec[nj : nj + 3 * mesh.ne].reshape(mesh.ne, 3)
    p = dofvec[nj + 3 * mesh.ne :].reshape(mesh.ne, 3)
    return Configuration(
        mesh,
        dec.normalize_J(x.J + t * jdot),
        x.A + t * a,
        x.psi + t * p,
    )


def tangent_from_dofs(x: Configuration, basis, dofvec: np.ndarray) -> TangentVector:
    mesh = x.mesh
    nj = 2 * mesh.nf
    coeff = dofvec[:nj].reshape(mesh.nf, 2)
    jdot = np.einsum("fk,fkij->fij", coeff, basis)
    a = dofvec[nj : nj + 3 * mesh.ne].reshape(mesh.ne, 3)
    p = dofvec[nj + 3 * mesh.ne :].reshape(mesh.ne, 3)
    return TangentVector.from_cochains(mesh, jdot, a, p)


def residual_pack(system: str, x: Configuration, alpha: float, eps: int) -> np.ndarray:
    """Flatten a residual bundle with natural norms (2-cochains divided by
    sqrt(area), vertex functions times sqrt(mass))."""
    mesh = x.mesh
    out = residual(system, x, alpha, eps)
    parts = []
    wf = 1.0 / np.sqrt(mesh.areas)
    wv = np.sqrt(mesh.vertex_mass)
    for name, val in out.items():
        val = np.asarray(val)
        if np.iscomplexobj(val):
            val = np.stack([val.real, val.imag], axis=-1)
        if val.shape[0] == mesh.nf:
            val = val * wf.reshape((mesh.nf,) + (1,) * (val.ndim - 1))
        else:
            val = val * wv.reshape((mesh.nv,) + (1,) * (val.ndim - 1))
        parts.append(val.ravel())
    return np.concatenate(parts)


def continue_alpha(
    system: str,
    seed_config: Configuration,
    eps: int,
    schedule,
    cfg: SolverConfig | None = None,
):
    """Newton/Gauss-Newton continuation of the coupled systems in alpha.

    The seed must solve the alpha = 0 system within tolerance.  Each
    accepted step records residual norms and the numerical kernel dimension
    of the gauge-fixing operator L; a nontrivial kernel is reported as
    leaving U* (the continuation returns the accepted prefix).
    """
    if system not in ("CoupledHarmonic", "CoupledHitchin"):
        raise ValueError("continuation is defined for the coupled systems")
    if eps not in (-1, 1):
        raise ValueError("eps must be -1 or +1")
    cfg = cfg or SolverConfig(tol=1e-8, max_iter=40)
    cfg.validate()
    family = "J" if system == "CoupledHarmonic" else "I"
    x = seed_config
    seed_norm = np.linalg.norm(residual_pack(system, x, 0.0, eps))
    if seed_norm > 1e-6:
        raise ValueError(f"seed does not solve the alpha=0 system ({seed_norm:.2e})")
    positive = [a for a in schedule if a > 0]
    a_kernel_floor = positive[0] if positive else 1e-2
    results = []
    for a in schedule:
        if a == 0.0:
            xa, rep = x, SolveReport(True, 0, float(seed_norm), "seed")
        else:
            basis = config_dofs(x)
            ndof = 2 * x.mesh.nf + 6 * x.mesh.ne

            def res(st):
                return residual_pack(system, st, a, eps)

            def mv(st, e, t):
                return move_config(st, config_dofs(st), e, t)

            xa, rep = _gauss_newton(x, res, mv, ndof, cfg, f"continue a={a}")
            if not rep.converged:
                results.append({"alpha": a, "config": xa, "report": rep, "kernel_dim": None})
                return results, False
        ker = gauge_fix_kernel_dim(family, xa, max(a, a_kernel_floor), eps)
        results.append(
            {
                "alpha": a,
                "config": xa,
                "report": rep,
                "kernel_dim": ker,
                "norms": residual_norms(xa.mesh, residual(system, xa, a, eps)),
            }
        )
        if ker > 0:
            return results, False
        x = xa
    return results, True


# ---------------------------------------------------------------------------
# face-form dofs, metric Grams, gauge fixing
# ---------------------------------------------------------------------------


def face_dof_count(mesh: SurfaceMesh) -> int:
    return 2 * mesh.nf + 12 * mesh.nf


def tangent_to_face_dofs(x: Configuration, basis, v: TangentVector) -> np.ndarray:
    coeff = 0.5 * np.einsum("fij,fkji->fk", v.jdot, basis)
    return np.concatenate([coeff.ravel(), v.a_face.ravel(), v.psidot_face.ravel()])


def face_dofs_to_tangent(x: Configuration, basis, dofs: np.ndarray) -> TangentVector:
    mesh = x.mesh
    nj = 2 * mesh.nf
    coeff = dofs[:nj].reshape(mesh.nf, 2)
    jdot = np.einsum("fk,fkij->fij", coeff, basis)
    a = dofs[nj : nj + 6 * mesh.nf].reshape(mesh.nf, 2, 3)
    p = dofs[nj + 6 * mesh.nf :].reshape(mesh.nf, 2, 3)
    return TangentVector(jdot, a, p)


def form_gram(family: str, x: Configuration, alpha: float, eps: int, basis=None):
    """Exact dense Gram of g_{alpha,eps} on face-form dofs.

    g_coupled_J = eps g_fuj + alpha (<X1,X1>_J + <X2,X2>_J - <X3,X3>_J) with
    X1 = a - psi(Jd), X2 = pd - (J psi)(Jd), X3 = psi(Jd); the I family uses
    X1 = a, X2 = pd + psi(J Jd)/2, X3 = psi(Jd)/2.  Assembled as B^T Q B
    from the (sparse, per-face) maps B: dofs -> face forms.
    """
    mesh = x.mesh
    if basis is None:
        basis = dec.anticommuting_basis(mesh, x.J)
    nj = 2 * mesh.nf
    n = face_dof_count(mesh)
    Psi = dec.whitney(mesh, x.psi)
    J = x.J

    # per-face weights of pair_j on face forms: Q = chart_area * M^J (x) I3
    MJ = dec.j_gram(mesh, J) * mesh.chart_areas[:, None, None]

    def gram_of(maps):
        """maps: list of (sign, comp_j (F,2,3,2) or None, use_a, use_p)
        describing X = use_a * a + use_p * pd + comp_j . coeff; accumulates
        sign * <X, X>_Q into the dof Gram using the block structure."""
        G = np.zeros((n, n))
        for sign, comp_j, use_a, use_p in maps:
            idx_a = slice(nj, nj + 6 * mesh.nf)
            idx_p = slice(nj + 6 * mesh.nf, n)
            if use_a:
                _accumulate_identity_block(G, idx_a, MJ, sign, mesh)
            if use_p:
                _accumulate_identity_block(G, idx_p, MJ, sign, mesh)
            if comp_j is not None:
                CJ = comp_j  # (F,2,3,2)
                # j-j block
                jj = sign * np.einsum("fxy,fxkm,fykl->fml", MJ, CJ, CJ)
                for f in range(mesh.nf):
                    G[2 * f : 2 * f + 2, 2 * f : 2 * f + 2] += jj[f]
                # cross blocks with a / p
                cross = sign * np.einsum("fxy,fxkm->fykm", MJ, CJ)
                for f in range(mesh.nf):
                    for m in range(2):
                        col = 2 * f + m
                        blockv = cross[f, :, :, m].ravel()  # (2,3)
                        if use_a:
                            rows = nj + 6 * f + np.arange(6)
                            G[rows, col] += blockv
                            G[col, rows] += blockv
                        if use_p:
                            rows = nj + 6 * mesh.nf + 6 * f + np.arange(6)
                            G[rows, col] += blockv
                            G[col, rows] += blockv
        return G

    psi_b = np.einsum("fmk,fcmx->fxkc", Psi, basis)  # psi(b_c): (F,2,3,2)
    if family == "J":
        jpsi = dec.apply_J(J, Psi)
        jpsi_b = np.einsum("fmk,fcmx->fxkc", jpsi, basis)
        maps = [
            (alpha, -psi_b, True, False),  # X1 = a - psi(Jd)
            (alpha, -jpsi_b, False, True),  # X2 = pd - (J psi)(Jd)
            (-alpha, psi_b, False, False),  # -X3
        ]
    elif family == "I":
        jb = np.einsum("fij,fcjk->fcik", J, basis)
        psi_jb = np.einsum("fmk,fcmx->fxkc", Psi, jb)
        maps = [
            (alpha, None, True, False),
            (alpha, 0.5 * psi_jb, False, True),
            (-alpha, 0.5 * psi_b, False, False),
        ]
    else:
        raise ValueError("family must be 'J' or 'I'")
    G = gram_of(maps)
    # fujiki block: eps/2 * area * tr(b_m b_l) = eps * area * delta (basis is
    # orthonormalized with tr(b b) = 2)
    for f in range(x.mesh.nf):
        tr = np.einsum("kij,lji->kl", basis[f], basis[f])
        G[2 * f : 2 * f + 2, 2 * f : 2 * f + 2] += 0.5 * eps * x.mesh.areas[f] * tr
    return G


def _accumulate_identity_block(G, idx, W, sign, mesh):
    """Add sign * (Q on the a- or p-slot) to the diagonal block."""
    base = idx.start
    for f in range(mesh.nf):
        for xcomp in range(2):
            for ycomp in range(2):
                w = sign * W[f, xcomp, ycomp]
                rows = base + 6 * f + 3 * xcomp + np.arange(3)
                cols = base + 6 * f + 3 * ycomp + np.arange(3)
                G[rows, cols] += w


def action_matrix(family: str, x: Configuration, basis=None):
    """Columns: face-form dofs of the gauge action on an S^0 basis.

    J family uses the modified action Pt (same image as P); I family uses P.
    """
    if basis is None:
        basis = dec.anticommuting_basis(x.mesh, x.J)
    s0 = moment.S0Basis(x.mesh)
    variant = "Pt" if family == "J" else "P"
    cols = []
    for k in range(s0.dim):
        c = np.zeros(s0.dim)
        c[k] = 1.0
        zeta = s0.unpack(c)
        w = moment.infinitesimal_action(variant, x, zeta)
        cols.append(tangent_to_face_dofs(x, basis, w))
    return np.stack(cols, axis=1), s0


def gauge_fix(family: str, x: Configuration, alpha: float, eps: int, v: TangentVector):
    """g-orthogonal splitting v = Pi v + (v - Pi v) with Pi v in the image
    of the (modified) infinitesimal action: solve L y = P* v with the exact
    transposed Gram, so idempotence and g-orthogonality hold to solver
    precision.  Raises when ker L is numerically nontrivial (U* exit).
    """
    basis = dec.anticommuting_basis(x.mesh, x.J)
    P, s0 = action_matrix(family, x, basis)
    G = form_gram(family, x, alpha, eps, basis)
    L = P.T @ G @ P
    rhs = P.T @ (G @ tangent_to_face_dofs(x, basis, v))
    s = np.linalg.svd(L, compute_uv=False)
    if s[-1] < 1e-8 * s[0]:
        raise RuntimeError("gauge_fix: kernel of L is numerically nontrivial (U* exit)")
    y = np.linalg.solve(L, rhs)
    piv = face_dofs_to_tangent(x, basis, P @ y)
    rest = TangentVector(
        v.jdot - piv.jdot, v.a_face - piv.a_face, v.psidot_face - piv.psidot_face
    )
    return piv, rest


def gauge_fix_kernel_dim(family: str, x: Configuration, alpha: float, eps: int) -> int:
    basis = dec.anticommuting_basis(x.mesh, x.J)
    P, s0 = action_matrix(family, x, basis)
    G = form_gram(family, x, alpha, eps, basis)
    L = P.T @ G @ P
    s = np.linalg.svd(L, compute_uv=False)
    return int(np.sum(s < 1e-8 * s[0]))


# ---------------------------------------------------------------------------
# the exact cochain realization of bbI (for the I-family moduli rows)
# ---------------------------------------------------------------------------


def _cochain_J_matrix(mesh: SurfaceMesh, J: np.ndarray) -> np.ndarray:
    """An exact complex structure Jhat on scalar edge cochains agreeing with
    the pointwise J wherever that is possible.

    The pointwise action unwhitney o J o whitney is an exact complex
    structure on the preimage of range(W) n J range(W) (where J preserves
    the Whitney range); on the orthogonal complement (which contains the
    checkerboard kernel and the J-defect directions, and is invisible or
    inconsistent for the pointwise action) an arbitrary paired-basis complex
    structure is used.  Jhat^2 = -1 holds to round-off by construction.
    """
    W = mesh._whitney_matrix.toarray()
    unw = mesh._unwhitney_pinv
    Japp = np.zeros((2 * mesh.nf, 2 * mesh.nf))
    for f in range(mesh.nf):
        Japp[2 * f : 2 * f + 2, 2 * f : 2 * f + 2] = -J[f].T
    R = unw @ (Japp @ W)
    # defect map: the part of J W w sticking out of range(W)
    proj = W @ unw  # G0-orthogonal projection onto range(W) in face space
    defect = (np.eye(2 * mesh.nf) - proj) @ (Japp @ W)
    u_, s_, vt_ = np.linalg.svd(np.vstack([defect, 1e3 * _kerW_rows(mesh, W)]))
    tol = 1e-8 * max(s_[0], 1e-300)
    nv_dim = int(np.sum(s_ < tol)) + max(0, mesh.ne - len(s_))
    Zv = vt_[len(vt_) - nv_dim :].T if nv_dim else np.zeros((mesh.ne, 0))
    # complement basis
    q, _ = np.linalg.qr(np.hstack([Zv, np.eye(mesh.ne)]))
    Zr = q[:, nv_dim:]
    if (mesh.ne - nv_dim) % 2 == 1:
        # keep both blocks even-dimensional
        Zr = np.hstack([Zr, Zv[:, -1:]])
        Zv = Zv[:, :-1]
        nv_dim -= 1
    Jv = Zv.T @ (R @ Zv)
    errv = np.linalg.norm(Jv @ Jv + np.eye(nv_dim))
    if errv > 1e-6:
        # polar-correct the invariant block (kept tiny; usually exact)
        Sq = np.real(scipy.linalg.sqrtm(-Jv @ Jv))
        Jv = Jv @ np.linalg.inv(Sq)
    dr = Zr.shape[1]
    Jr = np.zeros((dr, dr))
    for i in range(0, dr - 1, 2):
        Jr[i, i + 1] = -1.0
        Jr[i + 1, i] = 1.0
    Jhat = Zv @ Jv @ Zv.T + Zr @ Jr @ Zr.T
    err = np.linalg.norm(Jhat @ Jhat + np.eye(mesh.ne))
    if err > 1e-7:
        raise RuntimeError(f"cochain structure failed to square to -1 ({err:.2e})")
    return Jhat


def _kerW_rows(mesh, W):
    u_, s_, vt_ = np.linalg.svd(W)
    nk = int(np.sum(np.concatenate([s_, np.zeros(mesh.ne - len(s_))]) < 1e-10 * s_[0]))
    return vt_[len(vt_) - nk :] if nk else np.zeros((0, mesh.ne))


def cochain_structure_I(x: Configuration):
    """Exact complex structure on packed cochain dofs realizing bbI.

    The 1-form legs use the exact cochain structure of _cochain_J_matrix;
    the psi(Jdot) term is symmetrized, P(Jd) = (q(Jd) + Jhat q(J Jd))/2 with
    q(Jd) = unwhitney(psi o Jd), which makes the total square exactly -1.
    """
    mesh = x.mesh
    basis = dec.anticommuting_basis(mesh, x.J)
    Jhat = _cochain_J_matrix(mesh, x.J)
    Psi = dec.whitney(mesh, x.psi)
    nj = 2 * mesh.nf

    def q_of(coeff):
        jdot = np.einsum("fk,fkij->fij", coeff.reshape(mesh.nf, 2), basis)
        return dec.unwhitney(mesh, dec.compose(Psi, jdot))

    def jmat_coeff(coeff):
        jdot = np.einsum("fk,fkij->fij", coeff.reshape(mesh.nf, 2), basis)
        jj = np.einsum("fij,fjk->fik", x.J, jdot)
        return 0.5 * np.einsum("fij,fkji->fk", jj, basis).ravel()

    def apply(dofs):
        coeff = dofs[:nj]
        a = dofs[nj : nj + 3 * mesh.ne].reshape(mesh.ne, 3)
        p = dofs[nj + 3 * mesh.ne :].reshape(mesh.ne, 3)
        new_coeff = jmat_coeff(coeff)
        new_a = Jhat @ a
        ppsi = 0.5 * (q_of(coeff) + Jhat @ q_of(new_coeff))
        new_p = -(Jhat @ p) + ppsi
        return np.concatenate([new_coeff, new_a.ravel(), new_p.ravel()])

    return apply


# ---------------------------------------------------------------------------
# moduli basis and metric
# ---------------------------------------------------------------------------


@dataclass
class ModuliReport:
    config_hash: str
    kernel_dim_L: int
    basis_dim: int
    g_matrix: np.ndarray
    omega_matrix: np.ndarray
    signature: tuple
    checks: dict

    def to_dict(self):
        return {
            "config_hash": self.config_hash,
            "kernel_dim_L": self.kernel_dim_L,
            "basis_dim": self.basis_dim,
            "g_matrix": self.g_matrix.tolist(),
            "omega_matrix": self.omega_matrix.tolist(),
            "signature": list(self.signature),
            "checks": self.checks,
        }


def linearization_matrix(system: str, x: Configuration, alpha: float, eps: int, basis):
    """FD linearization of the packed residual around x."""
    mesh = x.mesh
    ndof = 2 * mesh.nf + 6 * mesh.ne
    r0 = residual_pack(system, x, alpha, eps)
    h = 1e-6
    cols = np.empty((len(r0), ndof))
    for k in range(ndof):
        e = np.zeros(ndof)
        e[k] = 1.0
        rp = residual_pack(system, move_config(x, basis, e, h), alpha, eps)
        rm = residual_pack(system, move_config(x, basis, e, -h), alpha, eps)
        cols[:, k] = (rp - rm) / (2 * h)
    return cols


def moduli_basis(
    family: str,
    x: Configuration,
    alpha: float,
    eps: int,
    cap: int = 3000,
    gap_factor: float = 10.0,
):
    """Orthonormal numerical nullspace of the gauge-fixed linearization.

    J family: rows = linearized CoupledHarmonic + the exact adjoint rows
    P~* = P~^T G.  I family: rows = linearized CoupledHitchin stacked with
    its composition with the exact cochain realization of bbI.  Reports the
    singular-value gap; an ambiguous gap (< gap_factor) is flagged.
    """
    mesh = x.mesh
    ndof = 2 * mesh.nf + 6 * mesh.ne
    if ndof > cap:
        raise ValueError(f"dimension {ndof} exceeds cap {cap}")
    basis = dec.anticommuting_basis(mesh, x.J)
    system = "CoupledHarmonic" if family == "J" else "CoupledHitchin"
    Lmat = linearization_matrix(system, x, alpha, eps, basis)
    scale = np.linalg.norm(Lmat) / np.sqrt(Lmat.size)

    if family == "J":
        P, s0 = action_matrix(family, x, basis)
        G = form_gram(family, x, alpha, eps, basis)
        embed = _cochain_to_face_matrix(x, basis)
        rows = P.T @ G @ embed
        rows *= scale / max(np.linalg.norm(rows) / np.sqrt(rows.size), 1e-30)
        stack = np.vstack([Lmat, rows])
        extra = {}
    else:
        ihat = cochain_structure_I(x)
        cols = np.empty((Lmat.shape[0], ndof))
        for k in range(ndof):
            e = np.zeros(ndof)
            e[k] = 1.0
            cols[:, k] = Lmat @ ihat(e)
        stack = np.vstack([Lmat, cols])
        extra = {"ihat": ihat}

    u, s, vt = np.linalg.svd(stack, full_matrices=True)
    smax = s[0]
    null_mask = np.concatenate([s, np.zeros(stack.shape[1] - len(s))]) < 1e-8 * smax
    dim = int(np.sum(null_mask))
    gap_ok = True
    if 0 < dim < stack.shape[1]:
        kept = np.concatenate([s, np.zeros(stack.shape[1] - len(s))])
        discarded = kept[~null_mask].min()
        retained = kept[null_mask].max() if kept[null_mask].max() > 0 else 1e-300
        gap_ok = discarded / max(retained, 1e-300) > gap_factor
    vecs = vt[-dim:][::-1] if dim > 0 else np.zeros((0, stack.shape[1]))
    out = [tangent_from_dofs(x, basis, v) for v in vecs]
    info = {"singular_values": s, "gap_ok": gap_ok, "dim": dim, "basis_mat": vecs, **extra}
    if family == "I" and dim > 0:
        ih = extra["ihat"]
        img = np.stack([ih(v) for v in vecs], axis=0)
        # principal angle between span(vecs) and span(img)
        q1, _ = np.linalg.qr(vecs.T)
        q2, _ = np.linalg.qr(img.T)
        sv = np.linalg.svd(q1.T @ q2, compute_uv=False)
        info["principal_angle"] = float(np.arccos(np.clip(sv.min(), -1.0, 1.0)))
    return out, info


def _cochain_to_face_matrix(x: Configuration, basis):
    """Dense matrix: cochain dofs -> face-form dofs."""
    mesh = x.mesh
    nj = 2 * mesh.nf
    ndof = nj + 6 * mesh.ne
    out = np.zeros((face_dof_count(mesh), ndof))
    out[:nj, :nj] = np.eye(nj)
    W = mesh._whitney_matrix.toarray()  # (2F, E)
    blk = np.kron(W, np.eye(3))  # (6F, 3E)
    out[nj : nj + 6 * mesh.nf, nj : nj + 3 * mesh.ne] = blk
    out[nj + 6 * mesh.nf :, nj + 3 * mesh.ne :] = blk
    return out


def moduli_metric(
    family: str, x: Configuration, alpha: float, eps: int, basis_vectors
) -> ModuliReport:
    """Fill the omega and g matrices on a moduli basis, by the generic
    coupled evaluation and the explicit gauge-fixed formulas, and report
    their maximal discrepancy, the g/omega/structure compatibility, and the
    signature (for eps = -1 the metric must be non-degenerate)."""
    mesh = x.mesh
    n = len(basis_vectors)
    fsel = "coupled_J" if family == "J" else "coupled_I"
    gsel = "g_coupled_J" if family == "J" else "g_coupled_I"
    msel = "omega_J_moduli" if family == "J" else "omega_I_moduli"
    ssel = "total_J" if family == "J" else "total_I"
    om = np.zeros((n, n))
    gm = np.zeros((n, n))
    om2 = np.zeros((n, n))
    gs = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            om[i, j] = kahler.eval_form(fsel, x, basis_vectors[i], basis_vectors[j], alpha, eps)
            gm[i, j] = kahler.eval_form(gsel, x, basis_vectors[i], basis_vectors[j], alpha, eps)
            om2[i, j] = kahler.eval_form(msel, x, basis_vectors[i], basis_vectors[j], alpha, eps)
            gs[i, j] = kahler.eval_form(fsel, x, basis_vectors[i], kahler.apply_structure(ssel, x, basis_vectors[j]), alpha, eps)
    eig = np.linalg.eigvalsh(0.5 * (gm + gm.T))
    thresh = 1e-8 * max(np.abs(eig).max(), 1e-300)
    sig = (int(np.sum(eig > thresh)), int(np.sum(eig < -thresh)), int(np.sum(np.abs(eig) <= thresh)))
    checks = {
        "omega_antisymmetry": float(np.abs(om + om.T).max()),
        "g_symmetry": float(np.abs(gm - gm.T).max()),
        "explicit_vs_generic": float(np.abs(om - om2).max()),
        "omega_eq_g_structure": float(np.abs(gs - gm).max()),
        "nondegenerate": bool(sig[2] == 0),
    }
    return ModuliReport(
        config_hash=x.content_hash(),
        kernel_dim_L=gauge_fix_kernel_dim(family, x, max(alpha, 1e-12), eps),
        basis_dim=n,
        g_matrix=gm,
        omega_matrix=om,
        signature=sig,
        checks=checks,
    )