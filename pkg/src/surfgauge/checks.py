"""Check suites: machine-precision identities, Hamiltonian identities,
refinement-convergence fits, and solver regressions.

Each suite returns a list of dicts {name, value, tol, passed}; the CLI turns
them into reports, the acceptance tests into assertions.  All randomness is
seeded.
"""

from __future__ import annotations

import numpy as np

from . import dec, fixtures, kahler, lie, moment, solve
from .fields import (
    Configuration,
    TangentVector,
    codifferential,
    covariant_d_face,
    flat_residual,
    gauge_transform,
    harmonicity_residual,
    hitchin_residual,
    random_configuration,
    random_tangent,
    residual,
    residual_norms,
    to_complex,
    to_unitary,
)
from .mesh import (
    build_surface,
    restrict_edge,
    restrict_face,
    restrict_vertex,
    smooth_face,
    smooth_vertex,
)


def _entry(name, value, tol):
    return {"name": name, "value": float(value), "tol": float(tol), "passed": bool(value <= tol)}


def _range_cochain(mesh, rng, scale=1.0):
    """Random edge cochain in the range of the Whitney projection."""
    w = scale * rng.standard_normal((mesh.ne, 3))
    return dec.unwhitney(mesh, dec.whitney(mesh, w))


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------


def identity_suite(n_inputs: int = 20, seed: int = 0) -> list:
    meshes = [build_surface(1, 1), build_surface(2, 1)]
    acc: dict[str, float] = {}

    def track(name, value):
        acc[name] = max(acc.get(name, 0.0), float(value))

    rng = np.random.default_rng(seed)
    for m in meshes:
        for _ in range(n_inputs // 2):
            x = random_configuration(m, rng, amplitude=0.5)
            v1 = random_tangent(x, rng)
            v2 = random_tangent(x, rng)
            vv1 = TangentVector(np.zeros_like(v1.jdot), v1.a_face, v1.psidot_face)
            vv2 = TangentVector(np.zeros_like(v2.jdot), v2.a_face, v2.psidot_face)
            sc = max(v1.norm(m) * v2.norm(m), 1e-30)

            # structure squares and quaternions
            for sel in kahler.STRUCTURES:
                w = vv1 if sel.startswith("fibre") else v1
                sq = kahler.apply_structure(sel, x, kahler.apply_structure(sel, x, w))
                track(f"square[{sel}]", (sq + w).norm(m) / max(w.norm(m), 1e-30))
            ij = kahler.apply_structure("fibre_I", x, kahler.apply_structure("fibre_J", x, vv1))
            kk = kahler.apply_structure("fibre_K", x, vv1)
            track("quaternion[IJ=K]", (ij - kk).norm(m) / max(vv1.norm(m), 1e-30))

            # magic identity (traceless C pointwise; trace-corrected general C)
            C = rng.standard_normal((m.nf, 2, 2))
            C0 = C - 0.5 * np.trace(C, axis1=1, axis2=2)[:, None, None] * np.eye(2)
            W1, W2 = v1.a_face, v2.psidot_face
            t_tr = dec.pair_integral(m, dec.compose(W1, C0), W2) + dec.pair_integral(
                m, W1, dec.compose(W2, C0)
            )
            track("magic[traceless]", abs(t_tr) / sc)
            lhs = dec.pair_integral(m, dec.compose(W1, C), W2) + dec.pair_integral(
                m, W1, dec.compose(W2, C)
            )
            rhs = np.sum(m.chart_areas * np.trace(C, axis1=1, axis2=2) * dec._dens(W1, W2))
            track("magic[general-trace]", abs(lhs - rhs) / sc)

            # fibre restrictions and adapted formulas
            track(
                "restrict[sigma_J=omega_J]",
                abs(kahler.eval_form("sigma_J", x, vv1, vv2) - kahler.eval_form("omega_J", x, vv1, vv2)) / sc,
            )
            track(
                "restrict[sigma_I=omega_I]",
                abs(kahler.eval_form("sigma_I", x, vv1, vv2) - kahler.eval_form("omega_I", x, vv1, vv2)) / sc,
            )
            track(
                "adapted[sigma_J]",
                abs(kahler.eval_form("sigma_J_adapted", x, v1, v2) - kahler.eval_form("sigma_J", x, v1, v2)) / sc,
            )

            # g/omega consistency for the coupled selectors
            for fam in ("J", "I"):
                sv2 = kahler.apply_structure(f"total_{fam}", x, v2)
                lhs = kahler.eval_form(f"coupled_{fam}", x, v1, sv2, 0.37, -1)
                rhs = kahler.eval_form(f"g_coupled_{fam}", x, v1, v2, 0.37, -1)
                track(f"g-omega[{fam}]", abs(lhs - rhs) / sc)

            # Gauss-Bonnet after the J update
            gb = dec.ip0(m, dec.scalar_curvature(m, x.J), np.ones(m.nv))
            track("gauss-bonnet", abs(gb - 4 * np.pi * m.euler_characteristic))

            # Gamma^I o I = I o Gamma^I
            iv = kahler.apply_structure("total_I", x, v1)
            lhs_t = kahler.vertical_project("I", x, iv)
            rhs_t = kahler.apply_structure("fibre_I", x, kahler.vertical_project("I", x, v1))
            track("GammaI-commutes", (lhs_t - rhs_t).norm(m) / max(v1.norm(m), 1e-30))

            # wedge antisymmetry, J isometry, d o d
            w_real = rng.standard_normal((m.ne,))
            Wr = dec.whitney(m, w_real)
            track("wedge[w^w=0]", abs(np.sum(m.chart_areas * (Wr[:, 0] * Wr[:, 1] - Wr[:, 1] * Wr[:, 0]))))
            track(
                "J-isometry",
                abs(
                    dec.pair_j(m, x.J, dec.apply_J(x.J, v1.a_face), dec.apply_J(x.J, v2.a_face))
                    - dec.pair_j(m, x.J, v1.a_face, v2.a_face)
                ) / sc,
            )
            f0 = rng.standard_normal(m.nv)
            track("d-squared", np.abs(dec.coboundary(m, dec.coboundary(m, f0, 0), 1)).max())

            # flatness split: Re/Im of F_D
            res = harmonicity_residual(x)
            FD = flat_residual(x)["F_D"]
            track("flat-split[re]", np.abs(np.real(FD) - res["curvature"]).max())
            track("flat-split[im]", np.abs(np.imag(FD) - res["d_psi"]).max())

            # circle identity (range psi so the roundtrip is exact)
            psi_r = _range_cochain(m, rng)
            xr = Configuration(m, x.J, x.A, psi_r)
            hit = hitchin_residual(xr)
            harm = harmonicity_residual(xr)
            R2 = hit["dbar_phi"]
            track("circle[curvature]", np.abs(hit["curvature"] - harm["curvature"]).max())
            track("circle[d_psi]", np.abs(-1j * (R2 - np.conj(R2)) - harm["d_psi"]).max())
            track("circle[d_jpsi]", np.abs(-(R2 + np.conj(R2)) - harm["d_jpsi"]).max())
            phi = to_complex(m, x.J, psi_r)
            track("circle[roundtrip]", np.abs(to_unitary(m, phi) - psi_r).max())
            track("one-zero[phi]", np.abs(dec.compose(phi, x.J) - 1j * phi).max())

            # codifferential adjointness (through the face representation)
            u0 = rng.standard_normal((m.nv, 3))
            lhs = dec.ip0(m, codifferential(m, x.J, x.A, x.psi), u0)
            rhs = dec.pair_j(m, x.J, covariant_d_face(m, x.A, u0), dec.whitney(m, x.psi))
            track("codifferential-adjoint", abs(lhs - rhs) / max(abs(rhs), 1e-30))

            # holomorphic symplectic decomposition (measured sign: -i omega_K)
            Om = kahler.eval_form("Omega_J_complex", x, vv1, vv2)
            oI = kahler.eval_form("omega_I", x, vv1, vv2)
            oK = kahler.eval_form("omega_K", x, vv1, vv2)
            track("Omega=omega_I-i*omega_K", abs(Om - (oI - 1j * oK)) / sc)

            # hyperkahler metric positivity
            track("hk-negativity", max(0.0, -kahler.eval_form("hk_metric", x, vv1, vv1)))

    tols = {
        "gauss-bonnet": 1e-10,
        "codifferential-adjoint": 1e-12,
        "d-squared": 1e-14,
        "magic[traceless]": 1e-12,
        "magic[general-trace]": 1e-12,
    }
    return [_entry(k, v, tols.get(k, 1e-12)) for k, v in sorted(acc.items())]


# ---------------------------------------------------------------------------
# Hamiltonian suite
# ---------------------------------------------------------------------------


def _smooth_cochain(mesh, rng, rounds: int = 80):
    """Cochain of a smooth su(2)-valued 1-form: exact pieces d(phi_k) plus
    smooth-function multiples of the globally parallel chart forms (second
    order edge quadrature), so restrictions stay smooth at every level."""
    out = np.zeros((mesh.ne, 3))
    t, h = mesh.edges[:, 0], mesh.edges[:, 1]
    # edge chart vectors from the positive-side face
    seg = np.zeros((mesh.ne, 2))
    for f in range(mesh.nf):
        for i in range(3):
            if mesh.face_signs[f, i] == 1:
                seg[mesh.face_edges[f, i]] = mesh.corners[f, (i + 1) % 3] - mesh.corners[f, i]
    for k in range(3):
        phi = smooth_vertex(mesh, rng.standard_normal(mesh.nv), rounds)
        out[:, k] += dec.coboundary(mesh, phi, 0)
        fmod = smooth_vertex(mesh, rng.standard_normal(mesh.nv), rounds)
        gamma = rng.standard_normal(2)
        out[:, k] += 0.5 * (fmod[t] + fmod[h]) * (seg @ gamma)
    return out


def _refinement_family(genus: int, seed: int, levels: int = 3):
    """Smooth data built at the finest level and restricted down, so the
    three meshes discretize one continuum object."""
    meshes = [build_surface(genus, r) for r in range(levels)]
    fine = meshes[-1]
    rng = np.random.default_rng(seed)

    def sm(shape, rounds=80):
        return smooth_face(fine, rng.standard_normal(shape), rounds)

    coef = sm((fine.nf, 2))
    coef = 0.45 * coef / np.abs(coef).max()
    pert = np.zeros((fine.nf, 2, 2))
    pert[:, 0, 0] = coef[:, 0]
    pert[:, 1, 1] = -coef[:, 0]
    pert[:, 0, 1] = coef[:, 1]
    pert[:, 1, 0] = coef[:, 1]
    data = {
        "J": dec.normalize_J(dec.reference_J(fine) + pert),
        "A": _smooth_cochain(fine, rng),
        "psi": _smooth_cochain(fine, rng),
        "f": dec.mean_zero(fine, smooth_vertex(fine, rng.standard_normal(fine.nv), 80)),
        "u": smooth_vertex(fine, rng.standard_normal((fine.nv, 3)), 80),
        "vj": sm((fine.nf, 2, 2)),
        "va": _smooth_cochain(fine, rng),
        "vp": _smooth_cochain(fine, rng),
    }

    out = []
    for lev in range(levels):
        d = dict(data)
        for l in range(levels - 1, lev, -1):
            cm, fm = meshes[l - 1], meshes[l]
            d["J"] = dec.normalize_J(restrict_face(cm, fm, d["J"]))
            d["vj"] = restrict_face(cm, fm, d["vj"])
            for key in ("A", "psi", "va", "vp"):
                d[key] = restrict_edge(cm, fm, d[key])
            for key in ("f", "u"):
                d[key] = restrict_vertex(cm, fm, d[key])
        m = meshes[lev]
        x = Configuration(m, d["J"], d["A"], d["psi"])
        v = TangentVector.from_cochains(
            m, dec.anticommuting_projection(d["J"], d["vj"]), d["va"], d["vp"]
        )
        out.append((m, x, dec.mean_zero(m, d["f"]), d["u"], v))
    return out


def hamiltonian_suite(seed: int = 0) -> list:
    entries = []
    m = build_surface(2, 1)
    rng = np.random.default_rng(seed)
    for k in range(3):
        x = random_configuration(m, rng, amplitude=0.5)
        v = random_tangent(x, rng)
        vert = TangentVector.from_cochains(
            m, np.zeros((m.nf, 2, 2)), v.a_cochain, v.psidot_cochain
        )
        u = rng.standard_normal((m.nv, 3))
        zu = moment.GaugeParameter(u=u)
        entries.append(
            _entry(
                f"pure-gauge[corlette,{k}]",
                moment.hamiltonian_check("corlette", x, zu, vert)["rel_error"],
                1e-8,
            )
        )
        for sel in ("extended_J", "extended_I"):
            entries.append(
                _entry(
                    f"pure-gauge[{sel},{k}]",
                    moment.hamiltonian_check(sel, x, zu, v, 0.37, -1)["rel_error"],
                    1e-8,
                )
            )
        zc = moment.GaugeParameter(
            y=rng.standard_normal((m.nf, 2)),
            uc=rng.standard_normal((m.nv, 3)) + 1j * rng.standard_normal((m.nv, 3)),
        )
        entries.append(
            _entry(
                f"flat[full,{k}]", moment.hamiltonian_check("flat", x, zc, v)["rel_error"], 1e-8
            )
        )

    # f != 0: first-order convergence over refinements 0/1/2
    for sel, alpha in (("scalar", 0.0), ("extended_J", 0.3), ("extended_I", 0.3)):
        errs = []
        for m_, x_, f_, u_, v_ in _refinement_family(2, 11):
            zeta = (
                moment.GaugeParameter(f=f_)
                if sel == "scalar"
                else moment.GaugeParameter(f=f_, u=u_)
            )
            eps = -1 if sel.startswith("ext") else 1
            chk = moment.hamiltonian_check(sel, x_, zeta, v_, alpha, eps)
            scale = v_.norm(m_) * (1.0 + np.abs(f_).max() + np.abs(u_).max())
            errs.append(chk["abs_error"] / scale)
        slope = 0.5 * np.log2(errs[0] / errs[2])
        entries.append(
            {
                "name": f"slope[{sel}]",
                "value": float(slope),
                "tol": 1.0,
                "passed": bool(slope >= 1.0),
            }
        )
    return entries


# ---------------------------------------------------------------------------
# refinement suite
# ---------------------------------------------------------------------------


def refinement_suite(seed: int = 11) -> list:
    entries = []
    fam = _refinement_family(2, seed)

    # anticommutator of the reconstructed Lie derivative
    errs = []
    for m_, x_, f_, u_, v_ in fam:
        eta = dec.hamiltonian_field(m_, f_)
        L = dec.lie_derivative_J(m_, eta, x_.J)
        ac = np.einsum("fij,fjk->fik", L, x_.J) + np.einsum("fij,fjk->fik", x_.J, L)
        errs.append(np.abs(ac).max() / max(np.abs(L).max(), 1e-30))
    slope = 0.5 * np.log2(errs[0] / errs[2])
    entries.append({"name": "slope[lie-anticommutator]", "value": float(slope), "tol": 1.0, "passed": bool(slope >= 1.0)})

    # residual norms under a varying gauge transformation (the flat system:
    # its components involve no representation conversions, so the norm
    # itself converges and the invariance defect is first order)
    errs = []
    for m_, x_, f_, u_, v_ in fam:
        g = lie.exp_su2(0.5 * u_)
        gx = gauge_transform(x_, g)
        n0 = residual_norms(m_, residual("Flat", x_))["total"]
        n1 = residual_norms(m_, residual("Flat", gx))["total"]
        errs.append(abs(n1 - n0) / max(n0, 1e-30))
    slope = 0.5 * np.log2(errs[0] / errs[2])
    entries.append({"name": "slope[gauge-invariance]", "value": float(slope), "tol": 0.9, "passed": bool(slope >= 0.9)})

    # d/dt of gauge_transform matches the infinitesimal action (whitney level)
    errs = []
    for m_, x_, f_, u_, v_ in fam:
        h = 1e-5
        gp = lie.exp_su2(h * u_)
        gm = lie.exp_su2(-h * u_)
        xp = gauge_transform(x_, gp)
        xm = gauge_transform(x_, gm)
        dA = dec.whitney(m_, (xp.A - xm.A) / (2 * h))
        dpsi = dec.whitney(m_, (xp.psi - xm.psi) / (2 * h))
        act = moment.infinitesimal_action("P", x_, moment.GaugeParameter(u=u_))
        err = max(np.abs(dA - act.a_face).max(), np.abs(dpsi - act.psidot_face).max())
        errs.append(err / max(np.abs(act.a_face).max(), 1e-30))
    # preasymptotic on the coarse triple; the bracket representations agree
    # at first order, so anything clearly converging passes
    slope = 0.5 * np.log2(errs[0] / errs[2])
    entries.append({"name": "slope[gauge-vs-action]", "value": float(slope), "tol": 0.75, "passed": bool(slope >= 0.75)})
    return entries


# ---------------------------------------------------------------------------
# solver suite
# ---------------------------------------------------------------------------


def solver_suite() -> list:
    entries = []
    # constant curvature (genus 2, <= 300 faces)
    J, rep = fixtures.cc_structure(2, 1)
    m = fixtures.mesh(2, 1)
    entries.append(_entry("cc[sup|S-c|]", rep.residual_norm, 1e-6))
    S = dec.scalar_curvature(m, J)
    entries.append(_entry("cc[S<0]", 0.0 if np.all(S < 0) else 1.0, 0.5))

    # harmonic fixture
    x0 = fixtures.harmonic_fixture(2, 1)
    xh, reph = solve.solve_harmonic(x0, solve.SolverConfig(tol=1e-10, max_iter=120))
    hn = residual_norms(m, residual("Harmonicity", xh))
    entries.append(_entry("harmonic[residual]", hn["total"], 1e-8))
    flat0 = residual_norms(m, flat_residual(x0))["total"]
    flat1 = residual_norms(m, flat_residual(xh))["total"]
    entries.append(_entry("harmonic[flat-budget]", flat1, 10 * max(flat0, 1e-12)))

    # hitchin fixture and the circle cross-map
    (Ah, phih), repH, xHit = fixtures.hitchin_fixture(2, 1)
    hitn = residual_norms(m, residual("Hitchin", xHit))
    entries.append(_entry("hitchin[residual]", hitn["total"], 1e-8))
    cross = residual_norms(m, residual("Harmonicity", xHit))
    entries.append(_entry("circle[cross-map]", cross["total"], 10 * 1e-8))

    # continuations
    for system in ("CoupledHarmonic", "CoupledHitchin"):
        results, ok = fixtures.continuation(system)
        entries.append(_entry(f"continuation[{system}]", 0.0 if ok else 1.0, 0.5))
        worst = max(r["norms"]["total"] for r in results if "norms" in r)
        entries.append(_entry(f"continuation[{system},residual]", worst, 1e-6))
        kmax = max(r["kernel_dim"] for r in results if r["kernel_dim"] is not None)
        entries.append(_entry(f"continuation[{system},kernel]", kmax, 0.5))
    # alpha-independence of the CoupledHitchin scalar residual
    results, _ = fixtures.continuation("CoupledHitchin")
    drift = max(
        np.abs(
            residual("CoupledHitchin", r["config"], r["alpha"], -1)["scalar"]
            - residual("CoupledHitchin", r["config"], 0.0, -1)["scalar"]
        ).max()
        for r in results
    )
    entries.append(_entry("continuation[scalar-drift]", drift, 1e-10))
    return entries
