"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line
with the measured quantity."""

import time

import numpy as np

from surfgauge import checks, dec, fixtures, kahler, moment, solve
from surfgauge.fields import (
    TangentVector,
    random_configuration,
    random_tangent,
    residual,
    residual_norms,
)
from surfgauge.mesh import build_surface


def report(num, ok, detail):
    print(f"[criterion {num}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_1_identity_suite():
    t0 = time.time()
    entries = checks.identity_suite(n_inputs=20, seed=0)
    elapsed = time.time() - t0
    bad = [e for e in entries if not e["passed"]]
    worst = max(entries, key=lambda e: e["value"] / e["tol"])
    ok = not bad and elapsed < 60
    report(
        1,
        ok,
        f"{len(entries)} machine-precision identities on 20 seeded inputs, "
        f"worst {worst['name']}={worst['value']:.2e}, {elapsed:.1f}s",
    )


def test_criterion_2_hamiltonian_suite():
    t0 = time.time()
    entries = checks.hamiltonian_suite(seed=0)
    elapsed = time.time() - t0
    bad = [e for e in entries if not e["passed"]]
    slopes = {e["name"]: e["value"] for e in entries if e["name"].startswith("slope")}
    ok = not bad and elapsed < 600
    report(
        2,
        ok,
        f"pure-gauge at 1e-8 for all five selectors; f-slopes {slopes}; {elapsed:.1f}s",
    )


def test_criterion_3_ehresmann_and_nijenhuis():
    m = build_surface(2, 1)
    rng = np.random.default_rng(1)
    worst_f, worst_n = 0.0, 0.0
    for _ in range(3):
        x = random_configuration(m, rng, amplitude=0.5)
        jd1 = dec.anticommuting_projection(x.J, rng.standard_normal((m.nf, 2, 2)))
        jd2 = dec.anticommuting_projection(x.J, rng.standard_normal((m.nf, 2, 2)))
        for fam in ("J", "I"):
            worst_f = max(worst_f, kahler.ehresmann_curvature(fam, x, jd1, jd2)["rel_error"])
        v1 = random_tangent(x, rng)
        v2 = random_tangent(x, rng)
        worst_n = max(worst_n, kahler.nijenhuis_residual(x, v1, v2))
    ok = worst_f < 1e-4 and worst_n < 1e-6
    report(3, ok, f"curvature closed-vs-FD {worst_f:.2e} (<1e-4), Nijenhuis {worst_n:.2e} (<1e-6)")


def test_criterion_4_potentials():
    m = build_surface(2, 1)
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(3):
        x = random_configuration(m, rng, amplitude=0.5)
        v1 = random_tangent(x, rng)
        v2 = random_tangent(x, rng)
        for which, kw in (
            ("sigma_J-potential", {}),
            ("sigma_I-decomposition", {}),
            ("Phi", {"alpha": 0.4, "eps": -1}),
        ):
            worst = max(worst, kahler.potential_and_ddc(x, which, v1, v2, **kw)["rel_error"])
    report(4, worst < 1e-6, f"dd^c potential checks, worst relative error {worst:.2e} (<1e-6)")


def test_criterion_5_signature_probe():
    m = build_surface(2, 1)
    rng = np.random.default_rng(3)
    x = random_configuration(m, rng, amplitude=0.5)
    jd = dec.anticommuting_projection(x.J, rng.standard_normal((m.nf, 2, 2)))
    lams = np.linspace(0.0, 2.0, 7)
    ok = True
    detail = []
    for fam in ("J", "I"):
        pos = kahler.signature_probe(fam, x, jd, lams, 0.4, 1)
        neg = kahler.signature_probe(fam, x, jd, lams, 0.4, -1)
        ok &= pos["fit_residual"] < 1e-10 and neg["fit_residual"] < 1e-10
        ok &= np.isfinite(pos["lambda0"]) and pos["lambda0"] > 0
        ok &= bool(neg["negative_definite"])
        detail.append(f"{fam}: fit {pos['fit_residual']:.1e}, lambda0 {pos['lambda0']:.3f}")
    report(5, ok, "quadratic signature probes; " + "; ".join(detail))


def test_criterion_6_solver_witnesses():
    t0 = time.time()
    m = fixtures.mesh(2, 1)
    assert m.nf <= 300
    J, repcc = fixtures.cc_structure(2, 1)
    S = dec.scalar_curvature(m, J)
    cc_res = float(np.abs(S - m.cc_target).max())

    x0 = fixtures.harmonic_fixture(2, 1)
    xh, reph = solve.solve_harmonic(x0, solve.SolverConfig(tol=1e-10, max_iter=120))
    harm_res = residual_norms(m, residual("Harmonicity", xh))["total"]

    (Ah, phih), repH, xHit = fixtures.hitchin_fixture(2, 1)
    hit_res = residual_norms(m, residual("Hitchin", xHit))["total"]
    cross = residual_norms(m, residual("Harmonicity", xHit))["total"]
    elapsed = time.time() - t0
    ok = (
        cc_res < 1e-6
        and harm_res < 1e-8
        and hit_res < 1e-8
        and cross < 10 * 1e-8
        and elapsed < 900
    )
    report(
        6,
        ok,
        f"cc |S-c|={cc_res:.1e} (<1e-6), harmonic {harm_res:.1e} (<1e-8), "
        f"hitchin {hit_res:.1e} (<1e-8), circle cross {cross:.1e} (<1e-7), {elapsed:.0f}s (<900)",
    )


def test_criterion_7_continuation():
    details = []
    ok = True
    for system in ("CoupledHarmonic", "CoupledHitchin"):
        results, done = fixtures.continuation(system)
        worst = max(r["norms"]["total"] for r in results if "norms" in r)
        kmax = max(r["kernel_dim"] for r in results)
        ok &= done and worst < 1e-6 and kmax == 0 and len(results) == 6
        details.append(f"{system}: residual {worst:.1e}, kernel {kmax}")
    results, _ = fixtures.continuation("CoupledHitchin")
    drift = max(
        np.abs(
            residual("CoupledHitchin", r["config"], r["alpha"], -1)["scalar"]
            - residual("CoupledHitchin", r["config"], 0.0, -1)["scalar"]
        ).max()
        for r in results
    )
    ok &= drift < 1e-10
    report(7, ok, "; ".join(details) + f"; scalar drift {drift:.1e} (<1e-10)")


def test_criterion_8_moduli_structure():
    ok = True
    details = []
    for fam in ("J", "I"):
        x, alpha, basis, info, rep = fixtures.moduli_at_endpoint(fam)
        c = rep.checks
        ok &= c["omega_antisymmetry"] < 1e-8
        ok &= c["g_symmetry"] < 1e-8
        ok &= c["omega_eq_g_structure"] < 1e-8
        ok &= c["explicit_vs_generic"] < 1e-8
        ok &= c["nondegenerate"] and rep.signature[2] == 0
        details.append(f"{fam}: dim {rep.basis_dim}, signature {rep.signature}")
    # (c) the vertical restriction of g_I equals alpha * hyperkahler
    x, alpha, basis, info, rep = fixtures.moduli_at_endpoint("I")
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(5):
        v = random_tangent(x, rng)
        w = random_tangent(x, rng)
        vv = TangentVector(np.zeros_like(v.jdot), v.a_face, v.psidot_face)
        ww = TangentVector(np.zeros_like(w.jdot), w.a_face, w.psidot_face)
        lhs = kahler.eval_form("g_coupled_I", x, vv, ww, alpha, -1)
        rhs = alpha * kahler.eval_form("hk_metric", x, vv, ww)
        worst = max(worst, abs(lhs - rhs) / (1 + abs(rhs)))
    ok &= worst < 1e-8
    report(8, ok, "; ".join(details) + f"; vertical block vs alpha*hk {worst:.1e} (<1e-8)")


def test_criterion_9_gauge_fixing():
    m = build_surface(2, 1)
    rng = np.random.default_rng(5)
    alpha, eps = 0.3, -1
    worst_idem, worst_orth, worst_pure = 0.0, 0.0, 0.0
    n = 0
    for k in range(4):
        x = random_configuration(m, rng, amplitude=0.5)
        for fam in ("J", "I"):
            gsel = f"g_coupled_{fam}"
            for _ in range(3):
                v = random_tangent(x, rng)
                piv, rest = solve.gauge_fix(fam, x, alpha, eps, v)
                piv2, _ = solve.gauge_fix(fam, x, alpha, eps, piv)
                worst_idem = max(worst_idem, (piv2 - piv).norm(m) / max(v.norm(m), 1.0))
                g = kahler.eval_form(gsel, x, piv, rest, alpha, eps)
                worst_orth = max(worst_orth, abs(g) / max(v.norm(m) ** 2, 1.0))
                n += 1
            zeta = moment.random_parameter(m, rng, "extended_J")
            w = moment.infinitesimal_action("Pt" if fam == "J" else "P", x, zeta)
            pw, rw = solve.gauge_fix(fam, x, alpha, eps, w)
            worst_pure = max(worst_pure, rw.norm(m) / max(w.norm(m), 1.0))
            n += 1
    ok = n >= 20 and worst_idem < 1e-8 and worst_orth < 1e-8 and worst_pure < 1e-8
    report(
        9,
        ok,
        f"{n} random inputs: idempotence {worst_idem:.1e}, orthogonality {worst_orth:.1e}, "
        f"pure-gauge recovery {worst_pure:.1e} (all <1e-8)",
    )
