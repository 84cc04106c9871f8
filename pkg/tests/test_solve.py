import numpy as np
import pytest

from surfgauge import dec, fixtures, kahler, moment, solve
from surfgauge.fields import (
    Configuration,
    TangentVector,
    codifferential,
    random_tangent,
    residual,
    residual_norms,
    to_unitary,
)
from surfgauge.mesh import build_surface


def test_solver_config_validation():
    with pytest.raises(ValueError):
        solve.SolverConfig(tol=-1.0).validate()
    with pytest.raises(ValueError):
        solve.SolverConfig(alpha_schedule=(0.0, 0.2, 0.1)).validate()
    solve.SolverConfig(alpha_schedule=(0.0, 0.1, 0.2)).validate()


def test_cc_metric_torus_fixed_point():
    m = build_surface(1, 1)
    J0 = dec.reference_J(m)
    J, rep = solve.solve_cc_metric(m, J0, solve.SolverConfig(tol=1e-9, max_iter=10))
    assert rep.converged and rep.iterations == 0
    assert np.abs(dec.scalar_curvature(m, J)).max() < 1e-9


def test_cc_metric_torus_perturbed_returns():
    m = build_surface(1, 1)
    rng = np.random.default_rng(0)
    J0 = dec.random_compatible_J(m, rng, amplitude=0.2)
    J, rep = solve.solve_cc_metric(m, J0, solve.SolverConfig(tol=1e-8, max_iter=300, newton_threshold=1.0))
    assert rep.converged
    assert np.abs(dec.scalar_curvature(m, J)).max() < 1e-8


def test_cc_metric_genus2():
    J, rep = fixtures.cc_structure(2, 1)
    m = fixtures.mesh(2, 1)
    assert rep.converged
    S = dec.scalar_curvature(m, J)
    assert np.abs(S - m.cc_target).max() < 1e-6
    assert np.all(S < 0)  # sign forced by Gauss-Bonnet
    # monotone objective along accepted steps
    phis = [t[1] for t in rep.trace]
    assert all(b <= a + 1e-12 for a, b in zip(phis, phis[1:]))


def test_harmonic_already_harmonic():
    x, _ = fixtures.coupled_seed(2, 1)
    y, rep = solve.solve_harmonic(x, solve.SolverConfig(tol=1e-8, max_iter=10))
    assert rep.converged and rep.iterations == 0
    assert np.abs(y.psi - x.psi).max() < 1e-12


def test_harmonic_abelian_torus_unchanged():
    m = build_surface(1, 1)
    J0 = dec.reference_J(m)
    # constant-form abelian psi: exactly harmonic on the flat torus
    gamma = np.array([0.8, -0.3])
    psi = np.zeros((m.ne, 3))
    psi[:, 2] = dec.constant_form_cochain(m, np.tile(gamma, (m.nf, 1)))
    x = Configuration(m, J0, np.zeros((m.ne, 3)), psi)
    assert residual_norms(m, residual("Harmonicity", x))["total"] < 1e-12
    y, rep = solve.solve_harmonic(x, solve.SolverConfig(tol=1e-9, max_iter=20))
    assert rep.converged
    assert np.abs(y.psi - psi).max() < 1e-10


def test_harmonic_fixture_recovery():
    x0 = fixtures.harmonic_fixture(2, 1)
    m = x0.mesh
    xh, rep = solve.solve_harmonic(x0, solve.SolverConfig(tol=1e-10, max_iter=120))
    assert rep.converged
    norms = residual_norms(m, residual("Harmonicity", xh))
    assert norms["total"] < 1e-8
    assert np.linalg.norm(codifferential(m, xh.J, xh.A, xh.psi)) < 1e-8


def test_hitchin_zero_branch_and_circle():
    (Ah, phih), rep, x = fixtures.hitchin_fixture(2, 1)
    m = x.mesh
    assert rep.converged
    assert residual_norms(m, residual("Hitchin", x))["total"] < 1e-8
    # circle cross-map preserves solution status within 10x tolerance
    assert residual_norms(m, residual("Harmonicity", x))["total"] < 1e-7
    # to_unitary of the returned phi reproduces the configuration psi
    assert np.abs(to_unitary(m, phih) - x.psi).max() < 1e-10


def test_flat_connection_irreducible():
    A, margin = fixtures.irreducible_flat(2, 1)
    m = fixtures.mesh(2, 1)
    from surfgauge.fields import curvature

    assert residual_norms(m, {"F": curvature(m, A)})["total"] < 1e-10
    assert margin > 1e-3


def test_continuation_trivial_schedule():
    x, _ = fixtures.coupled_seed(2, 1)
    results, ok = solve.continue_alpha(
        "CoupledHarmonic", x, -1, [0.0], solve.SolverConfig(tol=1e-8, max_iter=5)
    )
    assert ok and len(results) == 1
    assert np.abs(results[0]["config"].A - x.A).max() == 0.0
    with pytest.raises(ValueError):
        solve.continue_alpha("Flat", x, -1, [0.0], solve.SolverConfig())
    with pytest.raises(ValueError):
        solve.continue_alpha("CoupledHarmonic", x, 0, [0.0], solve.SolverConfig())


@pytest.mark.parametrize("system", ["CoupledHarmonic", "CoupledHitchin"])
def test_continuation_full(system):
    results, ok = fixtures.continuation(system)
    assert ok
    assert len(results) == 6
    for r in results:
        assert r["norms"]["total"] < 1e-6
        assert r["kernel_dim"] == 0


def test_continuation_scalar_alpha_independence():
    results, _ = fixtures.continuation("CoupledHitchin")
    for r in results:
        s1 = residual("CoupledHitchin", r["config"], r["alpha"], -1)["scalar"]
        s0 = residual("CoupledHitchin", r["config"], 0.0, -1)["scalar"]
        assert np.abs(s1 - s0).max() < 1e-10


def test_continuation_reducible_exit():
    """The abelian branch has a gauge stabilizer: reported as a U* exit."""
    x = fixtures.abelian_harmonic(2, 1)
    m = x.mesh
    norms = residual_norms(m, residual("CoupledHarmonic", x, 0.0, -1))
    assert norms["curvature"] < 1e-10  # abelian: brackets vanish
    assert norms["scalar"] < 1e-6  # cc structure
    ker = solve.gauge_fix_kernel_dim("J", x, 0.05, -1)
    assert ker >= 1
    with pytest.raises(RuntimeError):
        solve.gauge_fix("J", x, 0.05, -1, TangentVector.from_cochains(
            m, np.zeros((m.nf, 2, 2)), np.zeros((m.ne, 3)), np.zeros((m.ne, 3))
        ))


@pytest.mark.parametrize("family", ["J", "I"])
def test_gauge_fix_properties(family, config2, rng):
    x = config2
    m = x.mesh
    alpha, eps = 0.3, -1
    gsel = f"g_coupled_{family}"
    for _ in range(3):
        v = random_tangent(x, rng)
        piv, rest = solve.gauge_fix(family, x, alpha, eps, v)
        # decomposition and idempotence
        assert (piv + rest - TangentVector(v.jdot, v.a_face, v.psidot_face)).norm(m) < 1e-10
        piv2, rest2 = solve.gauge_fix(family, x, alpha, eps, piv)
        assert (piv2 - piv).norm(m) < 1e-8 * (1 + v.norm(m))
        # g-orthogonality
        g = kahler.eval_form(gsel, x, piv, rest, alpha, eps)
        assert abs(g) < 1e-8 * max(v.norm(m) ** 2, 1.0)
    # pure gauge directions are recovered entirely
    zeta = moment.random_parameter(m, rng, "extended_J")
    w = moment.infinitesimal_action("Pt" if family == "J" else "P", x, zeta)
    pw, rw = solve.gauge_fix(family, x, alpha, eps, w)
    assert rw.norm(m) < 1e-8 * max(w.norm(m), 1.0)
    # already-orthogonal vectors project to zero
    v = random_tangent(x, rng)
    piv, rest = solve.gauge_fix(family, x, alpha, eps, v)
    pr, rr = solve.gauge_fix(family, x, alpha, eps, rest)
    assert pr.norm(m) < 1e-8 * max(v.norm(m), 1.0)


@pytest.mark.parametrize("family", ["J", "I"])
def test_moduli_basis_and_metric(family):
    x, alpha, basis, info, report = fixtures.moduli_at_endpoint(family)
    m = x.mesh
    assert info["dim"] > 0 and info["gap_ok"]
    # each basis vector solves the linearized system
    jb = dec.anticommuting_basis(m, x.J)
    system = "CoupledHarmonic" if family == "J" else "CoupledHitchin"
    Lmat = solve.linearization_matrix(system, x, alpha, -1, jb)
    for vec in info["basis_mat"][:4]:
        assert np.linalg.norm(Lmat @ vec) < 1e-8
    if family == "J":
        # gauge-fixing residual: the exact adjoint rows annihilate the basis
        P, s0 = solve.action_matrix("J", x, jb)
        G = solve.form_gram("J", x, alpha, -1, jb)
        rows = P.T @ G @ solve._cochain_to_face_matrix(x, jb)
        scale = np.linalg.norm(rows) / np.sqrt(rows.size)
        for vec in info["basis_mat"][:4]:
            assert np.linalg.norm(rows @ vec) < 1e-8 * max(scale, 1.0) * len(vec)
    if family == "I":
        assert info["principal_angle"] < 1e-6
    # matrices: antisymmetric / symmetric / explicit-formula agreement / g = omega(. , S .)
    assert report.checks["omega_antisymmetry"] < 1e-8
    assert report.checks["g_symmetry"] < 1e-8
    assert report.checks["explicit_vs_generic"] < 1e-8
    assert report.checks["omega_eq_g_structure"] < 1e-8
    assert report.checks["nondegenerate"]
    assert report.signature[2] == 0
    assert report.kernel_dim_L == 0
    d = report.to_dict()
    assert d["basis_dim"] == report.basis_dim


def test_moduli_vertical_block_is_alpha_hk():
    """Restriction of g_I to the fibre directions equals alpha * hyperkahler."""
    x, alpha, basis, info, report = fixtures.moduli_at_endpoint("I")
    m = x.mesh
    rng = np.random.default_rng(8)
    for _ in range(5):
        v = random_tangent(x, rng)
        w = random_tangent(x, rng)
        vv = TangentVector(np.zeros_like(v.jdot), v.a_face, v.psidot_face)
        ww = TangentVector(np.zeros_like(w.jdot), w.a_face, w.psidot_face)
        lhs = kahler.eval_form("g_coupled_I", x, vv, ww, alpha, -1)
        rhs = alpha * kahler.eval_form("hk_metric", x, vv, ww)
        assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))
    # and on the vertical combinations of the basis itself, if any exist
    Bj = np.stack([b.jdot.ravel() for b in basis])
    u_, s_, vt_ = np.linalg.svd(Bj, full_matrices=False)
    combos = u_[:, s_ < 1e-8 * max(s_[0], 1e-300)].T if len(s_) else []
    for c in combos[:3]:
        vert = None
        for ci, b in zip(c, basis):
            vert = b * ci if vert is None else vert + b * ci
        lhs = kahler.eval_form("g_coupled_I", x, vert, vert, alpha, -1)
        rhs = alpha * kahler.eval_form("hk_metric", x, vert, vert)
        assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))


def test_moduli_dimension_stable_under_perturbation():
    x, alpha, basis, info, report = fixtures.moduli_at_endpoint("J")
    m = x.mesh
    rng = np.random.default_rng(3)
    xp = Configuration(
        m,
        dec.normalize_J(x.J + 1e-6 * dec.anticommuting_projection(x.J, rng.standard_normal((m.nf, 2, 2)))),
        x.A + 1e-6 * rng.standard_normal((m.ne, 3)),
        x.psi + 1e-6 * rng.standard_normal((m.ne, 3)),
    )
    basis2, info2 = solve.moduli_basis("J", xp, alpha, -1)
    assert info2["dim"] == info["dim"]
