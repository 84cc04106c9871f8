import numpy as np
import pytest

from surfgauge import dec, kahler
from surfgauge.fields import Configuration, TangentVector, random_tangent


def vertical(v):
    return TangentVector(np.zeros_like(v.jdot), v.a_face, v.psidot_face)


def test_fibre_I_formula_and_squares(config2, rng):
    x = config2
    m = x.mesh
    v = vertical(random_tangent(x, rng))
    iv = kahler.apply_structure("fibre_I", x, v)
    assert np.abs(iv.a_face - dec.apply_J(x.J, v.a_face)).max() < 1e-14
    assert np.abs(iv.psidot_face + dec.apply_J(x.J, v.psidot_face)).max() < 1e-14
    for sel in kahler.STRUCTURES:
        w = v if sel.startswith("fibre") else random_tangent(x, rng)
        sq = kahler.apply_structure(sel, x, kahler.apply_structure(sel, x, w))
        assert (sq + w).norm(m) < 1e-12 * (1 + w.norm(m)), sel
    with pytest.raises(ValueError):
        kahler.apply_structure("fibre_I", x, random_tangent(x, rng))
    with pytest.raises(ValueError):
        kahler.apply_structure("nope", x, v)


def test_quaternion_relations(config2, rng):
    x = config2
    for _ in range(5):
        v = vertical(random_tangent(x, rng))
        ij = kahler.apply_structure("fibre_I", x, kahler.apply_structure("fibre_J", x, v))
        kk = kahler.apply_structure("fibre_K", x, v)
        assert (ij - kk).norm(x.mesh) < 1e-12 * (1 + v.norm(x.mesh))
        jk = kahler.apply_structure("fibre_J", x, kahler.apply_structure("fibre_K", x, v))
        ii = kahler.apply_structure("fibre_I", x, v)
        assert (jk - ii).norm(x.mesh) < 1e-12 * (1 + v.norm(x.mesh))


def test_form_antisymmetry_bilinearity(config2, rng):
    x = config2
    v1, v2, v3 = (random_tangent(x, rng) for _ in range(3))
    for sel in ("omega_J", "sigma_J", "sigma_I", "fujiki", "coupled_J", "coupled_I"):
        a = kahler.eval_form(sel, x, v1, v2, 0.4, -1)
        b = kahler.eval_form(sel, x, v2, v1, 0.4, -1)
        assert abs(a + b) < 1e-12 * (1 + abs(a)), sel
        lin = kahler.eval_form(sel, x, v1 + 2.0 * v3, v2, 0.4, -1)
        parts = a + 2.0 * kahler.eval_form(sel, x, v3, v2, 0.4, -1)
        assert abs(lin - parts) < 1e-11 * (1 + abs(lin)), sel
    with pytest.raises(ValueError):
        kahler.eval_form("coupled_J", x, v1, v2, 0.4, 0)


def test_sigma_restrictions_and_g_omega(config2, rng):
    x = config2
    v1 = random_tangent(x, rng)
    v2 = random_tangent(x, rng)
    vv1, vv2 = vertical(v1), vertical(v2)
    sc = 1 + v1.norm(x.mesh) * v2.norm(x.mesh)
    assert abs(kahler.eval_form("sigma_J", x, vv1, vv2) - kahler.eval_form("omega_J", x, vv1, vv2)) < 1e-12 * sc
    assert abs(kahler.eval_form("sigma_I", x, vv1, vv2) - kahler.eval_form("omega_I", x, vv1, vv2)) < 1e-12 * sc
    for fam in ("J", "I"):
        sv2 = kahler.apply_structure(f"total_{fam}", x, v2)
        lhs = kahler.eval_form(f"coupled_{fam}", x, v1, sv2, 0.37, -1)
        rhs = kahler.eval_form(f"g_coupled_{fam}", x, v1, v2, 0.37, -1)
        assert abs(lhs - rhs) < 1e-12 * sc
    # hk positivity and fujiki positivity on pure-Jdot horizontals
    assert kahler.eval_form("hk_metric", x, vv1, vv1) >= 0
    jd = dec.anticommuting_projection(x.J, rng.standard_normal((x.mesh.nf, 2, 2)))
    h = kahler.horizontal_lift("J", x, jd)
    val = kahler.eval_form("fujiki", x, h, kahler.apply_structure("total_J", x, h))
    assert val > 0


def test_omega_IK_decomposition_sign(config2, rng):
    x = config2
    v1, v2 = vertical(random_tangent(x, rng)), vertical(random_tangent(x, rng))
    om = kahler.eval_form("Omega_J_complex", x, v1, v2)
    oI = kahler.eval_form("omega_I", x, v1, v2)
    oK = kahler.eval_form("omega_K", x, v1, v2)
    sc = 1 + abs(om)
    # measured discrete convention: Omega = omega_I - i omega_K
    assert abs(om - (oI - 1j * oK)) < 1e-12 * sc
    assert abs(om - (oI + 1j * oK)) > 1e-6 * sc


def test_horizontal_projection(config2, rng):
    x = config2
    m = x.mesh
    v = random_tangent(x, rng)
    for fam in ("J", "I"):
        h, vert = kahler.horizontal_project(fam, x, v)
        assert (h + vert - v).norm(m) < 1e-12 * (1 + v.norm(m))
        assert np.abs(vert.jdot).max() == 0.0
        # idempotence: vertical part of the vertical is itself
        again = kahler.vertical_project(fam, x, vert)
        assert (again - vert).norm(m) < 1e-13 * (1 + v.norm(m))
        hh, hv = kahler.horizontal_project(fam, x, h)
        assert hv.norm(m) < 1e-12 * (1 + v.norm(m))
    vv = vertical(v)
    h, vert = kahler.horizontal_project("J", x, vv)
    assert h.norm(m) < 1e-14
    # membership: (Jd, psi(Jd), (J psi)(Jd)) is horizontal
    lift = kahler.horizontal_lift("J", x, v.jdot)
    _, lv = kahler.horizontal_project("J", x, lift)
    assert lv.norm(m) < 1e-13 * (1 + lift.norm(m))
    # sigma_J(horizontal, vertical) = 0
    for _ in range(20):
        w = vertical(random_tangent(x, rng))
        assert abs(kahler.eval_form("sigma_J", x, lift, w)) < 1e-10 * (1 + lift.norm(m) * w.norm(m))


def test_gamma_I_commutes(config2, rng):
    x = config2
    v = random_tangent(x, rng)
    iv = kahler.apply_structure("total_I", x, v)
    lhs = kahler.vertical_project("I", x, iv)
    rhs = kahler.apply_structure("fibre_I", x, kahler.vertical_project("I", x, v))
    assert (lhs - rhs).norm(x.mesh) < 1e-12 * (1 + v.norm(x.mesh))


def test_potentials(config2, rng):
    x = config2
    v1 = random_tangent(x, rng)
    v2 = random_tangent(x, rng)
    for which in ("sigma_J-potential", "sigma_I-decomposition"):
        rep = kahler.potential_and_ddc(x, which, v1, v2)
        assert rep["rel_error"] < 1e-6, (which, rep)
    rep = kahler.potential_and_ddc(x, "Phi", v1, v2, alpha=0.4, eps=-1)
    assert rep["rel_error"] < 1e-6
    # psi = 0: dd^c nu vanishes on pure-Jdot pairs
    m = x.mesh
    x0 = Configuration(m, x.J, x.A, np.zeros((m.ne, 3)))
    j1 = TangentVector(v1.jdot, np.zeros((m.nf, 2, 3)), np.zeros((m.nf, 2, 3)))
    j2 = TangentVector(v2.jdot, np.zeros((m.nf, 2, 3)), np.zeros((m.nf, 2, 3)))
    val = kahler.ddc_nu(kahler.FaceState.of(x0), j1, j2)
    assert abs(val) < 1e-10
    with pytest.raises(ValueError):
        kahler.potential_and_ddc(x, "Phi", v1, v2, alpha=0.0)
    with pytest.raises(ValueError):
        kahler.potential_and_ddc(x, "nope", v1, v2)


def test_form_closedness(config2, rng):
    x = config2
    v1, v2, v3 = (random_tangent(x, rng) for _ in range(3))
    sc = v1.norm(x.mesh) * v2.norm(x.mesh) * v3.norm(x.mesh)
    for sel in ("sigma_J", "sigma_I", "fujiki", "coupled_J"):
        val = kahler.form_closedness(x, sel, v1, v2, v3, 0.4, -1)
        assert abs(val) < 1e-6 * sc, sel


def test_ehresmann_curvature(config2, rng):
    x = config2
    m = x.mesh
    jd1 = dec.anticommuting_projection(x.J, rng.standard_normal((m.nf, 2, 2)))
    jd2 = dec.anticommuting_projection(x.J, rng.standard_normal((m.nf, 2, 2)))
    for fam in ("J", "I"):
        rep = kahler.ehresmann_curvature(fam, x, jd1, jd2)
        assert rep["rel_error"] < 1e-4, fam
        zero = kahler.ehresmann_curvature_closed(fam, x, jd1, jd1)
        assert zero.norm(m) < 1e-13
        x0 = Configuration(m, x.J, x.A, np.zeros((m.ne, 3)))
        assert kahler.ehresmann_curvature_closed(fam, x0, jd1, jd2).norm(m) == 0.0
        res = kahler.kfib_identity_residual(fam, x, jd1, jd2, random_tangent(x, rng))
        assert res < 1e-4, fam


def test_nijenhuis(config2, rng):
    x = config2
    m = x.mesh
    v1 = random_tangent(x, rng)
    v2 = random_tangent(x, rng)
    jd = TangentVector(v1.jdot, np.zeros((m.nf, 2, 3)), np.zeros((m.nf, 2, 3)))
    vv1 = vertical(v1)
    vv2 = vertical(v2)
    assert kahler.nijenhuis_residual(x, v1, v1) < 1e-12
    assert kahler.nijenhuis_residual(x, jd, vv2) < 1e-6
    assert kahler.nijenhuis_residual(x, vv1, vv2) < 1e-10
    assert kahler.nijenhuis_residual(x, v1, v2) < 1e-6


def test_signature_probe(config2, rng):
    x = config2
    m = x.mesh
    jd = dec.anticommuting_projection(x.J, rng.standard_normal((m.nf, 2, 2)))
    lams = np.array([0.0, 0.5, 1.0, 1.5, 2.0])
    for fam in ("J", "I"):
        probe = kahler.signature_probe(fam, x, jd, lams, 0.4, 1)
        assert probe["fit_residual"] < 1e-10
        assert probe["c0"] > 0 and probe["c2"] > 0
        assert "lambda0" in probe
        # at lambda = 0 the value is the fujiki term
        h = kahler.horizontal_lift(fam, Configuration(m, x.J, x.A, np.zeros((m.ne, 3))), jd)
        fuj = kahler.eval_form("g_fujiki", x, h, h)
        assert abs(probe["values"][0] - fuj) < 1e-10 * (1 + abs(fuj))
        probe_neg = kahler.signature_probe(fam, x, jd, lams, 0.4, -1)
        assert probe_neg["negative_definite"]
        assert probe_neg["fit_residual"] < 1e-10
    with pytest.raises(ValueError):
        kahler.signature_probe("J", x, 0.0 * jd, lams, 0.4, 1)
