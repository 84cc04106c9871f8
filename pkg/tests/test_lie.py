import numpy as np

from surfgauge import lie


def test_basis_relations():
    e = np.eye(3)
    assert np.allclose(lie.bracket(e[0], e[1]), e[2])
    assert np.allclose(lie.bracket(e[1], e[2]), e[0])
    assert np.allclose(lie.bracket(e[2], e[0]), e[1])


def test_antisymmetry_and_jacobi():
    rng = np.random.default_rng(0)
    for _ in range(10):
        x, y, z = rng.standard_normal((3, 3))
        assert np.abs(lie.bracket(x, x)).max() < 1e-15
        jac = (
            lie.bracket(x, lie.bracket(y, z))
            + lie.bracket(y, lie.bracket(z, x))
            + lie.bracket(z, lie.bracket(x, y))
        )
        assert np.abs(jac).max() < 1e-14


def test_form_B():
    e = np.eye(3)
    assert lie.form_B(e[0], e[0]) == 1.0
    assert lie.form_B(e[0], e[1]) == 0.0
    rng = np.random.default_rng(1)
    for _ in range(10):
        x, y, z = rng.standard_normal((3, 3))
        res = lie.form_B(lie.bracket(z, x), y) + lie.form_B(x, lie.bracket(z, y))
        assert abs(res) < 1e-14
        assert lie.form_B(x, x) > 0 or np.allclose(x, 0)


def test_tau():
    e1 = np.array([1.0, 0, 0])
    assert np.allclose(lie.tau(e1), e1)
    assert np.allclose(lie.tau(1j * e1), -1j * e1)
    rng = np.random.default_rng(2)
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert np.allclose(lie.tau(lie.tau(z)), z)


def test_exp_log_roundtrips():
    rng = np.random.default_rng(3)
    xi = 0.7 * rng.standard_normal((8, 3))
    g = lie.exp_su2(xi)
    # unitary with unit determinant
    assert np.abs(g @ np.conj(np.swapaxes(g, 1, 2)) - np.eye(2)).max() < 1e-13
    assert np.abs(np.linalg.det(g) - 1).max() < 1e-13
    assert np.abs(lie.log_su2(g) - xi).max() < 1e-12
    tiny = 1e-7 * rng.standard_normal((4, 3))
    assert np.abs(lie.log_su2(lie.exp_su2(tiny)) - tiny).max() < 1e-18

    z = 0.4 * (rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3)))
    assert np.abs(lie.log_sl2(lie.exp_sl2(z)) - z).max() < 1e-12


def test_adjoint_is_bracket_compatible():
    rng = np.random.default_rng(4)
    xi = rng.standard_normal(3)
    g = lie.exp_su2(xi)
    ad = lie.adjoint_matrix(g)
    # orthogonal (B-isometry) and Ad[x,y] = [Ad x, Ad y]
    assert np.abs(ad @ ad.T - np.eye(3)).max() < 1e-13
    x, y = rng.standard_normal((2, 3))
    lhs = ad @ lie.bracket(x, y)
    rhs = lie.bracket(ad @ x, ad @ y)
    assert np.abs(lhs - rhs).max() < 1e-13
