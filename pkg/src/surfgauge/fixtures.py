"""Deterministic solver fixtures shared by the test suite and the CLI.

Everything is seeded and cached per process; the genus-2 fixtures are the
constructive witnesses behind the solver and continuation acceptance
criteria.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import dec, solve
from .fields import (
    Configuration,
    complex_gauge_transform,
    flat_residual,
    to_complex,
)
from .mesh import build_surface


@lru_cache(maxsize=None)
def mesh(genus: int, refinement: int):
    return build_surface(genus, refinement)


@lru_cache(maxsize=None)
def cc_structure(genus: int, refinement: int):
    """Constant-curvature complex structure from the reference one."""
    m = mesh(genus, refinement)
    J0 = dec.reference_J(m)
    if genus == 1:
        return J0, solve.SolveReport(True, 0, 0.0, "flat reference")
    J, rep = solve.solve_cc_metric(
        m, J0, solve.SolverConfig(tol=1e-8, max_iter=600, newton_threshold=1.0)
    )
    if not rep.converged:
        raise RuntimeError(f"cc metric fixture failed: {rep.message}")
    return J, rep


@lru_cache(maxsize=None)
def irreducible_flat(genus: int, refinement: int, seed: int = 0):
    """Irreducible flat su(2) connection (Gauss-Newton from seeded noise)."""
    m = mesh(genus, refinement)
    A, rep, margin = solve.solve_flat_connection(
        m, solve.SolverConfig(tol=1e-12, max_iter=80, seed=seed), amplitude=0.6
    )
    return A, margin


@lru_cache(maxsize=None)
def coupled_seed(genus: int, refinement: int):
    """Seed of both coupled systems at alpha = 0: constant-curvature J and an
    irreducible flat connection with vanishing Higgs field."""
    J, _ = cc_structure(genus, refinement)
    A, margin = irreducible_flat(genus, refinement)
    m = mesh(genus, refinement)
    return Configuration(m, J, A, np.zeros((m.ne, 3))), margin


@lru_cache(maxsize=None)
def harmonic_fixture(genus: int, refinement: int, seed: int = 5, amplitude: float = 0.02):
    """A flat, non-harmonic configuration near a known harmonic point:
    gauge-orbit perturbation re-flattened by minimum-norm Gauss-Newton."""
    x_star, _ = coupled_seed(genus, refinement)
    m = x_star.mesh
    rng = np.random.default_rng(seed)
    x0 = complex_gauge_transform(x_star, amplitude * rng.standard_normal((m.nv, 3)))

    def res(st):
        r = flat_residual(st)["F_D"] / np.sqrt(m.areas)[:, None]
        return r.ravel().view(float)

    def mv(st, e, t):
        a = e[: 3 * m.ne].reshape(m.ne, 3)
        p = e[3 * m.ne :].reshape(m.ne, 3)
        return Configuration(m, st.J, st.A + t * a, st.psi + t * p)

    x0, rep = solve._gauss_newton(
        x0, res, mv, 6 * m.ne, solve.SolverConfig(tol=1e-12, max_iter=60), "flatten"
    )
    if not rep.converged:
        raise RuntimeError("harmonic fixture flattening failed")
    return x0


@lru_cache(maxsize=None)
def abelian_harmonic(genus: int, refinement: int):
    """Exact-to-round-off abelian configuration: A = 0 and psi a discrete
    J-harmonic 1-form in a fixed algebra direction (reducible; used for the
    U*-exit path and nonzero-Higgs form evaluations)."""
    m = mesh(genus, refinement)
    J, _ = cc_structure(genus, refinement)
    W = m._whitney_matrix.toarray()
    unw = m._unwhitney_pinv
    japp = np.zeros((2 * m.nf, 2 * m.nf))
    for f in range(m.nf):
        japp[2 * f : 2 * f + 2, 2 * f : 2 * f + 2] = -J[f].T
    d1 = m.d1.toarray()
    sysm = np.vstack([d1, d1 @ (unw @ (japp @ W))])
    _, _, vt = np.linalg.svd(sysm)
    harm = unw @ (W @ vt[-1])
    psi = np.zeros((m.ne, 3))
    psi[:, 2] = harm / np.abs(W @ harm).max()
    return Configuration(m, J, np.zeros((m.ne, 3)), psi)


@lru_cache(maxsize=None)
def hitchin_fixture(genus: int, refinement: int, seed: int = 7):
    """Hitchin solve from an irreducible flat connection and a small seeded
    Higgs field (converges onto the zero-Higgs branch at desk scale)."""
    m = mesh(genus, refinement)
    J, _ = cc_structure(genus, refinement)
    A, _ = irreducible_flat(genus, refinement)
    rng = np.random.default_rng(seed)
    phi0 = to_complex(m, J, 0.05 * rng.standard_normal((m.ne, 3)))
    (Ah, phih), rep, x = solve.solve_hitchin(
        J, A, phi0, solve.SolverConfig(tol=1e-10, max_iter=150), mesh=m
    )
    return (Ah, phih), rep, x


@lru_cache(maxsize=None)
def continuation(system: str, genus: int = 2, refinement: int = 1, eps: int = -1):
    seed_x, _ = coupled_seed(genus, refinement)
    sched = (0.0, 0.02, 0.04, 0.06, 0.08, 0.1)
    results, ok = solve.continue_alpha(
        system, seed_x, eps, sched, solve.SolverConfig(tol=1e-8, max_iter=40)
    )
    return results, ok


@lru_cache(maxsize=None)
def moduli_at_endpoint(family: str, genus: int = 2, refinement: int = 1):
    system = "CoupledHarmonic" if family == "J" else "CoupledHitchin"
    results, ok = continuation(system)
    if not ok:
        raise RuntimeError(f"continuation for {system} failed")
    end = results[-1]
    x = end["config"]
    alpha = end["alpha"]
    basis, info = solve.moduli_basis(family, x, alpha, -1)
    report = solve.moduli_metric(family, x, alpha, -1, basis)
    return x, alpha, basis, info, report
