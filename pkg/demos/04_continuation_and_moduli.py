"""Continuation of the coupled systems in the coupling constant and the
pseudo-Kahler moduli metrics at the endpoints, plus the exploratory
weak-coupling table comparing the two moduli metrics (no convergence is
asserted: that limit is an open question)."""

import numpy as np

from surfgauge import fixtures, solve

print("= continuation in alpha (eps = -1) ".ljust(66, "="))
for system in ("CoupledHarmonic", "CoupledHitchin"):
    results, ok = fixtures.continuation(system)
    print(f"{system}: completed={ok}")
    for r in results:
        print(
            f"  alpha={r['alpha']:.2f}  residual={r['norms']['total']:.2e}"
            f"  ker L={r['kernel_dim']}  newton iterations={r['report'].iterations}"
        )

print()
print("= moduli metrics at the endpoints ".ljust(66, "="))
for fam in ("J", "I"):
    x, alpha, basis, info, rep = fixtures.moduli_at_endpoint(fam)
    print(
        f"{fam}-family at alpha={alpha}: basis dim {rep.basis_dim}, signature {rep.signature},"
        f" nondegenerate={rep.checks['nondegenerate']}"
    )
    print(
        f"  omega antisym {rep.checks['omega_antisymmetry']:.1e},"
        f" explicit-vs-generic {rep.checks['explicit_vs_generic']:.1e},"
        f" omega = g(S.,.) {rep.checks['omega_eq_g_structure']:.1e}"
    )

print()
print("= exploratory weak-coupling table (adiabatic question) ".ljust(66, "="))
print("Frobenius norms of the moduli matrices along a shrinking alpha;")
print("the alpha -> 0 relation between the two families is left open.")
x, _, _, _, _ = fixtures.moduli_at_endpoint("I")
print(f"{'alpha':>8s} {'|g_J|':>12s} {'|g_I|':>12s} {'dim_J':>6s} {'dim_I':>6s}")
for a in (0.1, 0.05, 0.025):
    row = [f"{a:8.3f}"]
    dims = []
    for fam in ("J", "I"):
        basis, info = solve.moduli_basis(fam, x, a, -1)
        rep = solve.moduli_metric(fam, x, a, -1, basis)
        row.append(f"{np.linalg.norm(rep.g_matrix):12.4f}")
        dims.append(f"{rep.basis_dim:6d}")
    print(" ".join(row + dims))
