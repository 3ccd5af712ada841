"""Solving a small sparse recovery problem with OMP and gOMP.

Builds a Gaussian instance, runs both solvers, and walks through the
iteration trace: which columns each iteration picked, how the residual
shrank, and what the final prune-and-refit produced.
"""

import numpy as np

from gomp import PursuitConfig, gen_matrix, gomp_solve, omp_solve

rng = np.random.default_rng(7)

# A 40x80 Gaussian measurement matrix and a 5-sparse signal.
m, n, K = 40, 80, 5
Phi = gen_matrix(m, n, seed=7)
support = np.sort(rng.choice(n, size=K, replace=False))
x = np.zeros(n)
x[support] = rng.standard_normal(K)
y = Phi @ x

print(f"true support: {support.tolist()}")

# OMP picks one column per iteration; gOMP(S=2) picks two.
omp = omp_solve(Phi, y, PursuitConfig(sparsity=K))
gomp = gomp_solve(Phi, y, PursuitConfig(sparsity=K, selection_size=2))

for name, res in [("OMP", omp), ("gOMP(S=2)", gomp)]:
    print(f"\n{name}: {res.iterations_used} iterations")
    for k, it in enumerate(res.trace.iterations, start=1):
        print(f"  iter {k}: selected {it.selected.tolist()}, "
              f"||r|| = {it.residual_norm:.3e}")
    print(f"  recovered support: {res.support.tolist()}")
    print(f"  exact: {np.array_equal(res.support, support)}, "
          f"max |x_hat - x| = {np.max(np.abs(res.estimate - x)):.2e}")

# The result serializes to JSON for downstream tooling.
print("\nJSON summary keys:", sorted(gomp.to_dict().keys()))
