"""Estimating restricted isometry constants.

Exact RIC enumeration is exponential in the order, so it only works on
small instances; the Monte-Carlo estimator samples subsets and always
lower-bounds the exact value. Both are shown here, together with the
recovery-condition checks evaluated at the measured constants.
"""

import numpy as np

from gomp import (
    BudgetExceededError,
    check_condition,
    condition_order,
    ric_exact,
    ric_monte_carlo,
)
from gomp.theory import perturbed_orthonormal

rng = np.random.default_rng(12)

# Orthonormal columns are a perfect isometry: every RIC is zero.
q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
print("orthonormal columns, order 3:", f"{ric_exact(q[:, :8], 3).delta:.2e}")

# A Gaussian matrix at desk scale has sizable constants.
Phi = rng.normal(0, 1 / np.sqrt(10), (10, 18))
for order in (1, 2, 3):
    est = ric_exact(Phi, order)
    mc = ric_monte_carlo(Phi, order, trials=200, seed=1)
    print(f"gaussian 10x18, order {order}: exact delta = {est.delta:.4f} "
          f"(witness {est.witness.tolist()}), monte-carlo >= {mc.delta:.4f}")

# Enumeration refuses politely when the subset count is out of budget.
try:
    ric_exact(rng.standard_normal((20, 60)), 12)
except BudgetExceededError as err:
    print("\nbudget refusal:", err)

# Recovery conditions are inequalities on a RIC of a specific order.
K, S = 2, 2
Phi = perturbed_orthonormal(16, 14, 2e-3, rng)
order = condition_order("new_noiseless", K, S)   # 7K
delta = ric_exact(Phi, order).delta
print(f"\nperturbed orthonormal 16x14: delta_{order} = {delta:.4f}")
print("noiseless recovery condition (<= 1/8):",
      check_condition(delta, K, S, "new_noiseless"))
print("earlier sqrt(S)-style condition:",
      check_condition(ric_exact(Phi, S * K).delta, K, S, "prior_wang"))
