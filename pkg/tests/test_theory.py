"""RIC estimators, partition machinery, bound constants, and the
inequality checkers, each against an independent oracle where one exists."""

import itertools
import math

import numpy as np
import pytest

from gomp.pursuit import PursuitConfig, gomp_solve
from gomp.theory import (
    ETA,
    SIGMA,
    BoundDomainError,
    BudgetExceededError,
    ConditionNotCertifiedError,
    RicCalculator,
    bound_constants,
    check_condition,
    check_lemma1,
    check_prop1,
    check_prop2,
    check_theorem_residual,
    condition_order,
    partition,
    partition_invariant_violations,
    perturbed_orthonormal,
    ric_certified_upper,
    ric_exact,
    ric_monte_carlo,
    run_verification_corpus,
)


def two_by_two_ric_oracle(Phi):
    """Exact order-2 RIC from the closed-form eigenvalues of 2x2 Grams."""
    n = Phi.shape[1]
    best = -np.inf
    for i, j in itertools.combinations(range(n), 2):
        a = Phi[:, i] @ Phi[:, i]
        b = Phi[:, i] @ Phi[:, j]
        c = Phi[:, j] @ Phi[:, j]
        half_tr = (a + c) / 2.0
        disc = math.sqrt(((a - c) / 2.0) ** 2 + b * b)
        best = max(best, half_tr + disc - 1.0, 1.0 - (half_tr - disc))
    return best


# -- RIC ---------------------------------------------------------------------


def test_ric_exact_orthonormal_columns_zero():
    rng = np.random.default_rng(40)
    q, _ = np.linalg.qr(rng.standard_normal((9, 9)))
    for k in (1, 2, 4):
        assert ric_exact(q[:, :6], k).delta < 1e-12


def test_ric_exact_unit_norm_k1_zero():
    rng = np.random.default_rng(41)
    Phi = rng.standard_normal((6, 10))
    Phi /= np.linalg.norm(Phi, axis=0)
    assert ric_exact(Phi, 1).delta < 1e-12


def test_ric_exact_matches_pair_oracle():
    rng = np.random.default_rng(42)
    for _ in range(20):
        Phi = rng.normal(0, 1 / np.sqrt(6), (6, 10))
        est = ric_exact(Phi, 2)
        assert abs(est.delta - two_by_two_ric_oracle(Phi)) < 1e-12
        # witness achieves the reported extreme
        sub = Phi[:, est.witness]
        w = np.linalg.eigvalsh(sub.T @ sub)
        assert max(w[-1] - 1.0, 1.0 - w[0]) == pytest.approx(est.delta, abs=1e-12)


def test_ric_exact_budget_refusal_reports_requirement():
    Phi = np.random.default_rng(43).standard_normal((10, 40))
    with pytest.raises(BudgetExceededError, match=str(math.comb(40, 10))):
        ric_exact(Phi, 10, budget=1000)


def test_ric_monotone_in_order():
    rng = np.random.default_rng(44)
    Phi = rng.normal(0, 1 / np.sqrt(8), (8, 12))
    deltas = [ric_exact(Phi, k).delta for k in range(1, 5)]
    assert all(a <= b + 1e-12 for a, b in zip(deltas, deltas[1:]))


def test_ric_monte_carlo_below_exact_and_deterministic():
    rng = np.random.default_rng(45)
    for _ in range(5):
        Phi = rng.normal(0, 1 / np.sqrt(6), (6, 9))
        exact = ric_exact(Phi, 2).delta
        mc1 = ric_monte_carlo(Phi, 2, trials=30, seed=7)
        mc2 = ric_monte_carlo(Phi, 2, trials=30, seed=7)
        assert mc1.delta <= exact + 1e-12
        assert mc1.delta == mc2.delta
        assert np.array_equal(mc1.witness, mc2.witness)


def test_ric_monte_carlo_exhaustive_sampling_hits_exact():
    rng = np.random.default_rng(46)
    Phi = rng.normal(0, 1 / np.sqrt(5), (5, 6))
    exact = ric_exact(Phi, 2).delta
    # 600 draws over C(6,2)=15 subsets: covers everything w.o.p.
    mc = ric_monte_carlo(Phi, 2, trials=600, seed=3)
    assert mc.delta == pytest.approx(exact, abs=1e-15)


def test_ric_certified_upper_falls_back_to_full_order():
    rng = np.random.default_rng(47)
    q, _ = np.linalg.qr(rng.standard_normal((32, 32)))
    Phi = q + 1e-3 * rng.standard_normal((32, 32))
    delta, order = ric_certified_upper(Phi, 18)
    assert order == 32  # C(32,18) is far over budget; order-32 is one subset
    assert delta >= ric_certified_upper(Phi, 32)[0] - 1e-15
    small = np.eye(6)
    assert ric_certified_upper(small, 2) == (pytest.approx(0.0), 2)


# -- recovery conditions -----------------------------------------------------


def test_condition_orders():
    assert condition_order("new_noisy", K=5, S=1) == 45
    assert condition_order("new_noisy", K=5, S=10) == 55
    assert condition_order("new_noiseless", K=3, S=2) == 21
    assert condition_order("prior_wang", K=4, S=2) == 8


def test_condition_boundary_inclusive_for_new():
    assert check_condition(0.125, K=10, S=2, which="new_noisy")
    assert check_condition(0.125, K=10, S=2, which="new_noiseless")
    assert not check_condition(0.1251, K=10, S=2, which="new_noisy")


def test_condition_prior_is_strict():
    # sqrt(4)/(sqrt(100)+3*2) = 0.125 exactly: strict bound fails at the value
    assert not check_condition(0.125, K=100, S=4, which="prior_wang")
    assert check_condition(0.1249, K=100, S=4, which="prior_wang")


def test_condition_zero_delta_always_true():
    for which in ("new_noisy", "new_noiseless", "prior_wang"):
        assert check_condition(0.0, K=7, S=3, which=which)


def test_condition_rejects_bad_delta():
    with pytest.raises(ValueError):
        check_condition(1.0, K=2, S=1, which="new_noisy")


# -- partition ---------------------------------------------------------------


def make_signal(n, support, values):
    x = np.zeros(n)
    x[support] = values
    return x


def test_partition_subset_sizes_example():
    # 10 remaining indices, S=2: sizes 0,2,4,8,10 across tau=0..4
    x = make_signal(16, np.arange(10), np.linspace(2.0, 1.0, 10))
    rep = partition(x, [], 2)
    assert rep.sizes == (0, 2, 4, 8, 10)
    assert rep.tau_max == 4
    assert np.array_equal(rep.subsets[-1], rep.gamma)


def test_partition_single_block_when_gamma_small():
    x = make_signal(8, [1, 5], [3.0, -1.0])
    rep = partition(x, [], 3)
    assert rep.sizes == (0, 2)
    assert rep.tau_max == 1
    assert rep.L == 1


def test_partition_l_is_one_when_mass_in_first_block():
    # all remaining energy inside the first S coordinates makes the stop
    # condition hold immediately (right side is zero)
    x = make_signal(12, [0, 1, 2, 3], [5.0, 4.0, 1e-9, 1e-9])
    rep = partition(x, [2, 3], 2)
    assert rep.gamma.size == 2
    assert rep.L == 1


def test_partition_gamma_ranked_by_magnitude():
    x = make_signal(10, [0, 3, 4, 7], [0.5, -2.0, 1.0, -0.25])
    rep = partition(x, [4], 1)
    assert np.array_equal(rep.gamma, [3, 0, 7])


def test_partition_accepts_sparse_signal_objects():
    from gomp.experiments import SparseSignal

    sig = SparseSignal(12, [2, 5, 9], [3.0, -1.0, 0.5])
    rep = partition(sig, [5], 1)
    assert np.array_equal(rep.gamma, [2, 9])


def test_partition_empty_gamma_flagged():
    x = make_signal(6, [1, 2], [1.0, 2.0])
    rep = partition(x, [1, 2], 2)
    assert rep.L is None
    assert rep.milestones is None
    assert rep.sizes == (0,)


def test_partition_sigma_eta_constants():
    x = make_signal(6, [0], [1.0])
    rep = partition(x, [], 1)
    assert rep.sigma == pytest.approx(math.exp(14 / 9) / 2, rel=1e-15)
    assert rep.eta == pytest.approx(math.exp(-14 / 9), rel=1e-15)
    assert rep.sigma * rep.eta == pytest.approx(0.5, abs=1e-15)


def test_partition_invariants_random_draws():
    rng = np.random.default_rng(48)
    for _ in range(2000):
        n = int(rng.integers(4, 64))
        k = int(rng.integers(1, min(24, n) + 1))
        support = rng.choice(n, size=k, replace=False)
        x = np.zeros(n)
        if rng.random() < 0.5:
            x[support] = rng.standard_normal(k)
        else:
            ratio = rng.uniform(0.05, 0.9)
            x[support] = ratio ** np.arange(k) * rng.choice([-1.0, 1.0], size=k)
        S = int(rng.integers(1, 5))
        selected = np.sort(rng.choice(n, size=int(rng.integers(0, n + 1)), replace=False))
        rep = partition(x, selected, S)
        assert partition_invariant_violations(rep, x, selected, S) == []


def test_partition_milestones_formula():
    x = make_signal(20, np.arange(10), 0.5 ** np.arange(10))
    rep = partition(x, [], 2)
    sizes = rep.sizes
    expected = []
    acc = 0
    for i in range(rep.L + 1):
        acc += -(-sizes[i] // 2)
        expected.append(2 * acc)
    assert list(rep.milestones) == expected
    assert rep.milestones[-1] <= 2 * (2**rep.L - 1)


# -- bound constants ---------------------------------------------------------


def test_bound_constants_reference_values():
    rep = bound_constants(0.05)
    assert rep.condition_met
    assert 47.0 < rep.mu_k <= 49.0
    assert 51.0 < rep.mu <= 52.0
    assert 109.0 < rep.C <= 110.0


def test_bound_constants_dual_path():
    # second derivation path: alpha/beta split with eta and t kept symbolic
    t = 1.0 / 6.0
    for delta in (0.0, 0.02, 0.05, 0.1, 0.125):
        alpha = 2.0 * math.sqrt(ETA * (1.0 - ETA) * (1.0 + delta) * (1.0 + t) / (1.0 - delta))
        mu_k_oracle = (math.sqrt(1.0 + 1.0 / t) + 1.0) / (1.0 - alpha) - 1.0
        rep = bound_constants(delta)
        assert rep.mu_k == pytest.approx(mu_k_oracle, rel=1e-12)
        assert rep.mu == pytest.approx((mu_k_oracle + 1.0) / math.sqrt(1.0 - delta), rel=1e-12)
        assert rep.C == pytest.approx(
            2.0 * math.sqrt((1.0 + delta) / (1.0 - delta)) * rep.mu
            + 2.0 / math.sqrt(1.0 - delta),
            rel=1e-12,
        )


def test_bound_constants_frozen_reference_points():
    # regression pins for the two ends of the valid range
    zero = bound_constants(0.0)
    assert zero.mu_k == pytest.approx(29.773813176926332, rel=1e-12)
    assert zero.C == pytest.approx(63.547626353852664, rel=1e-12)
    edge = bound_constants(0.125)
    assert edge.condition_met
    assert math.isfinite(edge.C)


def test_bound_constants_monotone_on_grid():
    grid = np.linspace(0.0, 0.125, 100)
    reps = [bound_constants(d) for d in grid]
    for a, b in zip(reps, reps[1:]):
        assert a.mu_k < b.mu_k
        assert a.mu < b.mu
        assert a.C < b.C
    assert all(r.condition_met for r in reps)
    assert all(r.mu_k > 0 and math.isfinite(r.C) for r in reps)


def test_bound_constants_domain_error():
    with pytest.raises(BoundDomainError):
        bound_constants(0.2)
    with pytest.raises(BoundDomainError):
        bound_constants(-0.01)
    # slightly above 1/8 the denominator is still positive: evaluated,
    # but flagged as outside the condition
    rep = bound_constants(0.1251)
    assert not rep.condition_met
    assert math.isfinite(rep.mu_k)


def test_bound_constants_runtime_under_1ms():
    import time

    bound_constants(0.05)  # warm
    t0 = time.perf_counter()
    bound_constants(0.05)
    assert time.perf_counter() - t0 < 1e-3


# -- lemma 1 -----------------------------------------------------------------


def test_lemma1_equality_case():
    u = np.zeros(5)
    u[0] = 1.0
    chk = check_lemma1(u, u, 1)
    assert chk.holds
    assert chk.lhs == pytest.approx(1.0)
    assert chk.rhs == pytest.approx(1.0)


def test_lemma1_disjoint_supports():
    u = np.array([1.0, 0.0, 0.0])
    z = np.array([0.0, 2.0, 0.0])
    chk = check_lemma1(u, z, 1)
    assert chk.holds
    assert chk.lhs == 0.0
    assert chk.rhs == 0.0
    assert chk.overlap == 0


def test_lemma1_randomized():
    rng = np.random.default_rng(49)
    for _ in range(1500):
        n = int(rng.integers(6, 40))
        u = np.where(rng.random(n) < 0.4, rng.standard_normal(n), 0.0)
        z = np.where(rng.random(n) < 0.4, rng.standard_normal(n), 0.0)
        S = int(rng.integers(1, 4))
        assert check_lemma1(u, z, S).holds


# -- propositions along traces ----------------------------------------------


def small_certified_instance(seed, m=12, n=10, K=2, S=1, noise=0.0):
    rng = np.random.default_rng(seed)
    Phi = perturbed_orthonormal(m, n, 5e-3, rng)
    support = rng.choice(n, size=K, replace=False)
    x = np.zeros(n)
    x[support] = rng.standard_normal(K)
    v = noise * rng.standard_normal(m)
    iters = min(max(K, (8 * K) // S), m // S, 5)
    res = gomp_solve(
        Phi,
        Phi @ x + v,
        PursuitConfig(K, S, stopping_mode="fixed_iterations", max_iterations=iters),
    )
    return Phi, x, v, res.trace


def test_prop1_completed_support_case():
    # all true indices selected and v=0: the energy bound collapses to zero
    Phi, x, v, trace = small_certified_instance(50, K=2, S=2)
    full = set(np.flatnonzero(x).tolist())
    k_done = next(
        k
        for k in range(1, len(trace) + 1)
        if full <= set(trace.support_at(k).tolist())
    )
    chk = check_prop1(Phi, x, v, trace, k_done, k_done)
    assert chk.holds_24
    assert chk.rhs_24 == 0.0
    assert chk.lhs_24 <= 1e-16
    assert chk.holds_25 is None


def test_prop1_randomized_small_corpus():
    rng = np.random.default_rng(51)
    for trial in range(60):
        Phi, x, v, trace = small_certified_instance(
            600 + trial,
            m=int(rng.integers(10, 14)),
            n=int(rng.integers(8, 11)),
            K=int(rng.integers(1, 4)),
            S=1,
            noise=float(rng.choice([0.0, 1e-2])),
        )
        ric = RicCalculator(Phi)
        part = partition(x, trace.support_at(0), 1)
        tau = int(rng.integers(1, part.tau_max + 1))
        l = int(rng.integers(0, min(2, len(trace) - 1) + 1))
        chk = check_prop1(Phi, x, v, trace, 0, l, tau, ric=ric)
        assert chk.holds_24
        assert chk.holds_25
        assert chk.delta_union < 1.0


def test_prop2_zero_extra_iterations_is_trivial():
    Phi, x, v, trace = small_certified_instance(52, K=2, S=1)
    chk = check_prop2(Phi, x, v, trace, 0, 1, 0, 1)
    assert chk.factor == 1.0
    assert chk.holds
    assert chk.lhs == pytest.approx(chk.rhs, abs=1e-12)


def test_prop2_single_step_agrees_with_prop1_direction():
    # dl=1 is the exponentiated form of the one-step bound: since
    # 1 - f <= exp(-f), whenever the one-step bound holds so does the
    # geometric one
    for seed in range(53, 65):
        Phi, x, v, trace = small_certified_instance(seed, K=3, S=1, noise=1e-2)
        ric = RicCalculator(Phi)
        part = partition(x, trace.support_at(0), 1)
        for tau in range(1, part.tau_max + 1):
            p1 = check_prop1(Phi, x, v, trace, 0, 0, tau, ric=ric)
            p2 = check_prop2(Phi, x, v, trace, 0, 0, 1, tau, ric=ric)
            assert p1.holds_25
            assert p2.holds
            f = (1.0 - p1.delta_union) / (1.0 + p1.delta_s)
            assert 1.0 - f <= math.exp(-f) + 1e-15


def test_prop2_randomized_small_corpus():
    rng = np.random.default_rng(66)
    for trial in range(40):
        Phi, x, v, trace = small_certified_instance(
            900 + trial, K=int(rng.integers(1, 4)), S=1,
            noise=float(rng.choice([0.0, 1e-1])),
        )
        ric = RicCalculator(Phi)
        part = partition(x, trace.support_at(0), 1)
        tau = int(rng.integers(1, part.tau_max + 1))
        dl = int(rng.integers(1, 3))
        l = int(rng.integers(0, len(trace) - dl + 1))
        chk = check_prop2(Phi, x, v, trace, 0, l, dl, tau, ric=ric)
        assert chk.holds


# -- theorem residual checker -------------------------------------------------


def test_theorem_residual_orthonormal_noisy_large_slack():
    rng = np.random.default_rng(67)
    q, _ = np.linalg.qr(rng.standard_normal((16, 16)))
    x = np.zeros(16)
    x[[2, 9]] = [1.0, -2.0]
    v = 0.05 * rng.standard_normal(16)
    chk = check_theorem_residual(q, x, v, S=1)
    assert chk.delta < 1e-10
    assert chk.holds
    assert chk.residual_norm <= 0.5 * chk.bound  # generous slack at delta=0


def test_theorem_residual_noiseless_exact_recovery():
    rng = np.random.default_rng(68)
    Phi = perturbed_orthonormal(20, 20, 2e-3, rng)
    x = np.zeros(20)
    x[[3, 11]] = [0.7, 1.4]
    chk = check_theorem_residual(Phi, x, np.zeros(20), S=1)
    assert chk.holds
    assert chk.residual_norm <= 1e-8
    assert chk.bound == 0.0


def test_theorem_residual_refuses_uncertifiable_matrix():
    rng = np.random.default_rng(69)
    Phi = rng.normal(0, 1 / np.sqrt(12), (12, 30))  # fat Gaussian: delta >> 1/8
    x = np.zeros(30)
    x[[1, 2]] = 1.0
    with pytest.raises(ConditionNotCertifiedError) as err:
        check_theorem_residual(Phi, x, np.zeros(12), S=1)
    assert err.value.delta is not None


def test_theorem_residual_uses_full_order_fallback():
    # m=n=32, K=2: order 14 is over budget, so certification must come
    # from the exact order-32 constant
    rng = np.random.default_rng(70)
    q, _ = np.linalg.qr(rng.standard_normal((32, 32)))
    Phi = q + 1e-3 * rng.standard_normal((32, 32))
    x = np.zeros(32)
    x[[5, 21]] = [1.0, 0.5]
    v = 0.01 * rng.standard_normal(32)
    chk = check_theorem_residual(Phi, x, v, S=1)
    assert chk.delta_order == 32
    assert chk.holds


def test_theorem_residual_zero_violations_on_certified_corpus():
    # 100 perturbed-orthonormal noisy instances, certified condition:
    # the residual bound never breaks
    for trial in range(100):
        rng = np.random.default_rng(4000 + trial)
        q, _ = np.linalg.qr(rng.standard_normal((32, 32)))
        Phi = q + 1e-3 * rng.standard_normal((32, 32))
        x = np.zeros(32)
        x[rng.choice(32, size=2, replace=False)] = rng.standard_normal(2)
        v = 0.05 * rng.standard_normal(32)
        chk = check_theorem_residual(Phi, x, v, S=1)
        assert chk.delta <= 0.125
        assert chk.holds


# -- corpus smoke -------------------------------------------------------------


def test_verification_corpus_small_run_clean():
    report = run_verification_corpus(
        lemma_pairs=300, partition_draws=300, pursuit_instances=25, seed=7
    )
    assert report["total_violations"] == 0
    assert report["lemma1"]["checks"] == 300
    assert report["prop1_energy_bound"]["checks"] == 25
    assert report["lemma1"]["worst_slack"] >= 0.0
