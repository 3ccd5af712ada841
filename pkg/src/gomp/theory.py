"""Restricted-isometry machinery and mechanical inequality checkers.

Provides exact (enumeration) and Monte-Carlo RIC estimates, the recovery
condition checks, the residual-support partition used in the convergence
analysis, closed-form recovery-bound constants, and numerical verifiers
for the supporting inequalities (the correlation lemma, the two residual
propositions, and the end-to-end residual stability bound).

The proof constants are fixed, not configurable: the closed forms are
only valid at sigma = exp(14/9)/2, eta = exp(-14/9) (so sigma * eta =
1/2) and splitting weight t = 1/6.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_index_set, as_matrix, as_vector
from .pursuit import PursuitConfig, gomp_solve

SIGMA = math.exp(14.0 / 9.0) / 2.0
ETA = math.exp(-14.0 / 9.0)
T_SPLIT = 1.0 / 6.0

RIC_BUDGET = 10**6
CONDITION_KINDS = ("new_noisy", "new_noiseless", "prior_wang")

# numerical tolerances for inequality checks (the statements are exact in
# real arithmetic; slack below these levels is rounding noise)
_INEQ_RTOL = 1e-8
_LEMMA_RTOL = 1e-12


class BudgetExceededError(ValueError):
    """Exact RIC enumeration would exceed the subset budget."""

    def __init__(self, n, order, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(
            f"exact RIC of order {order} on {n} columns needs {required} "
            f"subsets, over the budget of {budget}"
        )


class ConditionNotCertifiedError(RuntimeError):
    """The RIP condition required by a theorem check could not be certified."""

    def __init__(self, message, delta=None):
        self.delta = delta
        super().__init__(message)


class BoundDomainError(ValueError):
    """delta is outside the domain of the closed-form bound constants."""


@dataclass(frozen=True)
class RicEstimate:
    """Restricted isometry constant of one order.

    kind is "exact" (full enumeration) or "monte_carlo_lower" (max over
    sampled subsets, hence a lower bound on the exact value). witness is
    the subset achieving the reported extreme.
    """

    K: int
    kind: str
    delta: float
    witness: np.ndarray

    @property
    def rip_holds(self):
        """True when delta < 1, i.e. the matrix satisfies RIP of this order."""
        return self.delta < 1.0


def _subset_deviations(gram, idx):
    """max(lambda_max - 1, 1 - lambda_min) of each Gram submatrix in idx."""
    sub = gram[idx[:, :, None], idx[:, None, :]]
    w = np.linalg.eigvalsh(sub)
    return np.maximum(w[:, -1] - 1.0, 1.0 - w[:, 0])


def ric_exact(Phi, K, budget=RIC_BUDGET):
    """Exact RIC of order K by enumerating every K-column submatrix.

    Parameters
    ----------
    Phi : ndarray (m, n)
    K : int, 1 <= K <= n
    budget : int
        Refuse (BudgetExceededError) when C(n, K) exceeds this.

    Returns
    -------
    RicEstimate with kind "exact"; delta may be >= 1 when the matrix does
    not satisfy RIP of this order.
    """
    Phi = as_matrix(Phi)
    n = Phi.shape[1]
    if not 1 <= K <= n:
        raise ValueError(f"RIC order K={K} must be in [1, {n}]")
    total = math.comb(n, K)
    if total > budget:
        raise BudgetExceededError(n, K, total, budget)
    gram = Phi.T @ Phi
    best = -np.inf
    witness = None
    combos = itertools.combinations(range(n), K)
    chunk = max(1, (1 << 22) // max(K * K, 1))
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        idx = np.asarray(block, dtype=np.intp)
        dev = _subset_deviations(gram, idx)
        j = int(np.argmax(dev))
        if dev[j] > best:  # strict: first achiever wins, deterministic
            best = float(dev[j])
            witness = idx[j]
    return RicEstimate(K, "exact", best, np.asarray(witness, dtype=np.intp))


def ric_monte_carlo(Phi, K, trials, seed):
    """Lower-bound the RIC of order K by sampling subsets uniformly.

    Deterministic for a fixed seed; the result never exceeds
    ric_exact(Phi, K).delta.
    """
    Phi = as_matrix(Phi)
    n = Phi.shape[1]
    if not 1 <= K <= n:
        raise ValueError(f"RIC order K={K} must be in [1, {n}]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    samples = np.empty((trials, K), dtype=np.intp)
    for t in range(trials):
        samples[t] = np.sort(rng.choice(n, size=K, replace=False))
    gram = Phi.T @ Phi
    best = -np.inf
    witness = None
    chunk = max(1, (1 << 22) // max(K * K, 1))
    for lo in range(0, trials, chunk):
        idx = samples[lo : lo + chunk]
        dev = _subset_deviations(gram, idx)
        j = int(np.argmax(dev))
        if dev[j] > best:
            best = float(dev[j])
            witness = idx[j]
    return RicEstimate(K, "monte_carlo_lower", best, np.asarray(witness, dtype=np.intp))


class RicCalculator:
    """Memoized exact RICs of one matrix, keyed by order.

    The inequality checkers need several orders per instance; sharing a
    calculator avoids re-enumeration. Values are exact (never Monte-Carlo:
    substituting a lower bound would make the inequality checks unsound).
    """

    def __init__(self, Phi, budget=RIC_BUDGET):
        self._Phi = as_matrix(Phi)
        self._budget = budget
        self._cache = {}

    def delta(self, order):
        order = int(order)
        if order not in self._cache:
            self._cache[order] = ric_exact(self._Phi, order, self._budget).delta
        return self._cache[order]


def ric_certified_upper(Phi, order, budget=RIC_BUDGET):
    """Certified upper bound on the RIC of the given order.

    Uses exact enumeration when C(n, order) fits the budget; otherwise
    falls back to the exact full-order constant delta_n (a single subset),
    which dominates every lower order by RIC monotonicity.

    Returns
    -------
    (delta, certified_order)

    Raises
    ------
    BudgetExceededError if neither route is affordable.
    """
    Phi = as_matrix(Phi)
    n = Phi.shape[1]
    order = min(order, n)  # RIP order cannot exceed the column count
    if math.comb(n, order) <= budget:
        return ric_exact(Phi, order, budget).delta, order
    return ric_exact(Phi, n, budget).delta, n


def condition_order(which, K, S):
    """RIC order named by each recovery condition."""
    if which == "new_noisy":
        return max(9, S + 1) * K
    if which == "new_noiseless":
        return 7 * K
    if which == "prior_wang":
        return S * K
    raise ValueError(f"unknown condition {which!r}, expected one of {CONDITION_KINDS}")


def check_condition(delta, K, S, which):
    """Evaluate a named recovery condition at the supplied RIC value.

    The caller is responsible for supplying a delta of the matching order
    (see condition_order). The new conditions are inclusive (<= 1/8); the
    prior one is strict.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta={delta} must be in [0, 1)")
    if which in ("new_noisy", "new_noiseless"):
        return delta <= 0.125
    if which == "prior_wang":
        return delta < math.sqrt(S) / (math.sqrt(K) + 3.0 * math.sqrt(S))
    raise ValueError(f"unknown condition {which!r}, expected one of {CONDITION_KINDS}")


# -- residual-support partition ------------------------------------------


@dataclass(frozen=True)
class PartitionReport:
    """Partition of the not-yet-selected support used in the analysis.

    gamma lists the remaining true-support indices ranked by descending
    signal magnitude; subsets[tau] is its prefix of size
    min(2^(tau-1) S, |gamma|) (subsets[0] is empty, the last subset is all
    of gamma). L is the first level whose tail energy stops shrinking by
    the factor sigma (None when gamma is empty). milestones holds
    k_i = 2 sum_{tau<=i} ceil(|subsets[tau]|/S) for i = 0..L.
    """

    gamma: np.ndarray
    subsets: tuple
    L: int | None
    sigma: float
    eta: float
    milestones: tuple | None
    tau_max: int
    tail_energies: tuple

    @property
    def sizes(self):
        return tuple(len(s) for s in self.subsets)


def _ranked_remaining(x, selected):
    """Remaining support T \\ selected, ranked by descending |x| (ties by index)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    support = np.flatnonzero(x)
    remaining = np.setdiff1d(support, selected)
    order = np.argsort(-np.abs(x[remaining]), kind="stable")
    return remaining[order]


def partition(x, selected, S):
    """Build the ranked partition of the remaining support.

    Parameters
    ----------
    x : dense ground-truth vector, or any object with a .dense() method
    selected : index set of already-selected columns (an estimated support)
    S : selection block size

    Returns
    -------
    PartitionReport. When nothing remains, subsets == (empty,) and L is
    None (flagged rather than an error).
    """
    if hasattr(x, "dense"):
        x = x.dense()
    x = np.asarray(x, dtype=np.float64).ravel()
    selected = as_index_set(selected, x.size)
    if S < 1:
        raise ValueError("S must be >= 1")
    gamma = _ranked_remaining(x, selected)
    g = gamma.size
    if g == 0:
        return PartitionReport(
            gamma=gamma,
            subsets=(gamma[:0],),
            L=None,
            sigma=SIGMA,
            eta=ETA,
            milestones=None,
            tau_max=0,
            tail_energies=(0.0,),
        )
    # smallest j >= 0 with 2^j S >= g, i.e. max(0, ceil(log2(g / S)))
    j = 0
    while (S << j) < g:
        j += 1
    tau_max = j + 1
    sizes = [0] + [min((S << (t - 1)), g) for t in range(1, tau_max + 1)]
    subsets = tuple(gamma[:s] for s in sizes)

    sq = np.square(x[gamma])
    suffix = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    tails = tuple(float(suffix[s]) for s in sizes)

    L = tau_max  # always satisfied at the last level (tail there is zero)
    for cand in range(1, tau_max + 1):
        if tails[cand - 1] >= SIGMA * tails[cand]:
            L = cand
            break
    ceils = [-(-sizes[i] // S) for i in range(L + 1)]
    milestones = tuple(2 * int(c) for c in itertools.accumulate(ceils))
    return PartitionReport(
        gamma=gamma,
        subsets=subsets,
        L=L,
        sigma=SIGMA,
        eta=ETA,
        milestones=milestones,
        tau_max=tau_max,
        tail_energies=tails,
    )


# -- closed-form bound constants -------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """Recovery-bound constants evaluated at one RIC value.

    mu_k bounds the residual norm in noise units after the prescribed
    extra iterations; mu = (mu_k + 1) / sqrt(1 - delta) bounds the
    pre-pruning estimate error; C bounds the final pruned-estimate error.
    condition_met records delta <= 1/8.
    """

    delta: float
    mu_k: float
    mu: float
    C: float
    t: float
    condition_met: bool


def bound_constants(delta):
    """Evaluate the closed-form constants at the given RIC value.

    Valid on delta in [0, 1/8]; slightly beyond, the forms are still
    evaluated (condition_met=False) as long as the mu_k denominator stays
    positive.

    Raises
    ------
    BoundDomainError
        When delta is outside [0, 1) or the denominator is nonpositive.
    """
    delta = float(delta)
    if not 0.0 <= delta < 1.0:
        raise BoundDomainError(f"delta={delta} must be in [0, 1)")
    inner = (
        7.0 * (1.0 + delta) * (1.0 - math.exp(-14.0 / 9.0))
        / (6.0 * (1.0 - delta) * math.exp(14.0 / 9.0))
    )
    denom = 1.0 - 2.0 * math.sqrt(inner)
    if denom <= 0.0:
        raise BoundDomainError(
            f"delta={delta} too large: mu_k denominator {denom:.3e} is nonpositive"
        )
    mu_k = (math.sqrt(7.0) + 1.0) / denom - 1.0
    mu = (mu_k + 1.0) / math.sqrt(1.0 - delta)
    c = 2.0 * math.sqrt((1.0 + delta) / (1.0 - delta)) * mu + 2.0 / math.sqrt(1.0 - delta)
    return BoundReport(
        delta=delta,
        mu_k=mu_k,
        mu=mu,
        C=c,
        t=T_SPLIT,
        condition_met=delta <= 0.125,
    )


# -- inequality checkers ----------------------------------------------------


@dataclass(frozen=True)
class Lemma1Check:
    holds: bool
    lhs: float
    rhs: float
    overlap: int


def check_lemma1(u, z, S):
    """Check <u, z> <= sqrt(ceil(|W|/S)) ||u_U|| ||z_W||.

    W is the support overlap of u and z; U indexes the S largest-|u|
    entries (ties toward the smallest index).
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    z = np.asarray(z, dtype=np.float64).ravel()
    if u.size != z.size:
        raise ValueError("u and z must have the same length")
    if not 1 <= S <= u.size:
        raise ValueError(f"S={S} out of range")
    w = np.flatnonzero(u != 0)
    w = w[z[w] != 0]
    top = np.argsort(-np.abs(u), kind="stable")[:S]
    lhs = float(u @ z)
    rhs = float(
        math.sqrt(-(-w.size // S))
        * np.linalg.norm(u[top])
        * np.linalg.norm(z[w])
    )
    tol = _LEMMA_RTOL * max(1.0, abs(lhs), rhs)
    return Lemma1Check(holds=lhs <= rhs + tol, lhs=lhs, rhs=rhs, overlap=int(w.size))


def _tail_energy_term(Phi, x, v, tail_indices):
    """||Phi_A x_A + v||_2^2 for A = tail_indices."""
    if tail_indices.size:
        vec = Phi[:, tail_indices] @ x[tail_indices] + v
    else:
        vec = v
    return float(vec @ vec)


@dataclass(frozen=True)
class Prop1Check:
    holds_24: bool
    holds_25: bool | None
    slack_24: float
    slack_25: float
    lhs_24: float
    rhs_24: float
    lhs_25: float
    rhs_25: float
    delta_union: float
    delta_s: float


def check_prop1(Phi, x, v, trace, k, l, tau=None, ric=None):
    """Numerically verify the residual upper bound and the one-step
    residual-decrease bound along a recorded pursuit trace.

    The first inequality bounds ||r^k||^2 by the energy of the unselected
    signal part plus noise; the second lower-bounds
    ||r^l||^2 - ||r^{l+1}||^2 using exact RICs of order
    |subset_tau union T^l| and of order S.

    Parameters
    ----------
    Phi, x, v : problem data (x is the dense ground truth)
    trace : PursuitTrace covering iterations through l+1
    k, l : iteration indices with l >= k
    tau : partition level in 1..tau_max for the decrease bound; None (or a
        fully selected support) checks the residual upper bound only
    ric : optional RicCalculator for Phi (exact values; built fresh when
        omitted, refusing over-budget orders)
    """
    Phi = as_matrix(Phi)
    x = as_vector(x, Phi.shape[1], "x")
    v = as_vector(v, Phi.shape[0], "v")
    if l < k:
        raise ValueError("l must be >= k")
    if l + 1 > len(trace):
        raise ValueError(f"trace has {len(trace)} iterations, need {l + 1}")
    if ric is None:
        ric = RicCalculator(Phi)
    S = trace.selection_size
    report = partition(x, trace.support_at(k), S)
    gamma = report.gamma

    lhs24 = trace.residual_norm_at(k) ** 2
    rhs24 = _tail_energy_term(Phi, x, v, gamma)
    tol24 = _INEQ_RTOL * max(1.0, lhs24, rhs24)
    if tau is None:
        return Prop1Check(
            holds_24=lhs24 <= rhs24 + tol24,
            holds_25=None,
            slack_24=rhs24 - lhs24,
            slack_25=math.nan,
            lhs_24=lhs24,
            rhs_24=rhs24,
            lhs_25=math.nan,
            rhs_25=math.nan,
            delta_union=math.nan,
            delta_s=math.nan,
        )
    if not 1 <= tau <= report.tau_max:
        raise ValueError(f"tau={tau} out of range 1..{report.tau_max}")

    g_tau = report.subsets[tau]
    union = np.union1d(g_tau, trace.support_at(l))
    delta_union = ric.delta(union.size)
    delta_s = ric.delta(S)
    ceil_term = -(-g_tau.size // S)
    b_tau = _tail_energy_term(Phi, x, v, gamma[g_tau.size :])
    r_l = trace.residual_norm_at(l) ** 2
    r_next = trace.residual_norm_at(l + 1) ** 2
    lhs25 = r_l - r_next
    rhs25 = (1.0 - delta_union) / ((1.0 + delta_s) * ceil_term) * (r_l - b_tau)
    tol25 = _INEQ_RTOL * max(1.0, abs(lhs25), abs(rhs25), r_l)

    return Prop1Check(
        holds_24=lhs24 <= rhs24 + tol24,
        holds_25=lhs25 >= rhs25 - tol25,
        slack_24=rhs24 - lhs24,
        slack_25=lhs25 - rhs25,
        lhs_24=lhs24,
        rhs_24=rhs24,
        lhs_25=lhs25,
        rhs_25=rhs25,
        delta_union=delta_union,
        delta_s=delta_s,
    )


@dataclass(frozen=True)
class Prop2Check:
    holds: bool
    factor: float
    lhs: float
    rhs: float
    slack: float


def check_prop2(Phi, x, v, trace, k, l, delta_l, tau, ric=None):
    """Verify the multi-step geometric residual-decay bound.

    Compares ||r^{l+dl}||^2 - B against
    exp(-dl (1 - delta)/(ceil(|subset_tau|/S)(1 + delta_S))) (||r^l||^2 - B)
    where B is the tail energy term of level tau and delta is the exact
    RIC of order |subset_tau union T^{l+dl-1}|. delta_l = 0 degenerates to
    factor 1 (a trivial equality).
    """
    Phi = as_matrix(Phi)
    x = as_vector(x, Phi.shape[1], "x")
    v = as_vector(v, Phi.shape[0], "v")
    if l < k:
        raise ValueError("l must be >= k")
    if delta_l < 0:
        raise ValueError("delta_l must be >= 0")
    if l + delta_l > len(trace):
        raise ValueError(f"trace has {len(trace)} iterations, need {l + delta_l}")
    if ric is None:
        ric = RicCalculator(Phi)
    S = trace.selection_size
    report = partition(x, trace.support_at(k), S)
    if not 1 <= tau <= report.tau_max:
        raise ValueError(f"tau={tau} out of range 1..{report.tau_max}")
    g_tau = report.subsets[tau]
    b_tau = _tail_energy_term(Phi, x, v, report.gamma[g_tau.size :])

    if delta_l == 0:
        factor = 1.0
    else:
        union = np.union1d(g_tau, trace.support_at(l + delta_l - 1))
        ceil_term = -(-g_tau.size // S)
        factor = math.exp(
            -delta_l
            * (1.0 - ric.delta(union.size))
            / (ceil_term * (1.0 + ric.delta(S)))
        )
    lhs = trace.residual_norm_at(l + delta_l) ** 2 - b_tau
    rhs = factor * (trace.residual_norm_at(l) ** 2 - b_tau)
    tol = _INEQ_RTOL * max(1.0, abs(lhs), abs(rhs))
    return Prop2Check(
        holds=lhs <= rhs + tol, factor=factor, lhs=lhs, rhs=rhs, slack=rhs - lhs
    )


@dataclass(frozen=True)
class TheoremResidualCheck:
    holds: bool
    residual_norm: float
    bound: float
    mu0: float
    delta: float
    delta_order: int
    iterations: int


def check_theorem_residual(Phi, x, v, S, budget=RIC_BUDGET):
    """Check the residual stability bound: after max(K, floor(8K/S))
    iterations the
    residual norm is at most mu_0 ||v||_2, where mu_0 comes from
    bound_constants at a certified RIC of order 7K.

    Certification uses exact enumeration at order 7K when affordable, else
    the exact full-order constant (monotone upper bound). Refuses (raising
    ConditionNotCertifiedError with the measured delta) when the certified
    value exceeds 1/8.
    """
    Phi = as_matrix(Phi)
    m, n = Phi.shape
    x = as_vector(x, n, "x")
    v = as_vector(v, m, "v")
    K = int(np.count_nonzero(x))
    if K < 1:
        raise ValueError("x must have at least one nonzero entry")
    if S > K:
        raise ValueError(f"S={S} must satisfy S <= K={K}")
    delta, order = ric_certified_upper(Phi, 7 * K, budget)
    if delta > 0.125:
        raise ConditionNotCertifiedError(
            f"measured delta ({delta:.6f} at order {order}) exceeds 1/8", delta=delta
        )
    mu0 = bound_constants(delta).mu_k
    iters = min(max(K, (8 * K) // S), m // S)
    result = gomp_solve(
        Phi,
        Phi @ x + v,
        PursuitConfig(
            sparsity=K,
            selection_size=S,
            stopping_mode="fixed_iterations",
            max_iterations=iters,
        ),
    )
    lhs = result.trace.residual_norm_at(result.iterations_used)
    bound = mu0 * float(np.linalg.norm(v))
    return TheoremResidualCheck(
        holds=lhs <= bound + 1e-8,
        residual_norm=lhs,
        bound=bound,
        mu0=mu0,
        delta=delta,
        delta_order=order,
        iterations=result.iterations_used,
    )


# -- partition invariants and the verification corpus -----------------------


def partition_invariant_violations(report, x, selected, S):
    """Names of partition invariants violated by a report (empty = all hold)."""
    if hasattr(x, "dense"):
        x = x.dense()
    x = np.asarray(x, dtype=np.float64).ravel()
    bad = []
    expected_gamma = _ranked_remaining(x, as_index_set(selected, x.size))
    if not np.array_equal(report.gamma, expected_gamma):
        bad.append("gamma_ranking")
    g = report.gamma.size
    if g == 0:
        if report.sizes != (0,) or report.L is not None:
            bad.append("empty_gamma_flag")
        return bad
    sizes = report.sizes
    if sizes[0] != 0 or sizes[-1] != g:
        bad.append("subset_boundaries")
    for t in range(1, len(sizes)):
        if sizes[t] != min((S << (t - 1)), g):
            bad.append("subset_sizes")
            break
    if abs(report.sigma * report.eta - 0.5) > 1e-14:
        bad.append("sigma_eta_product")

    tails = report.tail_energies
    L = report.L
    for t in range(L - 1):  # strict growth up to L-1
        if not tails[t] < SIGMA * tails[t + 1]:
            bad.append("level_selection_strict")
            break
    if not tails[L - 1] >= SIGMA * tails[L]:
        bad.append("level_selection_stop")
    for t in range(L + 1):  # geometric tail decay
        cap = SIGMA ** (L - 1 - t) * tails[L - 1]
        if tails[t] > cap * (1.0 + 1e-12) + 1e-300:
            bad.append("tail_decay")
            break
    if L >= 2:
        if not g > (2 * SIGMA - 1) / (2 * SIGMA - 2) * (1 << (L - 2)) * S:
            bad.append("gamma_lower_bound")
    expect = [2 * c for c in itertools.accumulate(-(-sizes[i] // S) for i in range(L + 1))]
    if list(report.milestones) != expect:
        bad.append("milestones")
    if report.milestones[L] > 2 * ((1 << L) - 1):
        bad.append("milestone_cap")
    return bad


def _orthonormal_columns(m, n, rng):
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    return q[:, :n]


def perturbed_orthonormal(m, n, eps, rng):
    """Near-isometry test matrix: orthonormal columns plus eps * Gaussian."""
    if n > m:
        raise ValueError("need n <= m for orthonormal columns")
    return _orthonormal_columns(m, n, rng) + eps * rng.standard_normal((m, n))


def _sparse_pair(rng, n):
    """Random sparse vector pair with a controllable support overlap."""
    out = []
    for _ in range(2):
        k = int(rng.integers(1, max(2, n // 2)))
        support = rng.choice(n, size=k, replace=False)
        vec = np.zeros(n)
        vec[support] = rng.standard_normal(k)
        out.append(vec)
    return out


def run_verification_corpus(
    lemma_pairs=10_000,
    partition_draws=10_000,
    pursuit_instances=500,
    seed=173,
):
    """Run the randomized inequality corpora and report violation counts.

    Returns a JSON-friendly dict: corpus parameters, per-check counts and
    violations, and the worst observed slack per check.
    """
    rng = np.random.default_rng(seed)
    report = {
        "parameters": {
            "lemma_pairs": lemma_pairs,
            "partition_draws": partition_draws,
            "pursuit_instances": pursuit_instances,
            "seed": seed,
        }
    }

    # correlation lemma on random sparse pairs
    worst = np.inf
    violations = 0
    for _ in range(lemma_pairs):
        n = int(rng.integers(6, 40))
        u, z = _sparse_pair(rng, n)
        S = int(rng.integers(1, 4))
        chk = check_lemma1(u, z, S)
        worst = min(worst, chk.rhs - chk.lhs)
        violations += not chk.holds
    report["lemma1"] = {
        "checks": lemma_pairs,
        "violations": violations,
        "worst_slack": worst,
    }

    # partition invariants on random (x, T^k, S) draws
    violations = 0
    by_name = {}
    for _ in range(partition_draws):
        n = int(rng.integers(4, 64))
        k = int(rng.integers(1, min(24, n) + 1))
        support = rng.choice(n, size=k, replace=False)
        x = np.zeros(n)
        if rng.random() < 0.5:
            x[support] = rng.standard_normal(k)
        else:  # geometric magnitudes exercise larger partition levels
            ratio = rng.uniform(0.05, 0.9)
            x[support] = ratio ** np.arange(k) * rng.choice([-1.0, 1.0], size=k)
        S = int(rng.integers(1, 5))
        t_sel = rng.choice(n, size=int(rng.integers(0, n + 1)), replace=False)
        rep = partition(x, np.sort(t_sel), S)
        bad = partition_invariant_violations(rep, x, np.sort(t_sel), S)
        if bad:
            violations += 1
            for name in bad:
                by_name[name] = by_name.get(name, 0) + 1
    report["partition"] = {
        "checks": partition_draws,
        "violations": violations,
        "violated_invariants": by_name,
    }

    # residual propositions along real pursuit traces with exact RICs
    stats = {
        "prop1_energy_bound": {"checks": 0, "violations": 0, "worst_slack": np.inf},
        "prop1_decrease_bound": {"checks": 0, "violations": 0, "worst_slack": np.inf},
        "prop2": {"checks": 0, "violations": 0, "worst_slack": np.inf},
    }
    for _ in range(pursuit_instances):
        m = int(rng.choice([12, 14, 16]))
        n = m - int(rng.integers(0, 5))
        # perturbation kept small enough that every RIC order used below
        # stays under 1 (the propositions are vacuous where RIP fails)
        eps = 10.0 ** rng.uniform(-3.5, -1.6)
        Phi = perturbed_orthonormal(m, n, eps, rng)
        K = int(rng.integers(1, 4))
        S = int(rng.integers(1, min(K, 2) + 1))
        support = rng.choice(n, size=K, replace=False)
        x = np.zeros(n)
        x[support] = rng.standard_normal(K) * (
            10.0 ** rng.uniform(-2, 0, size=K) if rng.random() < 0.5 else 1.0
        )
        noise_scale = rng.choice([0.0, 1e-3, 1e-1])
        v = noise_scale * np.linalg.norm(Phi @ x) * rng.standard_normal(m)
        iters = min(max(K, (8 * K) // S), m // S, 4)
        res = gomp_solve(
            Phi,
            Phi @ x + v,
            PursuitConfig(K, S, stopping_mode="fixed_iterations", max_iterations=iters),
        )
        trace = res.trace
        ric = RicCalculator(Phi)
        k = int(rng.integers(0, 2))
        part = partition(x, trace.support_at(k), S)
        if part.tau_max < 1:  # support fully selected at iteration k
            k = 0
            part = partition(x, trace.support_at(0), S)
        tau = int(rng.integers(1, part.tau_max + 1))
        l = min(k + int(rng.integers(0, 2)), len(trace) - 1)
        p1 = check_prop1(Phi, x, v, trace, k, l, tau, ric=ric)
        stats["prop1_energy_bound"]["checks"] += 1
        stats["prop1_energy_bound"]["violations"] += not p1.holds_24
        stats["prop1_energy_bound"]["worst_slack"] = min(
            stats["prop1_energy_bound"]["worst_slack"], p1.slack_24
        )
        stats["prop1_decrease_bound"]["checks"] += 1
        stats["prop1_decrease_bound"]["violations"] += not p1.holds_25
        stats["prop1_decrease_bound"]["worst_slack"] = min(
            stats["prop1_decrease_bound"]["worst_slack"], p1.slack_25
        )
        dl = int(rng.integers(1, 3))
        if l + dl <= len(trace):
            p2 = check_prop2(Phi, x, v, trace, k, l, dl, tau, ric=ric)
            stats["prop2"]["checks"] += 1
            stats["prop2"]["violations"] += not p2.holds
            stats["prop2"]["worst_slack"] = min(stats["prop2"]["worst_slack"], p2.slack)
    report.update(stats)
    report["total_violations"] = (
        report["lemma1"]["violations"]
        + report["partition"]["violations"]
        + sum(stats[k]["violations"] for k in stats)
    )
    return report
