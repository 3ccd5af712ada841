"""Generalized orthogonal matching pursuit.

gOMP selects the S columns most correlated with the current residual,
augments the support, re-estimates by least squares on the support, and
updates the residual; OMP is the S=1 special case. After the loop stops,
the estimate is pruned to the K largest-magnitude entries and refit.

Every run produces a full iteration trace (selected block, cumulative
support, dense estimate, residual norm) so that the theory checkers can
replay the residual chain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import (
    IncrementalQR,
    SingularSystemError,
    as_index_set,
    as_matrix,
    as_vector,
    correlations,
    least_squares,
)

STOPPING_MODES = ("threshold", "fixed_iterations")


@dataclass(frozen=True)
class PursuitConfig:
    """Solver inputs.

    sparsity : target sparsity K (also the pruned output size)
    selection_size : indices selected per iteration, 1 <= S <= K
    residual_threshold : stop level for threshold mode; None means
        1e-6 * ||y||_2, resolved at solve time
    max_iterations : explicit cap; None resolves to the mode default
        (floor(m/S) in threshold mode, min(max(K, floor(8K/S)), floor(m/S))
        in fixed_iterations mode)
    stopping_mode : "threshold" or "fixed_iterations"
    """

    sparsity: int
    selection_size: int = 1
    residual_threshold: float | None = None
    max_iterations: int | None = None
    stopping_mode: str = "threshold"

    def __post_init__(self):
        if self.sparsity < 1:
            raise ValueError("sparsity K must be >= 1")
        if self.selection_size < 1:
            raise ValueError("selection size S must be >= 1")
        if self.selection_size > self.sparsity:
            raise ValueError(
                f"selection size S={self.selection_size} must satisfy S <= K={self.sparsity}"
            )
        if self.stopping_mode not in STOPPING_MODES:
            raise ValueError(f"stopping_mode must be one of {STOPPING_MODES}")
        if self.residual_threshold is not None and not self.residual_threshold >= 0:
            raise ValueError("residual threshold must be nonnegative")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def to_dict(self):
        return {
            "sparsity": self.sparsity,
            "selection_size": self.selection_size,
            "residual_threshold": self.residual_threshold,
            "max_iterations": self.max_iterations,
            "stopping_mode": self.stopping_mode,
        }


@dataclass(frozen=True)
class IterationRecord:
    """State after one identification/augmentation/estimation/update step."""

    selected: np.ndarray       # block chosen this iteration, sorted, |.| = S
    support: np.ndarray        # cumulative support, sorted
    estimate: np.ndarray       # dense length-n estimate supported on `support`
    residual_norm: float


@dataclass(frozen=True)
class PursuitTrace:
    """Complete per-iteration history of a solve.

    Iteration 0 is the initial state (empty support, residual = y);
    `iterations[k-1]` holds the state after iteration k.
    """

    initial_residual_norm: float
    selection_size: int
    iterations: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.iterations)

    def residual_norm_at(self, k):
        """||r^k||_2, with k=0 meaning the initial residual."""
        if k == 0:
            return self.initial_residual_norm
        return self.iterations[k - 1].residual_norm

    def support_at(self, k):
        """Cumulative support T^k (empty for k=0)."""
        if k == 0:
            return np.zeros(0, dtype=np.intp)
        return self.iterations[k - 1].support

    @property
    def residual_norms(self):
        """[||r^0||, ||r^1||, ...] including the initial residual."""
        return [self.initial_residual_norm] + [
            it.residual_norm for it in self.iterations
        ]


@dataclass(frozen=True)
class PursuitResult:
    support: np.ndarray        # pruned support, |.| = K, sorted
    estimate: np.ndarray       # dense length-n estimate after the pruned refit
    trace: PursuitTrace
    iterations_used: int
    config: PursuitConfig
    effective_threshold: float
    iteration_cap_clamped: bool

    @property
    def residual_norm(self):
        """Residual norm reached by the iteration loop (before pruning)."""
        return self.trace.residual_norm_at(self.iterations_used)

    def to_dict(self):
        """JSON-friendly summary: config, per-iteration residual norms and
        selections, final support and estimate."""
        return {
            "config": self.config.to_dict(),
            "effective_threshold": self.effective_threshold,
            "iterations_used": self.iterations_used,
            "iteration_cap_clamped": self.iteration_cap_clamped,
            "residual_norms": self.trace.residual_norms,
            "selected_per_iteration": [
                it.selected.tolist() for it in self.trace.iterations
            ],
            "support": self.support.tolist(),
            "estimate": self.estimate.tolist(),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def identify_top_s(c, S, exclude=()):
    """Indices of the S largest-magnitude entries of c outside `exclude`.

    Maximizing the l1 norm over fixed-size index sets is the same as
    taking the top S magnitudes. Ties break toward the smallest index.
    """
    c = np.asarray(c, dtype=np.float64).ravel()
    exclude = as_index_set(exclude, c.size)
    if S < 1:
        raise ValueError("S must be >= 1")
    if S > c.size - exclude.size:
        raise ValueError(
            f"cannot select S={S} indices: only {c.size - exclude.size} available"
        )
    key = np.abs(c)
    if exclude.size:
        key = key.copy()
        key[exclude] = -np.inf
    # stable sort on descending magnitude keeps the smallest index first
    # among ties
    top = np.argsort(-key, kind="stable")[:S]
    return np.sort(top).astype(np.intp)


def prune_to_k(xk, K):
    """Support of the best K-term approximation of xk (ties by smallest index)."""
    xk = np.asarray(xk, dtype=np.float64).ravel()
    if K < 1 or K > xk.size:
        raise ValueError(f"K={K} out of range for a length-{xk.size} vector")
    top = np.argsort(-np.abs(xk), kind="stable")[:K]
    return np.sort(top).astype(np.intp)


def _resolve_iteration_cap(config, K, S, m):
    """Iteration budget and whether the theorem-style default was clamped."""
    guard = m // S  # loop guard keeps |T| <= m so LS stays overdetermined
    if guard < 1:
        raise ValueError(f"m={m} too small for selection size S={S}")
    if config.max_iterations is not None:
        if config.max_iterations * S > m:
            raise ValueError(
                f"max_iterations={config.max_iterations} x S={S} exceeds m={m}"
            )
        return config.max_iterations, False
    if config.stopping_mode == "fixed_iterations":
        want = max(K, (8 * K) // S)
        return min(want, guard), want > guard
    return guard, False


def gomp_solve(Phi, y, config):
    """Run generalized OMP.

    Parameters
    ----------
    Phi : ndarray (m, n)
        Measurement matrix.
    y : ndarray (m,)
        Measurements.
    config : PursuitConfig

    Returns
    -------
    PursuitResult

    Raises
    ------
    ValueError
        For invalid dimensions or configuration.
    SingularSystemError
        If a least-squares subsystem is rank deficient; the message names
        the offending iteration.
    """
    Phi = as_matrix(Phi)
    m, n = Phi.shape
    y = as_vector(y, m, "y")
    K, S = config.sparsity, config.selection_size
    if K > min(m, n):
        raise ValueError(f"sparsity K={K} exceeds min(m, n)={min(m, n)}")
    max_iter, clamped = _resolve_iteration_cap(config, K, S, m)

    y_norm = float(np.linalg.norm(y))
    threshold_mode = config.stopping_mode == "threshold"
    eps = config.residual_threshold
    if eps is None:
        eps = 1e-6 * y_norm

    factor = IncrementalQR(Phi)
    r = y.copy()
    r_norm = y_norm
    records = []
    support = np.zeros(0, dtype=np.intp)

    for k in range(1, max_iter + 1):
        if threshold_mode and r_norm <= eps:
            break
        if n - support.size < S:
            break  # no full block left to select
        sel = identify_top_s(correlations(Phi, r), S, exclude=support)
        try:
            factor.append(sel)
        except np.linalg.LinAlgError as err:
            raise SingularSystemError(f"iteration {k}: {err}") from err
        support = np.union1d(support, sel).astype(np.intp)
        coef = factor.coefficients(y)
        estimate = np.zeros(n)
        estimate[factor.columns] = coef
        r = factor.project_out(y)
        r_norm = float(np.linalg.norm(r))
        records.append(IterationRecord(sel, support, estimate, r_norm))

    trace = PursuitTrace(y_norm, S, tuple(records))
    last = records[-1].estimate if records else np.zeros(n)
    pruned = prune_to_k(last, K)
    refit = least_squares(Phi, pruned, y)
    return PursuitResult(
        support=pruned,
        estimate=refit.dense(n),
        trace=trace,
        iterations_used=len(records),
        config=config,
        effective_threshold=float(eps),
        iteration_cap_clamped=clamped,
    )


def omp_solve(Phi, y, config):
    """OMP: gOMP with the selection size forced to 1."""
    return gomp_solve(Phi, y, replace(config, selection_size=1))
