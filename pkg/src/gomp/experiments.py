"""Problem generation and the Monte-Carlo benchmark harness.

Implements the simulation protocol used for the MSE-vs-SNR and
running-time sweeps: Gaussian N(0, 1/m) measurement matrices,
Gaussian-Bernoulli (or Rademacher-Bernoulli / power-law compressible)
signals, SNR-calibrated Gaussian noise, and the Oracle-LS and linear-MMSE
baselines next to OMP and gOMP.

Everything is deterministic under a master seed: per-trial generators are
derived with counter-based spawn keys, and aggregation is keyed by trial
index, so tables are byte-identical across runs (and thread counts) apart
from wall-time columns.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from . import __version__
from .linalg import as_index_set, as_matrix, as_vector, least_squares
from .pursuit import PursuitConfig, gomp_solve, omp_solve, prune_to_k

SIGNAL_MODELS = ("gaussian_bernoulli", "rademacher_bernoulli", "compressible")
ALGORITHMS = ("omp", "gomp", "oracle_ls", "linear_mmse")
SNR_DB_CAP = 300.0


@dataclass(frozen=True)
class SparseSignal:
    """Ground-truth signal: support positions plus the nonzero values."""

    length: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", as_index_set(self.support, self.length))
        vals = np.asarray(self.values, dtype=np.float64).ravel()
        if vals.size != self.support.size:
            raise ValueError("support and values must have equal length")
        if np.any(vals == 0):
            raise ValueError("signal values must be nonzero")
        object.__setattr__(self, "values", vals)

    @property
    def nnz(self):
        return self.support.size

    def dense(self):
        x = np.zeros(self.length)
        x[self.support] = self.values
        return x

    @classmethod
    def from_dense(cls, x):
        x = np.asarray(x, dtype=np.float64).ravel()
        support = np.flatnonzero(x)
        return cls(x.size, support, x[support])


@dataclass(frozen=True)
class TrialSpec:
    """One random problem instance description.

    Exactly one of sparsity_rate (Bernoulli support) or sparsity (fixed
    support size) must be set. snr_db=None means a noise-free instance.
    """

    m: int
    n: int
    selection_size: int
    seed: int
    sparsity_rate: float | None = None
    sparsity: int | None = None
    snr_db: float | None = None
    signal_model: str = "gaussian_bernoulli"
    compressible_exponent: float = 2.0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be >= 1")
        if (self.sparsity_rate is None) == (self.sparsity is None):
            raise ValueError("set exactly one of sparsity_rate or sparsity")
        if self.sparsity_rate is not None:
            if not 0.0 < self.sparsity_rate <= 1.0:
                raise ValueError("sparsity_rate must be in (0, 1]")
            if self.sparsity_rate * self.n < 1.0:
                raise ValueError("sparsity_rate * n must be >= 1")
        if self.sparsity is not None and not 1 <= self.sparsity <= self.n:
            raise ValueError("sparsity must be in [1, n]")
        if self.signal_model not in SIGNAL_MODELS:
            raise ValueError(f"signal_model must be one of {SIGNAL_MODELS}")
        if self.selection_size < 1:
            raise ValueError("selection_size must be >= 1")

    @property
    def expected_nonzeros(self):
        if self.sparsity is not None:
            return float(self.sparsity)
        return self.sparsity_rate * self.n


def trial_rng(master_seed, *key):
    """Generator derived from a master seed and a counter key (deterministic,
    independent across keys, safe to use from parallel workers)."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in key))
    )


def gen_matrix(m, n, seed):
    """m x n matrix with i.i.d. N(0, 1/m) entries; deterministic per seed.

    `seed` may be an integer or an existing numpy Generator.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return as_matrix(rng.normal(0.0, 1.0 / math.sqrt(m), size=(m, n)))


def gen_signal(spec, rng=None):
    """Draw a signal from the trial spec's model.

    gaussian_bernoulli: each entry nonzero with probability p, value
    N(0, 1). rademacher_bernoulli: same support model, values +-1.
    compressible: magnitudes proportional to i^(-exponent) on a random
    permutation with random signs (no exact sparsity).

    Returns
    -------
    (SparseSignal, resamples) where resamples counts all-zero draws that
    had to be redrawn (rate-based models only).
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    n = spec.n
    if spec.signal_model == "compressible":
        mags = np.arange(1, n + 1, dtype=np.float64) ** (-spec.compressible_exponent)
        signs = rng.choice([-1.0, 1.0], size=n)
        x = np.empty(n)
        x[rng.permutation(n)] = mags * signs
        return SparseSignal.from_dense(x), 0

    values = None
    resamples = 0
    if spec.sparsity is not None:
        support = np.sort(rng.choice(n, size=spec.sparsity, replace=False))
    else:
        while True:
            mask = rng.random(n) < spec.sparsity_rate
            if mask.any():
                break
            resamples += 1
        support = np.flatnonzero(mask)
    k = support.size
    if spec.signal_model == "rademacher_bernoulli":
        values = rng.choice([-1.0, 1.0], size=k)
    else:
        values = rng.standard_normal(k)
        while np.any(values == 0.0):  # zero draws are measure-zero but invalid
            values[values == 0.0] = rng.standard_normal(np.count_nonzero(values == 0.0))
    return SparseSignal(n, support, values), resamples


def noise_variance(spec):
    """Per-component noise variance (pn/m) 10^(-SNR/10), SNR capped at 300 dB."""
    snr = SNR_DB_CAP if spec.snr_db is None else min(spec.snr_db, SNR_DB_CAP)
    return spec.expected_nonzeros / spec.m * 10.0 ** (-snr / 10.0)


def gen_noise(spec, m, rng=None):
    """i.i.d. Gaussian noise calibrated to the trial spec's SNR.

    With the matrix entries carrying power 1/m and expected signal
    sparsity pn, each measurement component has power pn/m, so the target
    per-component noise variance is (pn/m) 10^(-SNR/10).
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    return rng.normal(0.0, math.sqrt(noise_variance(spec)), size=m)


def oracle_ls(Phi, y, support):
    """Least-squares refit on the true support (the support-aware lower
    baseline); zero off the support."""
    Phi = as_matrix(Phi)
    sol = least_squares(Phi, support, y)
    return sol.dense(Phi.shape[1])


def linear_mmse(Phi, y, prior_variance, noise_var):
    """Linear (Wiener) MMSE estimate for an i.i.d. prior.

    x_hat = p Phi' (p Phi Phi' + noise_var I)^(-1) y, where p is the
    per-entry prior variance (the sparsity rate for a unit-variance
    Gaussian-Bernoulli prior).
    """
    Phi = as_matrix(Phi)
    m = Phi.shape[0]
    y = as_vector(y, m, "y")
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    gram = prior_variance * (Phi @ Phi.T) + noise_var * np.eye(m)
    try:
        z = scipy.linalg.solve(gram, y, assume_a="pos")
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError(f"MMSE system not invertible: {err}") from err
    return prior_variance * (Phi.T @ z)


@dataclass(frozen=True)
class TrialRecord:
    """Metrics of a single trial, per algorithm."""

    trial: int
    realized_k: int
    noise_norm: float
    resamples: int
    mse: dict
    l2_error: dict
    support_recovered: dict
    wall_time_s: dict
    iterations: dict
    error: str | None = None


@dataclass(frozen=True)
class SweepRow:
    """One output-table row: a grid cell for one algorithm."""

    x_name: str
    x_value: float
    algorithm: str
    mean_mse: float
    stderr_mse: float
    mean_l2: float
    median_time_ms: float
    trials: int
    failures: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    records: tuple
    manifest: dict

    def to_csv(self, include_timing=True):
        """Render the rows table as CSV text (deterministic float formatting)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = [self.rows[0].x_name if self.rows else "x", "algorithm",
                  "mean_mse", "stderr_mse", "mean_l2"]
        if include_timing:
            header.append("median_time_ms")
        header += ["trials", "failures"]
        writer.writerow(header)
        for row in self.rows:
            rec = [repr(float(row.x_value)), row.algorithm,
                   repr(float(row.mean_mse)), repr(float(row.stderr_mse)),
                   repr(float(row.mean_l2))]
            if include_timing:
                rec.append(repr(float(row.median_time_ms)))
            rec += [row.trials, row.failures]
            writer.writerow(rec)
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {"rows": [asdict(r) for r in self.rows], "manifest": self.manifest},
            indent=2,
            default=float,
        )


def _support_of_top_k(estimate, k):
    return prune_to_k(estimate, k) if 0 < k <= estimate.size else np.zeros(0, np.intp)


def _run_trial(Phi, spec, sig, v, k_input, algorithms):
    """Run every algorithm on one prepared instance; returns metric dicts."""
    x = sig.dense()
    y = Phi @ x + v
    n = spec.n
    noisy = spec.snr_db is not None
    mse, l2, rec, times, iters = {}, {}, {}, {}, {}
    prior_var = (
        spec.sparsity_rate
        if spec.sparsity_rate is not None
        else spec.expected_nonzeros / n
    )
    nv = max(noise_variance(spec), 1e-300)
    for alg in algorithms:
        t0 = time.perf_counter()
        n_iter = None
        if alg in ("omp", "gomp"):
            # rare low-sparsity draws: the block size cannot exceed K
            s_eff = min(spec.selection_size, k_input) if alg == "gomp" else 1
            cfg = PursuitConfig(
                sparsity=k_input,
                selection_size=s_eff,
                stopping_mode="fixed_iterations" if noisy else "threshold",
            )
            solver = gomp_solve if alg == "gomp" else omp_solve
            res = solver(Phi, y, cfg)
            estimate = res.estimate
            n_iter = res.iterations_used
        elif alg == "oracle_ls":
            estimate = oracle_ls(Phi, y, sig.support)
        elif alg == "linear_mmse":
            estimate = linear_mmse(Phi, y, prior_var, nv)
        else:
            raise ValueError(f"unknown algorithm {alg!r}")
        times[alg] = time.perf_counter() - t0
        diff = x - estimate
        err2 = float(diff @ diff)
        mse[alg] = err2 / n
        l2[alg] = math.sqrt(err2)
        top = _support_of_top_k(estimate, min(k_input, n))
        rec[alg] = bool(np.array_equal(top, _support_of_top_k(x, min(k_input, n))))
        iters[alg] = n_iter
    return mse, l2, rec, times, iters


def _make_trial(cell_index, trial_index, base_spec, master_seed, fixed_phi, k_mode,
                algorithms):
    rng = trial_rng(master_seed, cell_index, trial_index)
    Phi = fixed_phi if fixed_phi is not None else gen_matrix(base_spec.m, base_spec.n, rng)
    sig, resamples = gen_signal(base_spec, rng)
    v = (
        gen_noise(base_spec, base_spec.m, rng)
        if base_spec.snr_db is not None
        else np.zeros(base_spec.m)
    )
    if base_spec.signal_model == "compressible":
        k_input = base_spec.sparsity
    elif k_mode == "expected":
        k_input = max(1, math.ceil(base_spec.expected_nonzeros))
    else:
        k_input = sig.nnz
    k_input = min(k_input, base_spec.m, base_spec.n)
    try:
        mse, l2, rec, times, iters = _run_trial(
            Phi, base_spec, sig, v, k_input, algorithms
        )
        err = None
    except (np.linalg.LinAlgError, ValueError) as exc:
        mse, l2, rec, times, iters = {}, {}, {}, {}, {}
        err = f"{type(exc).__name__}: {exc}"
    return TrialRecord(
        trial=trial_index,
        realized_k=sig.nnz,
        noise_norm=float(np.linalg.norm(v)),
        resamples=resamples,
        mse=mse,
        l2_error=l2,
        support_recovered=rec,
        wall_time_s=times,
        iterations=iters,
        error=err,
    )


def _aggregate_rows(x_name, x_value, records, algorithms):
    rows = []
    good = [r for r in records if r.error is None]
    failures = len(records) - len(good)
    for alg in algorithms:
        mses = np.array([r.mse[alg] for r in good])
        l2s = np.array([r.l2_error[alg] for r in good])
        ts = np.array([r.wall_time_s[alg] for r in good])
        rows.append(
            SweepRow(
                x_name=x_name,
                x_value=float(x_value),
                algorithm=alg,
                mean_mse=float(mses.mean()) if mses.size else math.nan,
                stderr_mse=float(mses.std(ddof=1) / math.sqrt(mses.size))
                if mses.size > 1
                else 0.0,
                mean_l2=float(l2s.mean()) if l2s.size else math.nan,
                median_time_ms=float(np.median(ts) * 1e3) if ts.size else math.nan,
                trials=len(records),
                failures=failures,
            )
        )
    return rows


def _manifest(kind, params, master_seed, records):
    return {
        "sweep": kind,
        "spec": params,
        "master_seed": master_seed,
        "algorithms": list(ALGORITHMS),
        "total_resamples": int(sum(r.resamples for r in records)),
        "failed_trials": int(sum(r.error is not None for r in records)),
        "versions": {
            "gomp": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
    }


def _run_cells(cells, trials, master_seed, k_mode, fresh_matrix, threads, algorithms):
    """Run trials for each (index, spec) cell; deterministic keyed aggregation."""
    all_records = []
    per_cell = []
    for ci, spec in cells:
        fixed_phi = None
        if not fresh_matrix:
            fixed_phi = gen_matrix(spec.m, spec.n, trial_rng(master_seed, ci, 2**31))
        if threads and threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                recs = list(
                    pool.map(
                        lambda ti: _make_trial(
                            ci, ti, spec, master_seed, fixed_phi, k_mode, algorithms
                        ),
                        range(trials),
                    )
                )
        else:
            recs = [
                _make_trial(ci, ti, spec, master_seed, fixed_phi, k_mode, algorithms)
                for ti in range(trials)
            ]
        per_cell.append(recs)
        all_records.extend(recs)
    return per_cell, all_records


def run_mse_sweep(
    m,
    n,
    sparsity_rate,
    selection_size,
    snr_db_grid,
    trials,
    master_seed,
    signal_model="gaussian_bernoulli",
    k_mode="realized",
    fresh_matrix=True,
    threads=1,
):
    """MSE vs SNR sweep over {OMP, gOMP, Oracle-LS, linear-MMSE}.

    Noisy cells run the pursuit solvers for the theorem-style fixed
    iteration count; each algorithm sees the same instances. Results are
    deterministic under (master_seed, grid), independent of thread count.
    """
    if not snr_db_grid:
        raise ValueError("snr_db_grid must be nonempty")
    if k_mode not in ("realized", "expected"):
        raise ValueError("k_mode must be 'realized' or 'expected'")
    cells = [
        (
            ci,
            TrialSpec(
                m=m,
                n=n,
                selection_size=selection_size,
                seed=master_seed,
                sparsity_rate=sparsity_rate,
                snr_db=snr,
                signal_model=signal_model,
            ),
        )
        for ci, snr in enumerate(snr_db_grid)
    ]
    per_cell, all_records = _run_cells(
        cells, trials, master_seed, k_mode, fresh_matrix, threads, ALGORITHMS
    )
    rows = []
    for (ci, spec), recs in zip(cells, per_cell):
        rows.extend(_aggregate_rows("snr_db", spec.snr_db, recs, ALGORITHMS))
    params = {
        "m": m,
        "n": n,
        "sparsity_rate": sparsity_rate,
        "selection_size": selection_size,
        "snr_db_grid": list(snr_db_grid),
        "trials": trials,
        "signal_model": signal_model,
        "k_mode": k_mode,
        "fresh_matrix": fresh_matrix,
    }
    return SweepResult(
        tuple(rows), tuple(all_records), _manifest("mse", params, master_seed, all_records)
    )


def run_timing_sweep(
    m,
    n,
    rate_grid,
    selection_size,
    trials,
    master_seed,
    snr_db=None,
    signal_model="gaussian_bernoulli",
    k_mode="realized",
    fresh_matrix=True,
):
    """Median running time per algorithm as a function of the sparsity rate.

    Identical instances are fed to all algorithms; execution is serial so
    the wall-clock comparison is fair. Defaults to noise-free instances
    (threshold stopping), where the pursuit iteration counts are also
    comparable.
    """
    if not rate_grid:
        raise ValueError("rate_grid must be nonempty")
    cells = [
        (
            ci,
            TrialSpec(
                m=m,
                n=n,
                selection_size=selection_size,
                seed=master_seed,
                sparsity_rate=p,
                snr_db=snr_db,
                signal_model=signal_model,
            ),
        )
        for ci, p in enumerate(rate_grid)
    ]
    per_cell, all_records = _run_cells(
        cells, trials, master_seed, k_mode, fresh_matrix, threads=1,
        algorithms=ALGORITHMS,
    )
    rows = []
    for (ci, spec), recs in zip(cells, per_cell):
        rows.extend(_aggregate_rows("p", spec.sparsity_rate, recs, ALGORITHMS))
    params = {
        "m": m,
        "n": n,
        "rate_grid": list(rate_grid),
        "selection_size": selection_size,
        "snr_db": snr_db,
        "trials": trials,
        "signal_model": signal_model,
        "k_mode": k_mode,
        "fresh_matrix": fresh_matrix,
    }
    return SweepResult(
        tuple(rows),
        tuple(all_records),
        _manifest("timing", params, master_seed, all_records),
    )


def best_k_term(x, k):
    """Best k-term approximation (keep the k largest magnitudes)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    out = np.zeros_like(x)
    keep = prune_to_k(x, k)
    out[keep] = x[keep]
    return out


def compressible_ratio(x, estimate, v, k):
    """Empirical stability ratio ||x_hat - x|| / (||x - x_K||_1 / sqrt(K) + ||v||).

    Zero when the estimate is (numerically) exact; infinite when the
    denominator vanishes while the error does not.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    err = float(np.linalg.norm(estimate - x))
    if err <= 1e-12:
        return 0.0
    tail = x - best_k_term(x, k)
    denom = float(np.linalg.norm(tail, 1)) / math.sqrt(k) + float(np.linalg.norm(v))
    return err / denom if denom > 0 else math.inf


def run_compressible(
    m,
    n,
    sparsity,
    selection_size,
    exponent,
    snr_db,
    trials,
    master_seed,
):
    """Stability sweep for non-sparse (power-law) signals.

    Runs gOMP for min(max(2K, floor(16K/S)), floor(m/S)) iterations and
    reports the distribution of the empirical stability ratio. No
    pass/fail bound is attached: the guarantee's constant is not available
    in closed form, so only the observed distribution is reported.
    """
    spec = TrialSpec(
        m=m,
        n=n,
        selection_size=selection_size,
        seed=master_seed,
        sparsity=sparsity,
        snr_db=snr_db,
        signal_model="compressible",
        compressible_exponent=exponent,
    )
    ratios = []
    records = []
    failures = 0
    iters = min(max(2 * sparsity, (16 * sparsity) // selection_size), m // selection_size)
    for ti in range(trials):
        rng = trial_rng(master_seed, 0, ti)
        Phi = gen_matrix(m, n, rng)
        sig, _ = gen_signal(spec, rng)
        x = sig.dense()
        v = gen_noise(spec, m, rng) if snr_db is not None else np.zeros(m)
        y = Phi @ x + v
        try:
            res = gomp_solve(
                Phi,
                y,
                PursuitConfig(
                    sparsity=sparsity,
                    selection_size=selection_size,
                    stopping_mode="fixed_iterations",
                    max_iterations=iters,
                ),
            )
        except (np.linalg.LinAlgError, ValueError):
            failures += 1
            continue
        ratio = compressible_ratio(x, res.estimate, v, sparsity)
        ratios.append(ratio)
        records.append({"trial": ti, "ratio": ratio})
    arr = np.array(ratios)
    finite = arr[np.isfinite(arr)]
    summary = {
        "trials": trials,
        "failures": failures,
        "iterations": iters,
        "mean_ratio": float(finite.mean()) if finite.size else math.nan,
        "p99_ratio": float(np.percentile(finite, 99)) if finite.size else math.nan,
        "max_ratio": float(arr.max()) if arr.size else math.nan,
        "n_infinite": int(np.sum(~np.isfinite(arr))),
    }
    params = {
        "m": m,
        "n": n,
        "sparsity": sparsity,
        "selection_size": selection_size,
        "exponent": exponent,
        "snr_db": snr_db,
        "trials": trials,
    }
    return {
        "summary": summary,
        "records": records,
        "manifest": _manifest("compressible", params, master_seed, ()),
    }
