"""Monte-Carlo benchmark sweeps: error vs SNR and runtime vs sparsity.

A scaled-down version of the reference protocol (Gaussian N(0, 1/m)
matrices, Gaussian-Bernoulli signals, SNR-calibrated noise, 4 algorithms)
so it runs in seconds. The full protocol uses m=100, n=200, 2000 trials
per point; tables land in CSV plus a JSON manifest for reproducibility.
"""

from gomp import run_compressible, run_mse_sweep, run_timing_sweep

mse = run_mse_sweep(
    m=64,
    n=128,
    sparsity_rate=0.05,
    selection_size=3,
    snr_db_grid=[0.0, 10.0, 20.0, 30.0],
    trials=100,
    master_seed=1234,
    threads=4,
)
print("MSE vs SNR (mean over 100 trials):")
print(mse.to_csv())

timing = run_timing_sweep(
    m=64,
    n=128,
    rate_grid=[0.05, 0.1, 0.15],
    selection_size=3,
    trials=60,
    master_seed=1234,
)
print("runtime vs sparsity rate (median ms):")
for row in timing.rows:
    print(f"  p={row.x_value:<5} {row.algorithm:<12} {row.median_time_ms:8.3f} ms")

# Non-sparse signals: power-law coefficients, stability-ratio summary.
comp = run_compressible(
    m=64, n=128, sparsity=8, selection_size=2, exponent=2.0, snr_db=25.0,
    trials=50, master_seed=99,
)
print("\ncompressible-signal stability ratios:")
print({k: round(v, 4) if isinstance(v, float) else v
       for k, v in comp["summary"].items()})
