"""Command-line front end.

Subcommands bind the solver, theory checks, and sweeps to TOML/JSON
config files and CSV/JSON outputs:

    gomp solve         --config cfg.toml --out result.json
    gomp sweep-mse     --config cfg.toml --out table.csv
    gomp sweep-time    --config cfg.toml --out table.csv
    gomp compressible  --config cfg.toml --out report.json
    gomp verify-theory --config cfg.toml --out report.json
    gomp ric           --config cfg.toml --out ric.json

Exit codes: 0 success, 2 config error, 3 enumeration-budget refusal,
4 numeric failure. Outputs are written atomically (temp file + rename);
errors are reported as machine-readable JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__, experiments, linalg, pursuit, theory

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_NUMERIC = 4


class ConfigError(ValueError):
    """Invalid or missing configuration."""


def load_config(path):
    """Parse a TOML (primary) or JSON config file."""
    try:
        text = open(path, "rb").read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    if str(path).endswith(".json"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"invalid JSON config {path}: {err}") from err
    try:
        return tomllib.loads(text.decode("utf-8"))
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"invalid TOML config {path}: {err}") from err


def atomic_write(path, text):
    """Write text to path via a same-directory temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-gomp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require(cfg, section, key=None):
    if section not in cfg:
        raise ConfigError(f"config is missing the [{section}] section")
    if key is None:
        return cfg[section]
    if key not in cfg[section]:
        raise ConfigError(f"config is missing {section}.{key}")
    return cfg[section][key]


def _load_matrix(cfg, seed_override=None):
    mcfg = _require(cfg, "matrix")
    sources = [k for k in ("csv", "bin") if k in mcfg] + (
        ["generate"] if "m" in mcfg else []
    )
    if len(sources) != 1:
        raise ConfigError(
            "matrix section must give exactly one of csv=, bin=, or m=/n=/seed="
        )
    if "csv" in mcfg:
        return linalg.load_matrix_csv(mcfg["csv"])
    if "bin" in mcfg:
        return linalg.load_matrix_bin(mcfg["bin"])
    for key in ("m", "n", "seed"):
        if key not in mcfg:
            raise ConfigError(f"matrix generator needs matrix.{key}")
    seed = seed_override if seed_override is not None else mcfg["seed"]
    return experiments.gen_matrix(int(mcfg["m"]), int(mcfg["n"]), int(seed))


def _build_pursuit_config(cfg):
    scfg = _require(cfg, "solver")
    if "sparsity" not in scfg:
        raise ConfigError("config is missing solver.sparsity")
    try:
        return pursuit.PursuitConfig(
            sparsity=int(scfg["sparsity"]),
            selection_size=int(scfg.get("selection_size", 1)),
            residual_threshold=scfg.get("residual_threshold"),
            max_iterations=scfg.get("max_iterations"),
            stopping_mode=scfg.get("stopping_mode", "threshold"),
        )
    except ValueError as err:
        raise ConfigError(f"invalid solver config: {err}") from err


def _cmd_solve(cfg, args):
    Phi = _load_matrix(cfg, args.seed)
    config = _build_pursuit_config(cfg)
    mcfg = cfg.get("measurements", {})
    if "csv" in mcfg:
        y = linalg.load_vector_csv(mcfg["csv"], Phi.shape[0])
        generated = None
    elif "signal" in cfg:
        sig_cfg = cfg["signal"]
        seed = args.seed if args.seed is not None else sig_cfg.get("seed", 0)
        try:
            spec = experiments.TrialSpec(
                m=Phi.shape[0],
                n=Phi.shape[1],
                selection_size=config.selection_size,
                seed=int(seed),
                sparsity_rate=sig_cfg.get("sparsity_rate"),
                sparsity=sig_cfg.get("sparsity"),
                snr_db=sig_cfg.get("snr_db"),
                signal_model=sig_cfg.get("signal_model", "gaussian_bernoulli"),
            )
        except ValueError as err:
            raise ConfigError(f"invalid signal config: {err}") from err
        rng = experiments.trial_rng(int(seed), 0)
        sig, _ = experiments.gen_signal(spec, rng)
        x = sig.dense()
        v = (
            experiments.gen_noise(spec, Phi.shape[0], rng)
            if spec.snr_db is not None
            else np.zeros(Phi.shape[0])
        )
        y = Phi @ x + v
        generated = {"support": sig.support.tolist(), "noise_norm": float(np.linalg.norm(v))}
    else:
        raise ConfigError("provide measurements.csv or a [signal] section")
    result = pursuit.gomp_solve(Phi, y, config)
    payload = result.to_dict()
    if generated is not None:
        payload["generated"] = generated
    return json.dumps(payload, indent=2)


def _cmd_ric(cfg, args):
    Phi = _load_matrix(cfg, None)
    rcfg = _require(cfg, "ric")
    if "order" not in rcfg:
        raise ConfigError("config is missing ric.order")
    order = int(rcfg["order"])
    method = rcfg.get("method", "exact")
    if method == "exact":
        est = theory.ric_exact(Phi, order, int(rcfg.get("budget", theory.RIC_BUDGET)))
    elif method == "monte_carlo":
        seed = args.seed if args.seed is not None else rcfg.get("seed", 0)
        est = theory.ric_monte_carlo(Phi, order, int(rcfg.get("trials", 1000)), int(seed))
    else:
        raise ConfigError("ric.method must be 'exact' or 'monte_carlo'")
    return json.dumps(
        {
            "order": est.K,
            "kind": est.kind,
            "delta": est.delta,
            "rip_holds": est.rip_holds,
            "witness": est.witness.tolist(),
        },
        indent=2,
    )


def _sweep_common(cfg, args, keys):
    scfg = _require(cfg, "sweep")
    for key in keys:
        if key not in scfg:
            raise ConfigError(f"config is missing sweep.{key}")
    seed = args.seed if args.seed is not None else scfg.get("master_seed", 0)
    return scfg, int(seed)


def _cmd_sweep_mse(cfg, args):
    scfg, seed = _sweep_common(
        cfg, args, ("m", "n", "sparsity_rate", "selection_size", "snr_db", "trials")
    )
    snr_grid = scfg["snr_db"]
    if not isinstance(snr_grid, (list, tuple)):
        snr_grid = [snr_grid]
    try:
        result = experiments.run_mse_sweep(
            m=int(scfg["m"]),
            n=int(scfg["n"]),
            sparsity_rate=float(scfg["sparsity_rate"]),
            selection_size=int(scfg["selection_size"]),
            snr_db_grid=[float(s) for s in snr_grid],
            trials=int(scfg["trials"]),
            master_seed=seed,
            signal_model=scfg.get("signal_model", "gaussian_bernoulli"),
            k_mode=scfg.get("k_mode", "realized"),
            fresh_matrix=bool(scfg.get("fresh_matrix", True)),
            threads=args.threads or os.cpu_count() or 1,
        )
    except ValueError as err:
        raise ConfigError(f"invalid sweep config: {err}") from err
    return result


def _cmd_sweep_time(cfg, args):
    scfg, seed = _sweep_common(
        cfg, args, ("m", "n", "sparsity_rate", "selection_size", "trials")
    )
    grid = scfg["sparsity_rate"]
    if not isinstance(grid, (list, tuple)):
        grid = [grid]
    try:
        result = experiments.run_timing_sweep(
            m=int(scfg["m"]),
            n=int(scfg["n"]),
            rate_grid=[float(p) for p in grid],
            selection_size=int(scfg["selection_size"]),
            trials=int(scfg["trials"]),
            master_seed=seed,
            snr_db=scfg.get("snr_db"),
            signal_model=scfg.get("signal_model", "gaussian_bernoulli"),
            k_mode=scfg.get("k_mode", "realized"),
            fresh_matrix=bool(scfg.get("fresh_matrix", True)),
        )
    except ValueError as err:
        raise ConfigError(f"invalid sweep config: {err}") from err
    return result


def _cmd_compressible(cfg, args):
    scfg, seed = _sweep_common(
        cfg, args, ("m", "n", "sparsity", "selection_size", "trials")
    )
    try:
        report = experiments.run_compressible(
            m=int(scfg["m"]),
            n=int(scfg["n"]),
            sparsity=int(scfg["sparsity"]),
            selection_size=int(scfg["selection_size"]),
            exponent=float(scfg.get("exponent", 2.0)),
            snr_db=scfg.get("snr_db"),
            trials=int(scfg["trials"]),
            master_seed=seed,
        )
    except ValueError as err:
        raise ConfigError(f"invalid compressible config: {err}") from err
    return json.dumps(
        {"summary": report["summary"], "manifest": report["manifest"]}, indent=2
    )


def _cmd_verify_theory(cfg, args):
    vcfg = cfg.get("verify", {})
    seed = args.seed if args.seed is not None else vcfg.get("master_seed", 173)
    report = theory.run_verification_corpus(
        lemma_pairs=int(vcfg.get("lemma_pairs", 10_000)),
        partition_draws=int(vcfg.get("partition_draws", 10_000)),
        pursuit_instances=int(vcfg.get("pursuit_instances", 500)),
        seed=int(seed),
    )
    return json.dumps(report, indent=2, default=float)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gomp",
        description="Greedy sparse recovery solvers, RIP certification, and sweeps",
    )
    parser.add_argument("--version", action="version", version=f"gomp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("solve", "run one gOMP solve from a config file"),
        ("sweep-mse", "MSE-vs-SNR sweep"),
        ("sweep-time", "running-time-vs-sparsity-rate sweep"),
        ("compressible", "stability ratios for power-law signals"),
        ("verify-theory", "run the inequality verification corpus"),
        ("ric", "exact or Monte-Carlo restricted isometry constant"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="TOML or JSON config file")
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument(
            "--threads", type=int, default=None, help="worker threads (default: all cores)"
        )
        p.add_argument(
            "--format",
            choices=("csv", "json"),
            default="csv",
            help="table output format for sweeps",
        )
    return parser


def _fail(kind, message, code):
    json.dump({"error": {"kind": kind, "message": message}}, sys.stderr)
    sys.stderr.write("\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "solve":
            out_text = _cmd_solve(cfg, args)
        elif args.command == "ric":
            out_text = _cmd_ric(cfg, args)
        elif args.command == "sweep-mse":
            result = _cmd_sweep_mse(cfg, args)
            out_text = result.to_json() if args.format == "json" else result.to_csv()
            atomic_write(args.out + ".manifest.json", json.dumps(result.manifest, indent=2))
        elif args.command == "sweep-time":
            result = _cmd_sweep_time(cfg, args)
            out_text = result.to_json() if args.format == "json" else result.to_csv()
            atomic_write(args.out + ".manifest.json", json.dumps(result.manifest, indent=2))
        elif args.command == "compressible":
            out_text = _cmd_compressible(cfg, args)
        elif args.command == "verify-theory":
            out_text = _cmd_verify_theory(cfg, args)
        else:  # unreachable with required=True
            return _fail("config", f"unknown command {args.command}", EXIT_CONFIG)
    except ConfigError as err:
        return _fail("config", str(err), EXIT_CONFIG)
    except theory.BudgetExceededError as err:
        return _fail("budget", str(err), EXIT_BUDGET)
    except (
        linalg.SingularSystemError,
        theory.ConditionNotCertifiedError,
        theory.BoundDomainError,
        np.linalg.LinAlgError,
        FloatingPointError,
    ) as err:
        return _fail("numeric", str(err), EXIT_NUMERIC)
    except (ValueError, OSError) as err:
        return _fail("config", str(err), EXIT_CONFIG)
    atomic_write(args.out, out_text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
