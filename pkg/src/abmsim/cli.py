"""Command-line entry point: simulate, ensemble, calibrate, analyze, ode.

Each subcommand writes its primary outputs plus a manifest JSON (config echo,
seed, versions, wall time).  Passing a manifest back through ``--config``
reproduces the primary outputs byte for byte.  Failures print one JSON line
``{"error": ..., "message": ...}`` on stderr and exit 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .config import COMMAND_KEYS, MODEL_KEYS, ConfigError, RunConfig, parse_config, sir_params_from
from .io import read_csv_column, versions, write_csv, write_json

MANIFEST_VERSION = 1


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abmsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(COMMAND_KEYS) + "}")
    for cmd, keys in COMMAND_KEYS.items():
        p = sub.add_parser(cmd, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON config file or a previous run's manifest")
        all_keys = dict(keys)
        if "model" in keys:
            for mk in MODEL_KEYS.values():
                all_keys.update(mk)
        for k, spec in all_keys.items():
            kw = {"dest": k, "help": spec.help or None}
            if spec.type is bool:
                kw["action"] = argparse.BooleanOptionalAction
            else:
                kw["type"] = spec.type
                if spec.choices:
                    kw["choices"] = spec.choices
            p.add_argument(_flag(k), **kw)
    return parser


def _manifest(cfg: RunConfig, outputs: list, started: float) -> dict:
    return {
        "manifest_version": MANIFEST_VERSION,
        "command": cfg.command,
        "config": cfg.flat(),
        "seed": {"master_seed": cfg.seed} if cfg.seed is not None else None,
        "outputs": [str(p) for p in outputs],
        "versions": versions(),
        "wall_time_seconds": time.perf_counter() - started,
    }


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _workers(cfg: RunConfig) -> int:
    from .montecarlo import default_workers

    return cfg.workers if cfg.workers else default_workers()


def cmd_simulate(cfg: RunConfig) -> list:
    from .sir import run_epidemic

    params = sir_params_from(cfg)
    seed = cfg.seed_spec(cfg.options["stream"])
    run = run_epidemic(params, cfg.steps, seed, cfg.policy)
    out = Path(cfg.out)
    rows = ([t, *c] for t, c in enumerate(run.counts))
    files = [write_csv(out, ["t", "S", "I", "R"], rows)]
    files.append(write_csv(_sidecar(out, ".infections.csv"), ["infectee", "infector", "time"], run.records()))
    if cfg.options.get("final_state"):
        files.append(write_json(cfg.options["final_state"], json.loads(run.final_state().to_json())))
    return files


def cmd_ensemble(cfg: RunConfig) -> list:
    from .montecarlo import run_ensemble, sir_summary

    params = sir_params_from(cfg)
    keep = cfg.options["keep_records"]
    ens = run_ensemble("sir", params, cfg.runs, cfg.steps, cfg.seed, policy=cfg.policy, workers=_workers(cfg), keep_records=keep)
    out = Path(cfg.out)
    files = []
    for r in ens.runs:
        tag = f"seed{r.seed.master_seed}_stream{r.seed.stream_id:05d}"
        files.append(write_csv(out / "runs" / f"run_{tag}.csv", ["t", *ens.names], ([t, *row] for t, row in enumerate(r.trajectory))))
        if keep:
            files.append(write_csv(out / "records" / f"infections_{tag}.csv", ["infectee", "infector", "time"], r.records))
    header = ["t"] + [f"{n}_mean" for n in ens.names] + [f"{n}_var" for n in ens.names]
    rows = ([t, *m, *v] for t, (m, v) in enumerate(zip(ens.mean_trajectory, ens.variance_trajectory)))
    files.append(write_csv(out / "mean.csv", header, rows))
    files.append(write_json(out / "summary.json", sir_summary(ens)))
    return files


def cmd_calibrate(cfg: RunConfig) -> list:
    from .calibrate import BracketError, CalibrationSpec, calibrate_b

    o = cfg.options
    spec = CalibrationSpec(o["target_r0"], o["b_min"], o["b_max"], cfg.runs, o["tol"], o["max_evals"], cfg.seed)
    params = sir_params_from(cfg)
    if cfg.policy != "fixed":
        raise ConfigError("calibrate supports the fixed order policy only", "policy")
    try:
        res = calibrate_b(spec, params, workers=_workers(cfg))
    except BracketError as exc:
        write_json(cfg.out, {"error": str(exc), "evaluations": exc.log, "b_star": None})
        raise
    payload = {"target_r0": spec.target, "n_runs": spec.n_runs, "master_seed": spec.master_seed, **res.to_dict()}
    return [write_json(cfg.out, payload)]


def cmd_analyze(cfg: RunConfig) -> list:
    from .stats import InsufficientDataError, autocov, classify_equilibrium, decay_null_band, ergodicity_decay, runs_test

    o = cfg.options
    y = read_csv_column(o["in"], o["column"])
    if o["window"] > len(y) or o["window"] < 1:
        raise ConfigError(f"window {o['window']} must lie in 1..{len(y)}", "window")
    rep = classify_equilibrium(y, o["window"], o["alpha"])
    try:
        rt = runs_test(y)
        raw = {"z": rt.z, "p_value": rt.p_value, "n1": rt.n1, "n2": rt.n2, "runs": rt.runs, "degenerate": rt.degenerate}
    except InsufficientDataError as exc:
        raw = {"error": str(exc)}
    max_lag = min(o["max_lag"], len(y) - 1)
    report = {
        "input": o["in"],
        "column": o["column"],
        "n": int(len(y)),
        **rep.to_dict(),
        "runs_test_full_series": raw,
        "autocovariance": [autocov(y, k) for k in range(max_lag + 1)] if max_lag >= 0 else [],
    }
    if max_lag >= 1:
        var = autocov(y, 0)
        band = decay_null_band(len(y), max_lag, var if var > 0 else 1.0, n_sim=500) if var > 0 else (0.0, 0.0)
        report["ergodicity_decay"] = ergodicity_decay(y, max_lag)
        report["ergodicity_decay_null"] = {"mean": band[0], "sd": band[1]}
    return [write_json(cfg.out, report)]


def cmd_ode(cfg: RunConfig) -> list:
    from .ode import OdeSirParams, integrate_sir

    o = cfg.options
    try:
        params = OdeSirParams(o["beta"], o["gamma"], o["s0"], o["i0"], o["r0"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    traj = integrate_sir(params, o["dt"], o["horizon"])
    return [write_csv(cfg.out, ["t", "S", "I", "R"], traj.tolist())]


COMMANDS = {
    "simulate": cmd_simulate,
    "ensemble": cmd_ensemble,
    "calibrate": cmd_calibrate,
    "analyze": cmd_analyze,
    "ode": cmd_ode,
}


def _manifest_path(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    if cfg.command == "ensemble":
        return out / "manifest.json"
    return _sidecar(out, ".manifest.json")


def _error_line(exc: BaseException) -> str:
    d = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError) and exc.key:
        d["key"] = exc.key
    return json.dumps(d)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        ns = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(_error_line(exc), file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return 2
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    started = time.perf_counter()
    try:
        cfg = parse_config(ns.command, flags, getattr(ns, "config", None))
        outputs = COMMANDS[ns.command](cfg)
        write_json(_manifest_path(cfg), _manifest(cfg, outputs, started))
    except Exception as exc:  # noqa: BLE001 - every failure becomes one parseable line
        print(_error_line(exc), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
