"""Command-line front end: each subcommand writes one CSV or JSON table.

Every output starts with the format version and the fully resolved
configuration, so a file is enough to rerun the experiment that made it.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import yaml

from . import experiments
from .gatecount import GateCountDomainError
from .linsolve import CgBreakdown, CgConfig
from .operators import EigensolverError, OperatorError, PnDiodeProblem
from .runtime import CostModel, HpcParams, StarParams

FORMAT_VERSION = 1

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# flat config namespace with defaults; file values and flags override these
CONFIG_DEFAULTS = {
    "temperature_K": 300.0,
    "na_cm3": 1e16,
    "nd_cm3": 1e16,
    "length_um": 1.0,
    "n_grid": 1024,
    "eps_si": 1.05e-12,
    "n_i_cm3": 1e10,
    "bandgap_eV": 1.12,
    "d_code": 7,
    "tau_s": 1e-6,
    "r_rus": 2,
    "throughput_flops": 3.76e15,
    "utilization": 1e-2,
    "eps": 1e-6,
    "m_fsl": 10,
    "p_par": 1,
    "log_base": 2,
    "spectral_bounds": "window",
    "normalize_spectrum": False,
    "linearization": "neutral",
}

COLUMNS = {
    "spectrum": ["index", "eigenvalue", "multiplicity"],
    "runtime-sweep": [
        "n_grid", "tau_s", "t_hpcg", "t_hhl_full", "t_qacg_opt", "t_quantum", "t_classical",
        "j", "kappa_q", "kappa_c", "qacg_faster", "is_crossover",
    ],
    "resource-sweep": [
        "n_grid", "tau_s", "j", "kappa_q",
        "full_h", "full_s", "full_cnot", "full_rz", "full_qubits",
        "qacg_h", "qacg_s", "qacg_cnot", "qacg_rz", "qacg_qubits",
    ],
    "pn-diode": ["run", "n_modes", "series", "index", "value"],
    "inv-params": ["n_grid", "kappa", "n_lambda", "a", "t", "c", "rho", "deg", "M"],
    "kappa-scaling": ["n_grid", "tau_s", "kappa", "kappa_q", "kappa_c", "j"],
}


class ConfigError(ValueError):
    pass


def load_config(path: str | None) -> dict:
    """Defaults overlaid with a flat YAML (or JSON) key/value file."""
    cfg = dict(CONFIG_DEFAULTS)
    if path is None:
        return cfg
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a flat mapping of keys to values")
    unknown = sorted(set(data) - set(CONFIG_DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in data.items():
        default = CONFIG_DEFAULTS[key]
        if isinstance(value, (dict, list)):
            raise ConfigError(f"config key {key} must be a scalar")
        if key == "log_base":
            cfg[key] = value
        elif isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"config key {key} must be true or false")
            cfg[key] = value
        elif isinstance(default, (int, float)):
            try:
                cfg[key] = type(default)(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {key}: {exc}") from exc
        else:
            cfg[key] = str(value)
    return cfg


def cost_model(cfg: dict, tau_s: float | None = None) -> CostModel:
    try:
        return CostModel(
            star=StarParams(cfg["d_code"], cfg["tau_s"] if tau_s is None else tau_s, cfg["r_rus"]),
            hpc=HpcParams(cfg["throughput_flops"], cfg["utilization"]),
            eps=cfg["eps"],
            m_fsl=cfg["m_fsl"],
            p_par=cfg["p_par"],
            log_base=cfg["log_base"],
            normalize_spectrum=cfg["normalize_spectrum"],
            spectral_bounds=cfg["spectral_bounds"],
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def diode_problem(cfg: dict) -> PnDiodeProblem:
    try:
        return PnDiodeProblem(
            n_grid=cfg["n_grid"],
            length_cm=cfg["length_um"] * 1e-4,
            temperature_K=cfg["temperature_K"],
            N_A=cfg["na_cm3"],
            N_D=cfg["nd_cm3"],
            epsilon_si=cfg["eps_si"],
            bandgap_eV=cfg["bandgap_eV"],
            n_i=cfg["n_i_cm3"],
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _size_range(args) -> list[int]:
    if args.n_min < 2 or args.n_max < args.n_min:
        raise ConfigError(f"empty or invalid size range 2^{args.n_min}..2^{args.n_max} (need 2 <= n-min <= n-max)")
    if args.n_max > 20:
        raise ConfigError("n-max above 20 is out of reach for the spectrum enumeration")
    return [2**e for e in range(args.n_min, args.n_max + 1)]


def _models(cfg: dict, args) -> list[CostModel]:
    taus = args.tau or [cfg["tau_s"]]
    return [cost_model(cfg, t) for t in taus]


def _executor(args):
    return ProcessPoolExecutor(args.workers) if args.workers > 1 else None


def _run_sweep(builder, args, cfg):
    sizes, models = _size_range(args), _models(cfg, args)
    pool = _executor(args)
    try:
        return builder(sizes, models, pool)
    finally:
        if pool is not None:
            pool.shutdown()


def run_command(args, cfg: dict) -> tuple[list[dict], dict]:
    """Rows for the table plus any extra JSON-only payload."""
    cmd = args.command
    if cmd == "spectrum":
        if args.dims not in (1, 3):
            raise ConfigError("dims must be 1 or 3")
        if args.n_grid < 2:
            raise ConfigError("n_grid must be >= 2")
        if args.dims == 3 and args.n_grid > 256:
            raise ConfigError("3D spectrum table limited to n_grid <= 256")
        return experiments.spectrum_rows(args.n_grid, args.dims), {}
    if cmd == "runtime-sweep":
        return _run_sweep(experiments.runtime_sweep_rows, args, cfg), {}
    if cmd == "resource-sweep":
        return _run_sweep(experiments.resource_sweep_rows, args, cfg), {}
    if cmd == "kappa-scaling":
        return _run_sweep(experiments.kappa_scaling_rows, args, cfg), {}
    if cmd == "inv-params":
        return experiments.inv_params_rows(_size_range(args), cost_model(cfg)), {}
    if cmd == "pn-diode":
        prob = diode_problem(cfg)
        if cfg["linearization"] not in ("neutral", "ramp", "zero"):
            raise ConfigError("linearization must be neutral, ramp or zero")
        modes = args.n_modes or list(experiments.DEFAULT_N_MODES)
        if any(not 0 < m <= prob.n_grid for m in modes):
            raise ConfigError(f"n-modes values must lie in [1, {prob.n_grid}]")
        exp = experiments.pn_diode_experiment(prob, modes, cfg["linearization"], CgConfig(args.tol))
        extra = {"kappa": exp.kappa, "summary": experiments.diode_summary_rows(exp)}
        return experiments.diode_long_rows(exp), extra
    raise ConfigError(f"unknown command {cmd}")


def _resolved(args, cfg: dict) -> dict:
    out = dict(cfg)
    out["command"] = args.command
    out["seed"] = args.seed
    for key in ("n_min", "n_max", "tau", "dims", "n_modes", "tol", "workers"):
        if hasattr(args, key):
            out[key] = getattr(args, key)
    if hasattr(args, "n_grid") and args.command == "spectrum":
        out["n_grid"] = args.n_grid
    return out


def render(fmt: str, command: str, config: dict, rows: list[dict], extra: dict) -> str:
    if fmt == "json":
        doc = {"format_version": FORMAT_VERSION, "command": command, "config": config, "rows": rows}
        doc.update(extra)
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# format_version: {FORMAT_VERSION}\n")
    buf.write(f"# command: {command}\n")
    buf.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
    writer = csv.DictWriter(buf, fieldnames=COLUMNS[command], extrasaction="raise", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat YAML/JSON file of key/value parameters")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0, help="recorded for provenance; all commands are deterministic")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--n-min", type=int, default=4, help="smallest size as a log2 exponent (default 4)")
    sweep.add_argument("--n-max", type=int, default=14, help="largest size as a log2 exponent (default 14)")
    sweep.add_argument("--workers", type=int, default=1, help="processes for sweep points")

    taus = argparse.ArgumentParser(add_help=False)
    taus.add_argument("--tau", type=float, action="append", help="QEC cycle time in seconds; repeatable")

    p = argparse.ArgumentParser(prog="qacg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def cols(name):
        return "columns: " + ", ".join(COLUMNS[name])

    s = sub.add_parser("spectrum", parents=[common], help="distinct periodic-Laplacian eigenvalues",
                       description=cols("spectrum"))
    s.add_argument("--n-grid", type=int, default=8)
    s.add_argument("--dims", type=int, default=1, choices=(1, 3))

    sub.add_parser("runtime-sweep", parents=[common, sweep, taus], help="QACG vs CG vs full HHL runtimes",
                   description=cols("runtime-sweep"))
    sub.add_parser("resource-sweep", parents=[common, sweep, taus], help="gate counts and logical qubits",
                   description=cols("resource-sweep"))
    sub.add_parser("kappa-scaling", parents=[common, sweep, taus], help="condition number and its optimal split",
                   description=cols("kappa-scaling"))
    sub.add_parser("inv-params", parents=[common, sweep], help="eigenvalue-inversion parameters of full HHL",
                   description=cols("inv-params"))

    d = sub.add_parser(
        "pn-diode", parents=[common], help="cold vs spectrally warm-started CG on the diode Jacobian",
        description=cols("pn-diode") + ". series: iterations, rel_residual, abs_residual, v_init, v_final, "
        "abs_error; n_modes = 0 is the cold start. JSON output adds a per-run summary.",
    )
    d.add_argument("--n-modes", type=int, action="append", help="retained lowest modes; repeatable (default 10..50)")
    d.add_argument("--n-grid", type=int, help="override the config's n_grid")
    d.add_argument("--tol", type=float, default=1e-6, help="relative residual tolerance")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "pn-diode" and args.n_grid is not None:
            cfg["n_grid"] = args.n_grid
        if args.command == "pn-diode" and not 0.0 < args.tol < 1.0:
            raise ConfigError("tol must lie in (0, 1)")
        rows, extra = run_command(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CgBreakdown, EigensolverError, OperatorError, GateCountDomainError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(args.format, args.command, _resolved(args, cfg), rows, extra)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
