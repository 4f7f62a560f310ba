"""Command-line front end: one executable, one subcommand per figure pipeline.

Configuration comes from a YAML file (nested keys, comments allowed) plus
repeatable ``--set section.key=value`` overrides applied after the file is
parsed; unknown keys are rejected by name.  Every run writes a self-contained
artifact directory: canonicalized ``config.json``, ``curves/*.csv`` with JSON
sidecars, ``summary.json``, ``seeds.txt``, and renderer-agnostic ``.plot``
scripts that reference only the emitted CSV columns (grammar documented in
the README).  Re-running a completed command with an unchanged configuration
is a no-op on the cached artifact.

Exit codes: 0 success, 1 configuration error (the message names the
offending key), 2 runtime failure, 3 failed assertion in ``--check`` mode or
in the acceptance suite.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .ensemble import EnsembleResult, GridSpec, RunConfig, load, run, save, sff_features, sweep
from .feasibility import feasibility_report, parse_parameter_file
from .rescaling import (
    alpha_simple,
    alpha_small_omega,
    c_otoc_large_omega,
    c_sff_large_omega,
)
from .spectral import GUE_MEAN_R, POISSON_MEAN_R

_SECTIONS = {
    "model": {"kind", "n_fermions", "n_bosons", "boson_cutoff", "omega0", "control_ratio",
              "g", "j", "mu"},
    "ensemble": {"n_realizations", "base_seed", "couplings_mode"},
    "grid": {"kind", "start", "stop", "num"},
    "analysis": {"beta", "dos_bins", "otoc_mode_i", "otoc_mode_j", "cluster_threshold",
                 "restrict", "rescale", "dense_budget"},
    "sweep": {"axis", "values"},
    "check": None,  # free-form target table
    "feasibility": {"parameter_file", "regime", "margin"},
    "rescale": {"regime", "c_otoc_samples", "omega0_probe"},
    "output": {"directory"},
}


class ConfigError(Exception):
    pass


def _load_config(path: str | None, overrides: list[str]) -> dict:
    config: dict = {}
    if path:
        try:
            with open(path) as fh:
                config = yaml.safe_load(fh) or {}
        except OSError as err:
            raise ConfigError(f"cannot read config file: {err}") from err
        except yaml.YAMLError as err:
            raise ConfigError(f"malformed YAML in {path}: {err}") from err
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        dotted, raw = item.split("=", 1)
        keys = dotted.split(".")
        node = config
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set path {dotted!r} collides with a scalar")
        node[keys[-1]] = yaml.safe_load(raw)
    _validate_keys(config)
    return config


def _validate_keys(config: dict) -> None:
    for section, content in config.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section {section!r}")
        allowed = _SECTIONS[section]
        if allowed is None:
            continue
        if not isinstance(content, dict):
            raise ConfigError(f"config section {section!r} must be a mapping")
        for key in content:
            if key not in allowed:
                raise ConfigError(f"unknown key {section}.{key!r}")


def _run_config(config: dict, diagnostics: tuple[str, ...], args) -> RunConfig:
    model = config.get("model", {})
    ensemble = config.get("ensemble", {})
    analysis = config.get("analysis", {})
    grid = config.get("grid")
    times = GridSpec(
        start=float(grid["start"]), stop=float(grid["stop"]), num=int(grid["num"]),
        kind=grid.get("kind", "log"),
    ) if grid else None
    base_seed = args.seed if args.seed is not None else int(ensemble.get("base_seed", 0))
    try:
        cfg = RunConfig(
            model=model.get("kind", "ysyk"),
            n_fermions=int(model.get("n_fermions", 8)),
            n_bosons=int(model.get("n_bosons", 4)),
            boson_cutoff=int(model.get("boson_cutoff", 1)),
            omega0=None if model.get("omega0") is None else float(model["omega0"]),
            control_ratio=None if model.get("control_ratio") is None else float(model["control_ratio"]),
            g=float(model.get("g", 1.0)),
            j=float(model.get("j", 1.0)),
            mu=float(model.get("mu", 0.0)),
            beta=float(analysis.get("beta", 0.0)),
            diagnostics=diagnostics,
            n_realizations=int(ensemble.get("n_realizations", 10)),
            base_seed=base_seed,
            times=times,
            dos_bins=int(analysis.get("dos_bins", 80)),
            otoc_mode_i=int(analysis.get("otoc_mode_i", 0)),
            otoc_mode_j=int(analysis.get("otoc_mode_j", 1)),
            cluster_threshold=float(analysis.get("cluster_threshold", 500.0)),
            dense_budget=int(analysis.get("dense_budget", 4096)),
            couplings_mode=ensemble.get("couplings_mode", "common"),
        )
        cfg.validate()
    except (ValueError, KeyError, TypeError) as err:
        raise ConfigError(str(err)) from err
    return cfg


def _alpha_for(cfg: RunConfig, mode: str, kind: str) -> float:
    omega0 = cfg.resolved_omega0()
    if mode == "none":
        return 1.0
    if mode == "small_omega":
        return alpha_small_omega(kind, cfg.n_fermions, cfg.boson_cutoff, cfg.g, omega0)
    if mode == "large_omega":
        return c_sff_large_omega(cfg.n_fermions, cfg.n_bosons) * cfg.g ** 2 / omega0 ** 2
    raise ConfigError(f"unknown rescale mode {mode!r}")


def _ensure_out(args, default="out") -> Path:
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cached(cfg: RunConfig, out: Path) -> EnsembleResult | None:
    summary = out / "summary.json"
    if not summary.exists():
        return None
    try:
        cached = load(out)
    except RuntimeError:
        return None
    return cached if cached.config_hash == cfg.shard_hash() else None


def _execute(cfg: RunConfig, args, out: Path) -> EnsembleResult:
    cached = _cached(cfg, out)
    if cached is not None:
        print(f"cache hit ({cfg.hash()}); reusing {out}", file=sys.stderr)
        return cached
    result = run(cfg, n_jobs=args.threads, out_dir=out)
    save(result, out)
    return result


def _write_plot(out: Path, name: str, lines: list[str]) -> None:
    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    (plots / f"{name}.plot").write_text("# ysyk plot grammar v1\n" + "\n".join(lines) + "\n")


def _check_scalar(result: EnsembleResult, config: dict) -> int:
    targets = config.get("check", {})
    status = 0
    for name, spec in targets.items():
        if name not in result.scalars:
            print(f"check: unknown scalar {name!r}", file=sys.stderr)
            status = 3
            continue
        got = result.scalars[name].mean
        target, tol = float(spec["target"]), float(spec["tol"])
        ok = abs(got - target) <= tol
        print(f"check {name}: {got:.4f} vs {target:.4f} +- {tol:.4f} -> {'pass' if ok else 'FAIL'}")
        if not ok:
            status = 3
    return status


def cmd_spectrum(args) -> int:
    config = _load_config(args.config, args.set)
    cfg = _run_config(config, ("dos", "gap_ratio"), args)
    out = _ensure_out(args)
    result = _execute(cfg, args, out)
    if args.export_triplets:
        from .ensemble import _build_hamiltonian
        from .hamiltonian import export_triplets
        from .disorder import realization_seed

        h = _build_hamiltonian(cfg, realization_seed(cfg.base_seed, 0, cfg.seed_stream))
        export_triplets(h, out / "hamiltonian_r00000.txt")
    fit = result.features.get("dos_gauss_fit", {})
    _write_plot(out, "dos", [
        "title density of states",
        "xlabel E", "ylabel rho(E)",
        f"series curves/dos.csv x=E y=rho yerr=stderr label=\"ensemble\"",
        f"# gaussian fit: mean={fit.get('mean'):.6g} sigma={fit.get('sigma'):.6g}",
    ])
    print(json.dumps({"scalars": {k: v.mean for k, v in result.scalars.items()},
                      "features": result.features}, indent=1, default=float))
    return _check_scalar(result, config) if args.check else 0


def cmd_gapratio(args) -> int:
    config = _load_config(args.config, args.set)
    cfg = _run_config(config, ("gap_ratio",), args)
    out = _ensure_out(args)
    result = _execute(cfg, args, out)
    _write_plot(out, "gap_ratio", [
        "title gap-ratio distribution",
        "xlabel r", "ylabel P(r)",
        "series curves/gap_ratio_hist.csv x=r y=P yerr=stderr label=\"ensemble\"",
        f"# references: poisson mean {POISSON_MEAN_R:.4f}, unitary-class mean {GUE_MEAN_R:.4f}",
    ])
    print(json.dumps({"mean_gap_ratio": result.scalars["mean_gap_ratio"].mean,
                      "stderr": result.scalars["mean_gap_ratio"].stderr}, indent=1))
    return _check_scalar(result, config) if args.check else 0


def cmd_sff(args) -> int:
    config = _load_config(args.config, args.set)
    analysis = config.get("analysis", {})
    restrict = analysis.get("restrict")
    diag = ("sff_lowest_cluster",) if restrict == "lowest" else ("sff",)
    cfg = _run_config(config, diag, args)
    out = _ensure_out(args)
    result = _execute(cfg, args, out)
    name = diag[0]
    alpha = _alpha_for(cfg, analysis.get("rescale", "none"), "sff")
    dim = (cfg.space().fermion_dim if restrict == "lowest" else cfg.space().total_dim)
    feats = sff_features(result, alpha=alpha, k_plateau=1.0 / dim, curve=name)
    sidecar = json.loads((out / "curves" / f"{name}.json").read_text())
    sidecar.update({"alpha": alpha, "t_plateau_rescaled": feats.t_plateau,
                    "k_plateau": feats.k_plateau})
    (out / "curves" / f"{name}.json").write_text(json.dumps(sidecar, indent=1, default=float))
    _write_plot(out, name, [
        "title spectral form factor",
        "xlabel t", "ylabel K(t)", "xscale log", "yscale log",
        f"series curves/{name}.csv x=t y=K yerr=stderr label=\"K(t)\"",
        f"hline {1.0 / dim:.8g} label=\"1/D\"",
    ])
    print(json.dumps({"alpha": alpha, "t_plateau_rescaled": feats.t_plateau,
                      "k_plateau": feats.k_plateau,
                      "heisenberg_time": result.features.get("heisenberg_time")},
                     indent=1, default=float))
    return _check_scalar(result, config) if args.check else 0


def cmd_otoc(args) -> int:
    config = _load_config(args.config, args.set)
    analysis = config.get("analysis", {})
    restrict = analysis.get("restrict")
    diag = ("otoc_restricted",) if restrict == "lowest" else ("otoc",)
    cfg = _run_config(config, diag, args)
    out = _ensure_out(args)
    result = _execute(cfg, args, out)
    name = diag[0]
    _write_plot(out, name, [
        "title out-of-time-ordered correlator",
        "xlabel t", "ylabel F(t)", "xscale log",
        f"series curves/{name}.csv x=t y=F yerr=stderr label=\"F(t)\"",
    ])
    payload = {"saturation": result.scalars.get("otoc_saturation")}
    print(json.dumps({k: (v.mean if v is not None and hasattr(v, "mean") else None)
                      for k, v in payload.items()}, indent=1, default=float))
    return _check_scalar(result, config) if args.check else 0


def cmd_sweep(args) -> int:
    config = _load_config(args.config, args.set)
    sweep_cfg = config.get("sweep", {})
    axis = sweep_cfg.get("axis", "control_ratio")
    values = sweep_cfg.get("values")
    if not values:
        raise ConfigError("sweep.values is required")
    cfg = _run_config(config, ("gap_ratio",), args)
    out = _ensure_out(args)
    results = sweep(cfg, axis, [float(v) for v in values], n_jobs=args.threads, out_dir=out)
    rows = ["%s,mean_gap_ratio,stderr" % axis]
    for value, result in zip(values, results):
        s = result.scalars["mean_gap_ratio"]
        rows.append(f"{value:.17g},{s.mean:.17g},{s.stderr if s.stderr is not None else np.nan:.17g}")
        save(result, Path(out) / f"{axis}_{float(value):g}")
    (out / "sweep_gap_ratio.csv").write_text("\n".join(rows) + "\n")
    _write_plot(out, "sweep_gap_ratio", [
        "title mean gap ratio across the coupling sweep",
        f"xlabel {axis}", "ylabel <r>", "xscale log",
        f"series sweep_gap_ratio.csv x={axis} y=mean_gap_ratio yerr=stderr label=\"<r>\"",
        f"hline {POISSON_MEAN_R:.4f} label=\"poisson\"",
        f"hline {GUE_MEAN_R:.4f} label=\"unitary class\"",
    ])
    print(f"wrote {out / 'sweep_gap_ratio.csv'}")
    return 0


def cmd_rescale(args) -> int:
    config = _load_config(args.config, args.set)
    model = config.get("model", {})
    section = config.get("rescale", {})
    n = int(model.get("n_fermions", 8))
    m = int(model.get("n_bosons", 4))
    n_b = int(model.get("boson_cutoff", 1))
    g = float(model.get("g", 1.0))
    omega0 = model.get("omega0")
    if omega0 is None and model.get("control_ratio") is not None:
        omega0 = float(model["control_ratio"]) * g ** (2.0 / 3.0)
    omega0 = float(omega0) if omega0 is not None else 1.0
    payload = {
        "n_fermions": n, "n_bosons": m, "boson_cutoff": n_b, "g": g, "omega0": omega0,
        "small_omega": {
            "alpha_sff": alpha_small_omega("sff", n, n_b, g, omega0),
            "alpha_otoc": alpha_small_omega("otoc", n, n_b, g, omega0),
            "alpha_simple": alpha_simple(g, n_b, omega0),
        },
        "large_omega": {
            "c_sff": c_sff_large_omega(n, m),
            "alpha_sff": c_sff_large_omega(n, m) * g ** 2 / omega0 ** 2,
        },
    }
    samples = int(section.get("c_otoc_samples", 0))
    if samples > 0:
        value, stderr = c_otoc_large_omega(
            n, m, omega0_probe=float(section.get("omega0_probe", 1e4)),
            n_samples=samples, seed=args.seed if args.seed is not None else 0, g=g,
        )
        payload["large_omega"]["c_otoc"] = value
        payload["large_omega"]["c_otoc_stderr"] = stderr
    print(json.dumps(payload, indent=1))
    return 0


def cmd_feasibility(args) -> int:
    config = _load_config(args.config, args.set)
    section = config.get("feasibility", {})
    path = args.params or section.get("parameter_file")
    if not path:
        raise ConfigError("feasibility.parameter_file (or --params) is required")
    try:
        params = parse_parameter_file(path)
    except (OSError, ValueError) as err:
        raise ConfigError(str(err)) from err
    report = feasibility_report(
        params, regime=section.get("regime", "ysyk"), margin=float(section.get("margin", 5.0))
    )
    out = _ensure_out(args)
    (out / "feasibility.json").write_text(report.to_json() + "\n")
    print(report.table())
    print(f"report written to {out / 'feasibility.json'}")
    if args.check and not report.hierarchy_passed:
        return 3
    return 0


def cmd_check(args) -> int:
    from . import acceptance

    out = _ensure_out(args, default="acceptance_out")
    results = acceptance.run_suite(
        ids=args.criteria or None, fast=args.fast, n_jobs=args.threads, out_dir=out
    )
    report = [dataclasses.asdict(r) for r in results]
    (out / "acceptance_report.json").write_text(json.dumps(report, indent=1, default=float) + "\n")
    failed = [r for r in results if not r.passed]
    for r in results:
        print(acceptance.format_line(r))
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed; "
          f"report at {out / 'acceptance_report.json'}")
    return 3 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ysyk",
        description="Exact-diagonalization pipelines for the boson-mediated random-hopping "
                    "model and its quadratic/quartic benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, check_flag=True):
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--set", action="append", default=[], metavar="K=V",
                       help="override a config key (section.key=value; repeatable)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get("YSYK_THREADS", "1")),
                       help="worker threads (default: YSYK_THREADS or 1)")
        p.add_argument("--seed", type=int, help="override the base seed")
        if check_flag:
            p.add_argument("--check", action="store_true",
                           help="assert the targets in the [check] config section")

    p = sub.add_parser("spectrum", help="density of states and gap-ratio pipeline")
    common(p)
    p.add_argument("--export-triplets", action="store_true",
                   help="also export realization 0 as sparse text triplets")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("gapratio", help="gap-ratio statistics pipeline")
    common(p)
    p.set_defaults(func=cmd_gapratio)

    p = sub.add_parser("sff", help="spectral form factor pipeline")
    common(p)
    p.set_defaults(func=cmd_sff)

    p = sub.add_parser("otoc", help="out-of-time-ordered correlator pipeline")
    common(p)
    p.set_defaults(func=cmd_otoc)

    p = sub.add_parser("sweep", help="map a pipeline over a coupling axis")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rescale", help="print time-rescaling factors as JSON")
    common(p, check_flag=False)
    p.set_defaults(func=cmd_rescale)

    p = sub.add_parser("feasibility", help="cavity parameter-estimate report")
    common(p)
    p.add_argument("--params", help="key-value parameter file (units inline)")
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("check", help="run the acceptance-criteria suite")
    common(p, check_flag=False)
    p.add_argument("--criteria", nargs="*", type=int, help="criterion numbers (default: all)")
    p.add_argument("--fast", action="store_true",
                   help="reduced realization counts for smoke testing")
    p.set_defaults(func=cmd_check)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # noqa: BLE001
        print(f"runtime failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
