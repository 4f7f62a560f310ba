"""Disorder-ensemble orchestration: seeding, execution, aggregation, artifacts.

A run is deterministic given its configuration: realization ``i`` draws its
couplings from a seed derived from ``(base_seed, i)``, aggregation sums in
fixed realization order, and results round-trip through a versioned on-disk
artifact (canonical ``config.json``, one CSV plus JSON sidecar per curve,
``summary.json`` with scalars and provenance, ``seeds.txt``).

Per-realization raw spectra are checkpointed as shards when an output
directory is given, so an interrupted run resumes to bit-identical results;
resuming against a directory written with a different configuration fails on
the config hash.  Failed realizations are quarantined with their seed and
excluded from the averages; a run aborts when more than one percent fail.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from . import __version__
from .disorder import realization_seed, sample_lowrank, sample_sykq, sample_ysyk
from .hamiltonian import (
    ModelParams,
    build_lowrank,
    build_sw_effective,
    build_sykq,
    build_ysyk,
)
from .hilbert import build_space
from .otoc import otoc_full, otoc_restricted
from .spectral import (
    Curve,
    SffFeatures,
    Spectrum,
    detect_plateau,
    diagonalize,
    dos,
    fit_power_law,
    gap_ratios,
    heisenberg_time,
    lowest_cluster,
    segment_clusters,
    sff,
)

__all__ = ["GridSpec", "RunConfig", "ScalarStat", "EnsembleResult", "run", "sweep", "save", "load"]

FORMAT_VERSION = 1

_MODELS = ("ysyk", "syk2", "syk4", "lowrank", "sw_effective")
_DIAGNOSTICS = ("dos", "gap_ratio", "sff", "sff_lowest_cluster", "otoc", "otoc_restricted")


@dataclass(frozen=True)
class GridSpec:
    """Time or bin grid: strictly increasing, log- or linearly spaced."""

    start: float
    stop: float
    num: int
    kind: str = "log"

    def build(self) -> np.ndarray:
        if self.num < 2 or self.stop <= self.start:
            raise ValueError("grid must be strictly increasing with at least 2 points")
        if self.kind == "log":
            if self.start <= 0:
                raise ValueError("log grid requires a positive start")
            return np.logspace(np.log10(self.start), np.log10(self.stop), self.num)
        if self.kind == "linear":
            return np.linspace(self.start, self.stop, self.num)
        raise ValueError(f"unknown grid kind {self.kind!r}")


@dataclass(frozen=True)
class RunConfig:
    """Full experiment description; hashable to a canonical provenance key."""

    model: str = "ysyk"
    n_fermions: int = 8
    n_bosons: int = 4
    boson_cutoff: int = 1
    omega0: float | None = None
    control_ratio: float | None = None
    g: float = 1.0
    j: float = 1.0
    mu: float = 0.0
    beta: float = 0.0
    diagnostics: tuple[str, ...] = ("gap_ratio",)
    n_realizations: int = 10
    base_seed: int = 0
    seed_stream: int = 0
    times: GridSpec | None = None
    dos_bins: int = 80
    otoc_mode_i: int = 0
    otoc_mode_j: int = 1
    cluster_threshold: float = 500.0
    dense_budget: int = 4096
    couplings_mode: str = "common"

    def resolved_omega0(self) -> float:
        if self.omega0 is not None and self.control_ratio is not None:
            raise ValueError("set either omega0 or control_ratio, not both")
        if self.omega0 is not None:
            return self.omega0
        if self.control_ratio is not None:
            return self.control_ratio * self.g ** (2.0 / 3.0)
        return 1.0

    def space(self):
        if self.model in ("syk2", "syk4", "lowrank", "sw_effective"):
            return build_space(self.n_fermions, 0)
        return build_space(self.n_fermions, self.n_bosons, self.boson_cutoff)

    def validate(self) -> None:
        if self.model not in _MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {_MODELS}")
        unknown = [d for d in self.diagnostics if d not in _DIAGNOSTICS]
        if unknown:
            raise ValueError(f"unknown diagnostics {unknown}; choose from {_DIAGNOSTICS}")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.couplings_mode not in ("common", "independent"):
            raise ValueError("couplings_mode must be 'common' or 'independent'")
        needs_times = {"sff", "sff_lowest_cluster", "otoc", "otoc_restricted"}
        if needs_times & set(self.diagnostics) and self.times is None:
            raise ValueError("a time grid is required for the requested diagnostics")
        if self.times is not None:
            self.times.build()
        self.resolved_omega0()
        dim = self.space().total_dim
        if {"otoc", "otoc_restricted"} & set(self.diagnostics) and dim > self.dense_budget:
            raise ValueError(
                f"correlators need dense eigenvectors: dimension {dim} exceeds the "
                f"budget {self.dense_budget}"
            )

    def canonical_json(self) -> str:
        payload = dataclasses.asdict(self)
        if self.times is not None:
            payload["times"] = dataclasses.asdict(self.times)
        payload["diagnostics"] = list(self.diagnostics)
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def shard_hash(self) -> str:
        """Provenance key of a single realization: everything except the
        realization count, so an interrupted run resumes into a longer one."""
        payload = json.loads(self.canonical_json())
        payload.pop("n_realizations")
        return hashlib.sha256(
            json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        ).hexdigest()[:16]


@dataclass
class ScalarStat:
    """Per-realization scalar values with their ensemble mean and standard
    error (``std / sqrt(n)``, absent for a single realization)."""

    values: np.ndarray
    mean: float
    stderr: float | None


@dataclass
class EnsembleResult:
    config: RunConfig
    curves: dict[str, Curve]
    scalars: dict[str, ScalarStat]
    features: dict
    seeds: list[int]
    failures: list[dict]
    config_hash: str
    version: str = __version__


def _build_hamiltonian(config: RunConfig, seed: int):
    space = config.space()
    omega0 = config.resolved_omega0()
    if config.model == "ysyk":
        couplings = sample_ysyk(config.n_fermions, config.n_bosons, config.g, seed)
        return build_ysyk(space, ModelParams(omega0=omega0, g=config.g, mu=config.mu), couplings)
    if config.model in ("syk2", "syk4"):
        q = 2 if config.model == "syk2" else 4
        couplings = sample_sykq(config.n_fermions, q, config.j, seed)
        return build_sykq(space, couplings)
    if config.model == "lowrank":
        couplings = sample_lowrank(config.n_fermions, config.n_bosons, seed)
        return build_lowrank(couplings, space)
    if config.model == "sw_effective":
        couplings = sample_ysyk(config.n_fermions, config.n_bosons, config.g, seed)
        return build_sw_effective(couplings, omega0, space)
    raise ValueError(f"unknown model {config.model!r}")


def _realization(config: RunConfig, index: int) -> dict:
    seed = realization_seed(config.base_seed, index, stream=config.seed_stream)
    h = _build_hamiltonian(config, seed)
    space = config.space()
    need_vectors = bool({"otoc", "otoc_restricted"} & set(config.diagnostics))
    spectrum = diagonalize(
        h, mode="full", dense_budget=max(config.dense_budget, h.dim), keep_vectors=need_vectors
    )
    out = {"seed": seed, "eigenvalues": spectrum.eigenvalues}
    if "otoc" in config.diagnostics:
        times = config.times.build()
        curve = otoc_full(
            spectrum, space, times, config.otoc_mode_i, config.otoc_mode_j, config.beta
        )
        out["otoc_f"] = curve.f
    if "otoc_restricted" in config.diagnostics:
        times = config.times.build()
        cluster = lowest_cluster(spectrum, config.cluster_threshold)
        curve = otoc_restricted(
            spectrum, cluster, space, times, config.otoc_mode_i, config.otoc_mode_j, config.beta
        )
        out["otoc_restricted_f"] = curve.f
    return out


def _shard_path(out_dir: Path, index: int) -> Path:
    return out_dir / "realizations" / f"r{index:05d}.npz"


def _run_one(config: RunConfig, index: int, out_dir: Path | None, config_hash: str):
    if out_dir is not None:
        shard = _shard_path(out_dir, index)
        if shard.exists():
            with np.load(shard, allow_pickle=False) as data:
                if str(data["config_hash"]) != config_hash:
                    raise RuntimeError(
                        f"shard {shard} was written by a different configuration "
                        f"({data['config_hash']} != {config_hash})"
                    )
                return {k: data[k] for k in data.files if k != "config_hash"}
    result = _realization(config, index)
    if out_dir is not None:
        shard = _shard_path(out_dir, index)
        shard.parent.mkdir(parents=True, exist_ok=True)
        np.savez(shard, config_hash=config_hash, **result)
    return result


def run(config: RunConfig, n_jobs: int = 1, out_dir=None) -> EnsembleResult:
    """Execute all realizations, aggregate, and (optionally) checkpoint.

    Deterministic given ``config``: per-realization seeds derive from the
    base seed, and aggregation is carried out in realization order with
    fixed-order (pairwise) summation, so shuffling execution order cannot
    change the output.
    """
    config.validate()
    config_hash = config.shard_hash()
    out_path = Path(out_dir) if out_dir is not None else None
    indices = list(range(config.n_realizations))
    if n_jobs == 1:
        raw = [_try_one(config, i, out_path, config_hash) for i in indices]
    else:
        raw = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_try_one)(config, i, out_path, config_hash) for i in indices
        )
    results, failures = [], []
    for idx, item in zip(indices, raw):
        if isinstance(item, dict) and "error" in item:
            failures.append(item)
        else:
            results.append((idx, item))
    if len(failures) > 0.01 * config.n_realizations or not results:
        raise RuntimeError(f"{len(failures)} of {config.n_realizations} realizations failed: {failures[:3]}")
    results.sort(key=lambda pair: pair[0])
    return _aggregate(config, results, failures, config_hash)


def _try_one(config, index, out_path, config_hash):
    try:
        return _run_one(config, index, out_path, config_hash)
    except Exception as err:  # noqa: BLE001 - quarantined with provenance
        return {
            "error": repr(err),
            "index": index,
            "seed": realization_seed(config.base_seed, index, stream=config.seed_stream),
        }


def _scalar(values: list[float]) -> ScalarStat:
    arr = np.array(values, dtype=float)
    stderr = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else None
    return ScalarStat(values=arr, mean=float(arr.mean()), stderr=stderr)


def _curve_stats(grid: np.ndarray, rows: list[np.ndarray], meta: dict) -> Curve:
    stack = np.vstack(rows)
    stderr = stack.std(axis=0, ddof=1) / np.sqrt(len(rows)) if len(rows) > 1 else None
    return Curve(grid=grid, values=stack.mean(axis=0), stderr=stderr, n_samples=len(rows), meta=meta)


def _aggregate(config: RunConfig, results, failures, config_hash) -> EnsembleResult:
    curves: dict[str, Curve] = {}
    scalars: dict[str, ScalarStat] = {}
    features: dict = {}
    seeds = [int(item["seed"]) for _, item in results]
    evals = [np.asarray(item["eigenvalues"]) for _, item in results]
    omega0 = config.resolved_omega0()

    if "gap_ratio" in config.diagnostics:
        stats = [gap_ratios(e) for e in evals]
        scalars["mean_gap_ratio"] = _scalar([s.mean for s in stats])
        grid = stats[0].histogram.grid
        curves["gap_ratio_hist"] = _curve_stats(
            grid, [s.histogram.values for s in stats], {"columns": ("r", "P", "stderr")}
        )

    if "dos" in config.diagnostics:
        curve, fit = dos(evals, bins=config.dos_bins)
        curve.meta.update(
            {"columns": ("E", "rho", "stderr"), "gauss_mean": fit.mean, "gauss_sigma": fit.sigma,
             "gauss_residual": fit.residual}
        )
        curve.meta.pop("bin_edges", None)
        curves["dos"] = curve
        features["dos_gauss_fit"] = {"mean": fit.mean, "sigma": fit.sigma, "residual": fit.residual}

    if "sff" in config.diagnostics:
        times = config.times.build()
        rows = [sff([e], config.beta, times).values for e in evals]
        curves["sff"] = _curve_stats(times, rows, {"columns": ("t", "K", "stderr"), "beta": config.beta})
        features["heisenberg_time"] = float(np.mean([heisenberg_time(e) for e in evals]))

    if "sff_lowest_cluster" in config.diagnostics:
        times = config.times.build()
        rows = []
        sizes = []
        for e in evals:
            lo, hi = lowest_cluster(e, config.cluster_threshold)
            sizes.append(hi - lo)
            rows.append(sff([e[lo:hi]], config.beta, times).values)
        curves["sff_lowest_cluster"] = _curve_stats(
            times, rows, {"columns": ("t", "K", "stderr"), "beta": config.beta}
        )
        scalars["lowest_cluster_size"] = _scalar(sizes)

    if "otoc" in config.diagnostics:
        times = config.times.build()
        rows = [np.asarray(item["otoc_f"]) for _, item in results]
        curves["otoc"] = _curve_stats(
            times, rows,
            {"columns": ("t", "F", "stderr"), "beta": config.beta,
             "mode_i": config.otoc_mode_i, "mode_j": config.otoc_mode_j},
        )
        sel = times >= times[-1] / 10.0
        scalars["otoc_saturation"] = _scalar([float(r[sel].mean()) for r in rows])

    if "otoc_restricted" in config.diagnostics:
        times = config.times.build()
        rows = [np.asarray(item["otoc_restricted_f"]) for _, item in results]
        curves["otoc_restricted"] = _curve_stats(
            times, rows,
            {"columns": ("t", "F", "stderr"), "beta": config.beta,
             "mode_i": config.otoc_mode_i, "mode_j": config.otoc_mode_j},
        )

    features["omega0"] = omega0
    features["control_ratio"] = omega0 / config.g ** (2.0 / 3.0)
    return EnsembleResult(
        config=config,
        curves=curves,
        scalars=scalars,
        features=features,
        seeds=seeds,
        failures=failures,
        config_hash=config_hash,
    )


def sweep(config: RunConfig, axis: str, values, n_jobs: int = 1, out_dir=None) -> list[EnsembleResult]:
    """Map :func:`run` over an axis (``omega0`` or ``control_ratio``).

    In ``common`` couplings mode every sweep point reuses the same
    per-realization seeds (common random numbers, which smooths sweep curves
    without biasing means); in ``independent`` mode each point uses its own
    seed stream.
    """
    if axis not in ("omega0", "control_ratio", "n_bosons"):
        raise ValueError(f"unsupported sweep axis {axis!r}")
    results = []
    for idx, value in enumerate(values):
        overrides: dict = {axis: value}
        if axis == "omega0":
            overrides["control_ratio"] = None
        elif axis == "control_ratio":
            overrides["omega0"] = None
        if config.couplings_mode == "independent":
            overrides["seed_stream"] = config.seed_stream + idx + 1
        point = dataclasses.replace(config, **overrides)
        sub_dir = None if out_dir is None else Path(out_dir) / f"{axis}_{value:g}"
        results.append(run(point, n_jobs=n_jobs, out_dir=sub_dir))
    return results


def sff_features(result: EnsembleResult, alpha: float, k_plateau: float,
                 plateau_delta: float = 0.1, plateau_window: float = 1.9,
                 ramp_reference: tuple[float, float] | None = None,
                 ramp_delta: float = 5e-3, curve: str = "sff") -> SffFeatures:
    """Run the plateau/ramp detectors on a result's mean form factor in
    rescaled time ``alpha * t``.

    The plateau search starts at ``sqrt(N)``; the ramp is scanned over
    ``[2N, D]`` against the supplied power-law reference.
    """
    from .spectral import SffCurve

    n = result.config.n_fermions
    dim = result.config.space().total_dim
    base = result.curves[curve]
    rescaled = SffCurve(times=base.grid * alpha, values=base.values, beta=result.config.beta)
    t_plateau = detect_plateau(
        rescaled, k_plateau, delta=plateau_delta, window=plateau_window, search_start=np.sqrt(n)
    )
    t_ramp = None
    exponent = None
    if ramp_reference is not None:
        t_ramp = detect_ramp(rescaled, ramp_reference, window=(2.0 * n, dim), delta=ramp_delta)
        exponent = ramp_reference[1]
    return SffFeatures(t_plateau=t_plateau, t_ramp=t_ramp, k_plateau=k_plateau, ramp_exponent=exponent)


# ---------------------------------------------------------------------------
# on-disk artifact


def _curve_to_csv(curve: Curve, path: Path) -> None:
    cols = curve.meta.get("columns", ("x", "y", "stderr"))
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        stderr = curve.stderr if curve.stderr is not None else np.full(len(curve.grid), np.nan)
        for x, y, e in zip(curve.grid, curve.values, stderr):
            fh.write(f"{x:.17g},{y:.17g},{e:.17g}\n")


def _curve_from_csv(path: Path) -> Curve:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    stderr = data[:, 2] if not np.all(np.isnan(data[:, 2])) else None
    return Curve(grid=data[:, 0], values=data[:, 1], stderr=stderr, meta={"columns": tuple(header)})


def save(result: EnsembleResult, path) -> None:
    """Write the versioned run artifact directory."""
    path = Path(path)
    (path / "curves").mkdir(parents=True, exist_ok=True)
    (path / "config.json").write_text(result.config.canonical_json() + "\n")
    for name, curve in result.curves.items():
        _curve_to_csv(curve, path / "curves" / f"{name}.csv")
        sidecar = {k: v for k, v in curve.meta.items() if k != "columns"}
        sidecar.update({"n_samples": curve.n_samples, "columns": list(curve.meta.get("columns", ()))})
        (path / "curves" / f"{name}.json").write_text(json.dumps(sidecar, indent=1, default=float))
    summary = {
        "format_version": FORMAT_VERSION,
        "version": result.version,
        "config_hash": result.config_hash,
        "scalars": {
            k: {"values": [float(v) for v in s.values], "mean": s.mean, "stderr": s.stderr}
            for k, s in result.scalars.items()
        },
        "features": result.features,
        "failures": result.failures,
        "curves": sorted(result.curves),
    }
    (path / "summary.json").write_text(json.dumps(summary, indent=1, default=float) + "\n")
    (path / "seeds.txt").write_text("\n".join(str(s) for s in result.seeds) + "\n")


def load(path) -> EnsembleResult:
    """Read a run artifact back; raises on version mismatch or corruption."""
    path = Path(path)
    try:
        summary = json.loads((path / "summary.json").read_text())
        config_payload = json.loads((path / "config.json").read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise RuntimeError(f"corrupt or incomplete run artifact at {path}: {err}") from err
    if summary.get("format_version") != FORMAT_VERSION:
        raise RuntimeError(
            f"artifact format version {summary.get('format_version')} != {FORMAT_VERSION}"
        )
    times = config_payload.pop("times", None)
    config = RunConfig(
        **{**config_payload, "diagnostics": tuple(config_payload["diagnostics"]),
           "times": GridSpec(**times) if times else None}
    )
    curves = {}
    for name in summary["curves"]:
        curve = _curve_from_csv(path / "curves" / f"{name}.csv")
        sidecar = json.loads((path / "curves" / f"{name}.json").read_text())
        curve.n_samples = sidecar.pop("n_samples", 1)
        curve.meta.update({k: v for k, v in sidecar.items() if k != "columns"})
        curves[name] = curve
    scalars = {
        k: ScalarStat(values=np.array(v["values"]), mean=v["mean"], stderr=v["stderr"])
        for k, v in summary["scalars"].items()
    }
    seeds = [int(s) for s in (path / "seeds.txt").read_text().split()]
    return EnsembleResult(
        config=config,
        curves=curves,
        scalars=scalars,
        features=summary["features"],
        seeds=seeds,
        failures=summary["failures"],
        config_hash=summary["config_hash"],
        version=summary["version"],
    )
