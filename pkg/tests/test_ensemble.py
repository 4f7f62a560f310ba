import dataclasses
import json

import numpy as np
import pytest

import ysyk.ensemble as ens
from ysyk.ensemble import EnsembleResult, GridSpec, RunConfig, load, run, save, sweep


def _config(**overrides):
    base = dict(
        model="ysyk",
        n_fermions=4,
        n_bosons=2,
        boson_cutoff=1,
        omega0=0.8,
        diagnostics=("gap_ratio", "sff"),
        n_realizations=4,
        base_seed=42,
        times=GridSpec(0.1, 100.0, 40),
    )
    base.update(overrides)
    return RunConfig(**base)


def test_validate_rejects_bad_configs():
    with pytest.raises(ValueError):
        _config(model="bogus").validate()
    with pytest.raises(ValueError):
        _config(diagnostics=("sff", "nope")).validate()
    with pytest.raises(ValueError):
        _config(n_realizations=0).validate()
    with pytest.raises(ValueError):
        _config(times=None).validate()
    with pytest.raises(ValueError):
        _config(omega0=1.0, control_ratio=1.0).validate()
    with pytest.raises(ValueError):
        _config(diagnostics=("otoc",), n_fermions=8, n_bosons=4, dense_budget=100).validate()
    with pytest.raises(ValueError):
        _config(times=GridSpec(1.0, 0.5, 10)).validate()


def test_control_ratio_resolution():
    cfg = _config(omega0=None, control_ratio=0.5, g=8.0)
    assert cfg.resolved_omega0() == pytest.approx(2.0)


def test_single_realization_mean_and_stderr():
    res = run(_config(n_realizations=1))
    assert res.scalars["mean_gap_ratio"].stderr is None
    assert res.curves["sff"].stderr is None
    assert res.curves["sff"].n_samples == 1


def test_run_deterministic_and_thread_invariant():
    cfg = _config()
    a = run(cfg)
    b = run(cfg)
    c = run(cfg, n_jobs=2)
    assert np.array_equal(a.curves["sff"].values, b.curves["sff"].values)
    assert np.array_equal(a.curves["sff"].values, c.curves["sff"].values)
    assert np.array_equal(a.scalars["mean_gap_ratio"].values, c.scalars["mean_gap_ratio"].values)
    assert a.seeds == c.seeds


def test_otoc_diagnostics_through_ensemble():
    cfg = _config(diagnostics=("otoc", "otoc_restricted"),
                  times=GridSpec(0.0, 30.0, 12, kind="linear"), n_realizations=2)
    res = run(cfg)
    assert res.curves["otoc"].values[0] == pytest.approx(1.0, abs=1e-10)
    assert "otoc_saturation" in res.scalars
    assert res.curves["otoc_restricted"].values.shape == (12,)


def test_failure_quarantine(monkeypatch):
    calls = ens._realization

    def flaky(config, index):
        if index == 1:
            raise RuntimeError("synthetic failure")
        return calls(config, index)

    monkeypatch.setattr(ens, "_realization", flaky)
    # 1 failure out of 4 exceeds the one-percent budget -> the run aborts
    with pytest.raises(RuntimeError):
        run(_config())


def test_save_load_roundtrip(tmp_path):
    res = run(_config(diagnostics=("gap_ratio", "sff", "dos")))
    out = tmp_path / "artifact"
    save(res, out)
    back = load(out)
    assert back.config == res.config
    assert back.config_hash == res.config_hash
    assert np.array_equal(back.curves["sff"].grid, res.curves["sff"].grid)
    assert np.array_equal(back.curves["sff"].values, res.curves["sff"].values)
    assert np.array_equal(back.curves["sff"].stderr, res.curves["sff"].stderr)
    assert np.array_equal(back.scalars["mean_gap_ratio"].values,
                          res.scalars["mean_gap_ratio"].values)
    assert back.seeds == res.seeds
    # header row on every CSV
    first = (out / "curves" / "sff.csv").read_text().splitlines()[0]
    assert first == "t,K,stderr"


def test_load_rejects_corrupt_and_version_mismatch(tmp_path):
    res = run(_config())
    out = tmp_path / "artifact"
    save(res, out)
    summary = json.loads((out / "summary.json").read_text())
    summary["format_version"] = 999
    (out / "summary.json").write_text(json.dumps(summary))
    with pytest.raises(RuntimeError):
        load(out)
    (out / "summary.json").write_text('{"truncated": ')
    with pytest.raises(RuntimeError):
        load(out)
    with pytest.raises(RuntimeError):
        load(tmp_path / "missing")


def test_resume_uses_shards_and_checks_hash(tmp_path):
    cfg = _config(n_realizations=3)
    out = tmp_path / "run"
    first = run(cfg, out_dir=out)
    # poison one shard: a resumed run must pick it up verbatim (proof of reuse)
    shard = out / "realizations" / "r00001.npz"
    with np.load(shard) as data:
        payload = {k: data[k] for k in data.files}
    payload["eigenvalues"] = payload["eigenvalues"] + 1.0
    np.savez(shard, **payload)
    resumed = run(cfg, out_dir=out)
    assert not np.array_equal(resumed.curves["sff"].values, first.curves["sff"].values)
    # different config against the same shards -> hash mismatch failure
    with pytest.raises(RuntimeError):
        run(dataclasses.replace(cfg, omega0=0.9), out_dir=out)


def test_resume_after_interrupt_identical(tmp_path):
    cfg = _config(n_realizations=5)
    reference = run(cfg)
    out = tmp_path / "run"
    partial = dataclasses.replace(cfg, n_realizations=3)
    run(partial, out_dir=out)  # interrupted: only 3 shards exist
    resumed = run(cfg, out_dir=out)
    assert np.array_equal(resumed.curves["sff"].values, reference.curves["sff"].values)
    assert resumed.seeds == reference.seeds


def test_sweep_singleton_matches_run():
    cfg = _config(omega0=None, control_ratio=0.7)
    single = sweep(cfg, "control_ratio", [0.7])
    direct = run(dataclasses.replace(cfg, control_ratio=0.7))
    assert np.array_equal(single[0].curves["sff"].values, direct.curves["sff"].values)


def test_sweep_common_couplings_smoother_than_independent():
    # common random numbers across the frequency axis suppress the
    # point-to-point increment variance of the sweep curve
    values = [0.2, 0.3, 0.45, 0.7, 1.0]
    increments = {"common": [], "independent": []}
    seeds_seen = {"common": [], "independent": []}
    for rep in range(16):
        base = _config(
            n_fermions=4, n_bosons=2, diagnostics=("gap_ratio",), times=None,
            n_realizations=4, omega0=None, control_ratio=None, base_seed=100 + rep,
        )
        for mode in increments:
            res = sweep(dataclasses.replace(base, couplings_mode=mode), "control_ratio", values)
            y = np.array([r.scalars["mean_gap_ratio"].mean for r in res])
            increments[mode].append(np.diff(y))
            seeds_seen[mode].append([r.seeds for r in res])
    per_point = seeds_seen["common"][0]
    assert all(s == per_point[0] for s in per_point)  # seeds shared across axis
    assert seeds_seen["independent"][0][0] != seeds_seen["independent"][0][1]
    var_common = np.array(increments["common"]).var(ddof=1)
    var_indep = np.array(increments["independent"]).var(ddof=1)
    assert var_common < var_indep


def test_sff_features_on_result():
    rng_cfg = _config(model="syk2", n_fermions=8, n_bosons=0, omega0=None, control_ratio=None,
                      diagnostics=("sff",), n_realizations=20,
                      times=GridSpec(0.05, 2000.0, 300))
    res = run(rng_cfg)
    feats = ens.sff_features(res, alpha=1.0, k_plateau=1.0 / 70.0)
    assert feats.t_plateau is None or feats.t_plateau > np.sqrt(8.0)
