"""Config plumbing, CSV schema, sweeps, reports, CLI surface."""

import copy

import pytest

from npusim import cli
from npusim import config as cfgmod
from npusim import harness


def small_cfg(**overrides):
    cfg = cfgmod.load_config(None)
    cfg["workload"]["suite"] = "toy"
    for key, value in overrides.items():
        cfgmod.set_by_path(cfg, key, value)
    return cfg


# -- config -----------------------------------------------------------------

def test_defaults_validate_clean():
    assert cfgmod.validate(cfgmod.load_config(None)) == []


def test_validation_reports_key_paths():
    cfg = small_cfg()
    cfg["mmu"]["num_ptws"] = 0
    cfg["mmu"]["mode"] = "psychic"
    errors = cfgmod.validate(cfg)
    assert any(e.startswith("mmu.num_ptws") for e in errors)
    assert any(e.startswith("mmu.mode") for e in errors)


def test_env_overrides_nested_keys():
    cfg = cfgmod.apply_env_overrides(
        cfgmod.load_config(None),
        {"NPUSIM_MMU__NUM_PTWS": "32", "NPUSIM_WORKLOAD__SUITE": "cnn",
         "IGNORED": "1"})
    assert cfg["mmu"]["num_ptws"] == 32
    assert cfg["workload"]["suite"] == "cnn"


def test_yaml_file_merges_over_defaults(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("mmu:\n  num_ptws: 64\nconfig_id: mine\n")
    cfg = cfgmod.load_config(str(p))
    assert cfg["mmu"]["num_ptws"] == 64
    assert cfg["config_id"] == "mine"
    assert cfg["mmu"]["tlb_entries"] == 2048  # untouched default survives


def test_bare_leaf_key_resolves_uniquely():
    cfg = cfgmod.load_config(None)
    assert cfgmod.resolve_key(cfg, "num_ptws") == "mmu.num_ptws"
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.resolve_key(cfg, "definitely_not_a_key")


def test_seed_fanout_is_stable_and_distinct():
    a = cfgmod.seed_for(42, "gather")
    assert a == cfgmod.seed_for(42, "gather")
    assert a != cfgmod.seed_for(42, "frames")
    assert a != cfgmod.seed_for(43, "gather")


def test_dump_effective_is_sorted_yaml():
    text = cfgmod.dump_effective(cfgmod.load_config(None))
    assert text == cfgmod.dump_effective(cfgmod.load_config(None))
    import yaml
    assert yaml.safe_load(text)["mmu"]["num_ptws"] == 8


# -- harness ----------------------------------------------------------------

def test_run_single_rows_are_deterministic():
    cfg = small_cfg()
    a = harness.rows_to_csv(harness.run_single(cfg))
    b = harness.rows_to_csv(harness.run_single(cfg))
    assert a == b


def test_csv_schema_round_trip(tmp_path):
    rows = harness.run_single(small_cfg())
    path = tmp_path / "out.csv"
    with open(path, "w", newline="") as fh:
        harness.write_csv(rows, fh)
    back = harness.read_csv(str(path))
    assert len(back) == len(rows)
    assert back[0]["workload"] == rows[0]["workload"]
    assert int(back[0]["total_cycles"]) == rows[0]["total_cycles"]


def test_csv_rejects_wrong_schema(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("foo,bar\n1,2\n")
    with pytest.raises(ValueError):
        harness.read_csv(str(path))


def test_invalid_config_raises():
    cfg = small_cfg()
    cfg["mmu"]["num_ptws"] = -1
    with pytest.raises(cfgmod.ConfigError):
        harness.run_single(cfg)


def test_sweep_is_a_stable_cross_product():
    cfg = small_cfg()
    rows = harness.sweep(cfg, [("mmu.num_ptws", [1, 8]),
                               ("prmb_slots", [0, 4])])
    assert len(rows) == 4  # toy suite has one layer
    ids = [r["config_id"] for r in rows]
    assert ids == sorted(ids, key=ids.index)  # declaration order preserved
    assert ids[0].endswith("num_ptws=1,prmb_slots=0")
    assert ids[-1].endswith("num_ptws=8,prmb_slots=4")


def test_sweep_parallel_matches_serial():
    cfg = small_cfg()
    items = [("mmu.num_ptws", [1, 8])]
    serial = harness.rows_to_csv(harness.sweep(cfg, items, jobs=1))
    parallel = harness.rows_to_csv(harness.sweep(cfg, items, jobs=2))
    assert serial == parallel


def test_embedding_rows_cover_strategies():
    cfg = small_cfg(**{"workload.kind": "embedding", "workload.strategy": "all",
                       "workload.batch_samples": 16})
    rows = harness.run_single(cfg)
    assert [r["strategy"] for r in rows] == [
        "baseline_copy", "numa_slow", "numa_fast", "demand_4k", "demand_2m"]


def test_report_summarizes_and_rejects_empty(tmp_path):
    cfg = small_cfg()
    path = tmp_path / "r.csv"
    with open(path, "w", newline="") as fh:
        harness.write_csv(harness.run_single(cfg), fh)
    text = harness.report([str(path)])
    assert "normalized to oracle" in text
    empty = tmp_path / "e.csv"
    with open(empty, "w", newline="") as fh:
        harness.write_csv([], fh)
    with pytest.raises(ValueError):
        harness.report([str(empty)])


# -- CLI --------------------------------------------------------------------

def test_cli_run_writes_csv(tmp_path):
    out = tmp_path / "run.csv"
    assert cli.main(["run", "--out", str(out)]) == 0
    assert len(harness.read_csv(str(out))) >= 1


def test_cli_sweep_and_report(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    rc = cli.main(["sweep", "--set", "num_ptws=1,8", "--out", str(out)])
    assert rc == 0
    assert len(harness.read_csv(str(out))) == 2
    assert cli.main(["report", str(out)]) == 0
    assert "normalized to oracle" in capsys.readouterr().out


def test_cli_validate_rejects_bad_config(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("mmu:\n  mode: psychic\n")
    assert cli.main(["validate", "--config", str(p)]) == 1
    assert "mmu.mode" in capsys.readouterr().err


def test_cli_validate_prints_effective_config(capsys):
    assert cli.main(["validate"]) == 0
    assert "num_ptws" in capsys.readouterr().out


def test_cli_seed_flag_overrides_master(tmp_path):
    out = tmp_path / "s.csv"
    assert cli.main(["run", "--seed", "99", "--out", str(out)]) == 0
    assert harness.read_csv(str(out))[0]["seed"] == "99"
