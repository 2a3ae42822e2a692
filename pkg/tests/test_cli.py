from __future__ import annotations

import json
from pathlib import Path

import pytest

from commlat.cli import main

TWO_REGION_SCENARIO = {
    "seed": 3,
    "regions": [4, 4],
    "cores_per_node": 4,
    "placement": "good",
    "periods": [{"cause": "none", "durations": 6, "duration_us": 50_000}],
}
# distance gap for this seeded scenario: within <= 2.8, cross >= 3.9
TWO_REGION_THRESHOLD = "3.3"


@pytest.fixture
def fixture_dir(tmp_path: Path) -> Path:
    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps(TWO_REGION_SCENARIO))
    out = tmp_path / "fx"
    assert main(["gen", str(scenario), "--out-dir", str(out)]) == 0
    return out


def run_ok(args: list[str]) -> int:
    code = main(args)
    assert code == 0
    return code


def test_gen_outputs(fixture_dir: Path):
    assert (fixture_dir / "trace.csv").exists()
    assert (fixture_dir / "node_map.csv").exists()
    truth = json.loads((fixture_dir / "ground_truth.json").read_text())
    assert truth["regions"] == [[0, 1, 2, 3], [4, 5, 6, 7]]
    assert truth["rng"] == "numpy.random.PCG64"


def test_ingest_report(fixture_dir: Path, tmp_path: Path):
    out = tmp_path / "ingest.json"
    run_ok(["ingest", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--out", str(out)])
    report = json.loads(out.read_text())
    assert report["pairing"]["unmatched_sends"] == 0
    assert report["events"] > 0
    assert report["ranks"] == list(range(8))


def test_ingest_normalized_round_trip(fixture_dir: Path, tmp_path: Path):
    normalized = tmp_path / "norm.csv"
    run_ok(["ingest", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--out", str(tmp_path / "r.json"), "--normalized-out", str(normalized)])
    assert normalized.read_text() == (fixture_dir / "trace.csv").read_text()


def test_criteria_stage(fixture_dir: Path, tmp_path: Path):
    out = tmp_path / "criteria.csv"
    run_ok(["criteria", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--criteria-out", str(out)])
    lines = out.read_text().splitlines()
    assert lines[0] == "locality,bucket_start,criterion_us,samples"
    assert any(ln.startswith("intra,") for ln in lines)
    assert any(ln.startswith("inter,") for ln in lines)


def test_cluster_recovers_ground_truth(fixture_dir: Path, tmp_path: Path):
    out = tmp_path / "regions.json"
    run_ok(["cluster", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--threshold", TWO_REGION_THRESHOLD, "--out", str(out)])
    payload = json.loads(out.read_text())
    truth = json.loads((fixture_dir / "ground_truth.json").read_text())
    assert [r["members"] for r in payload["regions"]] == truth["regions"]


def test_cluster_threshold_zero_singletons(fixture_dir: Path, tmp_path: Path):
    out = tmp_path / "regions.json"
    run_ok(["cluster", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--threshold", "0", "--out", str(out)])
    payload = json.loads(out.read_text())
    assert all(len(r["members"]) == 1 for r in payload["regions"])


def test_evolve_dag_attribute_stages(fixture_dir: Path, tmp_path: Path):
    regions = tmp_path / "regions.json"
    run_ok(["cluster", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--threshold", TWO_REGION_THRESHOLD, "--out", str(regions)])

    evolution = tmp_path / "evolution.json"
    run_ok(["evolve", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--regions-in", str(regions), "--region-id", "0", "--out", str(evolution)])
    ev = json.loads(evolution.read_text())
    assert ev["region"] == 0
    assert ev["periods"]

    dag_out = tmp_path / "dag.json"
    run_ok(["dag", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--regions-in", str(regions), "--region-id", "0",
            "--start", "0", "--end", "300000", "--out", str(dag_out)])
    dag = json.loads(dag_out.read_text())
    assert dag["nodes"] and dag["edges"]
    assert all(e["l"] is not None for e in dag["edges"])

    attr_out = tmp_path / "attribution.json"
    run_ok(["attribute", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--regions-in", str(regions), "--region-id", "0",
            "--start", "0", "--end", "300000", "--out", str(attr_out)])
    attr = json.loads(attr_out.read_text())
    assert attr["verdict"] in ("PoorMapping", "PoorPattern", "BackgroundTraffic")
    assert set(attr["signals"]) == {"mapping", "pattern", "traffic"}


def test_remap_stage_improves_bad_placement(tmp_path: Path):
    scenario = dict(TWO_REGION_SCENARIO, placement="bad", seed=8)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(scenario))
    out_dir = tmp_path / "fx"
    run_ok(["gen", str(path), "--out-dir", str(out_dir)])
    remap_out = tmp_path / "remap.json"
    run_ok(["remap", str(out_dir / "trace.csv"), str(out_dir / "node_map.csv"),
            "--cores-per-node", "4", "--out", str(remap_out)])
    payload = json.loads(remap_out.read_text())
    assert payload["after"] < payload["before"]


def test_stage_reruns_are_byte_identical(fixture_dir: Path, tmp_path: Path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        run_ok(["cluster", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
                "--threshold", TWO_REGION_THRESHOLD, "--out", str(out)])
    assert a.read_bytes() == b.read_bytes()


def test_config_file_flags_override(fixture_dir: Path, tmp_path: Path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"cluster_threshold": 0.0}))
    out = tmp_path / "regions.json"
    run_ok(["cluster", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--config", str(config), "--out", str(out)])
    assert all(len(r["members"]) == 1 for r in json.loads(out.read_text())["regions"])
    # explicit flag wins over the config file
    run_ok(["cluster", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
            "--config", str(config), "--threshold", TWO_REGION_THRESHOLD, "--out", str(out)])
    assert len(json.loads(out.read_text())["regions"]) == 2


def test_unknown_subcommand_exit_one(capsys):
    assert main(["frobnicate"]) == 1


def test_missing_file_exit_one(tmp_path: Path):
    assert main(["ingest", str(tmp_path / "nope.csv"), str(tmp_path / "nope2.csv")]) == 1


def test_malformed_trace_exit_one(tmp_path: Path):
    trace = tmp_path / "bad.csv"
    trace.write_text("rank,kind,timestamp,src,dst,size\n1,send,10,1,1,64\n")
    node_map = tmp_path / "nm.csv"
    node_map.write_text("rank,node\n1,0\n")
    assert main(["ingest", str(trace), str(node_map)]) == 1


def test_bad_config_key_exit_one(fixture_dir: Path, tmp_path: Path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"no_such_knob": 1}))
    assert main(["cluster", str(fixture_dir / "trace.csv"),
                 str(fixture_dir / "node_map.csv"), "--config", str(config)]) == 1


def test_infeasible_remap_exit_one(fixture_dir: Path):
    assert main(["remap", str(fixture_dir / "trace.csv"), str(fixture_dir / "node_map.csv"),
                 "--cores-per-node", "1"]) == 1


def test_help_exit_zero():
    assert main(["--help"]) == 0
    assert main(["cluster", "--help"]) == 0
