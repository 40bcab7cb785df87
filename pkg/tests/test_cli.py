import json
import subprocess
import sys
from pathlib import Path

import pytest

from chemspace.cli import main, render_csv, strip_volatile
from chemspace.fingerprints import write_dataset
from chemspace.synthetic import SyntheticConfig, generate_synthetic


@pytest.fixture(scope="module")
def synthetic_tsv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "syn.tsv"
    ds = generate_synthetic(SyntheticConfig(classes=6, per_class=10, width=128, core_bits=20), seed=3)
    write_dataset(ds, path)
    return path


def run_cli(args):
    return main([str(a) for a in args])


def read_json(path):
    return json.loads(Path(path).read_text())


def test_measure_two_rows(synthetic_tsv, tmp_path):
    out = tmp_path / "m.json"
    code = run_cli(["measure", "--in", synthetic_tsv, "--measures", "richness,circles:t=0.75", "--out", out])
    assert code == 0
    doc = read_json(out)
    assert len(doc["results"]) == 2
    assert doc["results"][0]["measure"] == "richness"
    assert doc["results"][0]["value"] == 60.0
    circles_row = doc["results"][1]
    assert circles_row["measure"].startswith("circles:")
    assert circles_row["metadata"]["mode"] == "exact"  # 60 <= cap 64
    assert "wall_time_s" in circles_row


def test_measure_empty_input(tmp_path, capsys):
    empty = tmp_path / "empty.tsv"
    empty.write_text("# nothing here\n")
    out = tmp_path / "e.json"
    code = run_cli(["measure", "--in", empty, "--measures", "richness,diversity", "--out", out])
    assert code == 0
    captured = capsys.readouterr()
    assert "warning" in captured.err
    doc = read_json(out)
    assert all(r["value"] == 0.0 for r in doc["results"])


def test_measure_greedy_mode_flag(tmp_path):
    ds = generate_synthetic(SyntheticConfig(classes=10, per_class=10, width=64, core_bits=12), seed=1)
    path = tmp_path / "big.tsv"
    write_dataset(ds, path)
    out = tmp_path / "g.json"
    run_cli(["measure", "--in", path, "--measures", "circles:t=0.6", "--out", out])
    doc = read_json(out)
    assert doc["results"][0]["metadata"]["mode"] == "greedy"  # 100 > cap 64
    assert doc["results"][0]["metadata"]["optimal"] is False


def test_measure_unknown_flag_exits_nonzero(synthetic_tsv):
    with pytest.raises(SystemExit):
        run_cli(["measure", "--in", synthetic_tsv, "--bogus"])


def test_measure_missing_file_errors(tmp_path):
    code = run_cli(["measure", "--in", tmp_path / "nope.tsv", "--measures", "richness"])
    assert code == 1


def test_compare_matrix_and_determinism(synthetic_tsv, tmp_path):
    out = tmp_path / "c.json"
    code = run_cli(
        [
            "compare",
            "--in", synthetic_tsv, synthetic_tsv,
            "--measures", "richness,circles:t=0.6,circles:t=0.75",
            "--repeats", "3",
            "--out", out,
        ]
    )
    assert code == 0
    doc = read_json(out)
    assert len(doc["results"]) == 6  # 2 datasets x 3 measures
    rich_rows = [r for r in doc["results"] if r["measure"] == "richness"]
    assert rich_rows[0]["rel_dev_pct"] == 0.0
    assert rich_rows[0]["mean"] == rich_rows[1]["mean"]
    # Identical dataset passed twice: identical rows.
    first = [r for r in doc["results"] if r["dataset"] == rich_rows[0]["dataset"]]
    assert first[:3] == doc["results"][3:]


def test_axiom_check_json_and_exit_code(tmp_path):
    out = tmp_path / "ax.json"
    code = run_cli(["axiom-check", "--trials", "150", "--seed", "7", "--out", out])
    assert code == 0
    doc = read_json(out)
    assert doc["matches_expected"] is True
    assert len(doc["results"]) == 10


def test_corr_fixed_rows(synthetic_tsv, tmp_path):
    out = tmp_path / "cf.json"
    code = run_cli(
        [
            "corr-fixed",
            "--in", synthetic_tsv,
            "--n", "20",
            "--repeats", "20",
            "--runs", "2",
            "--measures", "diversity,circles:t=0.7",
            "--out", out,
        ]
    )
    assert code == 0
    doc = read_json(out)
    assert {r["measure"] for r in doc["results"]} == {"diversity", "circles:t=0.7"}
    assert all(r["statistic"] == "spearman_vs_gold" for r in doc["results"])
    assert all(len(r["per_run"]) == 2 for r in doc["results"])


def test_corr_growing_rows(synthetic_tsv, tmp_path):
    out = tmp_path / "cg.json"
    code = run_cli(
        [
            "corr-growing",
            "--in", synthetic_tsv,
            "--n", "25",
            "--runs", "2",
            "--bias", "similar",
            "--measures", "richness,circles:t=0.7",
            "--out", out,
        ]
    )
    assert code == 0
    doc = read_json(out)
    assert all(r["statistic"] == "dtw_vs_gold" for r in doc["results"])
    assert doc["config"]["bias_label"] == "needs to be similar (power=10)"


def test_sweep_t(synthetic_tsv, tmp_path):
    out = tmp_path / "sw.json"
    code = run_cli(
        [
            "sweep-t",
            "--in", synthetic_tsv,
            "--t-grid", "0.0,0.7",
            "--n", "20",
            "--repeats", "15",
            "--runs", "2",
            "--out", out,
        ]
    )
    assert code == 0
    doc = read_json(out)
    assert doc["best_t"] == 0.7
    assert [r["t"] for r in doc["results"]] == [0.0, 0.7]


def test_gen_synthetic_writes_tsv(tmp_path, capsys):
    out = tmp_path / "gen.tsv"
    code = run_cli(
        ["gen-synthetic", "--classes", "10", "--per-class", "20", "--out", out, "--seed", "5"]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 200
    doc = json.loads(capsys.readouterr().out)
    assert doc["records"] == 200


def test_novelty_stream(synthetic_tsv, tmp_path, monkeypatch, capsys):
    import io

    ds_lines = Path(synthetic_tsv).read_text().splitlines()
    candidates = "\n".join(line.split("\t")[1] for line in ds_lines[:3]) + "\n"
    monkeypatch.setattr(sys, "stdin", io.StringIO(candidates))
    code = run_cli(["novelty", "--in", synthetic_tsv, "--kind", "circles", "--t", "0.6"])
    assert code == 0
    scores = capsys.readouterr().out.strip().splitlines()
    assert scores == ["0", "0", "0"]  # members of the set are never novel
    monkeypatch.setattr(sys, "stdin", io.StringIO(candidates))
    code = run_cli(["novelty", "--in", synthetic_tsv, "--kind", "diversity"])
    assert code == 0
    vals = [float(v) for v in capsys.readouterr().out.strip().splitlines()]
    assert len(vals) == 3 and all(0.0 <= v <= 1.0 for v in vals)


def test_measure_coverage_with_universe_file(tmp_path):
    data = tmp_path / "frags.tsv"
    data.write_text(
        "m1\tf0\tk1\tfa,fb\n"
        "m2\t0f\tk1\tfb,fc\n"
        "m3\tff\tk2\tfd\n"
    )
    universe = tmp_path / "universe.txt"
    universe.write_text("fa\nfc\nfz\n")
    out = tmp_path / "cov.json"
    code = run_cli(
        ["measure", "--in", data, "--measures", f"coverage:kind=FG,universe={universe}", "--out", out]
    )
    assert code == 0
    doc = read_json(out)
    assert doc["results"][0]["value"] == 2.0  # fa, fc present; fz never covered
    out2 = tmp_path / "cov2.json"
    run_cli(["measure", "--in", data, "--measures", "coverage", "--out", out2])
    assert read_json(out2)["results"][0]["value"] == 4.0  # implicit universe


def test_json_csv_value_parity(synthetic_tsv, tmp_path):
    out_json = tmp_path / "p.json"
    out_csv = tmp_path / "p.csv"
    base = ["measure", "--in", synthetic_tsv, "--measures", "richness,diversity"]
    run_cli(base + ["--out", out_json])
    run_cli(base + ["--out", out_csv, "--format", "csv"])
    doc = read_json(out_json)
    lines = out_csv.read_text().strip().splitlines()
    header = lines[0].split(",")
    for row_doc, line in zip(doc["results"], lines[1:]):
        cells = dict(zip(header, line.split(",")))
        assert float(cells["value"]) == row_doc["value"]
        assert int(cells["set_size"]) == row_doc["set_size"]


def test_deterministic_json_modulo_volatile(synthetic_tsv, tmp_path):
    out1 = tmp_path / "d1.json"
    out2 = tmp_path / "d2.json"
    args = [
        "corr-fixed", "--in", synthetic_tsv, "--n", "15", "--repeats", "10",
        "--runs", "2", "--measures", "diversity,circles:t=0.7", "--seed", "123",
    ]
    run_cli(args + ["--out", out1])
    run_cli(args + ["--out", out2])
    a = json.dumps(strip_volatile(read_json(out1)), sort_keys=True)
    b = json.dumps(strip_volatile(read_json(out2)), sort_keys=True)
    assert a == b


def test_cli_subprocess_smoke(synthetic_tsv):
    env_src = str(Path(__file__).resolve().parents[1] / "src")
    result = subprocess.run(
        [sys.executable, "-m", "chemspace.cli", "measure", "--in", str(synthetic_tsv),
         "--measures", "richness"],
        capture_output=True,
        text=True,
        env={"PYTHONPATH": env_src, "PATH": "/usr/bin:/bin"},
    )
    assert result.returncode == 0
    doc = json.loads(result.stdout)
    assert doc["results"][0]["value"] == 60.0


def test_render_csv_empty():
    assert render_csv([]) == "\n"
