import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from newspred.cli import main, read_table

REPO = Path(__file__).resolve().parent.parent
GOLDEN = Path(__file__).resolve().parent / "data" / "golden_insample.csv"

SUBCOMMANDS = [
    "ingest", "classify", "ratios", "insample", "oos", "backtest",
    "macro", "interact", "novelty", "simulate", "oracle",
]


def run_cli(args, **kw):
    return subprocess.run(
        [sys.executable, "-m", "newspred", *args],
        capture_output=True,
        text=True,
        cwd=REPO,
        **kw,
    )


def simulate_fixture(out, seed=777):
    r = run_cli(
        [
            "--out", str(out), "--seed", str(seed), "simulate",
            "--periods", "120", "--beta", "0.4", "--noise-sd", "1.0",
            "--headlines-per-period", "40",
        ]
    )
    assert r.returncode == 0, r.stderr
    return out


def build_ratios(out):
    r = run_cli(["--out", str(out), "ingest", "--headlines", f"{out}/headlines.jsonl", "--labels", f"{out}/labels.csv"])
    assert r.returncode == 0, r.stderr
    r = run_cli(["--out", str(out), "ratios", "--counts", f"{out}/counts.csv"])
    assert r.returncode == 0, r.stderr


class TestUsage:
    def test_top_level_help(self):
        assert run_cli(["--help"]).returncode == 0

    @pytest.mark.parametrize("cmd", SUBCOMMANDS)
    def test_subcommand_help_exits_zero(self, cmd):
        assert run_cli([cmd, "--help"]).returncode == 0

    def test_unknown_subcommand_exits_2(self):
        r = run_cli(["frobnicate"])
        assert r.returncode == 2
        assert "usage" in r.stderr.lower()

    def test_missing_inputs_enumerates_all_problems(self, tmp_path):
        r = run_cli(["--out", str(tmp_path), "insample"])
        assert r.returncode == 1
        err = json.loads(r.stderr)
        assert err["error"] == "ConfigError"
        assert len(err["problems"]) == 2  # ratios and returns both missing

    def test_machine_readable_error_on_bad_file(self, tmp_path):
        bad = tmp_path / "ratios.csv"
        bad.write_text("not,a,ratio,file\n")
        ret = tmp_path / "returns.csv"
        ret.write_text("period,excess_return\n1996-01,0.01\n")
        r = run_cli(["--out", str(tmp_path), "insample", "--ratios", str(bad), "--returns", str(ret)])
        assert r.returncode == 1
        err = json.loads(r.stderr)
        assert "message" in err and "error" in err


class TestPipeline:
    @pytest.fixture(scope="class")
    def workspace(self, tmp_path_factory):
        out = tmp_path_factory.mktemp("ws")
        simulate_fixture(out)
        build_ratios(out)
        return out

    def test_simulate_outputs_exist(self, workspace):
        for name in ("headlines.jsonl", "labels.csv", "returns.csv", "signal.csv", "dgp.json"):
            assert (workspace / name).exists()

    def test_insample_matches_oracle_golden_bytes(self, workspace, tmp_path):
        r = run_cli(
            [
                "--out", str(tmp_path), "insample",
                "--ratios", f"{workspace}/ratios.csv",
                "--returns", f"{workspace}/returns.csv",
            ]
        )
        assert r.returncode == 0, r.stderr
        assert (tmp_path / "insample.csv").read_bytes() == GOLDEN.read_bytes()

    def test_oos_and_backtest_chain(self, workspace, tmp_path):
        r = run_cli(
            [
                "--out", str(tmp_path), "oos",
                "--signal", "nr_good,nr_bad",
                "--ratios", f"{workspace}/ratios.csv",
                "--returns", f"{workspace}/returns.csv",
                "--train-end", "2000-12",
                "--combine", "mc,imc,iwc",
            ]
        )
        assert r.returncode == 0, r.stderr
        report = json.loads((tmp_path / "oos_report.json").read_text())
        assert set(report) == {"nr_good", "nr_bad", "mc", "imc", "iwc"}
        for entry in report.values():
            assert entry["r2_os"] <= 1.0
            assert 0.0 <= entry["p_value"] <= 1.0
        # strong planted signal: the good-news path should beat the benchmark
        assert report["nr_good"]["r2_os"] > 0

        rf = tmp_path / "rf.csv"
        _, _, rows = read_table(tmp_path / "forecasts_nr_good.csv")
        rf.write_text(
            "period,rf\n" + "".join(f"{row[0]},0.002\n" for row in rows)
        )
        r = run_cli(
            [
                "--out", str(tmp_path), "backtest",
                "--forecasts", f"{tmp_path}/forecasts_nr_good.csv",
                "--rf", str(rf),
                "--returns", f"{workspace}/returns.csv",
                "--gamma", "3", "--tc-bp", "50", "--bounds", "0,1.5", "--window", "24",
            ]
        )
        assert r.returncode == 0, r.stderr
        bt = json.loads((tmp_path / "backtest.json").read_text())
        assert {"cer_gain_gross", "cer_gain_net", "model", "benchmark"} <= set(bt)
        assert (tmp_path / "weights.csv").exists()

    def test_macro_command(self, workspace, tmp_path):
        r = run_cli(
            [
                "--out", str(tmp_path), "macro",
                "--proxy", f"{workspace}/signal.csv",
                "--ratios", f"{workspace}/ratios.csv",
                "--flavor", "ar_controlled",
            ]
        )
        assert r.returncode == 0, r.stderr
        _, header, rows = read_table(tmp_path / "macro.csv")
        assert header[0] == "signal" and len(rows) == 1

    def test_interact_command(self, workspace, tmp_path):
        r = run_cli(
            [
                "--out", str(tmp_path), "interact",
                "--ratios", f"{workspace}/ratios.csv",
                "--returns", f"{workspace}/returns.csv",
                "--state", f"{workspace}/signal.csv",
                "--window", "24",
                "--horizons", "1,3",
            ]
        )
        assert r.returncode == 0, r.stderr
        _, _, rows = read_table(tmp_path / "interact.csv")
        assert [row[0] for row in rows] == ["1", "3"]

    def test_classify_lexicon_recovers_planted_labels(self, workspace, tmp_path):
        pos, neg = tmp_path / "pos.txt", tmp_path / "neg.txt"
        pos.write_text("gainward\n")
        neg.write_text("lossward\n")
        out_csv = tmp_path / "labels_lex.csv"
        r = run_cli(
            [
                "--out", str(tmp_path), "classify", "--backend", "lexicon",
                "--headlines", f"{workspace}/headlines.jsonl",
                "--lexicon-positive", str(pos), "--lexicon-negative", str(neg),
                "--out-file" if False else "--out", str(out_csv),
            ]
        )
        assert r.returncode == 0, r.stderr
        planted = (workspace / "labels.csv").read_text().splitlines()[1:]
        got = out_csv.read_text().splitlines()[1:]
        assert [l.split(",")[1] for l in got] == [l.split(",")[1] for l in planted]

    def test_novelty_command(self, workspace, tmp_path):
        rng = np.random.default_rng(5)
        emb = tmp_path / "emb.jsonl"
        with open(emb, "w") as fh:
            for i in range(12):
                for j in range(3):
                    fh.write(
                        json.dumps(
                            {
                                "headline_id": f"h{i}-{j}",
                                "period": f"1996-{i + 1:02d}",
                                "vector": list(rng.standard_normal(8)),
                            }
                        )
                        + "\n"
                    )
        r = run_cli(
            ["--out", str(tmp_path), "novelty", "--embeddings", str(emb), "--lookback", "5", "--window", "4"]
        )
        assert r.returncode == 0, r.stderr
        assert (tmp_path / "novelty.csv").exists()
        assert (tmp_path / "similarity_dummy.csv").exists()

    def test_oracle_command(self, tmp_path):
        r = run_cli(["--out", str(tmp_path), "oracle"])
        assert r.returncode == 0, r.stdout + r.stderr
        assert "PASS" in r.stdout
        report = json.loads((tmp_path / "oracle.json").read_text())
        assert report["passed"] is True

    def test_all_emitted_csvs_roundtrip_through_own_readers(self, workspace, tmp_path):
        from newspred.corpus import read_counts_csv, read_ratios_csv, read_series_csv

        read_counts_csv(workspace / "counts.csv")
        read_ratios_csv(workspace / "ratios.csv")
        read_series_csv(workspace / "returns.csv")
        read_series_csv(workspace / "signal.csv")
        r = run_cli(
            [
                "--out", str(tmp_path), "insample",
                "--ratios", f"{workspace}/ratios.csv",
                "--returns", f"{workspace}/returns.csv",
            ]
        )
        assert r.returncode == 0
        meta, header, rows = read_table(tmp_path / "insample.csv")
        assert header[0] == "signal" and len(rows) == 6
        assert "units=" in meta and "version=" in meta


def tree_bytes(root: Path) -> dict:
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name != "run.log":  # timestamps live only in the log
            out[str(p.relative_to(root))] = p.read_bytes()
    return out


class TestDeterminism:
    def test_two_runs_byte_identical(self, tmp_path):
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            simulate_fixture(out, seed=31)
            build_ratios(out)
            r = run_cli(
                [
                    "--out", str(out), "insample",
                    "--ratios", f"{out}/ratios.csv", "--returns", f"{out}/returns.csv",
                ]
            )
            assert r.returncode == 0
            outs.append(tree_bytes(out))
        assert outs[0] == outs[1]

    def test_thread_count_does_not_change_outputs(self, tmp_path):
        outs = []
        for threads in ("1", "8"):
            out = tmp_path / f"t{threads}"
            r = run_cli(
                [
                    "--out", str(out), "--seed", "55", "--threads", threads,
                    "simulate", "--periods", "90", "--headlines-per-period", "20",
                ]
            )
            assert r.returncode == 0
            outs.append(tree_bytes(out))
        assert outs[0] == outs[1]


class TestConfigFile:
    def test_config_supplies_paths_and_flags_override(self, tmp_path):
        out = tmp_path / "ws"
        simulate_fixture(out, seed=99)
        build_ratios(out)
        cfg = tmp_path / "run.ini"
        cfg.write_text(
            "[paths]\n"
            f"ratios = {out}/ratios.csv\n"
            f"returns = {out}/returns.csv\n"
            "[analysis]\n"
            "horizons = 0,1\n"
            "[output]\n"
            f"dir = {tmp_path}/from_config\n"
        )
        r = run_cli(["--config", str(cfg), "insample"])
        assert r.returncode == 0, r.stderr
        _, _, rows = read_table(tmp_path / "from_config" / "insample.csv")
        assert [row[1] for row in rows] == ["0", "1"]
        # flag overrides the config horizons
        r = run_cli(["--config", str(cfg), "--out", str(tmp_path / "ovr"), "insample", "--horizons", "3"])
        assert r.returncode == 0, r.stderr
        _, _, rows = read_table(tmp_path / "ovr" / "insample.csv")
        assert [row[1] for row in rows] == ["3"]

    def test_missing_config_file_reported(self, tmp_path):
        r = run_cli(["--config", str(tmp_path / "none.ini"), "oracle"])
        assert r.returncode == 1
        assert json.loads(r.stderr)["error"] == "ConfigError"


class TestInProcessEntry:
    def test_main_returns_int(self, tmp_path, capsys):
        rc = main(["--out", str(tmp_path), "oracle"])
        assert rc == 0
