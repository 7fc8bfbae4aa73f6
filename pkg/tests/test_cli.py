"""End-to-end command-line behavior (in-process main calls)."""

import json

import pytest

from topostream.cli import main


class TestGenData:
    def test_blobs_file(self, tmp_path, capsys):
        out = tmp_path / "d.txt"
        code = main([
            "gen-data", "--out", str(out), "--n", "50", "--k", "3",
            "--dims", "2", "--spread", "0.05", "--seed", "1",
        ])
        assert code == 0
        header = out.read_text().splitlines()[0]
        assert header == "#mpart-dataset v1 dims=2 classes=3 normalized=true"
        assert "wrote 50 samples" in capsys.readouterr().out

    def test_imbalanced_with_ratios(self, tmp_path):
        out = tmp_path / "d.txt"
        code = main([
            "gen-data", "--out", str(out), "--kind", "imbalanced", "--n", "100",
            "--k", "2", "--ratios", "0.9,0.1", "--dims", "2", "--seed", "0",
        ])
        assert code == 0
        labels = [line.rsplit(",", 1)[1] for line in out.read_text().splitlines()[1:]]
        assert labels.count("0") == 90 and labels.count("1") == 10


class TestTrain:
    def test_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main([
            "train", "--out-dir", str(out), "--source", "blobs", "--k", "2",
            "--dims", "2", "--n-train", "200", "--n-test", "50",
            "--B", "1", "--W", "20", "--strategy", "random", "--seed", "3",
            "--eval-interval", "100",
        ])
        assert code == 0
        trace = [json.loads(l) for l in (out / "trace.jsonl").read_text().splitlines()]
        assert len(trace) == 200
        snapshot = json.loads((out / "snapshot.json").read_text())
        assert "hash" in snapshot and snapshot["nodes"]
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["queries"] == 10
        assert "accuracy=" in capsys.readouterr().out

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text(
            'strategy = "random"\nB = 1\nW = 10\nseed = 5\n'
            'source = "blobs"\nk = 2\ndims = 2\nn_train = 100\nn_test = 20\n'
            "rho = 0.9\n"
        )
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        assert main(["train", "--config", str(cfg), "--out-dir", str(out1)]) == 0
        # override W via flag: different query pattern
        assert main(["train", "--config", str(cfg), "--out-dir", str(out2), "--W", "50"]) == 0
        m1 = json.loads((out1 / "metrics.json").read_text())
        m2 = json.loads((out2 / "metrics.json").read_text())
        assert m1["queries"] == 10 and m2["queries"] == 2

    def test_config_file_rejects_unknown_keys(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('[engine]\nB = 1\n')   # sectioned files must not pass silently
        out = tmp_path / "out"
        assert main(["train", "--config", str(cfg), "--out-dir", str(out)]) == 2
        assert "unknown config keys" in capsys.readouterr().err

    def test_trained_file_source(self, tmp_path):
        data = tmp_path / "d.txt"
        main(["gen-data", "--out", str(data), "--n", "120", "--k", "2", "--dims", "3", "--seed", "2"])
        out = tmp_path / "run"
        code = main([
            "train", "--out-dir", str(out), "--source", str(data),
            "--n-train", "100", "--n-test", "20", "--B", "1", "--W", "25",
            "--strategy", "memory", "--seed", "0",
        ])
        assert code == 0
        assert (out / "metrics.json").exists()

    def test_bad_hyperparam_exits_nonzero(self, tmp_path, capsys):
        code = main([
            "train", "--out-dir", str(tmp_path / "x"), "--rho", "1.5",
            "--source", "blobs", "--n-train", "10", "--n-test", "0",
        ])
        assert code == 2
        assert "rho" in capsys.readouterr().err


class TestBench:
    def test_summary_written(self, tmp_path, capsys):
        out = tmp_path / "bench"
        code = main([
            "bench", "--out-dir", str(out), "--source", "blobs", "--k", "2",
            "--dims", "2", "--n-train", "150", "--n-test", "40",
            "--B", "1", "--W", "25", "--strategy", "random",
            "--trials", "2", "--base-seed", "9",
        ])
        assert code == 0
        lines = (out / "summary.csv").read_text().splitlines()
        assert lines[0] == "metric,mean,std"
        raw = (out / "raw.jsonl").read_text().splitlines()
        assert len(raw) == 2
        assert "accuracy" in capsys.readouterr().out


class TestAblate:
    def test_table_shape(self, tmp_path, capsys):
        out = tmp_path / "abl"
        code = main([
            "ablate", "--out-dir", str(out), "--source", "blobs", "--k", "2",
            "--dims", "2", "--n-train", "100", "--n-test", "30",
            "--B", "1", "--W", "25", "--trials", "1",
            "--layers", "0,3", "--strategies", "random,explorer", "--scores", "dw",
        ])
        assert code == 0
        rows = (out / "ablation.csv").read_text().splitlines()
        assert len(rows) == 1 + 2 * 1 * 2
        assert rows[0].startswith("strategy,score,L")
