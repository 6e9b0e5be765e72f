import json

import pytest

from slotcsma.cli import main


def write_config(tmp_path, name="config.json", **overrides):
    cfg = {
        "n": 2,
        "edges": [[0, 1]],
        "lambda": [0.3, 0.3],
        "f": "sqrt_log",
        "slots": 2000,
        "seed": 7,
        "qmax_lag": 0,
        "trace_stride": 1,
    }
    cfg.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def run(args):
    return main([str(a) for a in args])


class TestSimulateCommand:
    def test_artifacts(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert run(["simulate", "--config", cfg, "--out", out]) == 0
        assert (out / "trace.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["slots"] == 2000
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["seed"] == 7
        assert len(manifest["config_sha256"]) == 64

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(["simulate", "--config", cfg, "--out", out1]) == 0
        assert run(["simulate", "--config", cfg, "--out", out2]) == 0
        for name in ("trace.csv", "summary.json", "manifest.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_seed_override_changes_trace(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run(["simulate", "--config", cfg, "--out", out1])
        run(["simulate", "--config", cfg, "--out", out2, "--seed", "8"])
        assert (out1 / "trace.csv").read_bytes() != (out2 / "trace.csv").read_bytes()
        assert json.loads((out2 / "manifest.json").read_text())["seed"] == 8

    def test_zero_slots_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, slots=0)
        assert run(["simulate", "--config", cfg, "--out", tmp_path / "o"]) == 2
        assert "slots must be >= 1" in capsys.readouterr().err

    def test_missing_config(self, tmp_path, capsys):
        assert run(["simulate", "--config", tmp_path / "nope.json",
                    "--out", tmp_path / "o"]) == 2

    def test_graph_file_config(self, tmp_path):
        (tmp_path / "g.txt").write_text("n 3\n0 1\n1 2\n")
        cfg = write_config(tmp_path, lambda_=None)
        cfg = tmp_path / "config2.json"
        cfg.write_text(json.dumps({
            "graph_file": "g.txt",
            "lambda": [0.2, 0.1, 0.2],
            "slots": 500,
            "seed": 1,
        }))
        out = tmp_path / "out"
        assert run(["simulate", "--config", cfg, "--out", out]) == 0
        header = (out / "trace.csv").read_text().splitlines()[0]
        assert header == "slot,q_0,q_1,q_2,sigma,attempts"


class TestCapacityCommand:
    def test_exterior_point(self, tmp_path):
        cfg = write_config(tmp_path, **{"lambda": [0.6, 0.6]})
        out = tmp_path / "out"
        assert run(["capacity", "--config", cfg, "--out", out]) == 0
        payload = json.loads((out / "capacity.json").read_text())
        assert payload["t_star"] == pytest.approx(5.0 / 6.0, abs=1e-4)
        assert payload["interior"] is False
        assert payload["t_star_exact"]

    def test_zero_rates(self, tmp_path):
        cfg = write_config(tmp_path, **{"lambda": [0.0, 0.0]})
        out = tmp_path / "out"
        assert run(["capacity", "--config", cfg, "--out", out]) == 0
        payload = json.loads((out / "capacity.json").read_text())
        assert payload["infinite"] is True and payload["t_star"] is None


class TestAnalyzeCommand:
    def test_artifacts(self, tmp_path):
        cfg = write_config(tmp_path, w_override=[2.0, 2.0])
        out = tmp_path / "out"
        assert run(["analyze", "--config", cfg, "--out", out]) == 0
        for name in ("P.csv", "Q.csv", "pi.csv", "pi_hat.csv", "analysis.json"):
            assert (out / name).exists()
        p_lines = (out / "P.csv").read_text().splitlines()
        assert p_lines[0] == "state,0,1,2"
        payload = json.loads((out / "analysis.json").read_text())
        assert payload["operator_norm"] == pytest.approx(0.75, abs=1e-12)
        assert payload["conductance"]["phi"] == pytest.approx(0.375, abs=1e-12)
        pi_lines = (out / "pi.csv").read_text().splitlines()
        assert pi_lines[0] == "state,probability"
        assert float(pi_lines[1].split(",")[1]) == pytest.approx(1 / 3, abs=1e-12)

    def test_weight_validation(self, tmp_path, capsys):
        cfg = write_config(tmp_path, w_override=[0.5, 2.0])
        assert run(["analyze", "--config", cfg, "--out", tmp_path / "o"]) == 2


class TestVerifyCommand:
    def test_k2_all_pass(self, tmp_path):
        cfg = write_config(tmp_path, w_override=[2.0, 2.0])
        out = tmp_path / "out"
        assert run(["verify", "--config", cfg, "--out", out]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["all_pass"] is True
        names = {item["name"] for item in report["items"]}
        assert {"weight-concentration-gap", "cheeger",
                "comparison-detailed-balance", "tree-oracle"} <= names
        for item in report["items"]:
            assert set(item) == {"name", "lhs", "rhs", "relation", "pass", "note"}

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, w_override=[1.5, 3.0])
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(["verify", "--config", cfg, "--out", out1]) == 0
        assert run(["verify", "--config", cfg, "--out", out2]) == 0
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()


class TestSweepCommand:
    def test_rows_and_artifacts(self, tmp_path):
        cfg = write_config(tmp_path, scales=[0.5, 1.0], seeds=[1, 2], slots=1500)
        out = tmp_path / "out"
        assert run(["sweep", "--config", cfg, "--out", out]) == 0
        rows = json.loads((out / "sweep.json").read_text())["rows"]
        assert [(r["scale"], r["seed"]) for r in rows] == [
            (0.5, 1), (0.5, 2), (1.0, 1), (1.0, 2)
        ]
        assert all(r["verdict"] == "insufficient-data" for r in rows)
        csv_lines = (out / "sweep.csv").read_text().splitlines()
        assert len(csv_lines) == 5
        assert csv_lines[0].startswith("scale,seed,t_star")

    def test_parallel_matches_serial(self, tmp_path):
        cfg = write_config(tmp_path, scales=[0.5, 1.0], seeds=[1, 2], slots=1500)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(["sweep", "--config", cfg, "--out", out1]) == 0
        assert run(["sweep", "--config", cfg, "--out", out2, "--jobs", "2"]) == 0
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()
