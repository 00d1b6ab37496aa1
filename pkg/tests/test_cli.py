"""Command-line contract: schemas, exit codes, and reproducible outputs.

Every test drives cli.main in process and inspects the files it writes.
The output format is treated as frozen: header strings, metadata lines,
and byte-level reproducibility are asserted, not just parseability.
"""

import json

import numpy as np
import pytest

from qsense import cli


def read_csv(path):
    """Split one output CSV into (metadata dict, header line, row fields)."""
    meta, header, rows = {}, None, []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(" = ")
            meta[key] = value
        elif header is None:
            header = line
        else:
            rows.append(line.split(","))
    return meta, header, rows


def write_adapt_config(path, **extra):
    doc = {
        "omega_true": 50.0,
        "omega0": 50.5,
        "delta_omega0": 0.5,
        "lambda": 0.1,
        "nbar": 1000.0,
        "max_steps": 10,
        "seed": 2026,
        "n_reps": 2,
    }
    doc.update(extra)
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


class TestFringes:
    def test_schema_and_anchor_rows(self, tmp_path):
        out = tmp_path / "fringes.csv"
        rc = cli.main(["fringes", "--points", "201", "--zeta-min", "-2.5",
                       "--zeta-max", "2.5", "--out", str(out)])
        assert rc == 0
        meta, header, rows = read_csv(out)
        assert header == "zeta,k_over_n,g_finite,g_universal"
        assert meta["command"] == "fringes"
        assert meta["n_units"] == "50"
        assert len(rows) == 201
        table = np.array(rows, dtype=float)
        zeta = table[:, 0]
        k_over_n = table[:, 1]
        assert k_over_n[np.argmin(np.abs(zeta))] == pytest.approx(1.0, abs=1e-12)
        for node in (-2.0, -1.0, 1.0, 2.0):
            assert k_over_n[np.argmin(np.abs(zeta - node))] <= 1e-10

    def test_missing_out_is_a_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["fringes"])
        assert exc.value.code == 2

    def test_unwritable_path_exits_3(self, tmp_path):
        rc = cli.main(["fringes", "--points", "10",
                       "--out", str(tmp_path / "no-such-dir" / "x.csv")])
        assert rc == 3


class TestGsq:
    def test_values_and_summary(self, tmp_path):
        out = tmp_path / "gsq.csv"
        rc = cli.main(["gsq", "--min", "0.1", "--max", "10", "--points", "5",
                       "--fit-min", "0.1", "--fit-max", "10", "--out", str(out)])
        assert rc == 0
        meta, header, rows = read_csv(out)
        assert header == "delta_zeta,g_sq_mean"
        assert meta["command"] == "gsq"
        assert len(rows) == 5
        table = np.array(rows, dtype=float)
        # logspace(-1, 1, 5) places delta_zeta = 1 at the center row
        assert table[2, 0] == pytest.approx(1.0, rel=1e-12)
        assert table[2, 1] == pytest.approx(0.6980, abs=1e-3)

        summary = json.loads((tmp_path / "gsq_summary.json").read_text())
        assert summary["command"] == "gsq"
        assert summary["fit_window"] == [0, 4]
        assert summary["n_points_in_fit"] == 5
        assert np.isfinite(summary["slope"])

    def test_summary_path_override(self, tmp_path):
        out = tmp_path / "scan.csv"
        custom = tmp_path / "other.json"
        rc = cli.main(["gsq", "--min", "0.1", "--max", "10", "--points", "5",
                       "--fit-min", "0.1", "--fit-max", "10",
                       "--out", str(out), "--summary", str(custom)])
        assert rc == 0
        assert custom.exists()
        assert not (tmp_path / "scan_summary.json").exists()

    def test_bad_range_exits_2(self, tmp_path, capsys):
        rc = cli.main(["gsq", "--min", "5", "--max", "1",
                       "--out", str(tmp_path / "x.csv")])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_empty_fit_window_exits_4(self, tmp_path):
        rc = cli.main(["gsq", "--min", "0.1", "--max", "10", "--points", "5",
                       "--fit-min", "9", "--fit-max", "9.5",
                       "--out", str(tmp_path / "x.csv")])
        assert rc == 4


class TestAdapt:
    def test_outputs_schema(self, tmp_path):
        cfg = write_adapt_config(tmp_path / "cfg.json")
        prefix = tmp_path / "run"
        rc = cli.main(["adapt", "--config", str(cfg), "--out-prefix", str(prefix)])
        assert rc == 0

        meta, header, rows = read_csv(tmp_path / "run_steps.csv")
        assert header == ("step,stage,n_units,tau,nu,mean_time,"
                          "mean_delta_omega,mean_zeta,mean_scaled_alpha")
        assert meta["command"] == "adapt"
        assert meta["nbar"] == "1000.0"
        assert meta["lambda"] == "0.1"
        assert len(rows) == 10
        assert all(r[1] == "2" for r in rows)
        assert [r[0] for r in rows] == [str(i) for i in range(10)]

        summary = json.loads((tmp_path / "run_summary.json").read_text())
        assert summary["command"] == "adapt"
        assert summary["n_common_steps"] == 10
        assert summary["config"]["lambda"] == 0.1
        assert summary["config"]["n_reps"] == 2
        assert summary["config"]["seed"] == 2026
        assert summary["final_mean_delta_omega"] == float(rows[-1][6])
        assert summary["final_mean_time"] == float(rows[-1][5])
        lo, hi = summary["fit_window"]
        assert 0 <= lo <= hi == 9

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_adapt_config(tmp_path / "cfg.json")
        for run in ("a", "b"):
            rc = cli.main(["adapt", "--config", str(cfg),
                           "--out-prefix", str(tmp_path / run)])
            assert rc == 0
        assert ((tmp_path / "a_steps.csv").read_bytes()
                == (tmp_path / "b_steps.csv").read_bytes())
        assert ((tmp_path / "a_summary.json").read_bytes()
                == (tmp_path / "b_summary.json").read_bytes())

    def test_flag_overrides_beat_file_values(self, tmp_path):
        cfg = write_adapt_config(tmp_path / "cfg.json")
        prefix = tmp_path / "o"
        rc = cli.main(["adapt", "--config", str(cfg), "--reps", "1",
                       "--seed", "999", "--out-prefix", str(prefix)])
        assert rc == 0
        summary = json.loads((tmp_path / "o_summary.json").read_text())
        assert summary["config"]["n_reps"] == 1
        assert summary["config"]["seed"] == 999

    def test_posterior_snapshot(self, tmp_path):
        cfg = write_adapt_config(tmp_path / "cfg.json")
        snap = tmp_path / "posterior.csv"
        rc = cli.main(["adapt", "--config", str(cfg),
                       "--out-prefix", str(tmp_path / "s"),
                       "--snapshot-posterior", str(snap)])
        assert rc == 0
        _, header, rows = read_csv(snap)
        assert header == "omega,weight"
        table = np.array(rows, dtype=float)
        assert np.all(np.diff(table[:, 0]) > 0)
        assert np.all(table[:, 1] >= 0)
        assert table[:, 1].sum() == pytest.approx(1.0, abs=1e-9)

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        cfg = write_adapt_config(tmp_path / "cfg.json", omega_ture=50.0)
        rc = cli.main(["adapt", "--config", str(cfg),
                       "--out-prefix", str(tmp_path / "x")])
        assert rc == 2
        err = capsys.readouterr().err
        assert "config error: omega_ture: unknown key" in err

    def test_missing_required_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"omega_true": 50.0}), encoding="utf-8")
        rc = cli.main(["adapt", "--config", str(cfg)])
        assert rc == 2
        err = capsys.readouterr().err
        assert "nbar: required key missing" in err
        assert "lambda: required key missing" in err

    def test_missing_config_file_exits_3(self, tmp_path):
        rc = cli.main(["adapt", "--config", str(tmp_path / "absent.json")])
        assert rc == 3

    def test_threads_env_is_honoured(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QSENSE_THREADS", "1")
        cfg = write_adapt_config(tmp_path / "cfg.json")
        rc = cli.main(["adapt", "--config", str(cfg),
                       "--out-prefix", str(tmp_path / "t")])
        assert rc == 0


class TestCompare:
    OMEGA = 2 * np.pi * 1e8
    LAM = 2 * np.pi * 1e3

    def write_config(self, path):
        path.write_text(json.dumps({
            "omega": self.OMEGA, "lambda": self.LAM, "t2": 1e-3,
        }), encoding="utf-8")
        return path

    def test_stdout_report(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path / "cmp.json")
        rc = cli.main(["compare", "--config", str(cfg)])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["command"] == "compare"
        assert doc["config"]["lambda"] == self.LAM
        assert "lam" not in doc["config"]
        assert "lam" not in doc["report"]
        assert doc["report"]["sensitivity_gain"] == pytest.approx(2e5, rel=1e-12)
        assert doc["report"]["time_cost_ratio"] == pytest.approx(
            self.OMEGA / self.LAM, rel=1e-12)

    def test_out_file_and_overrides(self, tmp_path):
        cfg = self.write_config(tmp_path / "cmp.json")
        out = tmp_path / "report.json"
        rc = cli.main(["compare", "--config", str(cfg),
                       "--k-factor", "4", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["config"]["k_factor"] == 4.0
        assert doc["report"]["time_cost_ratio"] == pytest.approx(
            2 * self.OMEGA / self.LAM, rel=1e-12)

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cmp.json"
        cfg.write_text(json.dumps({
            "omega": 1.0, "lambda": 0.1, "t2": 1.0, "qfactor": 3,
        }), encoding="utf-8")
        rc = cli.main(["compare", "--config", str(cfg)])
        assert rc == 2
        assert "qfactor: unknown key" in capsys.readouterr().err
