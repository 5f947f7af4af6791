import csv
import json

import pytest

from mhsolver.cli import (
    CONTRACT_HEADER,
    FRONTIER_HEADER,
    SWEEP_HEADER,
    main,
    parse_config,
)


BASE_CFG = {
    "distribution": {"family": "gaussian", "sigma": 50.0},
    "utility": {"family": "log", "w0": 50.0},
    "cost": {"kappa": 1.0 / 30000.0, "power": 2.0},
    "a0": 100.0,
    "action_interval": [0.0, 300.0],
    "reservation_utility": 4.5,
}


def write_cfg(tmp_path, cfg):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def run(tmp_path, cfg, command, *extra, capsys=None):
    cfg_path = write_cfg(tmp_path, cfg)
    out = tmp_path / "out"
    code = main(["--config", cfg_path, "--out", str(out),
                 "--command", command, *extra])
    return code, out


class TestParseConfig:
    def test_valid(self, tmp_path):
        p = parse_config(write_cfg(tmp_path, BASE_CFG))
        assert p.a0 == 100.0

    def test_bad_json_reports_location(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"a0": 100.0,,}')
        from mhsolver.errors import ParseError
        with pytest.raises(ParseError, match="line 1"):
            parse_config(str(path))

    def test_missing_file(self, tmp_path):
        from mhsolver.errors import ParseError
        with pytest.raises(ParseError):
            parse_config(str(tmp_path / "nope.json"))


class TestRelaxedCommand:
    def test_artifacts(self, tmp_path, capsys):
        code, out = run(tmp_path, BASE_CFG, "relaxed")
        assert code == 0
        payload = json.loads((out / "result.json").read_text())
        assert abs(payload["lambda"] - 132.11873974411253) <= 1e-4
        assert "threshold" in payload
        header, rows = read_csv(out / "contract.csv")
        assert header == CONTRACT_HEADER
        assert len(rows) >= 51
        # wages are nonnegative, utility column matches the log link
        for y, wage, util in rows[:: len(rows) // 10]:
            assert float(wage) >= 0.0
        summary = json.loads(capsys.readouterr().out)
        assert summary["command"] == "relaxed"
        assert summary["elapsed_s"] > 0

    def test_warm_start_matches_cold(self, tmp_path):
        code, out = run(tmp_path, BASE_CFG, "relaxed",
                        "--seed-multipliers", "130,2100")
        assert code == 0
        payload = json.loads((out / "result.json").read_text())
        assert abs(payload["lambda"] - 132.11873974411253) <= 1e-4

    def test_bad_seed_flag(self, tmp_path, capsys):
        code, _ = run(tmp_path, BASE_CFG, "relaxed",
                      "--seed-multipliers", "130")
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ValidationError"


class TestSolveCommand:
    def test_artifacts(self, tmp_path):
        code, out = run(tmp_path, BASE_CFG, "solve")
        assert code == 0
        payload = json.loads((out / "result.json").read_text())
        assert payload["provenance"] == "ActiveSetFirstIteration"
        assert payload["foa_report"]["valid"] is True
        header, rows = read_csv(out / "action_curve.csv")
        assert header == ["action", "agent_utility [utils]"]
        assert len(rows) == 200


class TestSweepCommand:
    def test_rows_sorted_with_transition(self, tmp_path):
        cfg = {**BASE_CFG, "reservation_utility": [4.5, 3.0, 5.0]}
        code, out = run(tmp_path, cfg, "sweep")
        assert code == 0
        header, rows = read_csv(out / "sweep.csv")
        assert header == SWEEP_HEADER
        u = [float(r[0]) for r in rows]
        assert u == sorted(u) == [3.0, 4.5, 5.0]
        valid = [int(r[1]) for r in rows]
        assert valid == [0, 1, 1]


class TestParetoCommand:
    def test_frontier_monotone(self, tmp_path):
        cfg = {**BASE_CFG, "reservation_utility": [4.0, 4.5, 5.0]}
        code, out = run(tmp_path, cfg, "pareto")
        assert code == 0
        header, rows = read_csv(out / "frontier.csv")
        assert header == FRONTIER_HEADER
        wages = [float(r[2]) for r in rows]
        assert wages == sorted(wages)
        assert all(int(r[1]) == 1 for r in rows)


class TestValidateCommand:
    def test_report(self, tmp_path, capsys):
        code, out = run(tmp_path, BASE_CFG, "validate")
        assert code == 0
        payload = json.loads((out / "report.json").read_text())
        assert payload["foa_report"]["valid"] is True
        summary = json.loads(capsys.readouterr().out)
        assert summary["valid"] is True


class TestCompareCommand:
    def test_artifacts(self, tmp_path):
        cfg = {**BASE_CFG,
               "distribution": {"family": "gaussian", "sigma": 10.0},
               "grids": {"n_outcome": 201, "n_action": 60}}
        code, out = run(tmp_path, cfg, "compare-solvers")
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["objective_gap_rel"] <= 1e-2
        header, rows = read_csv(out / "comparison.csv")
        assert header[0].startswith("y ")
        assert len(rows) == 201


class TestBenchCommand:
    def test_timing_summary(self, tmp_path):
        code, out = run(tmp_path, BASE_CFG, "bench", "--repeats", "20")
        assert code == 0
        payload = json.loads((out / "timing.json").read_text())
        assert payload["repeats"] == 20
        assert len(payload["runs"]) == 20
        assert payload["p10_ms"] <= payload["median_ms"] <= payload["p90_ms"]


class TestErrors:
    def test_infeasible_exits_nonzero(self, tmp_path, capsys):
        cfg = {**BASE_CFG,
               "utility": {"family": "cara", "w0": 2.0, "alpha": 1.0},
               "reservation_utility": 1.0}
        code, _ = run(tmp_path, cfg, "relaxed")
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "Infeasible"

    def test_validation_error_reported(self, tmp_path, capsys):
        cfg = {**BASE_CFG, "distribution": {"family": "cauchy"}}
        code, _ = run(tmp_path, cfg, "solve")
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ValidationError"
