from __future__ import annotations

import csv
import io
import json
import math

import pytest

from onebit_dme.constants import constants_for
from onebit_dme.densities import make_density
from onebit_dme.errors import IoError, SchemaError
from onebit_dme.protocols import AdaptiveConfig, NonAdaptiveConfig
from onebit_dme.report_io import (
    CONSTANTS_HEADER,
    MSE_HEADER,
    SCHEMA_VERSION,
    constants_csv,
    fmt,
    mse_csv,
    read_sim_json,
    report_from_dict,
    report_to_dict,
    sweep_beta_csv,
    write_constants_csv,
    write_mse_csv,
    write_sim_json,
)
from onebit_dme.simulation import ExperimentConfig, equal_thirds_thresholds, run_experiment, sweep_beta

FOUR = [("ggd", 1.5), ("logistic", None), ("hypsecant", None), ("sin2", None)]
THIRDS = equal_thirds_thresholds(-2.5, 2.5)


@pytest.fixture(scope="module")
def report():
    cfg = ExperimentConfig(
        dist="logistic", protocol=AdaptiveConfig(*THIRDS), mu_grid=(0.0, 1.0), n_values=(500,), n_trials=12,
        master_seed=5,
    )
    return run_experiment(cfg)


class TestConstantsCsv:
    def test_rows_and_header(self, tmp_path):
        rows = [constants_for(make_density(n, b)) for n, b in FOUR]
        path = tmp_path / "c.csv"
        write_constants_csv(rows, path)
        lines = path.read_bytes().decode("utf-8").split("\n")
        assert lines[0] == ",".join(CONSTANTS_HEADER)
        assert len([x for x in lines if x]) == 5
        recs = list(csv.DictReader(io.StringIO(path.read_text())))
        assert [r["dist"] for r in recs] == ["ggd", "logistic", "hypsecant", "sin2"]
        assert recs[2]["c_adapt"] == "1.000000000"
        assert b"\r" not in path.read_bytes()

    def test_byte_identical(self, tmp_path):
        rows = [constants_for(make_density("logistic"))]
        write_constants_csv(rows, tmp_path / "a.csv")
        write_constants_csv(rows, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_ten_digit_parse_back(self):
        c = constants_for(make_density("sin2"))
        rec = next(csv.DictReader(io.StringIO(constants_csv([c]))))
        for key in ("f0", "x_star", "h_star", "T", "c_non", "c_adapt", "ratio"):
            v = float(rec[key])
            ref = float(format(getattr(c, key), ".10g"))
            assert v == ref and math.isclose(v, getattr(c, key), rel_tol=1e-9)

    def test_unwritable(self, tmp_path):
        with pytest.raises(IoError):
            write_constants_csv([], tmp_path / "missing" / "x.csv")


class TestFmt:
    @pytest.mark.parametrize("v,out", [(None, ""), (3, "3"), (1.0, "1.000000000"), (True, "True"), ("a", "a")])
    def test_cases(self, v, out):
        assert fmt(v) == out


class TestMseCsv:
    def test_columns(self, report, tmp_path):
        write_mse_csv(report, tmp_path / "m.csv")
        recs = list(csv.DictReader(open(tmp_path / "m.csv", encoding="utf-8")))
        assert list(recs[0]) == list(MSE_HEADER) and len(recs) == 2
        assert all(r["master_seed"] == "5" and r["config_hash"] == report.config.config_hash() for r in recs)
        assert float(recs[0]["n_mse"]) == pytest.approx(500 * float(recs[0]["mse_mean"]), rel=1e-8)

    def test_sweep_csv(self):
        text = sweep_beta_csv(sweep_beta([1.5]))
        head, row = text.strip().split("\n")
        assert head.startswith("beta,c_non") and row.endswith(",,")


class TestJson:
    def test_roundtrip(self, report, tmp_path):
        path = tmp_path / "r.json"
        write_sim_json(report, path)
        back = read_sim_json(path)
        assert back == report
        assert back.provenance["master_seed"] == 5

    def test_failures_preserved(self, tmp_path):
        cfg = ExperimentConfig(
            dist="logistic", protocol=NonAdaptiveConfig(*THIRDS), mu_grid=(0.0,), n_values=(6,), n_trials=40,
            max_failure_rate=1.0,
        )
        rep = run_experiment(cfg)
        write_sim_json(rep, tmp_path / "f.json")
        back = read_sim_json(tmp_path / "f.json")
        assert back.points[0].failures == rep.points[0].failures > 0

    def test_schema_version(self, report):
        d = report_to_dict(report)
        assert d["schema_version"] == SCHEMA_VERSION
        d["schema_version"] = "other/0"
        with pytest.raises(SchemaError):
            report_from_dict(d)

    def test_field_mismatch(self, report):
        d = json.loads(json.dumps(report_to_dict(report)))
        d["points"][0]["extra"] = 1
        with pytest.raises(SchemaError):
            report_from_dict(d)

    def test_read_errors(self, tmp_path):
        with pytest.raises(IoError):
            read_sim_json(tmp_path / "absent.json")
        (tmp_path / "bad.json").write_text("{not json")
        with pytest.raises(SchemaError):
            read_sim_json(tmp_path / "bad.json")

    def test_mse_csv_text_matches_file(self, report, tmp_path):
        write_mse_csv(report, tmp_path / "m.csv")
        assert (tmp_path / "m.csv").read_text() == mse_csv(report)
