"""CSV and JSON serialization of constants tables and simulation reports.

Files are UTF-8 with LF line endings. Floats in CSV carry 10 significant
digits; JSON keeps full ``repr`` precision so reports round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, fields
from pathlib import Path

from .constants import TheoryConstants
from .errors import IoError, SchemaError
from .simulation import AggregateResult, BetaRow, ExperimentConfig, PointResult, SimReport

__all__ = [
    "SCHEMA_VERSION",
    "CONSTANTS_HEADER",
    "MSE_HEADER",
    "SWEEP_HEADER",
    "fmt",
    "constants_csv",
    "write_constants_csv",
    "mse_csv",
    "write_mse_csv",
    "sweep_beta_csv",
    "write_sweep_beta_csv",
    "report_to_dict",
    "report_from_dict",
    "write_sim_json",
    "read_sim_json",
]

SCHEMA_VERSION = "onebit-dme/sim-report/1"

CONSTANTS_HEADER = ("dist", "beta", "f0", "x_star", "h_star", "T", "alpha_star", "c_non", "c_adapt", "ratio")
MSE_HEADER = (
    "n", "mu", "trials", "failures", "mse_mean", "mse_stderr", "n_mse", "theory_mse",
    "sigma_mse_mean", "sigma_mse_stderr", "theory_sigma_mse", "bias_mean", "bias_stderr",
    "clip_rate", "master_seed", "config_hash",
)
SWEEP_HEADER = ("beta", "c_non", "c_adapt", "ratio", "empirical_nmse", "empirical_stderr")


def fmt(v) -> str:
    """10 significant digits, trailing zeros kept; empty for ``None``."""
    if v is None:
        return ""
    if isinstance(v, (bool, str)):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return format(float(v), "#.10g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _write_text(path, text: str) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def constants_csv(rows: list[TheoryConstants]) -> str:
    return _csv_text(
        CONSTANTS_HEADER,
        (
            (c.dist, c.beta, c.f0, c.x_star, c.h_star, c.T, c.alpha_star, c.c_non, c.c_adapt, c.ratio)
            for c in rows
        ),
    )


def write_constants_csv(rows: list[TheoryConstants], path) -> None:
    """One row per density, in the order given."""
    _write_text(path, constants_csv(rows))


def mse_csv(report: SimReport) -> str:
    seed = report.provenance.get("master_seed")
    chash = report.provenance.get("config_hash")
    return _csv_text(
        MSE_HEADER,
        (
            (
                p.n, p.mu, p.trials, p.failures, p.mse_mean, p.mse_stderr, p.n * p.mse_mean,
                p.theory_mse, p.sigma_mse_mean, p.sigma_mse_stderr, p.theory_sigma_mse,
                p.bias_mean, p.bias_stderr, p.clip_rate, seed, chash,
            )
            for p in report.points
        ),
    )


def write_mse_csv(report: SimReport, path) -> None:
    """Plot-ready per-``(n, mu)`` MSE curve with seed and config hash on every row."""
    _write_text(path, mse_csv(report))


def sweep_beta_csv(rows: list[BetaRow]) -> str:
    return _csv_text(
        SWEEP_HEADER,
        ((r.beta, r.c_non, r.c_adapt, r.ratio, r.empirical_nmse, r.empirical_stderr) for r in rows),
    )


def write_sweep_beta_csv(rows, path) -> None:
    _write_text(path, sweep_beta_csv(rows))


def report_to_dict(report: SimReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": report.config.to_dict(),
        "points": [asdict(p) for p in report.points],
        "aggregates": [asdict(a) for a in report.aggregates],
        "benchmarks": dict(report.benchmarks),
        "provenance": dict(report.provenance),
    }


def _build(cls, d: dict):
    names = {f.name for f in fields(cls)}
    if set(d) != names:
        raise SchemaError(f"{cls.__name__} fields {sorted(d)} != {sorted(names)}")
    return cls(**d)


def report_from_dict(d: dict) -> SimReport:
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {version!r}; expected {SCHEMA_VERSION!r}")
    try:
        return SimReport(
            config=ExperimentConfig.from_dict(d["config"]),
            points=[_build(PointResult, p) for p in d["points"]],
            aggregates=[_build(AggregateResult, a) for a in d["aggregates"]],
            benchmarks=dict(d["benchmarks"]),
            provenance=dict(d["provenance"]),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed report: {exc}") from exc


def sim_json(report: SimReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_sim_json(report: SimReport, path) -> None:
    _write_text(path, sim_json(report))


def read_sim_json(path) -> SimReport:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    return report_from_dict(data)
