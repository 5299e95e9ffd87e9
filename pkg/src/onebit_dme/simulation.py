"""Deterministic Monte Carlo experiments for the one-bit protocols.

Every trial owns an independent Philox stream keyed by
``(master_seed, salt, n-index, mu-index, trial-index)``, so results do not
depend on how trials are scheduled across worker processes. Reductions are
always taken over arrays in trial order.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .constants import constants_for
from .densities import BaseDensity, ScaleLocationModel, make_density
from .errors import ConfigError, DegenerateQuantiles, DomainError, SimulationError
from .protocols import (
    AdaptiveConfig,
    FixedFractions,
    MultiThresholdConfig,
    NonAdaptiveConfig,
    TheoremRule,
    adaptive_decode,
    encode_threshold,
    mse_adaptive_asymptotic,
    mse_nonadaptive_asymptotic,
    multi_threshold_decode,
    multi_threshold_encode,
    multi_threshold_mean,
    multi_threshold_theory,
    nonadaptive_estimate,
    split_solver,
)

__all__ = [
    "DEFAULT_N_VALUES",
    "DEFAULT_MU_GRID",
    "NONADAPTIVE_SPLITS",
    "ADAPTIVE_SPLITS",
    "equal_thirds_thresholds",
    "mu_grid",
    "ExperimentConfig",
    "PointResult",
    "AggregateResult",
    "SimReport",
    "trial_rng",
    "run_experiment",
    "sweep_splits",
    "BetaRow",
    "sweep_beta",
]

DEFAULT_N_VALUES = (2500, 5000, 10000, 20000, 40000)
NONADAPTIVE_SPLITS = ((0.10, 0.90), (0.20, 0.80), (0.30, 0.70), (0.40, 0.60), (0.50, 0.50))
ADAPTIVE_SPLITS = (FixedFractions(0.05, 0.05), FixedFractions(0.10, 0.10), FixedFractions(0.15, 0.15))
WORKERS_ENV = "ONEBIT_DME_WORKERS"


def mu_grid(lo: float, hi: float, step: float) -> tuple[float, ...]:
    """Inclusive grid ``lo, lo + step, ..., hi`` rounded to 12 decimals."""
    if not step > 0 or hi < lo:
        raise DomainError("mu grid needs step > 0 and hi >= lo")
    k = int(math.floor((hi - lo) / step + 1e-9))
    return tuple(float(round(lo + i * step, 12)) for i in range(k + 1))


DEFAULT_MU_GRID = mu_grid(-2.5, 2.5, 0.5)


def equal_thirds_thresholds(mu_min: float, mu_max: float) -> tuple[float, float]:
    """Thresholds at one and two thirds of the known range of ``mu``.

    Every ``mu`` in ``[mu_min, mu_max]`` then lies within a third of the
    range of some threshold.
    """
    if not mu_min < mu_max:
        raise DomainError("equal-thirds rule needs mu_min < mu_max")
    w = mu_max - mu_min
    return mu_min + w / 3.0, mu_min + 2.0 * w / 3.0


Protocol = NonAdaptiveConfig | AdaptiveConfig | MultiThresholdConfig


def _protocol_kind(p) -> str:
    if isinstance(p, NonAdaptiveConfig):
        return "nonadaptive"
    if isinstance(p, AdaptiveConfig):
        return "adaptive"
    if isinstance(p, MultiThresholdConfig):
        return "multi"
    raise ConfigError(f"unknown protocol config {p!r}")


def protocol_to_dict(p) -> dict:
    kind = _protocol_kind(p)
    if kind == "adaptive":
        split = p.split
        sd = {"rule": "theorem"} if isinstance(split, TheoremRule) else {
            "rule": "fixed", "k1": split.k1, "k2": split.k2}
        return {"kind": kind, "theta1": p.theta1, "theta2": p.theta2, "split": sd}
    return {"kind": kind, **asdict(p)}


def protocol_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("kind")
    if kind == "nonadaptive":
        return NonAdaptiveConfig(**d)
    if kind == "adaptive":
        sd = d.pop("split")
        split = TheoremRule() if sd["rule"] == "theorem" else FixedFractions(sd["k1"], sd["k2"])
        return AdaptiveConfig(split=split, **d)
    if kind == "multi":
        return MultiThresholdConfig(**d)
    raise ConfigError(f"unknown protocol kind {kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a :class:`SimReport`."""

    dist: str
    protocol: Protocol
    beta: float | None = None
    mu_grid: tuple[float, ...] = DEFAULT_MU_GRID
    sigma: float = 2.0
    n_values: tuple[int, ...] = DEFAULT_N_VALUES
    n_trials: int = 2000
    master_seed: int = 0
    mu_range: tuple[float, float] | None = (-2.5, 2.5)
    salt: int = 0
    max_failure_rate: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "mu_grid", tuple(float(m) for m in self.mu_grid))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if self.mu_range is not None:
            object.__setattr__(self, "mu_range", tuple(float(v) for v in self.mu_range))
            lo, hi = self.mu_range
            if any(m < lo - 1e-12 or m > hi + 1e-12 for m in self.mu_grid):
                raise ConfigError("mu grid must lie inside mu_range")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if not self.mu_grid or not self.n_values:
            raise ConfigError("mu grid and n values must be non-empty")
        if isinstance(self.protocol, MultiThresholdConfig):
            for n in self.n_values:
                self.protocol.group_size(n)
        make_density(self.dist, self.beta)

    @property
    def density(self) -> BaseDensity:
        return make_density(self.dist, self.beta)

    def to_dict(self) -> dict:
        return {
            "dist": self.dist,
            "beta": self.beta,
            "protocol": protocol_to_dict(self.protocol),
            "mu_grid": list(self.mu_grid),
            "sigma": self.sigma,
            "n_values": list(self.n_values),
            "n_trials": self.n_trials,
            "master_seed": self.master_seed,
            "mu_range": None if self.mu_range is None else list(self.mu_range),
            "salt": self.salt,
            "max_failure_rate": self.max_failure_rate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["protocol"] = protocol_from_dict(d["protocol"])
        d["mu_grid"] = tuple(d["mu_grid"])
        d["n_values"] = tuple(d["n_values"])
        if d.get("mu_range") is not None:
            d["mu_range"] = tuple(d["mu_range"])
        return cls(**d)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class PointResult:
    n: int
    mu: float
    trials: int
    failures: int
    mse_mean: float
    mse_stderr: float
    bias_mean: float
    bias_stderr: float
    clip_rate: float
    theory_mse: float | None = None
    sigma_mse_mean: float | None = None
    sigma_mse_stderr: float | None = None
    theory_sigma_mse: float | None = None

    @property
    def bias_flag(self) -> bool:
        """Empirical mean of ``mu_hat`` sits more than 4 standard errors from ``mu``."""
        return abs(self.bias_mean) > 4.0 * self.bias_stderr


@dataclass
class AggregateResult:
    n: int
    worst_case_mse: float
    worst_case_mu: float
    average_mse: float
    adaptive_benchmark: float
    nonadaptive_bound: float | None = None


@dataclass
class SimReport:
    config: ExperimentConfig
    points: list[PointResult]
    aggregates: list[AggregateResult]
    benchmarks: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def point(self, n: int, mu: float) -> PointResult:
        for p in self.points:
            if p.n == n and abs(p.mu - mu) < 1e-12:
                return p
        raise KeyError((n, mu))

    def aggregate(self, n: int) -> AggregateResult:
        for a in self.aggregates:
            if a.n == n:
                return a
        raise KeyError(n)


def trial_rng(master_seed: int, salt: int, i_n: int, i_mu: int, trial: int) -> np.random.Generator:
    """Independent Philox stream for one trial."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(salt, i_n, i_mu, trial))
    return np.random.Generator(np.random.Philox(ss))


def _one_trial(protocol, model: ScaleLocationModel, n: int, rng):
    """Return ``(mu_hat, sigma_hat or nan, n_clipped, n_fractions)``."""
    d = model.base
    x = model.sample(rng, n)
    if isinstance(protocol, NonAdaptiveConfig):
        n1, _ = protocol.group_sizes(n)
        r = nonadaptive_estimate(
            encode_threshold(x[:n1], protocol.theta1),
            encode_threshold(x[n1:], protocol.theta2),
            protocol,
            d,
        )
        return r.mu_hat, r.sigma_hat, r.n_clipped, 2
    if isinstance(protocol, AdaptiveConfig):
        n1, n2, _ = split_solver(n, protocol.split)
        bits1 = encode_threshold(x[:n1], protocol.theta1)
        bits2 = encode_threshold(x[n1 : n1 + n2], protocol.theta2)
        coarse = nonadaptive_estimate(
            bits1, bits2, NonAdaptiveConfig(protocol.theta1, protocol.theta2), d
        )
        bits3 = encode_threshold(x[n1 + n2 :], coarse.mu_hat)
        r = adaptive_decode(bits1, bits2, bits3, protocol, d, coarse)
        return r.mu_hat, r.sigma_hat, r.n_clipped, 3
    bits = multi_threshold_encode(x, protocol)
    return multi_threshold_decode(bits, protocol), math.nan, 0, 0


def _run_block(cfg: ExperimentConfig, i_n: int, i_mu: int, lo: int, hi: int):
    n = cfg.n_values[i_n]
    model = ScaleLocationModel(cfg.density, cfg.mu_grid[i_mu], cfg.sigma)
    out = np.empty((hi - lo, 4))
    for t in range(lo, hi):
        rng = trial_rng(cfg.master_seed, cfg.salt, i_n, i_mu, t)
        try:
            out[t - lo] = _one_trial(cfg.protocol, model, n, rng)
        except DegenerateQuantiles:
            out[t - lo] = (math.nan, math.nan, 0, 0)
    return i_n, i_mu, lo, out


def _stats(v: np.ndarray) -> tuple[float, float]:
    if v.size == 0:
        return math.nan, math.nan
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan
    return float(np.mean(v)), se


def _theory(cfg: ExperimentConfig, n: int, mu: float):
    d, p = cfg.density, cfg.protocol
    if isinstance(p, NonAdaptiveConfig):
        m, s = mse_nonadaptive_asymptotic(p, d, mu, cfg.sigma)
        return m / n, s / n
    if isinstance(p, AdaptiveConfig):
        return mse_adaptive_asymptotic(d, cfg.sigma) / n, None
    k = p.group_size(n)
    th = multi_threshold_theory(p, d, mu, cfg.sigma, k)
    bias = multi_threshold_mean(p, ScaleLocationModel(d, mu, cfg.sigma)) - mu
    return th.variance_exact + bias * bias, None


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return workers


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> SimReport:
    """Run every ``(n, mu, trial)`` of ``cfg`` and summarize.

    The report is a pure function of ``cfg``; ``workers`` (default from
    ``ONEBIT_DME_WORKERS``) only changes wall-clock time.
    """
    workers = resolve_workers(workers)
    n_mu = len(cfg.mu_grid)
    chunk = max(1, math.ceil(cfg.n_trials / max(1, workers)))
    blocks = [
        (i_n, i_mu, lo, min(lo + chunk, cfg.n_trials))
        for i_n in range(len(cfg.n_values))
        for i_mu in range(n_mu)
        for lo in range(0, cfg.n_trials, chunk)
    ]
    raw = {(i_n, i_mu): np.empty((cfg.n_trials, 4)) for i_n in range(len(cfg.n_values)) for i_mu in range(n_mu)}
    if workers == 1:
        results = (_run_block(cfg, *b) for b in blocks)
        for i_n, i_mu, lo, out in results:
            raw[i_n, i_mu][lo : lo + out.shape[0]] = out
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_run_block, cfg, *b) for b in blocks]
            for f in futs:
                i_n, i_mu, lo, out = f.result()
                raw[i_n, i_mu][lo : lo + out.shape[0]] = out

    d = cfg.density
    benchmarks: dict = {"c_adapt": 1.0 / (4.0 * d.f0**2), "c_non": None}
    if d.strictly_log_concave:
        benchmarks["c_non"] = constants_for(d).c_non

    points: list[PointResult] = []
    aggregates: list[AggregateResult] = []
    for i_n, n in enumerate(cfg.n_values):
        row: list[PointResult] = []
        for i_mu, mu in enumerate(cfg.mu_grid):
            arr = raw[i_n, i_mu]
            ok = np.isfinite(arr[:, 0])
            failures = int(cfg.n_trials - ok.sum())
            if failures > cfg.max_failure_rate * cfg.n_trials:
                raise SimulationError(
                    f"{failures}/{cfg.n_trials} degenerate trials at n={n}, mu={mu}"
                )
            err = arr[ok, 0] - mu
            mse, mse_se = _stats(err * err)
            bias, bias_se = _stats(err)
            frac_total = arr[ok, 3].sum()
            clip_rate = float(arr[ok, 2].sum() / frac_total) if frac_total else 0.0
            th_mu, th_sigma = _theory(cfg, n, mu)
            sig_mse = sig_se = None
            if isinstance(cfg.protocol, NonAdaptiveConfig):
                es = arr[ok, 1] - cfg.sigma
                sig_mse, sig_se = _stats(es * es)
            row.append(
                PointResult(
                    n=n, mu=mu, trials=int(ok.sum()), failures=failures,
                    mse_mean=mse, mse_stderr=mse_se, bias_mean=bias, bias_stderr=bias_se,
                    clip_rate=clip_rate, theory_mse=th_mu, sigma_mse_mean=sig_mse,
                    sigma_mse_stderr=sig_se, theory_sigma_mse=th_sigma,
                )
            )
        mses = np.array([p.mse_mean for p in row])
        j = int(np.argmax(mses))
        s2n = cfg.sigma**2 / n
        aggregates.append(
            AggregateResult(
                n=n,
                worst_case_mse=float(mses[j]),
                worst_case_mu=row[j].mu,
                average_mse=float(mses.mean()),
                adaptive_benchmark=benchmarks["c_adapt"] * s2n,
                nonadaptive_bound=None if benchmarks["c_non"] is None else benchmarks["c_non"] * s2n,
            )
        )
        points.extend(row)

    provenance = {
        "master_seed": cfg.master_seed,
        "config_hash": cfg.config_hash(),
        "version": __version__,
        "rng": "SeedSequence(master_seed, spawn_key=(salt, n_idx, mu_idx, trial)) -> Philox",
    }
    return SimReport(cfg, points, aggregates, benchmarks, provenance)


def sweep_splits(cfg: ExperimentConfig, splits, workers: int | None = None) -> list[SimReport]:
    """One report per group allocation; split ``i`` uses seed salt ``i``.

    For non-adaptive configs each split is ``(k1, k2)``; for adaptive ones a
    :class:`FixedFractions`, :class:`TheoremRule` or ``(k1, k2)`` pair.
    """
    reports = []
    for i, s in enumerate(splits):
        p = cfg.protocol
        if isinstance(p, NonAdaptiveConfig):
            k1 = s[0] if isinstance(s, (tuple, list)) else float(s)
            if isinstance(s, (tuple, list)) and abs(s[0] + s[1] - 1.0) > 1e-12:
                raise ConfigError(f"non-adaptive split {s} must sum to 1")
            proto = replace(p, k1=float(k1))
        elif isinstance(p, AdaptiveConfig):
            rule = FixedFractions(*s) if isinstance(s, (tuple, list)) else s
            proto = replace(p, split=rule)
        else:
            raise ConfigError("split sweeps apply to two-threshold protocols only")
        reports.append(run_experiment(replace(cfg, protocol=proto, salt=i), workers))
    return reports


@dataclass(frozen=True)
class BetaRow:
    beta: float
    c_non: float
    c_adapt: float
    ratio: float
    empirical_nmse: float | None = None
    empirical_stderr: float | None = None


def sweep_beta(
    beta_grid, simulate: ExperimentConfig | None = None, workers: int | None = None
) -> list[BetaRow]:
    """GGD constants per shape, optionally joined with simulated worst-case ``n MSE / sigma^2``.

    When ``simulate`` is given its ``dist``/``beta`` are replaced per row and
    the largest ``n`` is used for the empirical column.
    """
    rows = []
    for b in beta_grid:
        b = float(b)
        if not 1.0 < b <= 2.5:
            raise DomainError("beta grid must lie in (1, 2.5]")
        c = constants_for(make_density("ggd", b))
        emp = se = None
        if simulate is not None:
            rep = run_experiment(replace(simulate, dist="ggd", beta=b), workers)
            n = max(simulate.n_values)
            agg = rep.aggregate(n)
            pt = rep.point(n, agg.worst_case_mu)
            scale = n / simulate.sigma**2
            emp, se = agg.worst_case_mse * scale, pt.mse_stderr * scale
        rows.append(BetaRow(b, c.c_non, c.c_adapt, c.ratio, emp, se))
    return rows
