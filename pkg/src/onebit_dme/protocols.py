"""One-bit encoders, server-side decoders and their asymptotic MSE formulas.

Three protocols are implemented:

* two-threshold non-adaptive estimation of ``(mu, sigma)``;
* two-round adaptive estimation, where round two thresholds at the round-one
  location estimate;
* the non-parametric multi-threshold (Riemann-sum) mean estimator.

Decoders only ever see bit arrays (and, for round two, the broadcast
estimate); raw samples stay with the encoders.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .densities import BaseDensity, ScaleLocationModel
from .errors import ConfigError, DegenerateQuantiles, DivergenceWarning, DomainError

__all__ = [
    "encode_threshold",
    "NonAdaptiveConfig",
    "TheoremRule",
    "FixedFractions",
    "AdaptiveConfig",
    "MultiThresholdConfig",
    "EstimateResult",
    "clip_fraction",
    "nonadaptive_decode",
    "nonadaptive_estimate",
    "mse_nonadaptive_asymptotic",
    "split_solver",
    "adaptive_decode",
    "adaptive_estimate",
    "multi_threshold_encode",
    "multi_threshold_decode",
    "multi_threshold_estimate",
    "multi_threshold_mean",
    "MultiThresholdTheory",
    "multi_threshold_theory",
    "mse_adaptive_asymptotic",
]


def encode_threshold(x, theta):
    """One bit per sample: 1 if ``x < theta`` else 0."""
    out = (np.asarray(x) < theta).astype(np.uint8)
    return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NonAdaptiveConfig:
    """Two thresholds ``theta1 < theta2`` and the share ``k1`` of users on ``theta1``."""

    theta1: float
    theta2: float
    k1: float = 0.5

    def __post_init__(self):
        if not self.theta1 < self.theta2:
            raise ConfigError("need theta1 < theta2")
        if not 0.0 < self.k1 < 1.0:
            raise ConfigError("k1 must lie in (0, 1)")

    @property
    def k2(self) -> float:
        return 1.0 - self.k1

    def group_sizes(self, n: int) -> tuple[int, int]:
        n1 = int(round(self.k1 * n))
        n1 = min(max(n1, 1), n - 1)
        return n1, n - n1


@dataclass(frozen=True)
class TheoremRule:
    """Round-one groups of size ``n3 / ln n3`` each."""


@dataclass(frozen=True)
class FixedFractions:
    """Round-one groups of size ``round(k1 n)`` and ``round(k2 n)``."""

    k1: float
    k2: float

    def __post_init__(self):
        if not (self.k1 > 0 and self.k2 > 0 and self.k1 + self.k2 < 1):
            raise ConfigError("FixedFractions needs k1, k2 > 0 and k1 + k2 < 1")


@dataclass(frozen=True)
class AdaptiveConfig:
    theta1: float
    theta2: float
    split: TheoremRule | FixedFractions = field(default_factory=TheoremRule)

    def __post_init__(self):
        if not self.theta1 < self.theta2:
            raise ConfigError("need theta1 < theta2")


@dataclass(frozen=True)
class MultiThresholdConfig:
    """Uniform threshold grid ``theta_j = j * delta`` for ``j = -m..m``."""

    m: int
    delta: float

    def __post_init__(self):
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 1):
            raise ConfigError("m must be a positive integer")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")

    @property
    def thresholds(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1) * self.delta

    @property
    def group_index(self) -> np.ndarray:
        """Group labels ``j`` in user order: ``-m..-1`` then ``1..m``."""
        return np.concatenate([np.arange(-self.m, 0), np.arange(1, self.m + 1)])

    @property
    def midpoints(self) -> np.ndarray:
        """``(theta_j + theta_{j+1})/2`` for ``j < 0``, ``(theta_j + theta_{j-1})/2`` for ``j > 0``."""
        j = self.group_index.astype(np.float64)
        return np.where(j < 0, j + 0.5, j - 0.5) * self.delta

    def group_size(self, n: int) -> int:
        if n % (2 * self.m):
            raise ConfigError(f"user count {n} is not divisible by 2m = {2 * self.m}")
        return n // (2 * self.m)


@dataclass
class EstimateResult:
    mu_hat: float
    sigma_hat: float | None = None
    fractions: tuple[float, ...] = ()
    clipped: tuple[bool, ...] = ()
    mu_coarse: float | None = None

    @property
    def n_clipped(self) -> int:
        return sum(self.clipped)


def clip_fraction(frac: float, n: int) -> tuple[float, bool]:
    """Clip an empirical fraction into ``[1/(2n), 1 - 1/(2n)]``."""
    lo = 0.5 / n
    hi = 1.0 - lo
    if frac < lo:
        return lo, True
    if frac > hi:
        return hi, True
    return float(frac), False


def nonadaptive_decode(
    f1: float, f2: float, theta1: float, theta2: float, d: BaseDensity
) -> tuple[float, float]:
    """Invert two cdf levels into ``(mu_hat, sigma_hat)``."""
    a1 = float(d.quantile(f1))
    a2 = float(d.quantile(f2))
    diff = a1 - a2
    if abs(diff) < 1e-12:
        raise DegenerateQuantiles(f"quantiles coincide (alpha1 = alpha2 = {a1:.6g})")
    sigma_hat = (theta1 - theta2) / diff
    if not sigma_hat > 0:
        raise DegenerateQuantiles(f"non-positive scale estimate {sigma_hat:.6g}")
    mu_hat = (a1 * theta2 - a2 * theta1) / diff
    return mu_hat, sigma_hat


def nonadaptive_estimate(
    bits1, bits2, cfg: NonAdaptiveConfig, d: BaseDensity, *, clip: bool = True
) -> EstimateResult:
    """Decode the two-threshold protocol from its two bit groups.

    With ``clip=False`` an all-zero or all-one group raises
    :class:`DomainError` from the quantile.
    """
    bits1 = np.asarray(bits1)
    bits2 = np.asarray(bits2)
    n1, n2 = bits1.size, bits2.size
    if n1 < 1 or n2 < 1:
        raise ConfigError("each threshold group needs at least one user")
    f1, f2 = bits1.mean(), bits2.mean()
    c1 = c2 = False
    if clip:
        f1, c1 = clip_fraction(f1, n1)
        f2, c2 = clip_fraction(f2, n2)
    mu_hat, sigma_hat = nonadaptive_decode(f1, f2, cfg.theta1, cfg.theta2, d)
    return EstimateResult(mu_hat, sigma_hat, (float(f1), float(f2)), (c1, c2))


def mse_nonadaptive_asymptotic(
    cfg: NonAdaptiveConfig, d: BaseDensity, mu: float, sigma: float
) -> tuple[float, float]:
    """Limits of ``n MSE(mu_hat)`` and ``n MSE(sigma_hat)`` for the two-threshold protocol.

    Group ``i`` holds ``k_i n`` users, so its empirical fraction has variance
    ``F_i (1 - F_i) / (k_i n)``; the delta method then gives the weights
    ``F_i (1 - F_i) / (k_i f_i^2)``.
    """
    t1, t2 = cfg.theta1, cfg.theta2
    z1, z2 = (t1 - mu) / sigma, (t2 - mu) / sigma
    f1, f2 = float(d.pdf(z1)), float(d.pdf(z2))
    if min(f1, f2) < 1e-12:
        warnings.warn(
            f"density ~0 at a threshold (mu={mu}); asymptotic MSE diverges",
            DivergenceWarning,
            stacklevel=2,
        )
    F1, F2 = float(d.cdf(z1)), float(d.cdf(z2))
    with np.errstate(divide="ignore"):
        w1 = F1 * (1.0 - F1) / (cfg.k1 * f1 * f1) if f1 > 0 else math.inf
        w2 = F2 * (1.0 - F2) / (cfg.k2 * f2 * f2) if f2 > 0 else math.inf
    gap2 = (t1 - t2) ** 2
    mse_mu = sigma**2 / gap2 * ((t2 - mu) ** 2 * w1 + (t1 - mu) ** 2 * w2)
    mse_sigma = sigma**4 / gap2 * (w1 + w2)
    return mse_mu, mse_sigma


@lru_cache(maxsize=1024)
def split_solver(n: int, rule: TheoremRule | FixedFractions) -> tuple[int, int, int]:
    """Partition ``n`` users into ``(n1, n2, n3)`` for the adaptive protocol."""
    n = int(n)
    if isinstance(rule, FixedFractions):
        n1, n2 = int(round(rule.k1 * n)), int(round(rule.k2 * n))
    elif isinstance(rule, TheoremRule):
        if n < 30:
            raise DomainError("the theorem split needs n >= 30")
        # n3 + 2 n3 / ln n3 is increasing for n3 > e^2
        n3_real = optimize.brentq(lambda m: m + 2.0 * m / math.log(m) - n, math.e**2, n)
        n3 = int(round(n3_real))
        n1 = n2 = (n - n3) // 2
    else:
        raise ConfigError(f"unknown split rule {rule!r}")
    n3 = n - n1 - n2
    if min(n1, n2, n3) < 1:
        raise DomainError(f"n = {n} too small for split {rule!r}")
    return n1, n2, n3


def adaptive_decode(
    bits1, bits2, bits3, cfg: AdaptiveConfig, d: BaseDensity, coarse: EstimateResult | None = None
) -> EstimateResult:
    """Server side of round two: refine the broadcast estimate with ``bits3``."""
    if coarse is None:
        coarse = nonadaptive_estimate(bits1, bits2, NonAdaptiveConfig(cfg.theta1, cfg.theta2), d)
    bits3 = np.asarray(bits3)
    n3 = bits3.size
    f3, c3 = clip_fraction(bits3.mean(), n3)
    mu_f = coarse.mu_hat - float(d.quantile(f3)) * coarse.sigma_hat
    return EstimateResult(
        mu_f,
        coarse.sigma_hat,
        coarse.fractions + (f3,),
        coarse.clipped + (c3,),
        mu_coarse=coarse.mu_hat,
    )


def adaptive_estimate(samples, cfg: AdaptiveConfig, d: BaseDensity) -> EstimateResult:
    """Run both rounds on ``samples`` (one per user, in user order)."""
    x = np.asarray(samples, dtype=np.float64)
    n1, n2, _ = split_solver(x.size, cfg.split)
    bits1 = encode_threshold(x[:n1], cfg.theta1)
    bits2 = encode_threshold(x[n1 : n1 + n2], cfg.theta2)
    # only the round-one bits reach the server; it broadcasts mu_c back
    coarse = nonadaptive_estimate(bits1, bits2, NonAdaptiveConfig(cfg.theta1, cfg.theta2), d)
    bits3 = encode_threshold(x[n1 + n2 :], coarse.mu_hat)
    return adaptive_decode(bits1, bits2, bits3, cfg, d, coarse)


# -- multi-threshold ----------------------------------------------------------


def multi_threshold_encode(samples, cfg: MultiThresholdConfig) -> np.ndarray:
    """Bits shaped ``(2m, K)``; row ``r`` belongs to group ``cfg.group_index[r]``.

    Users are assigned to groups in blocks of ``K``: the first ``K`` users to
    ``j = -m``, the next ``K`` to ``j = -m+1``, and so on.
    """
    x = np.asarray(samples, dtype=np.float64)
    k = cfg.group_size(x.size)
    x = x.reshape(2 * cfg.m, k)
    mid = cfg.midpoints[:, None]
    neg = (cfg.group_index < 0)[:, None]
    return np.where(neg, x < mid, x > mid).astype(np.uint8)


def multi_threshold_decode(bits, cfg: MultiThresholdConfig) -> float:
    """``delta * (sum_{j>0} I_j - sum_{j<0} I_j)`` from per-group bit rows."""
    means = np.asarray(bits).reshape(2 * cfg.m, -1).mean(axis=1)
    sign = np.where(cfg.group_index < 0, -1.0, 1.0)
    return float(cfg.delta * np.dot(sign, means))


def multi_threshold_estimate(samples, cfg: MultiThresholdConfig) -> float:
    return multi_threshold_decode(multi_threshold_encode(samples, cfg), cfg)


def multi_threshold_mean(cfg: MultiThresholdConfig, model: ScaleLocationModel) -> float:
    """Exact expectation of the multi-threshold estimator under ``model``."""
    mid = cfg.midpoints
    F = np.asarray(model.cdf(mid))
    neg = cfg.group_index < 0
    return float(cfg.delta * ((1.0 - F[~neg]).sum() - F[neg].sum()))


@dataclass(frozen=True)
class MultiThresholdTheory:
    bias_bound: float
    variance_exact: float
    variance_integral: float


def multi_threshold_theory(
    cfg: MultiThresholdConfig, d: BaseDensity, mu: float, sigma: float, k: int
) -> MultiThresholdTheory:
    """Bias bound ``L m delta^2`` and two forms of the variance for group size ``k``.

    ``L`` is the supremum of the model density, ``f(0)/sigma``.
    """
    model = ScaleLocationModel(d, mu, sigma)
    L = model.max_pdf
    F = np.asarray(model.cdf(cfg.midpoints))
    var_exact = cfg.delta**2 / k * float(np.sum(F * (1.0 - F)))
    # int F(1-F) dx over the model = sigma * int F_X(1-F_X) dz; integrand even in z
    integral = 2.0 * integrate.quad(
        lambda z: float(d.cdf(z)) * float(d.lower_tail(z)), 0.0, np.inf, epsabs=1e-13, limit=200
    )[0]
    var_integral = cfg.delta / k * sigma * integral
    return MultiThresholdTheory(L * cfg.m * cfg.delta**2, var_exact, var_integral)


def mse_adaptive_asymptotic(d: BaseDensity, sigma: float = 1.0) -> float:
    """``sigma^2 / (4 f(0)^2)``."""
    return sigma**2 / (4.0 * d.f0**2)
