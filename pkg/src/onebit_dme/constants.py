"""Asymptotic constants of the one-bit mean-estimation problem.

For a base density ``f = exp(-phi)`` this module evaluates

* ``h(x) = 2 phi'(x) f(x)`` and its maximum ``h_star`` at ``x_star``;
* ``T(f) = int_0^{h_star} phi'(h^{-1}(t)) h^{-1}(t) dt``;
* ``alpha_star = max_t t (1 - sqrt(1 - exp(-2t)))``;
* ``C_non = alpha_star / T`` and ``C_adapt = 1 / (4 f(0)^2)``;
* the shape quantity ``eta(x) = f(x)^2 / (F(x) F(-x))``;
* the GGD shape where ``C_non = C_adapt``;
* squared Hellinger distances between threshold-encoder Bernoullis.

``h`` is not monotone, so ``h^{-1}`` needs a branch. ``T_of_f`` defaults to
the inner branch ``[0, x_star]``: that is the branch for which the published
constants (T = 0.0246 for Sin2, C_non = 2.5806 for GGD(1.5), ...) come out.
The outer branch ``[x_star, inf)`` is available through ``branch="outer"``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy import integrate, optimize

from .densities import BaseDensity, make_density
from .errors import BoundViolation, BracketError, ConvergenceError, DomainError

__all__ = [
    "ALPHA_STAR_ROUNDED",
    "h",
    "h_prime",
    "find_h_star",
    "h_inverse",
    "h_inverse_inner",
    "h_inverse_outer",
    "t_integral_forms",
    "T_of_f",
    "alpha_objective",
    "alpha_star",
    "TheoryConstants",
    "constants_for",
    "eta",
    "EtaCheck",
    "check_eta_condition",
    "ggd_crossing",
    "hellinger_sq_bernoulli",
    "HellingerCheckConfig",
    "HellingerReport",
    "check_hellinger_bound",
]

#: rounded value used to print the published C_non columns
ALPHA_STAR_ROUNDED = 0.1034

Branch = Literal["inner", "outer"]


def h(d: BaseDensity, x):
    """``2 phi'(x) f(x)``."""
    out = 2.0 * np.asarray(d.phi_prime(x)) * np.asarray(d.pdf(x))
    return float(out) if out.ndim == 0 else out


def h_prime(d: BaseDensity, x):
    """Analytic derivative ``2 f (phi'' - phi'^2)``."""
    p1 = np.asarray(d.phi_prime(x))
    out = 2.0 * np.asarray(d.pdf(x)) * (np.asarray(d.phi_second(x)) - p1 * p1)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=256)
def find_h_star(d: BaseDensity, scan_max: float = 20.0, scan_step: float = 0.01):
    """Locate ``x_star = argmax_{x >= 0} h(x)`` and ``h_star = h(x_star)``.

    A coarse scan brackets the maximum, golden-section search narrows it and
    a root solve on the analytic ``h'`` polishes it.
    """
    xs = np.arange(0.0, scan_max + 0.5 * scan_step, scan_step)
    hs = h(d, xs)
    i = int(np.argmax(hs))
    if i == 0 or i == xs.size - 1:
        raise BracketError(f"no interior maximum of h on [0, {scan_max}] for {d.label}")
    lo, mid, hi = xs[i - 1], xs[i], xs[i + 1]
    res = optimize.minimize_scalar(
        lambda x: -float(h(d, x)), bracket=(lo, mid, hi), method="golden", tol=1e-10
    )
    x_star = float(res.x)
    a, b = max(lo, 1e-300), hi
    ga, gb = float(h_prime(d, a)), float(h_prime(d, b))
    if ga > 0 > gb:
        x_star = optimize.brentq(lambda x: float(h_prime(d, x)), a, b, xtol=1e-15, rtol=1e-15)
    return x_star, float(h(d, x_star))


def h_inverse(d: BaseDensity, t: float, branch: Branch = "inner") -> float:
    """Solve ``h(x) = t`` on the chosen monotone branch of ``h``.

    ``inner`` returns the root in ``[0, x_star]``, ``outer`` the root in
    ``[x_star, inf)``. Raises :class:`DomainError` unless ``0 < t <= h_star``.
    """
    x_star, h_star = find_h_star(d)
    t = float(t)
    if not (t > 0) or t > h_star * (1.0 + 1e-12):
        raise DomainError(f"h^-1 needs 0 < t <= h_star = {h_star:.6g}, got {t!r}")
    if t >= h_star:
        return x_star
    g = lambda x: float(h(d, x)) - t  # noqa: E731
    if branch == "inner":
        return optimize.brentq(g, 0.0, x_star, xtol=1e-14, rtol=1e-15)
    if branch == "outer":
        hi = 2.0 * x_star + 1.0
        while g(hi) > 0:
            hi *= 2.0
            if hi > 1e6:
                raise BracketError("outer branch of h did not drop below t")
        return optimize.brentq(g, x_star, hi, xtol=1e-14, rtol=1e-15)
    raise DomainError(f"unknown branch {branch!r}")


def h_inverse_inner(d: BaseDensity, t: float) -> float:
    return h_inverse(d, t, "inner")


def h_inverse_outer(d: BaseDensity, t: float) -> float:
    return h_inverse(d, t, "outer")


_QUAD = dict(epsabs=1e-12, epsrel=1e-11, limit=400)


@lru_cache(maxsize=256)
def t_integral_forms(d: BaseDensity, branch: Branch = "inner") -> tuple[float, float]:
    """Evaluate ``T`` twice: directly in ``t`` and after substituting ``t = h(x)``.

    Returns ``(direct, substituted)``.
    """
    x_star, h_star = find_h_star(d)

    def in_t(t):
        x = h_inverse(d, t, branch)
        return float(d.phi_prime(x)) * x

    def in_x(x):
        return float(d.phi_prime(x)) * x * abs(float(h_prime(d, x)))

    direct = integrate.quad(in_t, 0.0, h_star, **_QUAD)[0]
    if branch == "inner":
        subst = integrate.quad(in_x, 0.0, x_star, **_QUAD)[0]
    else:
        subst = integrate.quad(in_x, x_star, np.inf, **_QUAD)[0]
    return direct, subst


def T_of_f(d: BaseDensity, branch: Branch = "inner", rtol: float = 1e-4) -> float:
    """Distribution constant ``T(f)``; both quadrature routes must agree to ``rtol``."""
    direct, subst = t_integral_forms(d, branch)
    if not abs(direct - subst) <= rtol * abs(subst):
        raise ConvergenceError(
            f"T({d.label}) quadrature routes disagree: {direct!r} vs {subst!r}"
        )
    return subst


def alpha_objective(t):
    """``t (1 - sqrt(1 - exp(-2t)))``."""
    t = np.asarray(t, dtype=np.float64)
    out = t * (1.0 - np.sqrt(-np.expm1(-2.0 * t)))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=1)
def alpha_star() -> tuple[float, float]:
    """Return ``(t_star, alpha_star)``, the maximizer and maximum of ``alpha_objective``."""
    ts = np.arange(0.0, 5.0 + 5e-5, 1e-4)
    i = int(np.argmax(alpha_objective(ts)))
    res = optimize.minimize_scalar(
        lambda t: -alpha_objective(t),
        bracket=(ts[i - 1], ts[i], ts[i + 1]),
        method="golden",
        tol=1e-10,
    )
    return float(res.x), float(alpha_objective(res.x))


@dataclass(frozen=True)
class TheoryConstants:
    """All asymptotic constants for one base density."""

    dist: str
    beta: float | None
    f0: float
    x_star: float
    h_star: float
    T: float
    alpha_star: float
    t_star: float
    c_non: float
    c_adapt: float
    c_non_rounded: float
    z_std: float | None = None
    branch: str = "inner"

    @property
    def ratio(self) -> float:
        return self.c_non / self.c_adapt

    @property
    def ratio_rounded(self) -> float:
        return self.c_non_rounded / self.c_adapt

    def as_dict(self) -> dict:
        out = asdict(self)
        out["ratio"] = self.ratio
        return out


@lru_cache(maxsize=256)
def constants_for(d: BaseDensity, branch: Branch = "inner") -> TheoryConstants:
    """Assemble :class:`TheoryConstants` for ``d``.

    ``c_non`` uses the computed ``alpha_star``; ``c_non_rounded`` uses 0.1034.
    """
    x_star, h_star = find_h_star(d)
    T = T_of_f(d, branch)
    t_star, a_star = alpha_star()
    f0 = d.f0
    return TheoryConstants(
        dist=d.name,
        beta=d.beta,
        f0=f0,
        x_star=x_star,
        h_star=h_star,
        T=T,
        alpha_star=a_star,
        t_star=t_star,
        c_non=a_star / T,
        c_adapt=1.0 / (4.0 * f0 * f0),
        c_non_rounded=ALPHA_STAR_ROUNDED / T,
        z_std=getattr(d, "z_std", None),
        branch=branch,
    )


def eta(d: BaseDensity, x):
    """``f(x)^2 / (F(x) F(-x))``, evaluated in log space for tail accuracy."""
    xa = np.asarray(x, dtype=np.float64)
    lt = np.asarray(d.lower_tail(np.abs(xa)))
    out = np.exp(2.0 * np.asarray(d.logpdf(xa)) - np.log(lt) - np.log1p(-lt))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EtaCheck:
    """Outcome of :func:`check_eta_condition`; truthy when the condition holds."""

    ok: bool
    violation: tuple[float, float] | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_eta_condition(d: BaseDensity, grid=None, tol: float = 1e-10) -> EtaCheck:
    """Check that ``eta`` is non-increasing in ``|x|`` and uniquely maximal at 0.

    ``grid`` may be symmetric; only its non-negative part is used. The first
    violating pair ``(x_i, x_{i+1})`` is reported.
    """
    if grid is None:
        grid = np.linspace(0.0, 8.0, 8001)
    g = np.unique(np.abs(np.asarray(grid, dtype=np.float64)))
    if g[0] != 0.0:
        g = np.concatenate([[0.0], g])
    e = eta(d, g)
    for i in range(g.size - 1):
        if e[i + 1] > e[i] * (1.0 + tol):
            return EtaCheck(False, (float(g[i]), float(g[i + 1])))
    if np.any(e[1:] >= e[0]):
        j = int(np.argmax(e[1:] >= e[0])) + 1
        return EtaCheck(False, (0.0, float(g[j])))
    return EtaCheck(True)


def ggd_crossing(lo: float = 1.1, hi: float = 2.5, tol: float = 1e-3) -> float:
    """GGD shape ``beta`` where ``C_non(beta) = C_adapt(beta)``, by bisection."""

    def gap(beta):
        c = constants_for(make_density("ggd", float(beta)))
        return c.c_non - c.c_adapt

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo * g_hi > 0:
        raise ConvergenceError(f"C_non - C_adapt does not change sign on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = gap(mid)
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def hellinger_sq_bernoulli(p, q):
    """Squared Hellinger distance (1/2 convention) between Bernoulli(p) and Bernoulli(q).

    Equals one minus the Bhattacharyya coefficient; the sum-of-squares form
    avoids cancellation when ``p`` and ``q`` are close.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if np.any((p < 0) | (p > 1) | (q < 0) | (q > 1)):
        raise DomainError("Bernoulli parameters must lie in [0, 1]")
    a = np.sqrt(p) - np.sqrt(q)
    b = np.sqrt(1.0 - p) - np.sqrt(1.0 - q)
    out = 0.5 * (a * a + b * b)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HellingerCheckConfig:
    epsilon: float = 1e-3
    theta_grid: tuple = field(default_factory=lambda: tuple(np.round(np.arange(-600, 601) * 0.01, 10)))
    tolerance_slack: float = 0.05

    def __post_init__(self):
        if not (0 < self.epsilon <= 1e-2):
            raise DomainError("epsilon must lie in (0, 1e-2]")
        g = np.sort(np.asarray(self.theta_grid, dtype=np.float64))
        if not np.allclose(g, -g[::-1], atol=1e-12):
            raise DomainError("theta grid must be symmetric about 0")


@dataclass(frozen=True)
class HellingerReport:
    dist: str
    epsilon: float
    max_ratio: float
    theta_at_max: float
    bound: float
    tolerance_slack: float

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.bound * (1.0 + self.tolerance_slack)


def hellinger_ratios(d: BaseDensity, epsilon: float, thetas) -> np.ndarray:
    """``H^2(p+, p-) / eps^2`` with ``p+- = F(theta -+ eps)`` for each threshold."""
    th = np.asarray(thetas, dtype=np.float64)
    p_plus = np.asarray(d.cdf(th - epsilon))
    p_minus = np.asarray(d.cdf(th + epsilon))
    return hellinger_sq_bernoulli(p_plus, p_minus) / epsilon**2


def check_hellinger_bound(
    d: BaseDensity,
    cfg: HellingerCheckConfig,
    bound: float | None = None,
    *,
    raise_on_violation: bool = True,
) -> HellingerReport:
    """Compare the worst threshold-encoder Hellinger ratio with ``bound``.

    ``bound`` defaults to ``T_of_f(d)``. Raises :class:`BoundViolation` when
    the worst ratio exceeds ``bound * (1 + slack)`` unless told not to.
    """
    if bound is None:
        bound = T_of_f(d)
    th = np.asarray(cfg.theta_grid, dtype=np.float64)
    r = hellinger_ratios(d, cfg.epsilon, th)
    i = int(np.argmax(r))
    rep = HellingerReport(
        dist=d.label,
        epsilon=cfg.epsilon,
        max_ratio=float(r[i]),
        theta_at_max=float(th[i]),
        bound=float(bound),
        tolerance_slack=cfg.tolerance_slack,
    )
    if raise_on_violation and not rep.passed:
        raise BoundViolation(
            f"{d.label}: H^2/eps^2 = {rep.max_ratio:.6g} at theta = {rep.theta_at_max:g} "
            f"exceeds {bound:.6g} * (1 + {cfg.tolerance_slack})",
            theta=rep.theta_at_max,
            epsilon=cfg.epsilon,
            ratio=rep.max_ratio,
        )
    return rep
