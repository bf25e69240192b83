"""Independent oracles for the closed-form metrics.

Two families:

  * adaptive quadrature of the defining integrals, computed on a
    peak-normalized log scale so that relative accuracy survives even
    when the metric itself is hundreds of orders below double range;
  * seeded Monte-Carlo estimators over the channel sampler, with
    standard errors and exact small-count fallbacks.

Neither path touches the Meijer G evaluator or the hypergeometric
closed forms, so agreement between the three routes is a genuine
cross-check.  Grid points evaluate independently; every one owns a
private RNG substream derived from (master seed, point index), making
results identical no matter how the points are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import erfc, log_ndtr

from .errors import DomainError, NumericError
from .fading import (
    MODEL_DRAW,
    PHYSICAL_DRAW,
    FadingParams,
    _sum_log_pdf,
    sample_sum,
)
from .metrics import (
    QUADRATURE,
    LinkConfig,
    MetricResult,
    avg_ber,
    avg_capacity,
    outage,
)

_SQRT2 = math.sqrt(2.0)
QUAD_LIMIT = 400  # subdivision cap per quad call; ~30 evals each

CAPACITY = "capacity"
BER = "ber"
OUTAGE = "outage"

# Two-sided normal tail mass at 3.5 sigma; the exact small-count
# fallbacks below are calibrated to the same false-alarm rate.
ALPHA_3P5 = 4.6525e-4


@dataclass(frozen=True)
class McConfig:
    """Monte-Carlo run parameters."""

    n_samples: int
    seed: int
    mode: str = MODEL_DRAW

    def __post_init__(self):
        if self.n_samples < 10_000:
            raise DomainError(
                f"n_samples must be at least 10^4 for usable CIs, got {self.n_samples}"
            )
        if self.mode not in (MODEL_DRAW, PHYSICAL_DRAW):
            raise DomainError(f"unknown MC mode {self.mode!r}")


@dataclass(frozen=True)
class CiEstimate:
    """Monte-Carlo mean with its standard error."""

    mean: float
    std_error: float
    n: int


def _quad_unit(f, description: str) -> tuple[float, float]:
    """Adaptive quadrature of f over (0, 1) with loud failure."""
    val, err = quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-11, limit=QUAD_LIMIT)
    if not np.isfinite(val):
        raise NumericError(f"quadrature failed for {description}")
    return val, err


def quad_capacity(cfg: LinkConfig) -> MetricResult:
    """E[log2(1 + eta g)] by adaptive quadrature, g = t/(1-t) mapped."""
    model = cfg.model()
    eta = cfg.eta()

    def integrand(t: float) -> float:
        if t <= 0.0 or t >= 1.0:
            return 0.0
        g = t / (1.0 - t)
        lf = _sum_log_pdf(model, np.asarray(g))
        return math.log1p(eta * g) * math.exp(float(lf)) / (1.0 - t) ** 2

    val, err = _quad_unit(integrand, "capacity integral")
    return MetricResult(
        value=val / math.log(2.0),
        method=QUADRATURE,
        error_estimate=err / math.log(2.0),
        diagnostics={"log_value": math.log(max(val, 1e-320)) - math.log(math.log(2.0))},
    )


def _log_q_of_sqrt(x: float) -> float:
    """log Q(sqrt(2x)) for x >= 0, safe far into the tail."""
    return float(log_ndtr(-math.sqrt(2.0 * x)))


def quad_ber(cfg: LinkConfig) -> MetricResult:
    """E[Q(sqrt(2 eta lambda g))] by peak-normalized adaptive quadrature.

    Substituting x = eta lambda g and factoring (xi/(eta lambda))^Nm / B
    out of the density leaves the integral of
    Q(sqrt(2x)) x^(Nm-1) (1 + eps x)^(-A).  It is evaluated on the log
    axis u = ln x, whose Jacobian makes the integrand peak interior for
    every parameter combination; the peak is located numerically, the
    integrand normalized by it, and the support cut where the log drops
    100 below the top.  Exact on the log scale even when the BER
    underflows doubles.
    """
    model = cfg.model()
    eta_lam = cfg.eta() * cfg.lambda_mod
    nm = model.nm
    a_tot = model.n_cells * (cfg.fading.m + cfg.fading.m_s)
    log_eps = math.log(model.xi) - math.log(eta_lam)
    ln_b = (
        math.lgamma(nm) + math.lgamma(model.nms) - math.lgamma(nm + model.nms)
    )

    def log_h(u: float) -> float:
        # log of the u-axis integrand, overflow-safe via logaddexp
        return (
            _log_q_of_sqrt(math.exp(u))
            + nm * u
            - a_tot * float(np.logaddexp(0.0, log_eps + u))
        )

    peak = minimize_scalar(
        lambda u: -log_h(u), bounds=(-400.0, 400.0), method="bounded",
        options={"xatol": 1e-10},
    )
    u_star = float(peak.x)
    h_star = -float(peak.fun)

    def edge(direction: float) -> float:
        step = 1.0
        u = u_star
        while log_h(u + direction * step) > h_star - 100.0:
            step *= 2.0
            if step > 1e6:
                raise NumericError("BER integrand support did not close")
        return u + direction * step

    u_lo, u_hi = edge(-1.0), edge(+1.0)
    val, err = quad(
        lambda u: math.exp(log_h(u) - h_star),
        u_lo,
        u_hi,
        epsabs=1e-13,
        epsrel=1e-11,
        limit=QUAD_LIMIT,
    )
    if not (np.isfinite(val) and val > 0.0):
        raise NumericError("quadrature failed for BER integral")
    log_value = nm * log_eps - ln_b + h_star + math.log(val)
    value = math.exp(log_value) if log_value > -700.0 else 0.0
    return MetricResult(
        value=value,
        method=QUADRATURE,
        error_estimate=(err / val) * value,
        diagnostics={"log_value": log_value},
    )


def quad_outage(cfg: LinkConfig, gamma_th: float) -> MetricResult:
    """P{eta g < gamma_th} by quadrature of the density over (0, v).

    Substituting g = v e^u and factoring (xi v)^Nm / B leaves the
    integral of exp(h(u)) over u <= 0 with
    h(u) = Nm u - A log(1 + xi v e^u), a concave function whose maximum
    is known in closed form; normalizing by the peak keeps the
    quadrature relatively accurate at any outage depth.
    """
    if gamma_th <= 0.0:
        raise DomainError(f"gamma_th must be positive, got {gamma_th}")
    model = cfg.model()
    v = gamma_th / cfg.eta()
    nm = model.nm
    a_tot = model.n_cells * (cfg.fading.m + cfg.fading.m_s)
    log_xiv = math.log(model.xi) + math.log(v)
    ln_b = (
        math.lgamma(nm) + math.lgamma(model.nms) - math.lgamma(nm + model.nms)
    )

    def h(u: float) -> float:
        return nm * u - a_tot * float(np.logaddexp(0.0, log_xiv + u))

    # stationary point of h: xi v e^u = Nm / (A - Nm), clamped to u <= 0
    u_star = min(0.0, math.log(nm / (a_tot - nm)) - log_xiv)
    h_star = h(u_star)

    u_lo = u_star - 1.0
    step = 1.0
    while h(u_lo) > h_star - 100.0:
        step *= 2.0
        u_lo = u_star - step
        if step > 1e6:
            raise NumericError("outage integrand support did not close")
    val, err = quad(
        lambda u: math.exp(h(u) - h_star),
        u_lo,
        0.0,
        epsabs=1e-13,
        epsrel=1e-11,
        limit=QUAD_LIMIT,
    )
    if not (np.isfinite(val) and val > 0.0):
        raise NumericError("quadrature failed for outage integral")
    log_value = nm * log_xiv - ln_b + h_star + math.log(val)
    value = math.exp(log_value) if log_value > -700.0 else 0.0
    return MetricResult(
        value=value,
        method=QUADRATURE,
        error_estimate=(err / val) * value,
        diagnostics={"log_value": log_value},
    )


_CHUNK = 1 << 18


def _metric_samples(cfg: LinkConfig, which: str, gamma_th: float, g: np.ndarray):
    eta = cfg.eta()
    if which == CAPACITY:
        return np.log2(1.0 + eta * g)
    if which == BER:
        return 0.5 * erfc(np.sqrt(2.0 * eta * cfg.lambda_mod * g) / _SQRT2)
    if which == OUTAGE:
        return (eta * g < gamma_th).astype(float)
    raise DomainError(f"unknown metric {which!r}")


def mc_metric(
    cfg: LinkConfig,
    which: str,
    mc: McConfig,
    gamma_th: float = float("nan"),
) -> CiEstimate:
    """Seeded Monte-Carlo estimate of one metric.

    Capacity averages log2(1 + eta g); BER averages the conditional
    error probability Q(sqrt(2 eta lambda g)) directly (no bit flips),
    outage averages the threshold indicator.  Aggregation merges
    (count, mean, M2) triples over fixed-size chunks, so the result is
    bit-identical for a given seed regardless of scheduling.
    """
    if which == OUTAGE and not (np.isfinite(gamma_th) and gamma_th > 0.0):
        raise DomainError("outage estimation needs a positive linear gamma_th")
    model = cfg.model()
    rng = np.random.default_rng(np.random.SeedSequence(mc.seed))
    n_total = 0
    mean = 0.0
    m2 = 0.0
    remaining = mc.n_samples
    while remaining > 0:
        k = min(_CHUNK, remaining)
        g = sample_sum(model, mc.mode, rng, size=k)
        vals = _metric_samples(cfg, which, gamma_th, g)
        c_mean = float(vals.mean())
        c_m2 = float(((vals - c_mean) ** 2).sum())
        # Chan et al. pairwise merge of (n, mean, M2)
        delta = c_mean - mean
        tot = n_total + k
        m2 = m2 + c_m2 + delta * delta * n_total * k / tot
        mean = mean + delta * k / tot
        n_total = tot
        remaining -= k
    var = m2 / (n_total - 1) if n_total > 1 else 0.0
    return CiEstimate(mean=mean, std_error=math.sqrt(max(var, 0.0) / n_total), n=n_total)


def ks_statistic(samples, cdf_fn) -> float:
    """Sup distance between the empirical CDF of samples and cdf_fn."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 100:
        raise DomainError(f"ks_statistic needs at least 100 samples, got {n}")
    f = np.asarray(cdf_fn(x), dtype=float)
    hi = np.arange(1, n + 1) / n - f
    lo = f - np.arange(0, n) / n
    return float(max(hi.max(), lo.max()))


# ---------------------------------------------------------------------------
# Oracle-agreement grid
# ---------------------------------------------------------------------------

REL_TOL_QUAD = 1e-6
MC_SIGMA_BAND = 3.5

FULL_GRID_N = (1, 8, 16, 32)
FULL_GRID_M = (1.0, 4.0)
FULL_GRID_MS = (2.0, 5.0)
FULL_GRID_ETA_DB = (0.0, 10.0, 20.0, 30.0)
GRID_GAMMA_TH_DB = (3.0, 6.0)
GRID_LAMBDA = (1.0, 0.5)

SMOKE_GRID_N = (1, 8)
SMOKE_GRID_M = (1.0,)
SMOKE_GRID_MS = (5.0,)
SMOKE_GRID_ETA_DB = (0.0, 10.0, 20.0, 30.0)


@dataclass
class GridCheck:
    """One metric at one grid point: three routes and their verdict."""

    index: int
    n_cells: int
    m: float
    m_s: float
    eta_db: float
    metric: str
    lambda_mod: float
    gamma_th_db: float
    closed_log: float
    quad_log: float
    mc_mean: float
    mc_std_error: float
    rel_gap_quad: float
    mc_ok: bool
    quad_ok: bool
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.mc_ok and self.quad_ok


def _rel_gap_from_logs(log_a: float, log_b: float) -> float:
    """|a/b - 1| computed from natural logs, robust at any magnitude."""
    if log_a == -math.inf and log_b == -math.inf:
        return 0.0
    if log_a == -math.inf or log_b == -math.inf:
        return math.inf
    d = log_a - log_b
    if abs(d) > 1.0:
        return math.inf
    return abs(math.expm1(d))


def _mc_consistent(
    closed: float, est: CiEstimate, which: str
) -> tuple[bool, str]:
    """Closed form versus MC at the 3.5 sigma false-alarm rate.

    When the estimator has resolved the metric (small relative standard
    error), this is the plain sigma band.  Outside the CLT regime exact
    bounds at the same alpha take over:

      * outage with fewer than 10 observed hits: Garwood's Poisson
        interval on the hit count;
      * samples all zero: the one-sided exact bound requiring
        P(all zero | closed) >= alpha, using Q <= 1/2 for BER;
      * heavy-tailed BER (se comparable to the mean, so the sample mean
        and its se are both unreliable): only the Markov bound
        P(sample mean >= x) <= closed/x remains valid, i.e. the closed
        form must not sit far below the observed mean.  Deep-tail BER
        points are genuinely unresolvable by plain sampling at these
        sizes; their 1e-6 verification is carried by the quadrature
        route.
    """
    if which == OUTAGE:
        k = int(round(est.mean * est.n))
        if k < 10:
            # Garwood bounds at total mass ALPHA_3P5
            from scipy.stats import chi2

            lo = 0.5 * chi2.ppf(ALPHA_3P5 / 2.0, 2 * k) / est.n if k > 0 else 0.0
            hi = 0.5 * chi2.ppf(1.0 - ALPHA_3P5 / 2.0, 2 * k + 2) / est.n
            ok = lo <= closed <= hi
            return ok, f"poisson k={k}"
        band = MC_SIGMA_BAND * est.std_error
        return abs(closed - est.mean) <= band, "normal"
    if est.std_error == 0.0 and est.mean == 0.0:
        # all samples underflowed; metric must sit below the detection floor
        factor = 2.0 if which == BER else 1.0
        ceiling = -math.log(ALPHA_3P5) / (factor * est.n)
        return closed <= ceiling, "all_zero"
    if est.std_error > 0.05 * est.mean or est.std_error == 0.0:
        return closed >= ALPHA_3P5 * est.mean, "unresolved"
    band = MC_SIGMA_BAND * est.std_error
    return abs(closed - est.mean) <= band, "normal"


def _grid_points(preset: str):
    if preset == "full":
        ns, ms, mss, etas = FULL_GRID_N, FULL_GRID_M, FULL_GRID_MS, FULL_GRID_ETA_DB
    elif preset == "smoke":
        ns, ms, mss, etas = (
            SMOKE_GRID_N,
            SMOKE_GRID_M,
            SMOKE_GRID_MS,
            SMOKE_GRID_ETA_DB,
        )
    else:
        raise DomainError(f"unknown preset {preset!r}; use 'smoke' or 'full'")
    for n in ns:
        for m in ms:
            for m_s in mss:
                for eta_db in etas:
                    yield n, m, m_s, eta_db


def run_oracle_grid(
    preset: str = "smoke",
    master_seed: int = 42,
    n_samples: int | None = None,
    mode: str = MODEL_DRAW,
    max_workers: int = 1,
) -> list[GridCheck]:
    """Run the triple-agreement check over the preset grid.

    Per point and metric the closed form must match quadrature within
    1e-6 relative and sit inside the Monte-Carlo acceptance band.  The
    BER is checked for both modulation constants and the outage at both
    threshold presets.  Rows come back in grid order independent of the
    worker count.
    """
    if n_samples is None:
        n_samples = 100_000 if preset == "smoke" else 1_000_000
    points = list(_grid_points(preset))

    def one_point(item) -> list[GridCheck]:
        idx, (n, m, m_s, eta_db) = item
        eta = 10.0 ** (eta_db / 10.0)
        fading = FadingParams(m=m, m_s=m_s)
        seed = int(np.random.SeedSequence((master_seed, idx)).generate_state(1)[0])
        checks: list[GridCheck] = []

        def record(metric, lam, gth_db, closed, quadr, est):
            c_log = closed.diagnostics["log_value"]
            q_log = quadr.diagnostics["log_value"]
            gap = _rel_gap_from_logs(c_log, q_log)
            c_val = math.exp(c_log) if c_log > -700 else 0.0
            ok_mc, note = _mc_consistent(c_val, est, metric)
            checks.append(
                GridCheck(
                    index=idx,
                    n_cells=n,
                    m=m,
                    m_s=m_s,
                    eta_db=eta_db,
                    metric=metric,
                    lambda_mod=lam,
                    gamma_th_db=gth_db,
                    closed_log=c_log,
                    quad_log=q_log,
                    mc_mean=est.mean,
                    mc_std_error=est.std_error,
                    rel_gap_quad=gap,
                    mc_ok=ok_mc,
                    quad_ok=gap <= REL_TOL_QUAD,
                    note=note,
                )
            )

        cfg = LinkConfig.from_eta(eta, fading, n)
        mc = McConfig(n_samples=n_samples, seed=seed, mode=mode)
        record(
            CAPACITY, 1.0, float("nan"),
            avg_capacity(cfg), quad_capacity(cfg), mc_metric(cfg, CAPACITY, mc),
        )
        for lam in GRID_LAMBDA:
            cfg_l = LinkConfig.from_eta(eta, fading, n, lambda_mod=lam)
            record(
                BER, lam, float("nan"),
                avg_ber(cfg_l), quad_ber(cfg_l), mc_metric(cfg_l, BER, mc),
            )
        for gth_db in GRID_GAMMA_TH_DB:
            gth = 10.0 ** (gth_db / 10.0)
            record(
                OUTAGE, 1.0, gth_db,
                outage(cfg, gth),
                quad_outage(cfg, gth),
                mc_metric(cfg, OUTAGE, mc, gamma_th=gth),
            )
        return checks

    items = list(enumerate(points))
    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            grouped = list(pool.map(one_point, items))
    else:
        grouped = [one_point(it) for it in items]
    return [c for group in grouped for c in group]


def physical_model_capacity_gap(
    n_cells: int,
    fading: FadingParams,
    eta: float,
    seed: int,
    n_samples: int = 200_000,
) -> dict:
    """Relative capacity gap between the two sampling modes (diagnostic)."""
    cfg = LinkConfig.from_eta(eta, fading, n_cells)
    est_model = mc_metric(cfg, CAPACITY, McConfig(n_samples, seed, MODEL_DRAW))
    est_phys = mc_metric(cfg, CAPACITY, McConfig(n_samples, seed + 1, PHYSICAL_DRAW))
    gap = abs(est_model.mean - est_phys.mean) / est_phys.mean
    return {
        "n_cells": n_cells,
        "model_mean": est_model.mean,
        "physical_mean": est_phys.mean,
        "rel_gap": gap,
        "combined_se": math.hypot(est_model.std_error, est_phys.std_error),
    }
