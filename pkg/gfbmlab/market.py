"""Stock prices driven by the mixed GFBM, risk-neutral pricing by importance sampling and the arbitrage portfolios."""
import math
from dataclasses import asdict
from typing import Optional, Sequence
import numpy as np
from .errors import DomainError, NumericalError
from .girsanov import emm_log_densities
from .helpers import mean_stderr, divides_all
from .logging_setup import log
from .models import (MarketParams, GfbmParams, WienerHopfGrid, MartingaleReport, ArbitrageReport, TimeGrid,
                     QuadratureSpec)
from .simulate import sample_mixed, sample_bm, sample_gfbm

LOG_WEIGHT_MAX = 700.0
MODELS = ("bachelier", "black_scholes")

def price_path(mkt: MarketParams, y) -> np.ndarray:
    """P(t_k) = p0 exp((mu - sigma^2/2) t_k + sigma Y(t_k)); rows for a batch."""
    return mkt.p0 * np.exp((mkt.mu - 0.5 * mkt.sigma ** 2) * y.grid.points + mkt.sigma * np.asarray(y.values))

def martingale_check(mkt: MarketParams, wh: WienerHopfGrid, n_paths: int, seed: int, include_gfbm: bool = True,
                     strike: Optional[float] = None, spec: QuadratureSpec = None,
                     threads: Optional[int] = None) -> MartingaleReport:
    """E^Q[e^-rT P(T)] under P with the equivalent-martingale-measure weights; also a call at ``strike`` (default p0)."""
    grid = TimeGrid(np.asarray(wh.times, dtype=float), True, wh.h)
    if include_gfbm:
        if wh.params is None: raise DomainError("martingale_check with the GFBM component needs a GFBM Wiener-Hopf grid")
        if not wh.params.hurst > 0.5: raise DomainError(f"martingale_check needs H > 1/2 (H={wh.params.hurst:g})")
        y = sample_mixed(wh.params, grid, n_paths, seed, spec, threads)
        logw = emm_log_densities(wh, y, mkt)
    else:
        y = sample_bm(grid, n_paths, seed)
        logw = emm_log_densities(wh, y, mkt, phi=np.zeros((n_paths, wh.n)))
    top = float(np.max(logw))
    if top > LOG_WEIGHT_MAX:
        raise NumericalError(f"density weight overflow: log weight {top:.1f} > {LOG_WEIGHT_MAX:g}", estimate=top)
    w = np.exp(logw)
    disc = math.exp(-mkt.r * wh.horizon)
    p_T = price_path(mkt, y)[:, -1]
    est, se = mean_stderr(w * disc * p_T)
    k = mkt.p0 if strike is None else float(strike)
    call, call_se = mean_stderr(w * disc * np.maximum(p_T - k, 0.0))
    dev = abs(est - mkt.p0) / se if se > 0 else float("nan")
    params = dict(market=dict(mu=mkt.mu, sigma=mkt.sigma, r=mkt.r, p0=mkt.p0, theta=mkt.theta),
                  model=asdict(wh.params) if (include_gfbm and wh.params is not None) else None,
                  T=wh.horizon, n=wh.n, include_gfbm=include_gfbm)
    log.info(f"martingale check: E^Q[e^-rT P(T)]={est:.6f} +- {se:.2g} ({dev:.2f} SE from p0), call({k:g})={call:.6f}")
    return MartingaleReport(est, se, n_paths, seed, params, dev, k, call, call_se)

# ---- Arbitrage ----
def _bachelier(x, t, r):
    # price X, portfolio gamma = 2X, beta = -X^2, V = X^2; integral of 2X dX
    g = 2 * x[:, :-1]
    gains = np.sum(g * np.diff(x, axis=1), axis=1)
    v = x ** 2
    ident = np.max(np.abs((-x ** 2) + 2 * x * x - v))
    return gains, v, ident

def _black_scholes(x, t, r):
    # stock P = e^(rt + X), bond e^(rt); gamma = 2(e^X - 1), beta = (e^X - 1)^2 - 2(e^X - 1) e^X
    ex = np.exp(x)
    p = np.exp(r * t) * ex
    gam = 2 * (ex - 1)
    bet = (ex - 1) ** 2 - 2 * (ex - 1) * ex
    v = np.exp(r * t) * (ex - 1) ** 2
    dt = np.diff(t)
    gains = np.sum(bet[:, :-1] * r * np.exp(r * t[:-1]) * dt + gam[:, :-1] * np.diff(p, axis=1), axis=1)
    ident = np.max(np.abs(bet * np.exp(r * t) + gam * p - v))
    return gains, v, ident

def arbitrage_demo(params: GfbmParams, grid: TimeGrid, seed: int, model: str = "bachelier", n_paths: int = 100,
                   levels: Optional[Sequence[int]] = None, r: float = 0.0, spec: QuadratureSpec = None,
                   threads: Optional[int] = None) -> ArbitrageReport:
    """Self-financing errors |V_0 + left-point gains - V_T| on sub-grids of ``grid`` (sizes ``levels``)."""
    if model not in MODELS: raise DomainError(f"model must be one of {MODELS}, got {model!r}")
    if r < 0: raise DomainError(f"r={r} must be >= 0")
    if not grid.uniform: raise DomainError("arbitrage_demo needs a uniform grid")
    N = grid.n
    levels = tuple(sorted(levels)) if levels else tuple(n for n in (N // 16, N // 4, N) if n >= 1)
    if not divides_all(levels, N): raise DomainError(f"levels {list(levels)} must divide the grid size {N}")
    young = params.hurst > 0.5
    if not young:
        log.warning(f"H={params.hurst:g} <= 1/2: left-point sums need not converge to the Young integral")
    x = sample_gfbm(params, grid, n_paths, seed, spec, threads).values
    fn = _bachelier if model == "bachelier" else _black_scholes
    errs, ident = [], 0.0
    for n in levels:
        step = N // n
        xs, ts = x[:, ::step], grid.points[::step]
        gains, v, idm = fn(xs, ts, r)
        errs.append(np.abs(v[:, 0] + gains - v[:, -1]))
        ident = max(ident, float(idm))
    e = np.array(errs)
    mono = float(np.mean(np.all(np.diff(e, axis=0) < 0, axis=0))) if len(levels) > 1 else float("nan")
    v_full = fn(x, grid.points, r)[1]
    nonneg = bool(np.all(v_full >= 0))
    moved = x[:, -1] != 0
    term = bool(np.all(v_full[moved, -1] > 0))
    rep = ArbitrageReport(model, levels, tuple(float(m) for m in e.mean(axis=1)), mono, ident, nonneg, term, n_paths,
                          seed, dict(alpha=params.alpha, gamma=params.gamma, hurst=params.hurst, r=r,
                                     T=grid.horizon), young)
    shown = ", ".join(f"{m:.3g}" for m in rep.mean_errors)
    log.info(f"arbitrage {model}: mean errors {shown} at n={list(levels)}, "
             f"monotone on {mono:.0%} of paths")
    return rep
