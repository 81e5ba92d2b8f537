"""Generalized rough Bergomi: forward variance, the f function behind the VVIX approximation, the reference table and a Monte Carlo check."""
import math
from typing import Dict, List, Optional, Sequence
import numpy as np
from scipy.integrate import trapezoid
from .constants import (TABLE1_H, TABLE1_T, TABLE1_DELTA, TABLE1_ETA, TABLE1_TIMES, TABLE1_ROWS, TABLE1_PUBLISHED,
                        SURFACE_GAMMAS, MC_SIGMA_POINTS)
from .errors import DomainError
from .helpers import mean_stderr, pmap
from .logging_setup import log
from .model import make_rl_params
from .models import RlParams, BergomiParams, BergomiMcResult, QuadratureSpec
from .quadrature import integrate, pow_diff, power_product
from .simulate import factorize, normals

DISCREPANCY_RTOL = 0.01

def _window_diff(a, p):
    # w -> (w+a)^p - w^p, stable for w >> a
    def d(w):
        if w > a: return pow_diff(a, 0.0, w, p)
        return (w + a) ** p - (w ** p if w > 0 else 0.0)
    return d

def f_alpha_gamma(params: RlParams, a: float, b: float, spec: QuadratureSpec = None) -> float:
    """(c/(alpha+1))^2 a^-2 int_0^1 [(1-u+a)^(alpha+1) - (1-u)^(alpha+1)]^2 (b+u)^-gamma du."""
    if not a > 0: raise DomainError(f"a={a!r} must be > 0")
    if not b >= 0: raise DomainError(f"b={b!r} must be >= 0")
    al, g = params.alpha, params.gamma
    d = _window_diff(a, al + 1)
    # w = 1 - u; the (b + 1 - w)^-gamma factor is singular at w = 1 only when b == 0
    if b == 0 and g > 0:
        val = integrate(lambda w: d(w) ** 2, 0.0, 1.0, spec, 0.0, -g)
    else:
        val = integrate(lambda w: d(w) ** 2 * (b + 1 - w) ** -g, 0.0, 1.0, spec)
    return (params.c_rl / (al + 1)) ** 2 * val / (a * a)

def f_hurst(H: float, theta: float, spec: QuadratureSpec = None) -> float:
    """gamma = 0 reference: D_H^2 theta^-2 int_0^1 [(1-u+theta)^(H+1/2) - (1-u)^(H+1/2)]^2 du, D_H = sqrt(2H)/(H+1/2)."""
    if not 0 < H < 1: raise DomainError(f"H={H!r} outside (0, 1)")
    if not theta > 0: raise DomainError(f"theta={theta!r} must be > 0")
    p = H + 0.5
    # expanded: int (w+theta)^2p - 2 int (w+theta)^p w^p + int w^2p
    a1 = ((1 + theta) ** (2 * p + 1) - theta ** (2 * p + 1)) / (2 * p + 1)
    a2 = integrate(lambda w: (w + theta) ** p, 0.0, 1.0, spec, p)
    a3 = 1 / (2 * p + 1)
    return 2 * H / p ** 2 * (a1 - 2 * a2 + a3) / theta ** 2

def vvix_approx(params: RlParams, bp: BergomiParams, spec: QuadratureSpec = None) -> float:
    """1/4 eta^2 (T-t)^2H f(delta/(T-t), t/(T-t))."""
    span = bp.T - bp.t
    if not span > 0: raise DomainError(f"vvix_approx needs t < T (t={bp.t:g}, T={bp.T:g})")
    f = f_alpha_gamma(params, bp.delta / span, bp.t / span, spec)
    return 0.25 * bp.eta ** 2 * span ** (2 * params.hurst) * f

# ---- Forward variance ----
def forward_integral_cov(params: RlParams, bp: BergomiParams, u_points: Sequence[float],
                         spec: QuadratureSpec = None, threads: Optional[int] = None) -> np.ndarray:
    """Cov of G(u) = int_t^T (u-s)^alpha s^(-gamma/2) dB(s) over u in u_points (all >= T)."""
    u = [float(x) for x in u_points]
    if any(x < bp.T for x in u): raise DomainError(f"forward points must be >= T={bp.T:g}")
    n = len(u); out = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    a, g = params.alpha, params.gamma
    vals = pmap(lambda ij: power_product(bp.t, bp.T, u[ij[0]], a, u[ij[1]], a, g, spec), pairs, threads)
    for (i, j), v in zip(pairs, vals): out[i, j] = out[j, i] = v
    return out

def forward_variance(params: RlParams, bp: BergomiParams, u, integral, spec: QuadratureSpec = None):
    """E[v(u) | F(T)] = xi0 exp(eta c G(u) - 1/2 eta^2 c^2 Var G(u)) for realized G(u); u scalar, integral scalar or array."""
    if u < bp.T: raise DomainError(f"u={u:g} must be >= T={bp.T:g}")
    g = np.asarray(integral, dtype=float)
    c = params.c_rl
    var = power_product(bp.t, bp.T, u, params.alpha, u, params.alpha, params.gamma, spec)
    out = bp.xi0 * np.exp(bp.eta * c * g - 0.5 * (bp.eta * c) ** 2 * var)
    return float(out) if out.ndim == 0 else out

# ---- Monte Carlo ----
def _mc_cov(params, bp, xs, us, spec, threads):
    # vector [G_x(x_1..x_m), G_T(u_1..u_q), B(x_1..x_m) - B(t)], G_x(x) = int_t^x (x-s)^alpha s^(-gamma/2) dB
    a, g, t = params.alpha, params.gamma, bp.t
    m, q = len(xs), len(us)
    N = 2 * m + q
    def entry(ij):
        i, j = ij
        if i < m and j < m:
            lo = min(xs[i], xs[j]); return power_product(t, lo, xs[i], a, xs[j], a, g, spec)
        if i < m and j < m + q:
            return power_product(t, xs[i], xs[i], a, us[j - m], a, g, spec)
        if i < m:
            hi = min(xs[i], xs[j - m - q]); return power_product(t, hi, xs[i], a, xs[i], 0.0, g / 2, spec)
        if i < m + q and j < m + q:
            return power_product(t, bp.T, us[i - m], a, us[j - m], a, g, spec)
        if i < m + q:
            u = us[i - m]; return power_product(t, xs[j - m - q], u, a, u, 0.0, g / 2, spec)
        return min(xs[i - m - q], xs[j - m - q]) - t
    pairs = [(i, j) for i in range(N) for j in range(i, N)]
    vals = pmap(entry, pairs, threads)
    out = np.zeros((N, N))
    for (i, j), v in zip(pairs, vals): out[i, j] = out[j, i] = v
    return out

def rbergomi_mc(params: RlParams, bp: BergomiParams, n_paths: int, seed: int, n_price: int = 16,
                n_sigma: int = MC_SIGMA_POINTS, spec: QuadratureSpec = None,
                threads: Optional[int] = None) -> BergomiMcResult:
    """Samples of sigma(T) = (1/delta) int_T^(T+delta) E[v(u) | F(T)] du plus an Euler log-price on [t, T]."""
    if not bp.T > bp.t: raise DomainError(f"rbergomi_mc needs t < T (t={bp.t:g}, T={bp.T:g})")
    if n_price < 1 or n_sigma < 2: raise DomainError("need n_price >= 1 and n_sigma >= 2")
    xs = list(bp.t + (bp.T - bp.t) * np.arange(1, n_price + 1) / n_price); xs[-1] = bp.T
    u_all = np.linspace(bp.T, bp.T + bp.delta, n_sigma)
    us = list(u_all[1:])
    m, q = len(xs), len(us)
    f, delta = factorize(_mc_cov(params, bp, xs, us, spec, threads))
    # one child stream per path: the correlated block first, then the orthogonal price noise
    zz = normals(seed, n_paths, 3 * m + q)
    z = zz[:, :2 * m + q] @ f.T
    gx, gu, bx = z[:, :m], z[:, m:m + q], z[:, m + q:]
    c, eta, a, g = params.c_rl, bp.eta, params.alpha, params.gamma

    var_x = np.array([power_product(bp.t, x, x, 2 * a, x, 0.0, g, spec) for x in xs])
    v = bp.xi0 * np.exp(eta * c * gx - 0.5 * (eta * c) ** 2 * var_x)
    g_fwd = np.column_stack([gx[:, -1], gu])
    fwd = np.column_stack([forward_variance(params, bp, float(uk), g_fwd[:, k], spec) for k, uk in enumerate(u_all)])
    sigma = trapezoid(fwd, u_all, axis=1) / bp.delta

    # Euler log-price, W~ = rho B + sqrt(1 - rho^2) B_perp, variance frozen at the left point
    dt = np.diff(np.concatenate([[bp.t], xs]))
    db = np.diff(np.column_stack([np.zeros(n_paths), bx]), axis=1)
    db_perp = zz[:, 2 * m + q:] * np.sqrt(dt)
    v_left = np.column_stack([np.full(n_paths, bp.xi0), v[:, :-1]])
    dw = bp.rho * db + math.sqrt(1 - bp.rho ** 2) * db_perp
    log_s = np.sum(-0.5 * v_left * dt + np.sqrt(v_left) * dw, axis=1)

    y = 0.5 * np.log(sigma)
    var = float(np.var(y, ddof=1)) if n_paths > 1 else float("nan")
    se = float(np.std((y - y.mean()) ** 2, ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else float("nan")
    vm, vse = mean_stderr(v[:, -1])
    v_min = float(min(v.min(), fwd.min()))
    log.info(f"rBergomi MC: {n_paths} path(s), Var(log sqrt sigma)={var:.6g} +- {se:.2g}, jitter={delta:g}")
    return BergomiMcResult(sigma, var, se, n_paths, seed, v_min, vm, vse, log_s)

# ---- Tables ----
def vvix_surface(H: float, t: float, gammas: Sequence[float] = SURFACE_GAMMAS, T: float = TABLE1_T,
                 delta: float = TABLE1_DELTA, eta: float = TABLE1_ETA, spec: QuadratureSpec = None,
                 threads: Optional[int] = None) -> List[Dict]:
    """v along gamma at fixed H, alpha = gamma/2 + H - 1/2."""
    bp = BergomiParams(eta, 1.0, t, T, delta)
    def row(g):
        rp = make_rl_params(g / 2 + H - 0.5, g)
        return dict(alpha=rp.alpha, gamma=rp.gamma, t=t, T=T, v=vvix_approx(rp, bp, spec))
    rows = pmap(row, list(gammas), threads)
    log.info(f"vvix surface: H={H:g}, t={t:g}, {len(rows)} gamma value(s)")
    return rows

def table1(side: str = "a", spec: QuadratureSpec = None, threads: Optional[int] = None) -> List[Dict]:
    if side not in TABLE1_TIMES: raise DomainError(f"table side must be 'a' or 'b', got {side!r}")
    bp = BergomiParams(TABLE1_ETA, 1.0, TABLE1_TIMES[side], TABLE1_T, TABLE1_DELTA)
    span = bp.T - bp.t
    scale = 0.25 * bp.eta ** 2 * span ** (2 * TABLE1_H)
    def row(k):
        al, g = TABLE1_ROWS[k]
        rp = make_rl_params(al, g)
        f = f_alpha_gamma(rp, bp.delta / span, bp.t / span, spec)
        v = scale * f
        if side == "a": return dict(alpha=al, gamma=g, H=rp.hurst, f=f, v=v)
        printed = TABLE1_PUBLISHED["b"][k][1]
        note = "" if abs(printed - v) <= DISCREPANCY_RTOL * v else f"printed v={printed:.4f}; v/f={printed / f:.4f} vs {scale:.4f}"
        return dict(alpha=al, gamma=g, H=rp.hurst, f=f, v_formula=v, v_printed_discrepancy=note)
    return pmap(row, range(len(TABLE1_ROWS)), threads)
