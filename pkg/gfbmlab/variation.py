"""p-variation of sampled paths and its limits.

The closed-form 1/H-variation constant is ``rho``. The increments
of X are locally self-similar with exponent 2H only at the origin or on the gamma = 0
line; away from 0 they scale like u^-gamma eps^(2 alpha + 1), so the finite non-zero
limit sits at p* = 2/(2 alpha + 1). ``critical_exponent`` and ``critical_limit`` give it.
"""
import math
from typing import Dict, List, Optional, Sequence
import numpy as np
from .covariance import phi, increment_cov
from .errors import DomainError
from .helpers import mean_stderr, divides_all, pmap
from .logging_setup import log
from .model import check_admissible, make_params
from .models import GaussianPath, GfbmParams, VariationStat, QuadratureSpec
from .simulate import sample_gfbm, uniform_grid
from .specialfn import beta, gamma as gamma_fn

P_TOL = 1e-12

def abs_moment(p: float) -> float:
    """E|Z|^p for standard normal Z."""
    return math.sqrt(2 ** p / math.pi) * gamma_fn((1 + p) / 2)

def rho(params: GfbmParams) -> float:
    check_admissible(params.alpha, params.gamma)
    H = params.hurst
    return (params.c ** 2 * beta(1 + 2 * params.alpha, 1 - params.gamma)) ** (1 / (2 * H)) * abs_moment(1 / H)

def local_increment_scale(params: GfbmParams, spec: QuadratureSpec = None) -> float:
    """kappa with Phi(u, u+eps) ~ kappa u^-gamma eps^(2 alpha + 1) as eps -> 0, u > 0 (alpha < 1/2)."""
    if params.gamma == 0: return 1.0
    ref = make_params(params.alpha, 0.0, spec)
    return (params.c / ref.c) ** 2

def critical_exponent(params: GfbmParams) -> float:
    return 2 / (2 * params.alpha + 1) if params.alpha < 0.5 else 1.0

def critical_limit(params: GfbmParams, t: float = 1.0, spec: QuadratureSpec = None) -> float:
    """L1 limit of the partition sum at p = critical_exponent on [0, t]."""
    a, g = params.alpha, params.gamma
    if a == 0.5: return math.inf
    if a > 0.5:
        b = beta(1 - g, 2 * a - 1) + beta(1 - g, 1 - 2 * a + g)
        return math.sqrt(2 / math.pi) * params.c * a * math.sqrt(b) * t ** params.hurst / params.hurst
    p = critical_exponent(params)
    e = 1 - g / (2 * a + 1)
    return abs_moment(p) * local_increment_scale(params, spec) ** (p / 2) * t ** e / e

def regime(params, p: float) -> str:
    x = p * params.hurst
    if abs(x - 1) <= P_TOL: return "critical"
    return "subcritical" if x < 1 else "supercritical"

def _limit(params, p, t):
    ps = critical_exponent(params)
    if abs(p - ps) <= P_TOL: return critical_limit(params, t)
    return math.inf if p < ps else 0.0

def p_variation(path: GaussianPath, p: float) -> VariationStat:
    if not p > 0: raise DomainError(f"p={p} must be > 0")
    v = np.asarray(path.values, dtype=float)
    if v.size < 2: raise DomainError("p-variation needs a path with at least two points")
    value = float(np.sum(np.abs(np.diff(v)) ** p))
    params = path.params if isinstance(path.params, GfbmParams) else None
    t = path.grid.horizon
    if params is None:
        return VariationStat(p, v.size - 1, value, float("nan"), "unknown")
    lr = rho(params) * t if regime(params, p) == "critical" else float("nan")
    return VariationStat(p, v.size - 1, value, lr, regime(params, p), _limit(params, p, t))

def expected_variation(params: GfbmParams, p: float, n: int, t: float = 1.0, spec: QuadratureSpec = None,
                       threads: Optional[int] = None) -> float:
    """E sum |dX|^p on the uniform n-partition of [0, t], from Phi(i h, (i+1) h) = h^2H Phi(i, i+1)."""
    h = t / n
    incs = pmap(lambda i: phi(params, float(i), float(i + 1), spec), range(n), threads)
    return abs_moment(p) * h ** (params.hurst * p) * float(np.sum(np.asarray(incs) ** (p / 2)))

def increment_ratios(params: GfbmParams, u: float, v: float, eps: float, spec: QuadratureSpec = None):
    """(Var(dX_u)/eps^2H, Cov(dX_u, dX_v)/eps^2H) for lag eps at times u < v."""
    scale = eps ** (2 * params.hurst)
    return phi(params, u, u + eps, spec) / scale, increment_cov(params, u, v, eps, spec) / scale

def variation_sweep(params: GfbmParams, p_list: Sequence[float], n_list: Sequence[int], n_paths: int, seed: int,
                    T: float = 1.0, with_expected: bool = True, spec: QuadratureSpec = None,
                    threads: Optional[int] = None) -> List[Dict]:
    """Mean partition sums per (p, n) over one set of paths sampled on the finest grid."""
    if not p_list or not n_list: raise DomainError("p_list and n_list must be non-empty")
    N = max(n_list)
    if not divides_all(n_list, N): raise DomainError(f"every n in {list(n_list)} must divide {N}")
    batch = sample_gfbm(params, uniform_grid(T, N), n_paths, seed, spec, threads)
    rows = []
    for n in sorted(set(n_list)):
        sub = batch.values[:, ::N // n]
        for p in p_list:
            mean, se = mean_stderr(np.sum(np.abs(np.diff(sub, axis=1)) ** p, axis=1))
            exp = expected_variation(params, p, n, T, spec, threads) if with_expected else float("nan")
            rows.append(dict(p=float(p), n=int(n), mean=mean, stderr=se, regime=regime(params, p), expected=exp))
    log.info(f"variation sweep: {len(rows)} (p, n) cell(s) over {n_paths} path(s), finest n={N}")
    return rows
