"""Deterministic integrals of the GFBM: kernel, Phi, Psi, the mixed second derivative K and their assemblies.

Every quantity is c^2 (or c_rl^2) times a handful of one-dimensional integrals
evaluated by ``quadrature``. Times are plain floats.
"""
import math
from typing import Optional, Sequence
import numpy as np
from .cache import psi_cache, k_cache, ds_cache, matrix_cache
from .errors import DomainError
from .helpers import pmap
from .logging_setup import log
from .models import GfbmParams, RlParams, KernelEval, QuadratureSpec
from .quadrature import DEFAULT_SPEC, integrate, power_product, pair_integral, pow_diff, ppow, scaled_diff
from .specialfn import beta

DIAG_RTOL = 1e-12
RATIO_DIGITS = 14

def _check_times(*ts):
    for t in ts:
        if not (t >= 0 and math.isfinite(t)):
            raise DomainError(f"times must be finite and >= 0, got {t!r}")

def region_one(params) -> bool:
    return 2 * params.alpha - 1 > 0 and 1 - 2 * params.alpha + params.gamma > 0

# ---- Kernel ----
def c_t(params: GfbmParams, t: float) -> float:
    """Normalizing constant of the kernel time derivative; nan outside region I."""
    a, g = params.alpha, params.gamma
    if not region_one(params): return float("nan")
    return a * t ** (params.hurst - 1) * math.sqrt(beta(1 - g, 2 * a - 1) + beta(1 - g, 1 - 2 * a + g))

def kernel(params: GfbmParams, t: float, s: float) -> KernelEval:
    if not t > 0: raise DomainError(f"kernel needs t > 0, got t={t!r}")
    a, g = params.alpha, params.gamma
    w = abs(s) ** (-g / 2) if s != 0 else (math.inf if g > 0 else 1.0)
    diff = ppow(t - s, a) - ppow(-s, a)
    value = diff * w if diff != 0 else 0.0
    if s > t or a == 0: deriv = 0.0
    elif s == t: deriv = math.copysign(math.inf, a)
    else: deriv = a * (t - s) ** (a - 1) * w
    return KernelEval(t, s, value, deriv, c_t(params, t), s == 0 or s == t)

def kernel_energy(params: GfbmParams, t: float, eta: float = 0.0, spec: QuadratureSpec = None) -> float:
    """alpha^2 int_{s < t-eta} (t-s)^(2a-2) |s|^-g ds; finite at eta = 0 only in region I."""
    a, g = params.alpha, params.gamma
    if a == 0: return 0.0
    if eta <= 0 and not 2 * a - 1 > 0: return math.inf
    pos = power_product(0.0, t - eta, t, 2 * a - 2, t, 0.0, g, spec)
    neg = integrate(lambda u: (t + u) ** (2 * a - 2), 0.0, t, spec, -g) \
        + t ** (2 * a - 1 - g) * integrate(lambda w: (1 + w) ** (2 * a - 2), 0.0, 1.0, spec, g - 2 * a)
    return a * a * (pos + neg)

# ---- Phi and Psi ----
def _phi_middle(a, g, s, d, spec):
    # int_0^s [(d+w)^a - w^a]^2 (s-w)^-g dw
    m = min(d, s / 2)
    head = integrate(lambda w: (d + w) ** (2 * a) * (s - w) ** -g, 0.0, m, spec) \
        - 2 * integrate(lambda w: (d + w) ** a * (s - w) ** -g, 0.0, m, spec, a) \
        + integrate(lambda w: (s - w) ** -g, 0.0, m, spec, 2 * a)
    mid = integrate(lambda w: pow_diff(d, 0.0, w, a) ** 2 * (s - w) ** -g, m, s / 2, spec) if m < s / 2 else 0.0
    right = integrate(lambda w: pow_diff(d, 0.0, w, a) ** 2, s / 2, s, spec, 0.0, -g)
    return head + mid + right

def phi(params: GfbmParams, s: float, t: float, spec: QuadratureSpec = None) -> float:
    """E[(X(t) - X(s))^2]."""
    _check_times(s, t)
    if s > t: s, t = t, s
    if s == t: return 0.0
    if s == 0: return psi(params, t, t, spec)
    a, g, c2 = params.alpha, params.gamma, params.c ** 2
    if a == 0:
        return c2 * (t ** (1 - g) - s ** (1 - g)) / (1 - g)
    p1 = power_product(s, t, t, 2 * a, t, 0.0, g, spec)
    p2 = _phi_middle(a, g, s, t - s, spec)
    p3 = pair_integral(t, t, s, a, g, spec)
    return max(c2 * (p1 + p2 + p3), 0.0)

def psi(params: GfbmParams, s: float, t: float, spec: QuadratureSpec = None) -> float:
    """E[X(s) X(t)]."""
    _check_times(s, t)
    if s > t: s, t = t, s
    if s == 0: return 0.0
    a, g, c2 = params.alpha, params.gamma, params.c ** 2
    if a == 0: return c2 * s ** (1 - g) / (1 - g)
    return c2 * (power_product(0.0, s, t, a, s, a, g, spec) + pair_integral(t, s, 0.0, a, g, spec))

def psi_rl(params: RlParams, s: float, t: float, spec: QuadratureSpec = None) -> float:
    _check_times(s, t)
    if s > t: s, t = t, s
    if s == 0: return 0.0
    a = params.alpha
    return params.c_rl ** 2 * power_product(0.0, s, t, a, s, a, params.gamma, spec)

def psi_ds(params: GfbmParams, r: float, t: float, spec: QuadratureSpec = None) -> float:
    """d/dr Psi(r, t) = E[lambda(r) X(t)] for alpha > 0."""
    a, g = params.alpha, params.gamma
    if not a > 0: raise DomainError(f"psi_ds needs alpha > 0 (alpha={a:g})")
    if not (r > 0 and t > 0): raise DomainError(f"psi_ds needs r, t > 0 (r={r!r}, t={t!r})")
    if r <= t: j1 = power_product(0.0, r, t, a, r, a - 1, g, spec)
    else: j1 = power_product(0.0, t, r, a - 1, t, a, g, spec)
    M = min(r, t)
    et = scaled_diff(t, 0.0, M, a)
    j2 = integrate(lambda u: (t + u) ** a * (r + u) ** (a - 1), 0.0, M, spec, -g) \
        - integrate(lambda u: (r + u) ** (a - 1), 0.0, M, spec, a - g) \
        + M ** (a + 1 - g) * integrate(lambda w: (r * w + M) ** (a - 1) * et(w), 0.0, 1.0, spec, g - 2 * a)
    return params.c ** 2 * a * (j1 + j2)

def driver_cov(c: float, alpha: float, gamma: float, u: float, s: float, spec: QuadratureSpec = None) -> float:
    """E[X(u) B(s)] = c int_0^(u^s) (u-r)^alpha r^(-gamma/2) dr for the driving Brownian motion B."""
    m = min(u, s)
    if not m > 0: return 0.0
    return c * power_product(0.0, m, u, alpha, u, 0.0, gamma / 2, spec)

def increment_cov(params: GfbmParams, u: float, v: float, eps: float, spec: QuadratureSpec = None) -> float:
    """E[(X(u+eps) - X(u)) (X(v+eps) - X(v))]."""
    if u == v: return phi(params, u, u + eps, spec)
    p = lambda s, t: psi(params, s, t, spec)
    return p(u + eps, v + eps) - p(u + eps, v) - p(u, v + eps) + p(u, v)

# ---- Second mixed derivative ----
def k_diag(params: GfbmParams, u: float) -> float:
    a, g = params.alpha, params.gamma
    if not region_one(params):
        raise DomainError(f"K(u, u) is infinite outside region I (alpha={a:g} <= 1/2)")
    return params.c ** 2 * a * a * u ** (2 * params.hurst - 2) * (beta(2 * a - 1, 1 - g) + beta(1 - g, 1 - 2 * a + g))

def _k_offdiag(params, u, v, spec):
    a, g = params.alpha, params.gamma
    f1 = power_product(0.0, u, v, a - 1, u, a - 1, g, spec)
    f2 = integrate(lambda th: (v + th) ** (a - 1) * (u + th) ** (a - 1), 0.0, u, spec, -g) \
        + u ** (1 - g) * integrate(lambda w: (v * w + u) ** (a - 1) * (u * (1 + w)) ** (a - 1), 0.0, 1.0, spec, g - 2 * a)
    return params.c ** 2 * a * a * (f1 + f2)

def k_second(params: GfbmParams, u: float, v: float, spec: QuadratureSpec = None) -> float:
    """d^2 Psi / du dv (u, v) = c^2 alpha^2 (f1 + f2)(u^v, u v v)."""
    a = params.alpha
    if not a > 0: raise DomainError(f"k_second needs alpha > 0 (alpha={a:g})")
    if not (u > 0 and v > 0): raise DomainError(f"k_second needs u, v > 0 (u={u!r}, v={v!r})")
    if u > v: u, v = v, u
    if v - u <= DIAG_RTOL * v:
        if region_one(params): return k_diag(params, u)
        raise DomainError(f"diagonal singularity: |u-v|={v - u:.3g}; K diverges like |u-v|^(2alpha-1) for alpha={a:g} <= 1/2")
    spec = spec or DEFAULT_SPEC
    return k_cache.get_or_compute((params, spec, u, v), lambda: _k_offdiag(params, u, v, spec))

def mixed_fd(params: GfbmParams, u: float, v: float, h: Optional[float] = None, spec: QuadratureSpec = None) -> float:
    """Central mixed finite difference of Psi at (u, v)."""
    h = h or 1e-4 * max(u, v, 1.0)
    p = lambda s, t: psi(params, s, t, spec)
    return (p(u + h, v + h) - p(u + h, v - h) - p(u - h, v + h) + p(u - h, v - h)) / (4 * h * h)

# ---- Matrices ----
def _unit_fn(params, kind, spec):
    if kind == "gfbm": return lambda r: psi(params, r, 1.0, spec)
    if kind == "rl_gfbm": return lambda r: psi_rl(params, r, 1.0, spec)
    raise DomainError(f"unknown covariance kind {kind!r}")

def _assemble(params, times, spec, threads, kind):
    n = len(times); out = np.zeros((n, n))
    pos = [i for i in range(n) if times[i] > 0]
    groups = {}
    for k, i in enumerate(pos):
        for j in pos[k:]:
            s, t = sorted((times[i], times[j]))
            groups.setdefault(round(s / t, RATIO_DIGITS), []).append((i, j))
    unit = _unit_fn(params, kind, spec)
    keys = list(groups)
    vals = pmap(lambda r: psi_cache.get_or_compute((kind, params, spec, r), lambda: unit(r)), keys, threads)
    two_h = 2 * params.hurst
    for r, v in zip(keys, vals):
        for i, j in groups[r]:
            out[i, j] = out[j, i] = max(times[i], times[j]) ** two_h * v
    log.info(f"{kind} covariance assembled: {n}x{n} from {len(keys)} unique time ratio(s)")
    return out

def cov_matrix(params, times: Sequence[float], spec: QuadratureSpec = None, threads: Optional[int] = None,
               kind: str = "gfbm") -> np.ndarray:
    """[Psi(t_i, t_j)] via Psi(s, t) = t^2H Psi(s/t, 1); read-only, memoized."""
    times = np.asarray(times, dtype=float)
    _check_times(*times)
    spec = spec or DEFAULT_SPEC
    def build():
        m = _assemble(params, times, spec, threads, kind); m.setflags(write=False); return m
    return matrix_cache.get_or_compute((kind, params, spec, times.tobytes()), build)

def k_matrix(params: GfbmParams, points: Sequence[float], spec: QuadratureSpec = None,
             threads: Optional[int] = None) -> np.ndarray:
    """[K(p_i, p_j)]; diagonal entries need region I."""
    pts = [float(p) for p in points]
    n = len(pts); out = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    vals = pmap(lambda ij: k_second(params, pts[ij[0]], pts[ij[1]], spec), pairs, threads)
    for (i, j), v in zip(pairs, vals): out[i, j] = out[j, i] = v
    return out

def ds_table(params: GfbmParams, n: int, spec: QuadratureSpec = None, threads: Optional[int] = None) -> np.ndarray:
    """[dPsi/dr(j, e)] on the unit grid, 1 <= e <= j <= n; row e = 0 and the lower triangle stay zero.

    Homogeneity gives dPsi/dr(j, e) = j^(2H-1) dPsi/dr(1, e/j), so only distinct ratios are integrated.
    """
    spec = spec or DEFAULT_SPEC
    groups = {}
    for j in range(1, n + 1):
        for e in range(1, j + 1): groups.setdefault(round(e / j, RATIO_DIGITS), []).append((e, j))
    keys = list(groups)
    vals = pmap(lambda r: ds_cache.get_or_compute((params, spec, r), lambda: psi_ds(params, 1.0, r, spec)), keys, threads)
    out = np.zeros((n + 1, n + 1))
    p = 2 * params.hurst - 1
    for r, v in zip(keys, vals):
        for e, j in groups[r]: out[e, j] = j ** p * v
    log.debug(f"dPsi/dr table: n={n} from {len(keys)} unique ratio(s)")
    return out
