"""Singular-endpoint quadrature shared by the covariance, Bergomi and shot-noise code.

Integrands are plain scalar callables built from ``math``; endpoint singularities
are never evaluated directly but passed as algebraic weights.
"""
import math
from typing import Callable
import numpy as np
from scipy.integrate import quad, tanhsinh
from .errors import NumericalError
from .logging_setup import log
from .models import QuadratureSpec

DEFAULT_SPEC = QuadratureSpec()
FAIL_FACTOR = 100.0

def _check(val, err, spec, a, b, flagged=False, msg=""):
    tol = max(spec.abs_tol, spec.rel_tol * abs(val))
    if not math.isfinite(val) or (flagged and err > FAIL_FACTOR * tol):
        raise NumericalError(f"quadrature on [{a:.6g}, {b:.6g}] did not converge: value={val:.6g}, "
                             f"error estimate={err:.3g} > {FAIL_FACTOR:g} x tol={tol:.3g} {msg}".strip(), estimate=err)
    if flagged:
        log.debug(f"quadrature on [{a:.6g}, {b:.6g}] flagged but within tolerance (err={err:.3g}): {msg}")

def _tanh_sinh(f, a, b, spec, left, right):
    fv = np.vectorize(f, otypes=[float])
    def g(u):
        with np.errstate(all="ignore"):
            v = fv(u) * (u - a) ** left * (b - u) ** right
        return np.where(np.isfinite(v), v, 0.0)
    res = tanhsinh(g, a, b, atol=spec.abs_tol, rtol=spec.rel_tol)
    val, err = float(res.integral), float(res.error)
    _check(val, err, spec, a, b, flagged=not bool(res.success), msg=f"(tanh-sinh status {int(res.status)})")
    return val

def integrate(f: Callable[[float], float], a: float, b: float, spec: QuadratureSpec = None,
              left: float = 0.0, right: float = 0.0) -> float:
    """int_a^b f(u) (u-a)^left (b-u)^right du, f finite on the closed interval."""
    if not b > a: return 0.0
    spec = spec or DEFAULT_SPEC
    singular = left != 0.0 or right != 0.0
    if singular and spec.singular_endpoint_rule == "tanh-sinh":
        return _tanh_sinh(f, a, b, spec, left, right)
    kw = dict(epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions, full_output=1)
    res = quad(f, a, b, weight="alg", wvar=(left, right), **kw) if singular else quad(f, a, b, **kw)
    val, err = float(res[0]), float(res[1])
    _check(val, err, spec, a, b, flagged=len(res) > 3, msg=str(res[3]) if len(res) > 3 else "")
    return val

# ---- Power helpers ----
def ppow(x: float, a: float) -> float:
    """x_+^a with the convention 0 for x <= 0."""
    return x ** a if x > 0 else 0.0

def pow_diff(x: float, y: float, u: float, a: float) -> float:
    """(x+u)^a - (y+u)^a for x >= y, y+u > 0, without cancellation."""
    base = y + u
    return base ** a * math.expm1(a * math.log1p((x - y) / base))

def power_product(lo: float, hi: float, x: float, a1: float, y: float, a2: float, g: float,
                  spec: QuadratureSpec = None) -> float:
    """int_lo^hi (x-s)^a1 (y-s)^a2 s^-g ds with x, y >= hi and lo >= 0.

    Factors that vanish at an endpoint (x == hi, y == hi, lo == 0) become weights.
    """
    if not hi > lo: return 0.0
    left = -g if lo == 0 else 0.0
    right = (a1 if x == hi else 0.0) + (a2 if y == hi else 0.0)
    fx, fy, fs = x != hi and a1 != 0, y != hi and a2 != 0, lo > 0 and g != 0
    def f(s):
        v = 1.0
        if fx: v *= (x - s) ** a1
        if fy: v *= (y - s) ** a2
        if fs: v *= s ** -g
        return v
    return integrate(f, lo, hi, spec, left, right)

# ---- Pair integrals int D(x,y,u) D(x2,y,u) u^-g du, D(x,y,u) = (x+u)^a - (y+u)^a ----
def pair_head(x: float, x2: float, y: float, a: float, g: float, M: float, spec: QuadratureSpec = None) -> float:
    """Integral over [0, M]."""
    if a == 0 or not M > 0: return 0.0
    if y > 0:
        return integrate(lambda u: pow_diff(x, y, u, a) * pow_diff(x2, y, u, a), 0.0, M, spec, -g)
    # y == 0: expand so the u^a singularity becomes a weight
    t1 = integrate(lambda u: (x + u) ** a * (x2 + u) ** a, 0.0, M, spec, -g)
    t2 = integrate(lambda u: (x + u) ** a + (x2 + u) ** a, 0.0, M, spec, a - g)
    t3 = M ** (2 * a - g + 1) / (2 * a - g + 1)
    return t1 - t2 + t3

def scaled_diff(x, y, M, a):
    # expm1(a log1p((x-y) w / (y w + M))) / w, continuous at w = 0
    def e(w):
        if w == 0: return a * (x - y) / M
        return math.expm1(a * math.log1p((x - y) * w / (y * w + M))) / w
    return e

def pair_tail(x: float, x2: float, y: float, a: float, g: float, M: float, spec: QuadratureSpec = None) -> float:
    """Integral over [M, inf), mapped to (0, 1] by u = M/w; the decay is the weight w^(g-2a)."""
    if a == 0: return 0.0
    e1, e2 = scaled_diff(x, y, M, a), scaled_diff(x2, y, M, a)
    scale = M ** (1 - g)
    return integrate(lambda w: scale * (y * w + M) ** (2 * a) * e1(w) * e2(w), 0.0, 1.0, spec, g - 2 * a)

def pair_integral(x: float, x2: float, y: float, a: float, g: float, spec: QuadratureSpec = None) -> float:
    """int_0^inf D(x,y,u) D(x2,y,u) u^-g du, split at the smallest gap."""
    M = min(x, x2) - y
    if a == 0 or not M > 0: return 0.0
    return pair_head(x, x2, y, a, g, M, spec) + pair_tail(x, x2, y, a, g, M, spec)
