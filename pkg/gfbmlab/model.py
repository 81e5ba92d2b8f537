import math
from typing import Tuple
from .constants import C_AGREE_RTOL, C_POLE_BAND
from .errors import DomainError, PoleError
from .logging_setup import log
from .models import GfbmParams, RlParams, RegionClass, QuadratureSpec
from .quadrature import power_product, pair_integral
from .specialfn import beta, gamma as gamma_fn

def check_admissible(alpha: float, gamma: float):
    """Raise DomainError naming the violated bound of the admissible region."""
    alpha, gamma = float(alpha), float(gamma)
    if not (math.isfinite(alpha) and math.isfinite(gamma)):
        raise DomainError(f"alpha={alpha!r}, gamma={gamma!r} must be finite")
    if not 0 <= gamma < 1:
        raise DomainError(f"gamma={gamma:g} outside [0, 1)")
    lo, hi = (gamma - 1) / 2, (1 + gamma) / 2
    if not alpha < hi:
        raise DomainError(f"alpha={alpha:g} >= (1+gamma)/2={hi:g}")
    if not alpha > lo:
        raise DomainError(f"alpha={alpha:g} <= (gamma-1)/2={lo:g}")

def admissible(alpha: float, gamma: float) -> bool:
    try: check_admissible(alpha, gamma)
    except DomainError: return False
    return True

def hurst(alpha: float, gamma: float) -> float:
    return alpha - gamma / 2 + 0.5

def normalization_integrals(alpha: float, gamma: float, spec: QuadratureSpec = None) -> Tuple[float, float]:
    """(int_0^1 (1-v)^2a v^-g dv, int_0^inf [(1+v)^a - v^a]^2 v^-g dv) on the same code paths psi(1, 1) uses."""
    if alpha == 0: return 1.0 / (1.0 - gamma), 0.0
    return power_product(0.0, 1.0, 1.0, alpha, 1.0, alpha, gamma, spec), pair_integral(1.0, 1.0, 0.0, alpha, gamma, spec)

def c_closed_form(alpha: float, gamma: float) -> float:
    """c(alpha, gamma) from the Gamma/Beta form; PoleError near alpha in {0, 1/2} or 2 alpha == gamma."""
    for bad, what in ((alpha, "alpha=0"), (alpha - 0.5, "alpha=1/2"), (2 * alpha - gamma, "2*alpha=gamma")):
        if abs(bad) < C_POLE_BAND:
            raise PoleError(f"closed form of c unusable within {C_POLE_BAND:g} of {what} (alpha={alpha:g}, gamma={gamma:g})")
    inv = beta(1 - gamma, 2 * alpha + 1) + (
        gamma_fn(1 - gamma) / gamma_fn(-2 * alpha) - 2 * gamma_fn(1 + alpha - gamma) / gamma_fn(-alpha)
    ) * gamma_fn(-1 - 2 * alpha + gamma)
    return inv ** -0.5

def make_params(alpha: float, gamma: float, spec: QuadratureSpec = None) -> GfbmParams:
    check_admissible(alpha, gamma)
    alpha, gamma = float(alpha), float(gamma)
    i_a, i_b = normalization_integrals(alpha, gamma, spec)
    c = (i_a + i_b) ** -0.5
    gap = float("nan")
    try:
        c_cf = c_closed_form(alpha, gamma)
        gap = abs(c - c_cf) / c_cf
        if gap > C_AGREE_RTOL:
            log.warning(f"c({alpha:g}, {gamma:g}): quadrature {c:.15g} vs closed form {c_cf:.15g} (rel gap {gap:.2e})")
    except PoleError:
        pass
    return GfbmParams(alpha, gamma, hurst(alpha, gamma), c, gap)

def make_rl_params(alpha: float, gamma: float) -> RlParams:
    check_admissible(alpha, gamma)
    alpha, gamma = float(alpha), float(gamma)
    return RlParams(alpha, gamma, hurst(alpha, gamma), beta(1 - gamma, 2 * alpha + 1) ** -0.5)

BOUNDARY_TOL = 1e-12

def classify(params: GfbmParams) -> RegionClass:
    a, g, H = params.alpha, params.gamma, params.hurst
    check_admissible(a, g)
    fake = g > 0 and abs(a - g / 2) <= BOUNDARY_TOL
    def rc(region, x_sm, fv, diff, y_sm):
        return RegionClass(a, g, region, H, x_sm, fv, diff, y_sm, fake)
    if a == 0 and g == 0:
        return rc("BrownianMotion", "yes", False, False, "yes")
    if g == 0:
        # mixed FBM is a semimartingale only for H > 3/4
        return rc("FbmLine", "no", False, False, "yes" if H > 0.75 else "no")
    if a > 0.5:
        return rc("RegionI", "yes", True, True, "yes")
    if a > g / 2 + BOUNDARY_TOL:
        return rc("RegionII1", "no", False, False, "yes")
    if a == 0:
        # X(t) = c int_0^t u^(-g/2) dB(u) is a Gaussian martingale
        return rc("RegionII2", "yes", False, False, "yes")
    return rc("RegionII2", "no", False, False, "conjectured-no")
