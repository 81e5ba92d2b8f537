import math
from .constants import LANCZOS_G, LANCZOS_COEF, POLE_GUARD
from .errors import DomainError, PoleError

_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)
GAMMA_MAX_ARG = 171.6

def _lanczos(x: float) -> float:
    # ln Gamma(x) for x >= 1/2
    x -= 1.0
    a = LANCZOS_COEF[0]; t = x + LANCZOS_G + 0.5
    for i in range(1, len(LANCZOS_COEF)): a += LANCZOS_COEF[i] / (x + i)
    return _HALF_LOG_2PI + (x + 0.5) * math.log(t) - t + math.log(a)

def _check_pole(x: float):
    k = round(x)
    if k <= 0 and abs(x - k) < POLE_GUARD:
        raise PoleError(f"Gamma pole: x={x!r} is within {POLE_GUARD:g} of the non-positive integer {int(k)}")

def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0 (Lanczos, reflection below 1/2)."""
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"log_gamma needs x > 0, got x={x!r}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - _lanczos(1.0 - x)
    return _lanczos(x)

def gamma_neg(x: float) -> float:
    """Gamma(x) for negative non-integer x via Gamma(x) = Gamma(x+1)/x, applied until the argument is positive."""
    x = float(x)
    if not x < 0:
        raise DomainError(f"gamma_neg needs x < 0, got x={x!r}")
    _check_pole(x)
    den, y = 1.0, x
    while y < 0: den *= y; y += 1.0
    return math.exp(log_gamma(y)) / den

def gamma(x: float) -> float:
    x = float(x)
    if x < 0: return gamma_neg(x)
    _check_pole(x)
    if x > GAMMA_MAX_ARG:
        raise DomainError(f"gamma overflows for x={x!r} > {GAMMA_MAX_ARG}")
    return math.exp(log_gamma(x))

def log_beta(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"Beta needs a > 0 and b > 0, got a={a!r}, b={b!r}")
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)

def beta(a: float, b: float) -> float:
    return math.exp(log_beta(a, b))
