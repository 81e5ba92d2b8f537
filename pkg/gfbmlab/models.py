import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple
import numpy as np
from .config import QUAD_ABS_TOL, QUAD_REL_TOL, QUAD_LIMIT, QUAD_RULE
from .errors import DomainError

QUAD_RULES = ("gauss-jacobi", "tanh-sinh")

@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = QUAD_ABS_TOL
    rel_tol: float = QUAD_REL_TOL
    max_subdivisions: int = QUAD_LIMIT
    singular_endpoint_rule: str = QUAD_RULE   # gauss-jacobi|tanh-sinh

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError(f"quadrature tolerances must be > 0 (abs_tol={self.abs_tol}, rel_tol={self.rel_tol})")
        if self.max_subdivisions < 64:
            raise DomainError(f"max_subdivisions={self.max_subdivisions} < 64")
        if self.singular_endpoint_rule not in QUAD_RULES:
            raise DomainError(f"unknown singular_endpoint_rule {self.singular_endpoint_rule!r}; expected one of {QUAD_RULES}")

# ---- Parameters ----
@dataclass(frozen=True)
class GfbmParams:
    alpha: float
    gamma: float
    hurst: float
    c: float
    c_gap: float = field(default=float("nan"), compare=False)   # rel. gap to closed form, nan when not checked

@dataclass(frozen=True)
class RlParams:
    alpha: float
    gamma: float
    hurst: float
    c_rl: float

@dataclass(frozen=True)
class RegionClass:
    alpha: float
    gamma: float
    region: str                  # BrownianMotion|FbmLine|RegionI|RegionII1|RegionII2
    hurst: float
    x_is_semimartingale: str     # yes|no|not-applicable
    x_finite_variation: bool
    x_differentiable: bool
    y_is_semimartingale: str     # yes|no|conjectured-no
    fake_brownian: bool = False  # alpha == gamma/2 > 0: H = 1/2 without being a semimartingale

@dataclass(frozen=True)
class KernelEval:
    t: float
    s: float
    value: float
    derivative: float
    c_t: float                   # nan outside region I
    singular: bool = False       # s in {0, t}

# ---- Grids and paths ----
@dataclass
class TimeGrid:
    points: np.ndarray
    uniform: bool
    mesh: float

    @property
    def n(self) -> int: return len(self.points) - 1
    @property
    def horizon(self) -> float: return float(self.points[-1])

@dataclass
class GaussianPath:
    grid: TimeGrid
    values: np.ndarray
    seed: int
    label: str                   # gfbm|rl_gfbm|mixed|bm|fou|drift_lambda|shot_noise
    index: int = 0
    params: Any = None

@dataclass(eq=False)
class PathBatch(Sequence):
    """Paths of one sampler run, stored row-wise in one array."""
    grid: TimeGrid
    values: np.ndarray           # shape (n_paths, n + 1)
    seed: int
    label: str
    params: Any = None
    jitter: float = 0.0          # delta used by the factorization, 0 when none was needed

    def __len__(self): return self.values.shape[0]
    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        if i < 0: i += len(self)
        if not 0 <= i < len(self): raise IndexError(i)
        return GaussianPath(self.grid, self.values[i], self.seed, self.label, i, self.params)

@dataclass
class PathBundle:
    x: PathBatch                 # GFBM component
    b_tilde: PathBatch           # independent Brownian driver
    b_increments: np.ndarray     # (n_paths, n) increments of the shared driver B
    rho: float

    @property
    def y(self) -> PathBatch:
        return PathBatch(self.x.grid, self.x.values + self.b_tilde.values, self.x.seed, "mixed", self.x.params, self.x.jitter)

@dataclass(frozen=True)
class FouParams:
    a: float
    m: float = 0.0
    nu: float = 1.0
    z0: float = 0.0

    def __post_init__(self):
        if not self.a > 0: raise DomainError(f"fOU mean reversion a={self.a} must be > 0")
        if self.nu < 0: raise DomainError(f"fOU nu={self.nu} must be >= 0")

@dataclass(frozen=True)
class ShotNoiseParams:
    rate: float
    alpha: float
    gamma: float
    epsilon: float
    window: float
    noise_scale: float = 1.0     # multiplies K2; 0 switches the marks off

    def __post_init__(self):
        for name in ("rate", "epsilon", "window"):
            if not getattr(self, name) > 0: raise DomainError(f"shot noise {name}={getattr(self, name)} must be > 0")
        if not 0 < self.alpha < 0.5: raise DomainError(f"shot noise alpha={self.alpha} outside (0, 1/2)")
        if not 0 < self.gamma < 1: raise DomainError(f"shot noise gamma={self.gamma} outside (0, 1)")
        if self.noise_scale < 0: raise DomainError(f"noise_scale={self.noise_scale} must be >= 0")

    @property
    def hurst(self) -> float: return self.alpha - self.gamma / 2 + 0.5

# ---- Variation ----
@dataclass
class VariationStat:
    p: float
    partition_n: int
    value: float
    limit_rho: float             # rho * t when p == 1/H, else nan
    regime: str                  # subcritical|critical|supercritical (p*H vs 1)
    limit: float = float("nan")  # L1 limit of the partition sum: 0, inf or the critical value

# ---- Integral equations ----
@dataclass
class WienerHopfGrid:
    horizon: float
    n: int
    nodes: np.ndarray            # panel midpoints s_k
    times: np.ndarray            # slice times t_j = j*h, j = 0..n
    l_values: np.ndarray         # (n, n+1); mean of L(., t_j) over panel k for k < j, nan elsewhere
    residual_norm: float
    condition: float = float("nan")
    params: Optional[GfbmParams] = None

    @property
    def h(self) -> float: return self.horizon / self.n

@dataclass
class VolterraGrid:
    horizon: float
    n: int
    nodes: np.ndarray
    times: np.ndarray
    l_values: np.ndarray         # ell(s_k, t_j) for k < j
    residual_norm: float

    @property
    def h(self) -> float: return self.horizon / self.n

@dataclass
class DensityResult:
    log_density: float
    phi_path: np.ndarray
    w_bar: np.ndarray

    @property
    def density(self) -> float: return math.exp(self.log_density)

# ---- Volatility / market ----
@dataclass(frozen=True)
class BergomiParams:
    eta: float
    xi0: float
    t: float
    T: float
    delta: float
    rho: float = 0.0

    def __post_init__(self):
        if self.eta < 0: raise DomainError(f"eta={self.eta} must be >= 0")
        if not self.xi0 > 0: raise DomainError(f"xi0={self.xi0} must be > 0")
        if not 0 <= self.t <= self.T: raise DomainError(f"need 0 <= t <= T (t={self.t}, T={self.T})")
        if not self.delta > 0: raise DomainError(f"delta={self.delta} must be > 0")
        if not -1 < self.rho < 1: raise DomainError(f"rho={self.rho} outside (-1, 1)")

@dataclass
class BergomiMcResult:
    sigma_T: np.ndarray          # samples of the averaged variance over [T, T+delta]
    var_log_sqrt: float
    stderr: float
    n_paths: int
    seed: int
    v_min: float                 # smallest sampled instantaneous variance
    v_mean: float                # MC mean of v at the last grid point
    v_mean_stderr: float
    log_s_T: Optional[np.ndarray] = None   # terminal log-price samples, log S(t) = 0

@dataclass(frozen=True)
class MarketParams:
    mu: float
    sigma: float
    r: float = 0.0
    p0: float = 1.0
    theta: float = field(init=False)

    def __post_init__(self):
        if not self.sigma > 0: raise DomainError(f"sigma={self.sigma} must be > 0")
        if self.r < 0: raise DomainError(f"r={self.r} must be >= 0")
        if not self.p0 > 0: raise DomainError(f"p0={self.p0} must be > 0")
        object.__setattr__(self, "theta", (self.mu - self.r) / self.sigma)

@dataclass
class MartingaleReport:
    estimate: float
    stderr: float
    n_paths: int
    seed: int
    params: Dict[str, Any]
    deviation_se: float          # |estimate - p0| / stderr
    call_strike: float = float("nan")
    call_estimate: float = float("nan")
    call_stderr: float = float("nan")

@dataclass
class ArbitrageReport:
    model: str                   # bachelier|black_scholes
    levels: Tuple[int, ...]
    mean_errors: Tuple[float, ...]
    monotone_fraction: float     # share of paths whose error decreases strictly across levels
    identity_max_error: float
    nonnegative: bool
    terminal_positive: bool
    n_paths: int
    seed: int
    params: Dict[str, Any]
    young_valid: bool = True

# ---- CLI ----
@dataclass
class RunConfig:
    command: str
    options: Dict[str, Any]
    output_path: Optional[str]
    format: str = "csv"          # csv|json
    seed: int = 0
    threads: int = 1
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
