"""Exact Gaussian path simulation by covariance factorization, plus the fOU and shot-noise samplers."""
import math
from typing import Optional, Sequence, Tuple
import numpy as np
from scipy.linalg import cholesky, eigvalsh, LinAlgError
from .constants import JITTER_LADDER, SHOT_WINDOW_TOL
from .covariance import cov_matrix, driver_cov
from .errors import DomainError, NumericalError
from .helpers import pmap
from .logging_setup import log
from .models import (GfbmParams, RlParams, FouParams, ShotNoiseParams, TimeGrid, PathBatch, PathBundle,
                     QuadratureSpec)
from .quadrature import pair_head, pair_tail, power_product

# ---- Grids ----
def make_grid(points: Sequence[float]) -> TimeGrid:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or len(pts) < 2: raise DomainError("a time grid needs at least two points")
    if pts[0] != 0: raise DomainError(f"a time grid starts at 0, got t0={pts[0]!r}")
    d = np.diff(pts)
    if not np.all(d > 0): raise DomainError("grid points must be strictly increasing")
    return TimeGrid(pts, bool(np.allclose(d, d[0], rtol=1e-12, atol=0.0)), float(d.max()))

def uniform_grid(T: float, n: int) -> TimeGrid:
    if not T > 0: raise DomainError(f"horizon T={T!r} must be > 0")
    if n < 1: raise DomainError(f"grid size n={n} must be >= 1")
    pts = np.arange(n + 1, dtype=float) * (T / n); pts[-1] = T
    return TimeGrid(pts, True, T / n)

# ---- Factorization and draws ----
def factorize(cov: np.ndarray) -> Tuple[np.ndarray, float]:
    """Lower Cholesky factor, adding delta * trace/n to the diagonal on failure; returns (factor, delta)."""
    n = cov.shape[0]
    try:
        return cholesky(cov, lower=True), 0.0
    except LinAlgError:
        pass
    scale = float(np.trace(cov)) / n
    for delta in JITTER_LADDER:
        try:
            f = cholesky(cov + delta * scale * np.eye(n), lower=True)
            log.warning(f"covariance not positive definite; factorized with jitter delta={delta:g}")
            return f, delta
        except LinAlgError:
            continue
    lam = float(eigvalsh(cov, subset_by_index=[0, 0])[0])
    raise NumericalError(f"covariance factorization failed after jitter {JITTER_LADDER[-1]:g}; "
                         f"minimum eigenvalue {lam:.3e}", estimate=lam)

def normals(seed: int, n_paths: int, dim: int) -> np.ndarray:
    """Row p comes from child p of SeedSequence(seed), independent of scheduling."""
    if n_paths < 1: raise DomainError(f"n_paths={n_paths} must be >= 1")
    kids = np.random.SeedSequence(seed).spawn(n_paths)
    return np.stack([np.random.default_rng(k).standard_normal(dim) for k in kids])

def _with_origin(grid, cov):
    # X(0) = 0 is deterministic; factorize the positive times only
    if grid.points[0] != 0: raise DomainError("grid must start at 0")
    return cov[1:, 1:]

def _sample_cov(cov, grid, n_paths, seed, label, params):
    f, delta = factorize(_with_origin(grid, cov))
    z = normals(seed, n_paths, f.shape[0])
    vals = np.zeros((n_paths, grid.n + 1))
    vals[:, 1:] = z @ f.T
    return PathBatch(grid, vals, seed, label, params, delta)

def sample_gfbm(params: GfbmParams, grid: TimeGrid, n_paths: int, seed: int, spec: QuadratureSpec = None,
                threads: Optional[int] = None) -> PathBatch:
    cov = cov_matrix(params, grid.points, spec, threads)
    return _sample_cov(cov, grid, n_paths, seed, "gfbm", params)

def sample_rl_gfbm(params: RlParams, grid: TimeGrid, n_paths: int, seed: int, spec: QuadratureSpec = None,
                   threads: Optional[int] = None) -> PathBatch:
    cov = cov_matrix(params, grid.points, spec, threads, kind="rl_gfbm")
    return _sample_cov(cov, grid, n_paths, seed, "rl_gfbm", params)

def sample_bm(grid: TimeGrid, n_paths: int, seed: int) -> PathBatch:
    z = normals(seed, n_paths, grid.n)
    vals = np.zeros((n_paths, grid.n + 1))
    vals[:, 1:] = np.cumsum(z * np.sqrt(np.diff(grid.points)), axis=1)
    return PathBatch(grid, vals, seed, "bm")

def joint_cov(params: GfbmParams, grid: TimeGrid, spec: QuadratureSpec = None,
              threads: Optional[int] = None) -> np.ndarray:
    """Covariance of (X(t_1..t_n), B(t_1..t_n)) with B the Brownian motion driving X."""
    t = grid.points[1:]; n = len(t)
    cx = cov_matrix(params, grid.points, spec, threads)[1:, 1:]
    pairs = [(i, k) for i in range(n) for k in range(n)]
    vals = pmap(lambda ik: driver_cov(params.c, params.alpha, params.gamma, t[ik[0]], t[ik[1]], spec), pairs, threads)
    cxb = np.array(vals).reshape(n, n)
    return np.block([[cx, cxb], [cxb.T, np.minimum.outer(t, t)]])

def sample_bundle(params: GfbmParams, grid: TimeGrid, n_paths: int, seed: int, rho: float = 0.0,
                  spec: QuadratureSpec = None, threads: Optional[int] = None) -> PathBundle:
    """X with its driving increments, plus an independent Brownian motion B~."""
    if not -1 < rho < 1: raise DomainError(f"rho={rho} outside (-1, 1)")
    n = grid.n
    f, delta = factorize(joint_cov(params, grid, spec, threads))
    z = normals(seed, n_paths, 3 * n)
    xb = z[:, :2 * n] @ f.T
    x = np.zeros((n_paths, n + 1)); x[:, 1:] = xb[:, :n]
    b = np.zeros((n_paths, n + 1)); b[:, 1:] = xb[:, n:]
    bt = np.zeros((n_paths, n + 1)); bt[:, 1:] = np.cumsum(z[:, 2 * n:] * np.sqrt(np.diff(grid.points)), axis=1)
    return PathBundle(PathBatch(grid, x, seed, "gfbm", params, delta), PathBatch(grid, bt, seed, "bm"),
                      np.diff(b, axis=1), rho)

def sample_mixed(params: GfbmParams, grid: TimeGrid, n_paths: int, seed: int, spec: QuadratureSpec = None,
                 threads: Optional[int] = None) -> PathBatch:
    """Y = B~ + X with B~ independent of X."""
    cov = cov_matrix(params, grid.points, spec, threads)
    f, delta = factorize(_with_origin(grid, cov))
    n = grid.n
    z = normals(seed, n_paths, 2 * n)
    vals = np.zeros((n_paths, n + 1))
    vals[:, 1:] = z[:, :n] @ f.T + np.cumsum(z[:, n:] * np.sqrt(np.diff(grid.points)), axis=1)
    return PathBatch(grid, vals, seed, "mixed", params, delta)

# ---- fOU ----
def fou_from_path(fou: FouParams, grid: TimeGrid, x_values: np.ndarray) -> np.ndarray:
    """Z(t_k) = z0 e^{-a t_k} + m (1 - e^{-a t_k}) + nu [X(t_k) - a int_0^t_k e^{-a(t_k-s)} X(s) ds], trapezoid in time."""
    x = np.atleast_2d(np.asarray(x_values, dtype=float))
    t = grid.points; a = fou.a
    decay = np.exp(-a * np.diff(t))
    conv = np.zeros_like(x)
    for k in range(1, len(t)):
        conv[:, k] = decay[k - 1] * conv[:, k - 1] + 0.5 * (t[k] - t[k - 1]) * (decay[k - 1] * x[:, k - 1] + x[:, k])
    e = np.exp(-a * t)
    z = fou.z0 * e + fou.m * (1 - e) + fou.nu * (x - a * conv)
    return z if np.ndim(x_values) > 1 else z[0]

def sample_fou(params: GfbmParams, fou: FouParams, grid: TimeGrid, n_paths: int, seed: int,
               spec: QuadratureSpec = None, threads: Optional[int] = None) -> PathBatch:
    if not grid.uniform:
        log.warning("fOU on a non-uniform grid: the trapezoid convolution loses its second-order behaviour")
    x = sample_gfbm(params, grid, n_paths, seed, spec, threads)
    return PathBatch(grid, fou_from_path(fou, grid, x.values), seed, "fou", params, x.jitter)

# ---- Shot noise ----
def shot_noise_variance(sn: ShotNoiseParams, t: float, window: Optional[float] = None,
                        spec: QuadratureSpec = None) -> float:
    """Var of eps^H Z(t/eps) with arrivals on [-window, window]; window=inf gives rate t^2H / (alpha^2 c^2)."""
    W = sn.window if window is None else window
    a, g, eps = sn.alpha, sn.gamma, sn.epsilon
    s = t / eps
    if not t > 0: return 0.0
    if s > W: raise DomainError(f"t/epsilon={s:g} exceeds the arrival window {W:g}")
    past = pair_head(s, s, 0.0, a, g, s, spec) + pair_tail(s, s, 0.0, a, g, s, spec)
    if math.isfinite(W): past -= pair_tail(s, s, 0.0, a, g, W, spec)
    recent = power_product(0.0, s, s, 2 * a, s, 0.0, g, spec)
    return eps ** (2 * sn.hurst) * sn.rate * sn.noise_scale * (past + recent) / (a * a)

def _shot_path(sn, s, rng):
    W, a = sn.window, sn.alpha
    k = rng.poisson(sn.rate * 2 * W)
    tau = rng.uniform(-W, W, size=k)
    r = rng.standard_normal(k) * np.sqrt(sn.noise_scale * np.abs(tau) ** -sn.gamma)
    with np.errstate(invalid="ignore"):
        g_now = np.where(s[:, None] > tau[None, :], np.abs(s[:, None] - tau[None, :]) ** a, 0.0) / a
    g_0 = np.where(tau < 0, np.abs(tau) ** a, 0.0) / a
    return (g_now - g_0[None, :]) @ r

def sample_shot_noise_prelimit(sn: ShotNoiseParams, grid: TimeGrid, n_paths: int, seed: int,
                               spec: QuadratureSpec = None) -> PathBatch:
    """eps^H Z(t/eps) on the grid; Z sums (g(t-tau_j) - g(-tau_j)) R_j over Poisson arrivals on [-W, W]."""
    if grid.horizon > sn.window * sn.epsilon:
        raise DomainError(f"grid horizon {grid.horizon:g} exceeds window*epsilon={sn.window * sn.epsilon:g}")
    t_ref = grid.horizon
    v1 = shot_noise_variance(sn, t_ref, sn.window, spec)
    v2 = shot_noise_variance(sn, t_ref, 2 * sn.window, spec)
    if v2 > 0 and abs(v2 - v1) / v2 > SHOT_WINDOW_TOL:
        log.warning(f"shot-noise window {sn.window:g} truncates {abs(v2 - v1) / v2:.1%} of Var at t={t_ref:g}")
    s = grid.points / sn.epsilon
    kids = np.random.SeedSequence(seed).spawn(n_paths)
    vals = np.stack([_shot_path(sn, s, np.random.default_rng(k)) for k in kids])
    return PathBatch(grid, sn.epsilon ** sn.hurst * vals, seed, "shot_noise", sn)
