"""Panel-averaged solution of the Wiener-Hopf and Volterra equations and the Girsanov densities of the mixed GFBM.

Uniform panels of width h = T/n with midpoints s_k; slices are t_j = j h and
slice j uses the first j panels. L(., t_j) is piecewise constant, and each
equation is integrated over a panel, so every weight is an exact moment of K:

    int_{P_i} int_{P_k} K = E[dX_i dX_k]        int_{P_i} K(s, t) ds = dPsi/dr(t, .) differenced

Both come from Psi on the unit grid through K(k u, k v) = k^(2H-2) K(u, v); the
singular diagonal needs no special panel rule. ``l_values[k, j]`` holds the mean
of L(., t_j) over panel k, which makes sum_k L dY_k the Gaussian projection of
the drift onto the observed increments.
"""
from dataclasses import replace
from typing import Callable, Optional
import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import roots_legendre
from .constants import WH_MIN_NODES, WH_COND_MAX
from .covariance import cov_matrix, ds_table, k_matrix, psi_ds, region_one
from .errors import DomainError, NumericalError
from .helpers import pmap
from .logging_setup import log
from .models import (GfbmParams, MarketParams, WienerHopfGrid, VolterraGrid, DensityResult, GaussianPath,
                     PathBatch, TimeGrid, QuadratureSpec)
from .quadrature import DEFAULT_SPEC
from .simulate import factorize, normals

RESIDUAL_TOL = 1e-6
REFINE = 10.0        # tolerance divisor for the residual re-check
HOOK_ORDER = 4       # Gauss-Legendre points per panel for kernel callables

def _gfbm_moments(params, T, n, spec, threads):
    """(C, B): C[i, k] = int_{P_i} int_{P_k} K, B[i, j] = int_{P_i} K(s, t_j) ds."""
    h = T / n
    P = np.asarray(cov_matrix(params, np.arange(n + 1.0), spec, threads))
    C = P[1:, 1:] - P[1:, :-1] - P[:-1, 1:] + P[:-1, :-1]
    G = ds_table(params, n, spec, threads)
    B = np.full((n, n + 1), np.nan)
    for j in range(1, n + 1): B[:j, j] = np.diff(G[:j + 1, j])
    return C * h ** (2 * params.hurst), B * h ** (2 * params.hurst - 1)

def _hook_moments(kernel, T, n, order):
    h = T / n
    x, w = roots_legendre(order)
    pts = ((np.arange(n)[:, None] + 0.5 + 0.5 * x[None, :]) * h).ravel()
    wts = np.tile(0.5 * h * w, n)
    kv = np.array([[kernel(u, v) for v in pts] for u in pts], dtype=float)
    C = (kv * np.outer(wts, wts)).reshape(n, order, n, order).sum(axis=(1, 3))
    B = np.full((n, n + 1), np.nan)
    for j in range(1, n + 1):
        m = j * order
        kt = np.array([kernel(u, j * h) for u in pts[:m]], dtype=float)
        B[:j, j] = (kt * wts[:m]).reshape(j, order).sum(axis=1)
    return C, B

def _residual(L, C, B, h):
    # panel-averaged eqn WH on every slice, scaled by 1 + max |mean K(., t_j)|
    n, res = C.shape[0], 0.0
    for j in range(1, n + 1):
        a = L[:j, j]
        res = max(res, float(np.max(np.abs(a + (C[:j, :j] @ a + B[:j, j]) / h))))
    return res / (1 + float(np.nanmax(np.abs(B))) / h)

def solve_wiener_hopf(params: Optional[GfbmParams], T: float, n: int, *, kernel: Optional[Callable] = None,
                      spec: QuadratureSpec = None, threads: Optional[int] = None) -> WienerHopfGrid:
    """L(s, t) + int_0^t L(r, t) K(r, s) dr = -K(s, t) on every slice t_j.

    ``residual_norm`` re-evaluates the equations with moments integrated at tolerances
    divided by ``REFINE`` (or twice the Gauss order for a kernel callable).
    """
    if n < WH_MIN_NODES: raise DomainError(f"n={n} < {WH_MIN_NODES} nodes per slice")
    if not T > 0: raise DomainError(f"T={T!r} must be > 0")
    h = T / n
    if kernel is None:
        if params is None: raise DomainError("solve_wiener_hopf needs params or a kernel")
        if not params.hurst > 0.5:
            raise DomainError(f"Wiener-Hopf needs H > 1/2, i.e. alpha > gamma/2 (alpha={params.alpha:g}, gamma={params.gamma:g})")
        spec = spec or DEFAULT_SPEC
        C, B = _gfbm_moments(params, T, n, spec, threads)
        fine = lambda: _gfbm_moments(params, T, n, replace(spec, abs_tol=spec.abs_tol / REFINE,
                                                           rel_tol=spec.rel_tol / REFINE), threads)
    else:
        C, B = _hook_moments(kernel, T, n, HOOK_ORDER)
        fine = lambda: _hook_moments(kernel, T, n, 2 * HOOK_ORDER)
    A = np.eye(n) + C / h
    cond = float(np.linalg.cond(A))
    if not cond < WH_COND_MAX:
        raise NumericalError(f"Wiener-Hopf system ill-conditioned: condition estimate {cond:.3e} > {WH_COND_MAX:g}", estimate=cond)
    L = np.full((n, n + 1), np.nan)
    for j in range(1, n + 1):
        L[:j, j] = np.linalg.solve(A[:j, :j], -B[:j, j] / h)
    residual = _residual(L, *fine(), h)
    if residual > RESIDUAL_TOL: log.warning(f"Wiener-Hopf residual {residual:.3e} above {RESIDUAL_TOL:g}")
    log.info(f"Wiener-Hopf solved: n={n}, T={T:g}, cond={cond:.3e}, residual={residual:.3e}")
    return WienerHopfGrid(T, n, (np.arange(n) + 0.5) * h, np.arange(n + 1) * h, L, residual, cond, params)

def solve_volterra(wh: WienerHopfGrid) -> VolterraGrid:
    """ell(s_k, t_j) + h sum_{k<m<j} ell(s_m, t_j) L(s_k, t_m) = L(s_k, t_j), back-substituted in k."""
    n, h, L = wh.n, wh.h, wh.l_values
    ell = np.full((n, n + 1), np.nan)
    for j in range(1, n + 1):
        col = np.zeros(j)
        for k in range(j - 1, -1, -1):
            acc = h * float(np.dot(col[k + 1:j], L[k, k + 1:j])) if k + 1 < j else 0.0
            col[k] = L[k, j] - acc
        ell[:j, j] = col
    # residual over the whole triangle
    D, E = np.nan_to_num(L, nan=0.0), np.nan_to_num(ell, nan=0.0)
    res = float(np.max(np.abs(E + h * D[:, :-1] @ E - D))) / (1 + float(np.max(np.abs(D))))
    if res > RESIDUAL_TOL: log.warning(f"Volterra residual {res:.3e} above {RESIDUAL_TOL:g}")
    return VolterraGrid(wh.horizon, n, wh.nodes, wh.times, ell, res)

# ---- Path functionals ----
def _dense(lv):
    # (n, n+1) with nan -> zeros; column j holds the weights of the increments before t_j
    z = np.nan_to_num(lv, nan=0.0)
    return z[:, :-1]

def _values(y, n):
    v = np.atleast_2d(np.asarray(y.values if hasattr(y, "values") else y, dtype=float))
    if v.shape[1] != n + 1: raise DomainError(f"grid mismatch: path has {v.shape[1]} points, expected {n + 1}")
    return v

def _check_grid(wh, y):
    g = getattr(y, "grid", None)
    if g is not None and (len(g.points) != wh.n + 1 or not np.allclose(g.points, wh.times, rtol=1e-12, atol=1e-14)):
        raise DomainError("grid mismatch: path grid differs from the Wiener-Hopf slice times")

def phi_matrix(wh: WienerHopfGrid, y) -> np.ndarray:
    """phi(t_j) = sum_{k<j} L(s_k, t_j) dY_k for every path row; shape (n_paths, n)."""
    _check_grid(wh, y)
    dy = np.diff(_values(y, wh.n), axis=1)
    return dy @ _dense(wh.l_values)

def w_bar_matrix(wh: WienerHopfGrid, y, phi=None) -> np.ndarray:
    v = _values(y, wh.n)
    phi = phi_matrix(wh, y) if phi is None else phi
    w = np.zeros_like(v)
    w[:, 1:] = np.cumsum(np.diff(v, axis=1) + wh.h * phi, axis=1)
    return w

def rn_log_densities(wh: WienerHopfGrid, y) -> np.ndarray:
    dy = np.diff(_values(y, wh.n), axis=1)
    phi = phi_matrix(wh, y)
    return -np.sum(phi * dy, axis=1) - 0.5 * wh.h * np.sum(phi ** 2, axis=1)

def emm_log_densities(wh: WienerHopfGrid, y, market: MarketParams, phi=None) -> np.ndarray:
    dy = np.diff(_values(y, wh.n), axis=1)
    phi = phi_matrix(wh, y) if phi is None else phi
    th = market.theta
    return -np.sum((th - phi) * dy, axis=1) - 0.5 * wh.h * np.sum(th * th - phi ** 2, axis=1)

def _single(y):
    if isinstance(y, PathBatch): raise DomainError("pass one GaussianPath; use the *_matrix helpers for batches")
    return y

def phi_path(wh: WienerHopfGrid, y: GaussianPath) -> DensityResult:
    y = _single(y)
    phi = phi_matrix(wh, y)
    return DensityResult(float("nan"), phi[0], w_bar_matrix(wh, y, phi)[0])

def rn_density(wh: WienerHopfGrid, y: GaussianPath) -> DensityResult:
    """log = -sum phi dY - h/2 sum phi^2 (left-point sums)."""
    y = _single(y)
    phi = phi_matrix(wh, y)
    return DensityResult(float(rn_log_densities(wh, y)[0]), phi[0], w_bar_matrix(wh, y, phi)[0])

def emm_density(wh: WienerHopfGrid, y: GaussianPath, market: MarketParams) -> DensityResult:
    """log dQ/dP = -sum (theta - phi) dY - h/2 sum (theta^2 - phi^2)."""
    y = _single(y)
    if wh.params is not None and not wh.params.hurst > 0.5:
        raise DomainError(f"equivalent martingale measure needs H > 1/2 (H={wh.params.hurst:g})")
    phi = phi_matrix(wh, y)
    return DensityResult(float(emm_log_densities(wh, y, market, phi)[0]), phi[0], w_bar_matrix(wh, y, phi)[0])

def reconstruct_y(vg: VolterraGrid, w_bar) -> np.ndarray:
    """Inverse innovation map: dY_j = dWbar_j - h sum_{k<j} ell(s_k, t_j) dWbar_k."""
    w = _values(w_bar, vg.n)
    dw = np.diff(w, axis=1)
    dy = dw - vg.h * (dw @ _dense(vg.l_values))
    out = np.zeros_like(w); out[:, 1:] = np.cumsum(dy, axis=1)
    return out if np.ndim(getattr(w_bar, "values", w_bar)) > 1 else out[0]

def triangular_rows(grid) -> np.ndarray:
    """(s, t, value) rows of a Wiener-Hopf or Volterra grid for CSV export."""
    rows = [(grid.nodes[k], grid.times[j], grid.l_values[k, j]) for j in range(1, grid.n + 1) for k in range(j)]
    return np.array(rows, dtype=float)

# ---- Region I drift ----
def _check_region_one(params):
    if not region_one(params):
        raise DomainError(f"the finite-variation drift exists in region I only (alpha={params.alpha:g} <= 1/2)")

def drift_lambda(params: GfbmParams, grid: TimeGrid, n_paths: int, seed: int, spec: QuadratureSpec = None,
                 threads: Optional[int] = None) -> PathBatch:
    """lambda~ sampled at the midpoints of the grid intervals; values[:, k] sits at (t_k + t_k+1)/2."""
    _check_region_one(params)
    mids = 0.5 * (grid.points[1:] + grid.points[:-1])
    f, delta = factorize(k_matrix(params, mids, spec, threads))
    z = normals(seed, n_paths, len(mids))
    return PathBatch(grid, z @ f.T, seed, "drift_lambda", params, delta)

def drift_to_x(batch: PathBatch) -> np.ndarray:
    """X(t_j) = sum_{k<j} (t_k+1 - t_k) lambda~(mid_k), midpoint rule."""
    dt = np.diff(batch.grid.points)
    out = np.zeros((len(batch), batch.grid.n + 1))
    out[:, 1:] = np.cumsum(batch.values * dt, axis=1)
    return out

def conditional_drift(params: GfbmParams, grid: TimeGrid, y, spec: QuadratureSpec = None,
                      threads: Optional[int] = None) -> np.ndarray:
    """m(t_j) = E[lambda~(t_j) | Y(t_1..t_j)] by Gaussian projection; m(t_0) = 0. Shape (n_paths, n)."""
    _check_region_one(params)
    t = grid.points[1:]; n = len(t)
    cov_y = np.asarray(cov_matrix(params, grid.points, spec, threads))[1:, 1:] + np.minimum.outer(t, t)
    chol = np.linalg.cholesky(cov_y)
    v = _values(y, n)[:, 1:]
    white = solve_triangular(chol, v.T, lower=True).T
    pairs = [(j, i) for j in range(n) for i in range(j + 1)]
    cv = pmap(lambda ji: psi_ds(params, t[ji[0]], t[ji[1]], spec), pairs, threads)
    cross = np.zeros((n, n))
    for (j, i), c in zip(pairs, cv): cross[j, i] = c
    m = np.zeros((v.shape[0], n))
    for j in range(1, n):
        # drift at t_j uses Y(t_1..t_j): leading (j)x(j) block of the factor
        a = solve_triangular(chol[:j, :j], cross[j - 1, :j], lower=True)
        m[:, j] = white[:, :j] @ a
    return m

def conditional_drift_density(params: GfbmParams, grid: TimeGrid, y, spec: QuadratureSpec = None,
                              threads: Optional[int] = None) -> np.ndarray:
    """log densities sum m dY - 1/2 sum m^2 dt with the projected drift m; one per path."""
    m = conditional_drift(params, grid, y, spec, threads)
    v = _values(y, grid.n)
    dy = np.diff(v, axis=1); dt = np.diff(grid.points)
    return np.sum(m * dy, axis=1) - 0.5 * np.sum(m ** 2 * dt, axis=1)
