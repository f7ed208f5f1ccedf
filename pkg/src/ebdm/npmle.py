"""Nonparametric maximum-likelihood deconvolution on a fixed grid.

Estimates the mixing distribution of standardized effects by maximizing
the marginal likelihood of z-scores under a unit-variance Gaussian
kernel, over discrete distributions supported on a grid. The solver is
the EM fixed point

    f_j <- f_j * (1/n) * sum_i phi(z_i - u_j) / sum_l phi(z_i - u_l) f_l,

which is monotone in the likelihood and preserves the simplex. All
density sums are evaluated in log-space with per-observation
max-subtraction, so observations far from the grid stay representable.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFallbackWarning, NumericalError, ValidationError

_LOG_2PI = math.log(2.0 * math.pi)

# Unscaled log-densities below this underflow to zero in linear space;
# used to detect observations effectively outside the grid.
_LOG_TINY = math.log(np.finfo(float).tiny)


@dataclass(frozen=True)
class NpmleConfig:
    """Solver settings: grid size/padding, stopping rule, iteration cap."""

    grid_size: int = 300
    pad: float = 1.0
    tol: float = 1e-8
    max_iter: int = 10_000

    def __post_init__(self):
        if self.grid_size < 2:
            raise ValidationError("grid_size must be >= 2")
        if self.pad < 0:
            raise ValidationError("pad must be >= 0")
        if self.tol <= 0:
            raise ValidationError("tol must be > 0")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")


@dataclass(frozen=True)
class Grid:
    """Strictly increasing support points for the discrete distribution."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValidationError("grid needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise ValidationError("grid points must be strictly increasing")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class DiscreteDistribution:
    """Grid atoms with probabilities: the fitted mixing distribution."""

    grid: Grid
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != self.grid.points.shape:
            raise ValidationError("weights must match the grid length")
        if np.any(w < 0):
            raise ValidationError("weights must be >= 0")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValidationError(f"weights must sum to 1, got {w.sum()!r}")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class FitReport:
    """Outcome of one EM fit: final likelihood, iterations, trace."""

    log_likelihood: float
    iterations: int
    converged: bool
    trace: tuple[float, ...] = field(repr=False)


def make_grid(z, m: int = 300, pad: float = 1.0) -> Grid:
    """Equally spaced grid covering [min(z) - pad, max(z) + pad].

    Degenerate all-equal data yields a symmetric interval around the
    common value with half-width max(pad, 1).
    """
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        raise ValidationError("cannot build a grid from empty data")
    if m < 2:
        raise ValidationError("grid size must be >= 2")
    if pad < 0:
        raise ValidationError("pad must be >= 0")
    lo, hi = float(z.min()), float(z.max())
    if lo == hi:
        half = max(pad, 1.0)
        lo, hi = lo - half, hi + half
    else:
        lo, hi = lo - pad, hi + pad
    return Grid(np.linspace(lo, hi, m))


def _scaled_kernel(z: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-scaled kernel matrix: exp(logphi - rowmax) and the row maxima.

    Responsibilities and posterior means are invariant to per-row
    scaling, so EM can run on the scaled matrix exactly; the row maxima
    re-enter only in the log-likelihood.
    """
    logd = -0.5 * np.square(z[:, None] - u[None, :]) - 0.5 * _LOG_2PI
    rowmax = logd.max(axis=1)
    return np.exp(logd - rowmax[:, None]), rowmax


def fit_npmle(
    z,
    grid: Grid,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> tuple[DiscreteDistribution, FitReport]:
    """Maximize the marginal likelihood of z over weights on the grid.

    Runs the EM fixed point from uniform weights until the likelihood
    gain per iteration drops below tol or max_iter is reached. If an
    observation has zero marginal density under the initial weights
    (it lies hopelessly far outside the grid), the grid is rebuilt once
    to cover the data; a second failure raises.
    """
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        raise ValidationError("cannot fit on empty data")
    if not np.all(np.isfinite(z)):
        raise ValidationError("z values must be finite")
    if tol <= 0:
        raise ValidationError("tol must be > 0")

    for attempt in range(2):
        u = grid.points
        m = u.size
        D, rowmax = _scaled_kernel(z, u)
        # Marginal log-density of each point under uniform initial weights.
        init_logdens = rowmax + np.log(D.mean(axis=1))
        dead = init_logdens < _LOG_TINY
        if not np.any(dead):
            break
        if attempt == 1:
            idx = np.flatnonzero(dead)[:10]
            raise NumericalError(
                f"{int(dead.sum())} observation(s) have zero marginal density even "
                f"after widening the grid (first indices: {idx.tolist()})"
            )
        grid = make_grid(z, m=m, pad=1.0)

    n = z.size
    f = np.full(m, 1.0 / m)
    summax = float(rowmax.sum())
    q = D @ f
    ll = float(np.log(q).sum() + summax)
    trace = [ll]
    converged = False
    iterations = 0
    for _ in range(max_iter):
        f = f * (D.T @ (1.0 / q)) / n
        f /= f.sum()
        iterations += 1
        q = D @ f
        ll_new = float(np.log(q).sum() + summax)
        trace.append(ll_new)
        gain = ll_new - ll
        ll = ll_new
        if gain < tol:
            converged = True
            break
    dist = DiscreteDistribution(grid=grid, weights=f)
    report = FitReport(
        log_likelihood=ll, iterations=iterations, converged=converged, trace=tuple(trace)
    )
    return dist, report


def log_likelihood(dist: DiscreteDistribution, z) -> float:
    """Marginal log-likelihood of z under the discrete distribution.

    Uses the same row-scaled evaluation as the solver, so it agrees
    bit-for-bit with the trace entry for the fitted weights.
    """
    z = np.asarray(z, dtype=float)
    D, rowmax = _scaled_kernel(z, dist.grid.points)
    q = D @ dist.weights
    with np.errstate(divide="ignore"):
        return float(np.log(q).sum() + rowmax.sum())


def posterior_mean_scaled(dist: DiscreteDistribution, z: float, sigma: float) -> float:
    """Plug-in posterior mean of the effect at z-score z and scale sigma.

    sigma * sum_j u_j phi(z - u_j) f_j / sum_j phi(z - u_j) f_j.
    """
    if sigma <= 0:
        raise ValidationError(f"sigma must be > 0, got {sigma}")
    return float(posterior_means_scaled(dist, np.array([float(z)]), float(sigma))[0])


def posterior_means_scaled(dist: DiscreteDistribution, zs, sigmas) -> np.ndarray:
    """Vectorized ``posterior_mean_scaled`` over paired (z, sigma) arrays."""
    zs = np.asarray(zs, dtype=float)
    sigmas = np.broadcast_to(np.asarray(sigmas, dtype=float), zs.shape)
    if np.any(sigmas <= 0):
        raise ValidationError("sigma values must be > 0")
    u = dist.grid.points
    with np.errstate(divide="ignore"):
        logw = (
            -0.5 * np.square(zs[:, None] - u[None, :])
            - 0.5 * _LOG_2PI
            + np.log(dist.weights)[None, :]
        )
    rowmax = logw.max(axis=1)
    bad = ~np.isfinite(rowmax)
    w = np.exp(logw - np.where(bad, 0.0, rowmax)[:, None])
    means = (w @ u) / w.sum(axis=1)
    if np.any(bad):
        warnings.warn(
            f"{int(bad.sum())} z-score(s) underflowed every atom; using nearest atom",
            DegenerateFallbackWarning,
        )
        live = dist.weights > 0
        live_u = u[live]
        nearest = live_u[np.argmin(np.abs(zs[bad, None] - live_u[None, :]), axis=1)]
        means[bad] = nearest
    return sigmas * means
