"""Posterior means and payoffs when the effect follows a Gaussian mixture.

The posterior mean given one signal is a responsibility-weighted average
of per-component shrinkage means; responsibilities are computed in
log-space so signals far in a tail do not underflow. The expected payoff
under a mixture has no convenient closed form, so it is defined by
seeded Monte Carlo.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFallbackWarning, ValidationError
from .gaussian import _require_finite
from .seeds import make_rng

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianMixturePrior:
    """Finite Gaussian mixture for the latent payoff.

    components is an ordered tuple of (weight, mean, variance) triples;
    weights must be non-negative and sum to one within 1e-12.
    """

    components: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        comps = tuple((float(p), float(m), float(g)) for p, m, g in self.components)
        if len(comps) < 1:
            raise ValidationError("mixture needs at least one component")
        for p, m, g in comps:
            _require_finite("weight", p)
            _require_finite("component mean", m)
            _require_finite("component variance", g)
            if p < 0:
                raise ValidationError(f"component weight must be >= 0, got {p}")
            if g < 0:
                raise ValidationError(f"component variance must be >= 0, got {g}")
        total = math.fsum(p for p, _, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"component weights must sum to 1, got {total!r}")
        object.__setattr__(self, "components", comps)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([p for p, _, _ in self.components])

    @property
    def means(self) -> np.ndarray:
        return np.array([m for _, m, _ in self.components])

    @property
    def variances(self) -> np.ndarray:
        return np.array([g for _, _, g in self.components])

    @property
    def mean(self) -> float:
        return float(np.dot(self.weights, self.means))


@dataclass(frozen=True)
class MonteCarloEstimate:
    """A Monte Carlo average with its standard error."""

    value: float
    std_error: float
    n_draws: int


def _component_posteriors(
    prior: GaussianMixturePrior, tau_hats: np.ndarray, sigma_sq: float
) -> tuple[np.ndarray, np.ndarray]:
    """Log responsibilities and per-component posterior means.

    Returns (logw, post_means), both with shape (n, k). logw rows are
    unnormalized: log p_j - log sqrt(gamma_j^2 + sigma^2) - quadratic.
    """
    p = prior.weights
    mu = prior.means
    g = prior.variances
    totals = g + sigma_sq
    if np.any(totals == 0.0):
        raise ValidationError(
            "mixture posterior undefined: a component and the signal are both noiseless"
        )
    resid = tau_hats[:, None] - mu[None, :]
    with np.errstate(divide="ignore"):
        logw = np.log(p)[None, :] - 0.5 * np.log(totals)[None, :] - 0.5 * resid**2 / totals[None, :]
    post_means = mu[None, :] + resid * (g / totals)[None, :]
    return logw, post_means


def _posterior_means_from_log(
    logw: np.ndarray, post_means: np.ndarray, standardized: np.ndarray
) -> np.ndarray:
    """Responsibility-average posterior means with max-subtraction.

    Rows whose responsibilities all underflow (or are NaN from an inf
    quadratic) fall back to the nearest component by standardized
    distance, with a warning.
    """
    rowmax = np.max(logw, axis=1)
    bad = ~np.isfinite(rowmax)
    safe_rowmax = np.where(bad, 0.0, rowmax)
    w = np.exp(logw - safe_rowmax[:, None])
    w_total = w.sum(axis=1)
    out = np.einsum("ij,ij->i", w, post_means) / w_total
    if np.any(bad):
        warnings.warn(
            f"{int(bad.sum())} signal(s) degenerate under every mixture component; "
            "using the nearest component's posterior mean",
            DegenerateFallbackWarning,
        )
        nearest = np.argmin(standardized, axis=1)
        out[bad] = post_means[bad, nearest[bad]]
    return out


def mixture_posterior_mean(prior: GaussianMixturePrior, signal) -> float:
    """Posterior mean of the payoff given one signal, under a mixture.

    With a single component this reduces exactly to the Gaussian
    posterior mean. Component responsibilities are evaluated in
    log-space with max-subtraction.
    """
    sigma_sq = float(signal.sigma_sq)
    if sigma_sq == 0.0 and np.any(prior.variances == 0.0):
        raise ValidationError(
            "sigma_sq = 0 requires all mixture components non-degenerate"
        )
    tau_hats = np.array([float(signal.tau_hat)])
    logw, post_means = _component_posteriors(prior, tau_hats, sigma_sq)
    standardized = np.abs(tau_hats[:, None] - prior.means[None, :]) / np.sqrt(
        prior.variances + sigma_sq
    )[None, :]
    return float(_posterior_means_from_log(logw, post_means, standardized)[0])


def _mixture_posterior_mean_many(
    prior: GaussianMixturePrior, tau_hats: np.ndarray, sigma_sq: float
) -> np.ndarray:
    """Vectorized posterior means for an array of signals at one variance."""
    logw, post_means = _component_posteriors(prior, tau_hats, sigma_sq)
    standardized = np.abs(tau_hats[:, None] - prior.means[None, :]) / np.sqrt(
        prior.variances + sigma_sq
    )[None, :]
    return _posterior_means_from_log(logw, post_means, standardized)


def sample_mixture(prior: GaussianMixturePrior, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n effects from the mixture (component choice, then normal)."""
    comp = rng.choice(prior.k, size=n, p=prior.weights)
    return prior.means[comp] + np.sqrt(prior.variances[comp]) * rng.standard_normal(n)


def mixture_expected_payoff_mc(
    prior: GaussianMixturePrior,
    sigma_sq: float,
    c_launch: float = 0.0,
    n_draws: int = 500_000,
    seed: int = 0,
) -> MonteCarloEstimate:
    """Monte Carlo expected payoff of the evidence-based rule under a mixture.

    Draws effects from the mixture, adds Gaussian signal noise at
    variance sigma_sq, and averages max(posterior mean - c_launch, 0).
    Deterministic for a fixed seed (counter-based generator).
    """
    if n_draws < 1:
        raise ValidationError(f"n_draws must be >= 1, got {n_draws}")
    if sigma_sq < 0:
        raise ValidationError(f"sigma_sq must be >= 0, got {sigma_sq}")
    rng = make_rng(seed)
    tau = sample_mixture(prior, n_draws, rng)
    tau_hats = tau + math.sqrt(sigma_sq) * rng.standard_normal(n_draws)
    post = _mixture_posterior_mean_many(prior, tau_hats, sigma_sq)
    vals = np.maximum(post - c_launch, 0.0)
    se = float(vals.std(ddof=1) / math.sqrt(n_draws)) if n_draws > 1 else float("nan")
    return MonteCarloEstimate(value=float(vals.mean()), std_error=se, n_draws=n_draws)
