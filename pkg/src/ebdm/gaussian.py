"""Closed-form payoff mathematics for a Gaussian effect distribution.

A decision maker launches an intervention when its posterior expected
per-unit payoff exceeds the launch cost. With a Gaussian effect
distribution N(mu, gamma_sq) and a Gaussian signal of sampling variance
sigma_sq, the expected payoff of the evidence-based rule has a closed
form (a censored-Gaussian mean), and so do its derivatives in the two
variances. This module provides those closed forms, the value-of-evidence
and value-of-information quantities built on them, and the experiment
design helpers that map two-arm trials onto signal variances.

All functions here are pure; the dataclasses are frozen and safe to
share across threads.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ValidationError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Beyond this standardized threshold the censored-mean formula is
# evaluated by its asymptotic limit to avoid 0*inf artifacts.
OVERFLOW_Z = 38.0


def norm_cdf(z: float) -> float:
    """Standard Gaussian CDF via the complementary error function.

    Relative accuracy is ~1e-14 for |z| <= 8, well inside the 1e-12
    target the closed forms rely on.
    """
    return 0.5 * math.erfc(-z / _SQRT2)


def norm_pdf(z: float) -> float:
    """Standard Gaussian density."""
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class GaussianPrior:
    """Gaussian distribution of the latent per-unit payoff.

    mu is the mean payoff across candidate interventions; gamma_sq its
    variance (>= 0).
    """

    mu: float
    gamma_sq: float

    def __post_init__(self):
        _require_finite("mu", self.mu)
        _require_finite("gamma_sq", self.gamma_sq)
        if self.gamma_sq < 0:
            raise ValidationError(f"gamma_sq must be >= 0, got {self.gamma_sq}")


@dataclass(frozen=True)
class Signal:
    """One noisy unbiased estimate of the payoff with known sampling variance."""

    tau_hat: float
    sigma_sq: float

    def __post_init__(self):
        _require_finite("tau_hat", self.tau_hat)
        _require_finite("sigma_sq", self.sigma_sq)
        if self.sigma_sq < 0:
            raise ValidationError(f"sigma_sq must be >= 0, got {self.sigma_sq}")


@dataclass(frozen=True)
class PosteriorParams:
    """Posterior mean and variance of the payoff given one signal."""

    mean: float
    variance: float


@dataclass(frozen=True)
class CostModel:
    """Launch and information costs.

    c_launch is the per-unit cost of deploying the intervention; c_fixed
    the fixed cost of running an evaluation; precision_cost an optional
    tabulated schedule mapping signal variance to the cost of achieving
    that precision, interpolated linearly between table points. The
    schedule must be non-negative and non-increasing in the variance
    (more precision is weakly more costly). With no table, information
    is free at every precision level.
    """

    c_launch: float = 0.0
    c_fixed: float = 0.0
    precision_cost: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        _require_finite("c_launch", self.c_launch)
        _require_finite("c_fixed", self.c_fixed)
        if self.c_fixed < 0:
            raise ValidationError(f"c_fixed must be >= 0, got {self.c_fixed}")
        if self.precision_cost is not None:
            table = tuple((float(s), float(c)) for s, c in self.precision_cost)
            if len(table) < 1:
                raise ValidationError("precision_cost table must be non-empty")
            for s, c in table:
                _require_finite("precision_cost sigma_sq", s)
                _require_finite("precision_cost value", c)
                if c < 0:
                    raise ValidationError("precision_cost values must be >= 0")
            sig = [s for s, _ in table]
            if any(b <= a for a, b in zip(sig, sig[1:])):
                raise ValidationError("precision_cost table must be strictly increasing in sigma_sq")
            costs = [c for _, c in table]
            if any(b > a for a, b in zip(costs, costs[1:])):
                raise ValidationError("precision_cost must be non-increasing in sigma_sq")
            object.__setattr__(self, "precision_cost", table)

    def cost_at(self, sigma_sq: float) -> float:
        """Precision cost c(sigma_sq); zero when no table is configured."""
        if self.precision_cost is None:
            return 0.0
        sig = [s for s, _ in self.precision_cost]
        if not (sig[0] <= sigma_sq <= sig[-1]):
            raise ValidationError(
                f"sigma_sq={sigma_sq} outside precision_cost table domain [{sig[0]}, {sig[-1]}]"
            )
        costs = [c for _, c in self.precision_cost]
        return float(np.interp(sigma_sq, sig, costs))

    def info_cost(self, sigma_sq: float) -> float:
        """Total cost of acquiring a signal: c_fixed + c(sigma_sq)."""
        return self.c_fixed + self.cost_at(sigma_sq)


@dataclass(frozen=True)
class DesignSpec:
    """Two-arm experiment: arm means, outcome variances and sizes."""

    theta0: float
    theta1: float
    var0: float
    var1: float
    n0: int
    n1: int

    def __post_init__(self):
        for name in ("theta0", "theta1", "var0", "var1"):
            _require_finite(name, getattr(self, name))
        if self.var0 < 0 or self.var1 < 0:
            raise ValidationError("arm outcome variances must be >= 0")
        if self.n0 < 1 or self.n1 < 1:
            raise ValidationError("arm sizes must be >= 1")


def posterior_params(prior: GaussianPrior, signal: Signal) -> PosteriorParams:
    """Precision-weighted posterior of the payoff given one signal.

    Evaluated in the numerically stable shrinkage form
    mean = mu + (tau_hat - mu) * gamma_sq / (gamma_sq + sigma_sq),
    which realizes the continuous limits at gamma_sq = 0 (posterior is
    the prior mean) and sigma_sq = 0 (posterior is the signal).
    """
    g, s = prior.gamma_sq, signal.sigma_sq
    if g == 0.0 and s == 0.0:
        if prior.mu != signal.tau_hat:
            raise ValidationError(
                "degenerate prior and noiseless signal disagree: "
                f"mu={prior.mu} vs tau_hat={signal.tau_hat}"
            )
        return PosteriorParams(mean=prior.mu, variance=0.0)
    total = g + s
    mean = prior.mu + (signal.tau_hat - prior.mu) * (g / total)
    return PosteriorParams(mean=mean, variance=g * s / total)


def payoff_no_info(prior: GaussianPrior, c_launch: float = 0.0) -> float:
    """Expected payoff of deciding from the prior alone: max(mu - c_launch, 0)."""
    return max(prior.mu - c_launch, 0.0)


def expected_payoff(prior: GaussianPrior, sigma_sq: float, c_launch: float = 0.0) -> float:
    """Expected payoff of the evidence-based launch rule at signal variance sigma_sq.

    This is the mean of a Gaussian censored from below at zero: with
    m = mu - c_launch and s = gamma_sq / sqrt(gamma_sq + sigma_sq),

        V = m * Phi(m / s) + s * phi(m / s).

    Degenerate and extreme inputs are handled by their analytic limits:
    gamma_sq = 0 returns max(m, 0), and |m/s| > OVERFLOW_Z returns the
    corresponding no-information limit so the function is total.
    """
    if sigma_sq < 0:
        raise ValidationError(f"sigma_sq must be >= 0, got {sigma_sq}")
    m = prior.mu - c_launch
    g = prior.gamma_sq
    if g == 0.0:
        return max(m, 0.0)
    s = g / math.sqrt(g + sigma_sq)
    z = m / s
    if z > OVERFLOW_Z:
        return m
    if z < -OVERFLOW_Z:
        return 0.0
    return m * norm_cdf(z) + s * norm_pdf(z)


def expected_payoff_many(
    mu: float, gamma_sq: float, sigma_sqs, c_launch: float = 0.0
) -> np.ndarray:
    """Vectorized ``expected_payoff`` over an array of signal variances.

    Same formula and limit handling as the scalar version; used by the
    heteroskedastic estimators and the counterfactual sweep where one
    prior is evaluated against thousands of study variances.
    """
    sigma_sqs = np.asarray(sigma_sqs, dtype=float)
    if np.any(sigma_sqs < 0):
        raise ValidationError("sigma_sq values must be >= 0")
    m = mu - c_launch
    if gamma_sq == 0.0:
        return np.full(sigma_sqs.shape, max(m, 0.0))
    s = gamma_sq / np.sqrt(gamma_sq + sigma_sqs)
    z = m / s
    phi = _INV_SQRT_2PI * np.exp(-0.5 * np.square(np.clip(z, -OVERFLOW_Z, OVERFLOW_Z)))
    cdf = 0.5 * special.erfc(-np.clip(z, -OVERFLOW_Z, OVERFLOW_Z) / _SQRT2)
    values = m * cdf + s * phi
    values = np.where(z > OVERFLOW_Z, m, values)
    values = np.where(z < -OVERFLOW_Z, 0.0, values)
    return values


def voe(prior: GaussianPrior, sigma_sq: float, costs: CostModel) -> float:
    """Value of evidence: payoff gain over the prior-only decision, net of costs.

    V(sigma_sq) - V(no info) - (c_fixed + c(sigma_sq)).
    """
    v = expected_payoff(prior, sigma_sq, costs.c_launch)
    return v - payoff_no_info(prior, costs.c_launch) - costs.info_cost(sigma_sq)


def void(prior: GaussianPrior, sigma_sq: float, costs: CostModel) -> float:
    """Value of information against a default of always deploying.

    V(sigma_sq) - (mu - c_launch) - (c_fixed + c(sigma_sq)). Satisfies
    void - voe = max(mu - c_launch, 0) - (mu - c_launch) identically.
    """
    v = expected_payoff(prior, sigma_sq, costs.c_launch)
    return v - (prior.mu - costs.c_launch) - costs.info_cost(sigma_sq)


def _phi_at_threshold(prior: GaussianPrior, sigma_sq: float, c_launch: float) -> tuple[float, float]:
    """phi(z) and the total variance g + sigma_sq, shared by the derivatives."""
    if prior.gamma_sq <= 0.0:
        raise ValidationError("derivatives require gamma_sq > 0")
    if sigma_sq < 0:
        raise ValidationError(f"sigma_sq must be >= 0, got {sigma_sq}")
    g = prior.gamma_sq
    total = g + sigma_sq
    z = (prior.mu - c_launch) * math.sqrt(total) / g
    if abs(z) > OVERFLOW_Z:
        return 0.0, total
    return norm_pdf(z), total


def dv_dsigma_sq(prior: GaussianPrior, sigma_sq: float, c_launch: float = 0.0) -> float:
    """First derivative of the expected payoff in the signal variance.

    -gamma_sq / (2 (gamma_sq + sigma_sq)^(3/2)) * phi(z); always <= 0,
    since noisier signals can only lose value.
    """
    phi, total = _phi_at_threshold(prior, sigma_sq, c_launch)
    return -prior.gamma_sq / (2.0 * total ** 1.5) * phi


def dv_dgamma_sq(prior: GaussianPrior, sigma_sq: float, c_launch: float = 0.0) -> float:
    """First derivative of the expected payoff in the effect variance.

    (gamma_sq + 2 sigma_sq) / (2 (gamma_sq + sigma_sq)^(3/2)) * phi(z);
    always >= 0: more dispersion across candidate interventions makes
    evidence more valuable.
    """
    phi, total = _phi_at_threshold(prior, sigma_sq, c_launch)
    return (prior.gamma_sq + 2.0 * sigma_sq) / (2.0 * total ** 1.5) * phi


def d2v_dsigma_sq2(prior: GaussianPrior, sigma_sq: float, c_launch: float = 0.0) -> float:
    """Second derivative of the expected payoff in the signal variance.

    (3 gamma_sq^2 + (mu - c_launch)^2 (gamma_sq + sigma_sq))
    / (4 gamma_sq (gamma_sq + sigma_sq)^(5/2)) * phi(z); always >= 0,
    i.e. the payoff is convex in the signal variance.
    """
    phi, total = _phi_at_threshold(prior, sigma_sq, c_launch)
    g = prior.gamma_sq
    m = prior.mu - c_launch
    return (3.0 * g * g + m * m * total) / (4.0 * g * total ** 2.5) * phi


def diff_in_means_variance(design: DesignSpec) -> float:
    """Large-sample variance of the difference-in-means estimator."""
    return design.var1 / design.n1 + design.var0 / design.n0


def lift_variance(design: DesignSpec, tau_lift: float, approximate: bool = False) -> float:
    """Large-sample variance of the relative-lift estimator.

    Exact mode uses (var1/n1 + (1 + lift)^2 var0/n0) / theta0^2; the
    approximate mode drops the (1 + lift)^2 factor, valid for lifts
    near zero.
    """
    if design.theta0 == 0:
        raise ValidationError("lift is undefined for theta0 = 0")
    base = design.var1 / design.n1
    if approximate:
        base += design.var0 / design.n0
    else:
        base += (1.0 + tau_lift) ** 2 * design.var0 / design.n0
    return base / design.theta0 ** 2
