"""Empirical Bayes estimators of the value of evidence from a study set.

The empirical input is a collection of (estimate, standard error) pairs,
one per evaluation. Standard errors are treated as known sampling
standard deviations (plug-in). Four estimators are provided:

- parametric (Gaussian effect distribution, moments by deconvolution),
  homoskedastic and heteroskedastic;
- nonparametric (NPMLE of the standardized-effect distribution),
  pooled or binned by standard error.

Bootstrap percentile intervals resample studies in pairs.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EbdmError, NumericalError, ValidationError
from .gaussian import CostModel, GaussianPrior, expected_payoff, expected_payoff_many
from .npmle import NpmleConfig, fit_npmle, make_grid, posterior_means_scaled
from .seeds import stream_seed

# Deconvolution can return a negative effect variance; it is clamped
# here and flagged rather than propagated.
GAMMA_SQ_FLOOR = 1e-12

METHODS = (
    "parametric-hom",
    "parametric-het",
    "nonparametric-hom",
    "nonparametric-het",
)


@dataclass(frozen=True)
class Study:
    """One evaluation: point estimate and its standard error."""

    id: str
    tau_hat: float
    se: float

    def __post_init__(self):
        if not math.isfinite(self.tau_hat):
            raise ValidationError(f"tau_hat must be finite, got {self.tau_hat!r}")
        if not (math.isfinite(self.se) and self.se > 0):
            raise ValidationError(f"se must be finite and > 0, got {self.se!r}")


@dataclass(frozen=True)
class StudySet:
    """An ordered collection of at least two studies."""

    studies: tuple[Study, ...]

    def __post_init__(self):
        studies = tuple(self.studies)
        if len(studies) < 2:
            raise ValidationError(f"need at least 2 studies, got {len(studies)}")
        object.__setattr__(self, "studies", studies)

    def __len__(self) -> int:
        return len(self.studies)

    @property
    def tau_hats(self) -> np.ndarray:
        return np.array([s.tau_hat for s in self.studies])

    @property
    def ses(self) -> np.ndarray:
        return np.array([s.se for s in self.studies])

    @classmethod
    def from_arrays(cls, tau_hats, ses, ids=None) -> "StudySet":
        tau_hats = np.asarray(tau_hats, dtype=float)
        ses = np.asarray(ses, dtype=float)
        if tau_hats.shape != ses.shape:
            raise ValidationError("tau_hats and ses must have equal length")
        if ids is None:
            ids = [f"s{i:05d}" for i in range(tau_hats.size)]
        return cls(
            tuple(Study(str(i), float(t), float(s)) for i, t, s in zip(ids, tau_hats, ses))
        )

    def take(self, indices) -> "StudySet":
        """Resampled study set (used by the pairs bootstrap)."""
        return StudySet(tuple(self.studies[i] for i in indices))


@dataclass(frozen=True)
class PriorMoments:
    """Moment-deconvolution estimates of the effect distribution.

    gamma_sq_hat is raw_gamma_sq clamped from below; clamped records
    whether the floor was binding.
    """

    mu_hat: float
    gamma_sq_hat: float
    raw_gamma_sq: float
    mean_se_sq: float
    var_tau_hat: float
    clamped: bool


@dataclass
class PayoffEstimate:
    """An estimated payoff with its derived value quantities.

    voe is the gain over the prior-only decision, void_ the gain over
    always deploying; both are net of any configured information costs.
    """

    v_hat: float
    voe: float
    void_: float
    method: str
    interval: tuple[float, float, float] | None = None
    diagnostics: dict = field(default_factory=dict)


def estimate_prior_moments(data: StudySet) -> PriorMoments:
    """Mean and deconvolved variance of the effect distribution.

    The effect variance is var(tau_hat) (population denominator) minus
    the mean squared standard error; a negative difference is clamped
    to GAMMA_SQ_FLOOR with the flag set.
    """
    tau = data.tau_hats
    se = data.ses
    mu_hat = float(tau.mean())
    var_tau = float(tau.var(ddof=0))
    mean_se_sq = float(np.square(se).mean())
    raw = var_tau - mean_se_sq
    clamped = raw < GAMMA_SQ_FLOOR
    return PriorMoments(
        mu_hat=mu_hat,
        gamma_sq_hat=max(raw, GAMMA_SQ_FLOOR),
        raw_gamma_sq=raw,
        mean_se_sq=mean_se_sq,
        var_tau_hat=var_tau,
        clamped=clamped,
    )


def _info_cost(costs: CostModel | None, sigma_sqs) -> float:
    """Average information cost over the study variances (0 when unset)."""
    if costs is None:
        return 0.0
    sigma_sqs = np.atleast_1d(np.asarray(sigma_sqs, dtype=float))
    return costs.c_fixed + float(np.mean([costs.cost_at(s) for s in sigma_sqs]))


def _finish(
    v_hat: float,
    moments: PriorMoments,
    c_launch: float,
    info_cost: float,
    method: str,
    diagnostics: dict,
) -> PayoffEstimate:
    baseline = moments.mu_hat - c_launch
    return PayoffEstimate(
        v_hat=v_hat,
        voe=v_hat - max(baseline, 0.0) - info_cost,
        void_=v_hat - baseline - info_cost,
        method=method,
        diagnostics=diagnostics,
    )


def parametric_homoskedastic(
    data: StudySet, c_launch: float = 0.0, costs: CostModel | None = None
) -> PayoffEstimate:
    """Gaussian-moment estimate at a single pooled signal variance.

    The pooled variance is the mean squared standard error. When a cost
    model is supplied its fixed and precision costs are netted out of
    voe/void_; the launch cost always comes from the c_launch argument.
    """
    moments = estimate_prior_moments(data)
    sigma_sq = moments.mean_se_sq
    prior = GaussianPrior(moments.mu_hat, moments.gamma_sq_hat)
    v_hat = expected_payoff(prior, sigma_sq, c_launch)
    return _finish(
        v_hat,
        moments,
        c_launch,
        _info_cost(costs, [sigma_sq]),
        "parametric-hom",
        {"moments": moments, "sigma_sq": sigma_sq},
    )


def parametric_heteroskedastic(
    data: StudySet, c_launch: float = 0.0, costs: CostModel | None = None
) -> PayoffEstimate:
    """Gaussian-moment estimate averaging over study-specific variances.

    Each study's squared standard error is plugged into the closed-form
    payoff and the results are averaged; by convexity this is at least
    the pooled-variance estimate.
    """
    moments = estimate_prior_moments(data)
    se_sq = np.square(data.ses)
    values = expected_payoff_many(moments.mu_hat, moments.gamma_sq_hat, se_sq, c_launch)
    v_hat = float(values.mean())
    return _finish(
        v_hat,
        moments,
        c_launch,
        _info_cost(costs, se_sq),
        "parametric-het",
        {"moments": moments},
    )


def _npmle_block(tau_hats, ses, cfg: NpmleConfig):
    """Fit the standardized effects of one block; return posterior means."""
    z = tau_hats / ses
    grid = make_grid(z, m=cfg.grid_size, pad=cfg.pad)
    dist, report = fit_npmle(z, grid, tol=cfg.tol, max_iter=cfg.max_iter)
    post = posterior_means_scaled(dist, z, ses)
    return post, report


def nonparametric_homoskedastic(
    data: StudySet,
    c_launch: float = 0.0,
    costs: CostModel | None = None,
    cfg: NpmleConfig | None = None,
) -> PayoffEstimate:
    """NPMLE estimate pooling all standardized effects into one fit."""
    cfg = cfg or NpmleConfig()
    moments = estimate_prior_moments(data)
    post, report = _npmle_block(data.tau_hats, data.ses, cfg)
    v_hat = float(np.maximum(post - c_launch, 0.0).mean())
    return _finish(
        v_hat,
        moments,
        c_launch,
        _info_cost(costs, np.square(data.ses)),
        "nonparametric-hom",
        {
            "moments": moments,
            "fit": {
                "iterations": report.iterations,
                "converged": report.converged,
                "log_likelihood": report.log_likelihood,
            },
        },
    )


def _se_bins(ses: np.ndarray, n_bins: int) -> tuple[np.ndarray, list[str]]:
    """Quantile bins of the standard errors, merged to hold >= 2 studies.

    Duplicate quantile edges collapse (so identical standard errors end
    up in one shared bin); any remaining bin with fewer than 2 studies
    is merged into its left neighbour (or right, for the first bin).
    Returns per-study bin labels and human-readable merge notes.
    """
    notes: list[str] = []
    edges = np.quantile(ses, np.linspace(0.0, 1.0, n_bins + 1))
    inner = np.unique(edges[1:-1])
    labels = np.searchsorted(inner, ses, side="right")
    if inner.size + 1 < n_bins:
        notes.append(f"duplicate quantile edges reduced {n_bins} bins to {inner.size + 1}")
    # Relabel to consecutive ints in se order, then merge undersized bins.
    uniq = np.unique(labels)
    remap = {int(old): i for i, old in enumerate(uniq)}
    labels = np.array([remap[int(b)] for b in labels])
    while True:
        uniq, counts = np.unique(labels, return_counts=True)
        small = uniq[counts < 2]
        if small.size == 0 or uniq.size == 1:
            break
        b = int(small[0])
        target = b - 1 if b > 0 else b + 1
        notes.append(f"bin {b} had fewer than 2 studies; merged into bin {target}")
        labels[labels == b] = target
        uniq = np.unique(labels)
        labels = np.array([int(np.searchsorted(uniq, v)) for v in labels])
    return labels, notes


def nonparametric_heteroskedastic(
    data: StudySet,
    c_launch: float = 0.0,
    n_bins: int = 5,
    costs: CostModel | None = None,
    cfg: NpmleConfig | None = None,
) -> PayoffEstimate:
    """NPMLE estimate with separate fits per standard-error bin.

    Relaxes the assumption that the standardized effect is independent
    of the standard error by binning studies on se and fitting each bin
    on its own standardized estimates.
    """
    if n_bins < 1:
        raise ValidationError(f"n_bins must be >= 1, got {n_bins}")
    if len(data) < 2 * n_bins:
        raise ValidationError(
            f"need at least {2 * n_bins} studies for {n_bins} bins, got {len(data)}"
        )
    cfg = cfg or NpmleConfig()
    moments = estimate_prior_moments(data)
    tau = data.tau_hats
    ses = data.ses
    labels, notes = _se_bins(ses, n_bins)
    post = np.empty_like(tau)
    bin_diag = []
    for b in np.unique(labels):
        mask = labels == b
        post[mask], report = _npmle_block(tau[mask], ses[mask], cfg)
        bin_diag.append(
            {
                "bin": int(b),
                "n": int(mask.sum()),
                "se_range": [float(ses[mask].min()), float(ses[mask].max())],
                "iterations": report.iterations,
                "converged": report.converged,
            }
        )
    v_hat = float(np.maximum(post - c_launch, 0.0).mean())
    return _finish(
        v_hat,
        moments,
        c_launch,
        _info_cost(costs, np.square(ses)),
        "nonparametric-het",
        {"moments": moments, "bins": bin_diag, "notes": notes},
    )


ESTIMATORS = {
    "parametric-hom": parametric_homoskedastic,
    "parametric-het": parametric_heteroskedastic,
    "nonparametric-hom": nonparametric_homoskedastic,
    "nonparametric-het": nonparametric_heteroskedastic,
}


def _run_method(method: str, data: StudySet, c_launch, costs, n_bins, cfg) -> PayoffEstimate:
    if method not in ESTIMATORS:
        raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}")
    kwargs = {"c_launch": c_launch, "costs": costs}
    if method.startswith("nonparametric"):
        kwargs["cfg"] = cfg
    if method == "nonparametric-het":
        kwargs["n_bins"] = n_bins
    return ESTIMATORS[method](data, **kwargs)


def bootstrap_replicates(
    data: StudySet,
    method: str,
    B: int = 1000,
    seed: int = 0,
    c_launch: float = 0.0,
    costs: CostModel | None = None,
    n_bins: int = 5,
    cfg: NpmleConfig | None = None,
) -> tuple[dict[str, np.ndarray], int]:
    """Pairs-bootstrap replicate statistics for one estimator.

    Resamples studies with replacement B times, recomputing the
    estimator on each draw. Failed draws are skipped and counted; more
    than 5% failures aborts. Returns arrays keyed by statistic name
    ('v_hat', 'voe', 'void_') plus the failure count. Deterministic for
    a fixed seed; replicates use independently derived child streams.
    """
    if B < 2:
        raise ValidationError(f"B must be >= 2, got {B}")
    n = len(data)
    out = {"v_hat": [], "voe": [], "void_": []}
    n_failed = 0
    children = stream_seed(seed, "bootstrap").spawn(B)
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        idx = rng.integers(0, n, size=n)
        try:
            est = _run_method(method, data.take(idx), c_launch, costs, n_bins, cfg)
        except EbdmError:
            n_failed += 1
            continue
        out["v_hat"].append(est.v_hat)
        out["voe"].append(est.voe)
        out["void_"].append(est.void_)
    if n_failed > 0.05 * B:
        raise NumericalError(
            f"bootstrap failed in {n_failed}/{B} draws for method {method!r}"
        )
    return {k: np.array(v) for k, v in out.items()}, n_failed


def bootstrap_interval(
    data: StudySet,
    method: str,
    statistic: str = "voe",
    B: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    c_launch: float = 0.0,
    costs: CostModel | None = None,
    n_bins: int = 5,
    cfg: NpmleConfig | None = None,
) -> tuple[float, float]:
    """Percentile bootstrap interval for one statistic of one estimator."""
    if not (0.0 < level < 1.0):
        raise ValidationError(f"level must be in (0, 1), got {level}")
    if statistic not in ("v_hat", "voe", "void_"):
        raise ValidationError(f"unknown statistic {statistic!r}")
    reps, _ = bootstrap_replicates(
        data, method, B=B, seed=seed, c_launch=c_launch, costs=costs, n_bins=n_bins, cfg=cfg
    )
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(reps[statistic], [alpha, 1.0 - alpha])
    return float(lo), float(hi)
