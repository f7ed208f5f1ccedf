"""Monte Carlo study harness and synthetic meta-data generator.

Reproduces the estimator-comparison experiment (Gaussian vs mixture
effect distributions, parametric vs nonparametric estimators) and
generates moment-calibrated synthetic study sets that stand in for
real meta-analytic data when only summary statistics are published.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .estimators import StudySet, nonparametric_homoskedastic, parametric_homoskedastic
from .gaussian import GaussianPrior, expected_payoff
from .mixture import GaussianMixturePrior, mixture_expected_payoff_mc, sample_mixture
from .npmle import NpmleConfig
from .seeds import make_rng, stream_seed

SIM_ESTIMATORS = ("parametric", "nonparametric")


@dataclass(frozen=True)
class DGPSpec:
    """One data generating process for the simulation study."""

    name: str
    prior: GaussianPrior | GaussianMixturePrior
    sigma: float
    n: int = 500
    c_launch: float = 0.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")


def dgp_gaussian(n: int = 500, sigma: float = 0.1) -> DGPSpec:
    """Standard-Gaussian effects: the parametric model is well specified."""
    return DGPSpec("gaussian", GaussianPrior(0.0, 1.0), sigma=sigma, n=n)


def dgp_mixture(n: int = 500, sigma: float = 0.1) -> DGPSpec:
    """Three-component mixture with rare large effects; mean 0, variance 1."""
    prior = GaussianMixturePrior(((0.01, -5.0, 0.5), (0.98, 0.0, 0.5), (0.01, 5.0, 0.5)))
    return DGPSpec("mixture", prior, sigma=sigma, n=n)


@dataclass(frozen=True)
class ReplicationSample:
    """One simulated study set plus the latent effects that produced it."""

    studies: StudySet
    tau: np.ndarray


@dataclass(frozen=True)
class TrueValue:
    value: float
    provenance: str


@dataclass(frozen=True)
class SimRow:
    """Aggregated estimates for one (dgp, estimator) cell."""

    dgp: str
    estimator: str
    mean: float
    q_low: float
    q_high: float
    n_reps: int
    n_failed: int

    def __post_init__(self):
        if not (self.q_low <= self.mean <= self.q_high):
            raise ValidationError(
                f"cell quantiles must bracket the mean: {self.q_low}, {self.mean}, {self.q_high}"
            )


@dataclass(frozen=True)
class SimulationTable:
    """Rows per (dgp, estimator) plus each dgp's true payoff."""

    rows: tuple[SimRow, ...]
    truths: dict[str, TrueValue]


def sample_replication(dgp: DGPSpec, seed) -> ReplicationSample:
    """Draw one study set: effects from the prior, estimates with noise.

    The standard error is the known noise scale sigma for every study.
    """
    rng = make_rng(seed)
    if isinstance(dgp.prior, GaussianMixturePrior):
        tau = sample_mixture(dgp.prior, dgp.n, rng)
    else:
        tau = dgp.prior.mu + math.sqrt(dgp.prior.gamma_sq) * rng.standard_normal(dgp.n)
    tau_hat = tau + dgp.sigma * rng.standard_normal(dgp.n)
    studies = StudySet.from_arrays(tau_hat, np.full(dgp.n, dgp.sigma))
    return ReplicationSample(studies=studies, tau=tau)


def true_expected_payoff(dgp: DGPSpec, seed: int = 0, n_draws: int = 500_000) -> TrueValue:
    """True payoff of the evidence-based rule under a DGP.

    Closed form for a Gaussian prior; seeded Monte Carlo (posterior
    means on fresh draws) for a mixture.
    """
    sigma_sq = dgp.sigma**2
    if isinstance(dgp.prior, GaussianPrior):
        return TrueValue(expected_payoff(dgp.prior, sigma_sq, dgp.c_launch), "closed-form")
    est = mixture_expected_payoff_mc(
        dgp.prior,
        sigma_sq,
        dgp.c_launch,
        n_draws=n_draws,
        seed=stream_seed(seed, f"simulation/truth/{dgp.name}").generate_state(1)[0],
    )
    return TrueValue(est.value, "monte-carlo")


def run_simulation_study(
    dgps,
    reps: int = 1000,
    estimators=SIM_ESTIMATORS,
    seed: int = 0,
    cfg: NpmleConfig | None = None,
    truth_draws: int = 500_000,
) -> SimulationTable:
    """Distribution of estimator values across seeded replications.

    Per replication and estimator, computes the estimated payoff on a
    fresh study set (sigma known and constant, so the homoskedastic
    paths apply); aggregates the mean and the 2.5/97.5 percentiles per
    cell. A cell tolerates at most 1% failed replications.
    """
    if reps < 2:
        raise ValidationError(f"reps must be >= 2, got {reps}")
    for name in estimators:
        if name not in SIM_ESTIMATORS:
            raise ValidationError(f"unknown estimator {name!r}; expected {SIM_ESTIMATORS}")
    cfg = cfg or NpmleConfig(grid_size=150, tol=1e-7, max_iter=5000)
    rows = []
    truths: dict[str, TrueValue] = {}
    for dgp in dgps:
        truths[dgp.name] = true_expected_payoff(dgp, seed=seed, n_draws=truth_draws)
        children = stream_seed(seed, f"simulation/{dgp.name}").spawn(reps)
        values: dict[str, list[float]] = {name: [] for name in estimators}
        failures: dict[str, int] = {name: 0 for name in estimators}
        for child in children:
            sample = sample_replication(dgp, child)
            for name in estimators:
                try:
                    if name == "parametric":
                        est = parametric_homoskedastic(sample.studies, dgp.c_launch)
                    else:
                        est = nonparametric_homoskedastic(sample.studies, dgp.c_launch, cfg=cfg)
                    values[name].append(est.v_hat)
                except (ValidationError, NumericalError):
                    failures[name] += 1
        for name in estimators:
            if failures[name] > 0.01 * reps:
                raise NumericalError(
                    f"estimator {name!r} failed {failures[name]}/{reps} replications on {dgp.name}"
                )
            vals = np.array(values[name])
            lo, hi = np.quantile(vals, [0.025, 0.975])
            rows.append(
                SimRow(
                    dgp=dgp.name,
                    estimator=name,
                    mean=float(vals.mean()),
                    q_low=float(lo),
                    q_high=float(hi),
                    n_reps=reps,
                    n_failed=failures[name],
                )
            )
    return SimulationTable(rows=tuple(rows), truths=truths)


@dataclass(frozen=True)
class SyntheticTarget:
    """Published summary statistics a synthetic study set must match."""

    mean_tau_hat: float
    var_tau_hat: float
    mean_se_sq: float
    se_range: tuple[float, float]
    n: int
    mean_se: float

    def __post_init__(self):
        if self.var_tau_hat <= 0:
            raise ValidationError(f"var_tau_hat must be > 0, got {self.var_tau_hat}")
        lo, hi = self.se_range
        if not (0 < lo <= hi):
            raise ValidationError(f"se_range must satisfy 0 < lo <= hi, got {self.se_range}")
        if self.n < 2:
            raise ValidationError(f"n must be >= 2, got {self.n}")


def cochrane_target(n: int = 8821) -> SyntheticTarget:
    """Published summary statistics of the reference meta-analytic corpus."""
    return SyntheticTarget(
        mean_tau_hat=-0.1421,
        var_tau_hat=1.6677,
        mean_se_sq=0.7641,
        se_range=(0.0099, 2.1232),
        n=n,
        mean_se=0.7471,
    )


def _beta_params(target: SyntheticTarget) -> tuple[float, float]:
    """Beta shape parameters matching the se mean and mean square on its range."""
    lo, hi = target.se_range
    width = hi - lo
    mx = (target.mean_se - lo) / width
    var_se = target.mean_se_sq - target.mean_se**2
    if var_se < 0:
        raise ValidationError(
            f"infeasible target: mean_se_sq={target.mean_se_sq} < mean_se^2={target.mean_se**2:.6g}"
        )
    vx = var_se / width**2
    if not (0.0 < mx < 1.0):
        raise ValidationError(
            f"infeasible target: mean_se={target.mean_se} outside se_range {target.se_range}"
        )
    if vx >= mx * (1.0 - mx):
        raise ValidationError(
            "infeasible target: se variance too large for the range "
            f"(need var < {mx * (1 - mx) * width**2:.6g}, got {var_se:.6g})"
        )
    scale = mx * (1.0 - mx) / vx - 1.0
    return mx * scale, (1.0 - mx) * scale


def generate_synthetic_meta(target: SyntheticTarget, seed: int = 0) -> StudySet:
    """Synthetic study set whose sample moments match the target.

    Standard errors come from a scaled beta on the target range, matched
    to the se mean and mean square. Effects are Gaussian with variance
    var_tau_hat - mean_se_sq. The effect and noise vectors are centered,
    scaled, and orthogonalized so the deconvolution moments reproduce
    the targets essentially exactly at any n.
    """
    gamma_sq = target.var_tau_hat - target.mean_se_sq
    if gamma_sq <= 0:
        raise ValidationError(
            f"infeasible target: var_tau_hat={target.var_tau_hat} must exceed "
            f"mean_se_sq={target.mean_se_sq} (implied effect variance is not positive)"
        )
    rng = make_rng(stream_seed(seed, "generation"))
    n = target.n
    lo, hi = target.se_range
    if hi - lo < 1e-12:
        se = np.full(n, lo)
    else:
        var_se = target.mean_se_sq - target.mean_se**2
        if var_se < 1e-14:
            se = np.full(n, target.mean_se)
            if not (lo <= target.mean_se <= hi):
                raise ValidationError("infeasible target: mean_se outside se_range")
        else:
            a, b = _beta_params(target)
            se = lo + (hi - lo) * rng.beta(a, b, size=n)

    tau_raw = rng.standard_normal(n)
    tau_c = tau_raw - tau_raw.mean()
    tau_c /= tau_c.std(ddof=0)
    tau = target.mean_tau_hat + math.sqrt(gamma_sq) * tau_c

    eps = se * rng.standard_normal(n)
    eps -= eps.mean()
    centered = tau - tau.mean()
    eps -= centered * (eps @ centered) / (centered @ centered)
    eps *= math.sqrt(np.square(se).mean() / eps.var(ddof=0))

    return StudySet.from_arrays(tau + eps, se)
