"""End-to-end pipeline: screen once, then fit N independent compressed models.

Each replicate draws its own (m, psi) from the tuning grid and its own
projection matrix, fits the conjugate (or Laplace-logistic) posterior in the
compressed space, and predictions are aggregated across replicates: point
predictions by simple averaging, intervals as quantiles of the equal-weight
mixture of the replicate predictive distributions.

Replicates are embarrassingly parallel; every replicate owns independent
seeded substreams, so results are identical for any worker-pool size.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.stats import t as t_dist

from .data import Dataset, StandardizationParams, standardize
from .posterior import (
    ConvergenceError,
    GaussianPosterior,
    LaplacePosterior,
    fit_bernoulli_laplace,
    fit_gaussian,
    point_predict,
    predict_prob,
    predictive,
)
from .projection import (
    RIS_PCR,
    RIS_RP,
    ProjectionMatrix,
    compress,
    compute_ris_pcr,
    sample_ris_rp,
)
from .screening import (
    InclusionVector,
    default_delta,
    inclusion_probabilities,
    marginal_correlations,
    sample_inclusion,
)

PLAIN_RP_BASELINE = "plain_rp_baseline"
VARIANTS = (RIS_RP, RIS_PCR, PLAIN_RP_BASELINE)

# substream tags hung off each replicate seed
_GAMMA_STREAM = 0
_ENTRY_STREAM = 1
_GRID_STREAM = 2


class ReplicateError(RuntimeError):
    """A replicate failed; carries the replicate index and original error."""

    def __init__(self, index: int, original: Exception):
        super().__init__(f"replicate {index}: {original}")
        self.index = index
        self.original = original


@dataclass(frozen=True)
class TarpConfig:
    m: int
    psi: Optional[float]
    delta: float
    variant: str
    seed: int

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.variant != RIS_PCR:
            if self.psi is None or not 0.0 < self.psi < 0.5:
                raise ValueError(f"psi must lie in (0, 0.5), got {self.psi}")


@dataclass(frozen=True)
class Replicate:
    config: TarpConfig
    projection: ProjectionMatrix
    posterior: Union[GaussianPosterior, LaplacePosterior]


@dataclass(frozen=True)
class TarpModel:
    replicates: list[Replicate]
    standardization: StandardizationParams
    response_kind: str
    master_seed: int
    column_names: list[str]
    train_data_hash: str
    a_sigma: float = 0.02
    b_sigma: float = 0.02
    sigma_theta2: float = 1.0

    @property
    def n_replicates(self) -> int:
        return len(self.replicates)

    @property
    def p(self) -> int:
        return self.standardization.column_means.shape[0]


@dataclass(frozen=True)
class TarpPrediction:
    """Aggregated predictions in original response units."""

    response_kind: str
    point: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    probability: Optional[np.ndarray] = None
    level: Optional[float] = None


def m_range(n: int, p: int) -> tuple[int, int]:
    """Inclusive grid range for the compressed dimension.

    [ceil(2 ln p), min(floor(3n/4), p)], clamped to start at 1 when the
    lower bound would exceed the upper (tiny n).
    """
    hi = min((3 * n) // 4, p)
    hi = max(hi, 1)
    lo = max(1, math.ceil(2.0 * math.log(max(p, 2))))
    if lo > hi:
        lo = 1
    return lo, hi


def sample_config_grid(
    n: int,
    p: int,
    count: int,
    variant: str = RIS_RP,
    delta: Optional[float] = None,
    master_seed: int = 0,
) -> list[TarpConfig]:
    """Draw ``count`` tuning configurations from the default grid.

    m is uniform on the integer range from :func:`m_range`, psi uniform on
    (0.1, 0.4); delta defaults to the (n, p)-driven value and is shared by
    the whole grid. Per-replicate seeds are derived from ``master_seed``.
    """
    if count < 1:
        raise ValueError(f"need at least one configuration, got {count}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if delta is None:
        delta = default_delta(n, p)
    lo, hi = m_range(n, p)
    rng = np.random.default_rng([master_seed, _GRID_STREAM])
    configs = []
    for _ in range(count):
        m = int(rng.integers(lo, hi + 1))
        psi = None if variant == RIS_PCR else float(rng.uniform(0.1, 0.4))
        seed = int(rng.integers(0, 2**63))
        configs.append(TarpConfig(m=m, psi=psi, delta=delta, variant=variant, seed=seed))
    return configs


def _dataset_hash(dataset: Dataset) -> str:
    digest = hashlib.sha256()
    digest.update(str(dataset.design.shape).encode())
    digest.update(dataset.response_kind.encode())
    digest.update(dataset.design.tobytes())
    digest.update(dataset.response.tobytes())
    return digest.hexdigest()


def _fit_replicate(
    cfg: TarpConfig,
    design: np.ndarray,
    response: np.ndarray,
    correlations: np.ndarray,
    response_kind: str,
    a_sigma: float,
    b_sigma: float,
    sigma_theta2: float,
) -> Replicate:
    p = design.shape[1]
    if cfg.variant == PLAIN_RP_BASELINE:
        gamma = InclusionVector.all_ones(p)
    else:
        q = inclusion_probabilities(correlations, cfg.delta)
        gamma = sample_inclusion(q, np.random.default_rng([cfg.seed, _GAMMA_STREAM]))
    if cfg.variant == RIS_PCR:
        projection = compute_ris_pcr(design, gamma, cfg.m)
    else:
        projection = sample_ris_rp(gamma, cfg.m, cfg.psi, seed=[cfg.seed, _ENTRY_STREAM])
    Z = compress(design, projection)
    if response_kind == "continuous":
        post = fit_gaussian(Z, response, a_sigma=a_sigma, b_sigma=b_sigma)
    else:
        post = fit_bernoulli_laplace(Z, response, sigma_theta2=sigma_theta2)
    return Replicate(config=cfg, projection=projection, posterior=post)


def fit_tarp(
    train: Dataset,
    configs: list[TarpConfig],
    a_sigma: float = 0.02,
    b_sigma: float = 0.02,
    sigma_theta2: float = 1.0,
    master_seed: int = 0,
    threads: int = 1,
) -> TarpModel:
    """Standardize, screen once, and fit every replicate.

    Marginal correlations are computed a single time and shared across the
    grid. ``threads`` only controls the worker pool; outputs are identical
    for any value.
    """
    if not configs:
        raise ValueError("need at least one configuration")
    std_train, params = standardize(train)
    correlations = marginal_correlations(
        std_train.design, std_train.response, constant_mask=params.constant_mask
    )

    def build(indexed):
        index, cfg = indexed
        try:
            return _fit_replicate(
                cfg,
                std_train.design,
                std_train.response,
                correlations,
                train.response_kind,
                a_sigma,
                b_sigma,
                sigma_theta2,
            )
        except Exception as exc:
            raise ReplicateError(index, exc) from exc

    jobs = list(enumerate(configs))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            replicates = list(pool.map(build, jobs))
    else:
        replicates = [build(job) for job in jobs]
    return TarpModel(
        replicates=replicates,
        standardization=params,
        response_kind=train.response_kind,
        master_seed=master_seed,
        column_names=list(train.column_names),
        train_data_hash=_dataset_hash(train),
        a_sigma=a_sigma,
        b_sigma=b_sigma,
        sigma_theta2=sigma_theta2,
    )


def mixture_t_quantile(
    dfs: np.ndarray,
    locations: np.ndarray,
    scale_diags: np.ndarray,
    prob: float,
    tol: float = 1e-8,
    max_iter: int = 400,
) -> np.ndarray:
    """Quantiles of an equal-weight mixture of t distributions, by bisection.

    ``locations`` and ``scale_diags`` have shape (N, k): component i of the
    mixture at point j is t(dfs[i], locations[i, j], scale_diags[i, j]).
    Bisection runs until the mixture CDF at the returned point is within
    ``tol`` of ``prob``; the bracket starts at the min/max of the component
    quantiles, which always enclose the mixture quantile.
    """
    if not 0.0 < prob < 1.0:
        raise ValueError(f"prob must be in (0,1), got {prob}")
    dfs = np.asarray(dfs, dtype=np.float64)
    locations = np.atleast_2d(np.asarray(locations, dtype=np.float64))
    widths = np.sqrt(np.atleast_2d(np.asarray(scale_diags, dtype=np.float64)))
    component_q = locations + t_dist.ppf(prob, dfs)[:, None] * widths
    lo = component_q.min(axis=0)
    hi = component_q.max(axis=0)
    out = 0.5 * (lo + hi)
    active = np.arange(out.size)
    for _ in range(max_iter):
        mid = 0.5 * (lo[active] + hi[active])
        cdf = t_dist.cdf(
            (mid[None, :] - locations[:, active]) / widths[:, active], dfs[:, None]
        ).mean(axis=0)
        out[active] = mid
        done = np.abs(cdf - prob) <= tol
        # collapse of the bracket to rounding width also counts as converged
        done |= (hi[active] - lo[active]) <= 1e-13 * (1.0 + np.abs(mid))
        below = cdf < prob
        lo[active[below]] = mid[below]
        hi[active[~below]] = mid[~below]
        active = active[~done]
        if active.size == 0:
            return out
    raise ConvergenceError(
        f"mixture quantile bisection left {active.size} points unconverged"
    )


def predict_tarp(model: TarpModel, X_new: np.ndarray, level: float = 0.5) -> TarpPrediction:
    """Aggregate replicate predictions on new rows (original units).

    Continuous responses: the point prediction is the mean of the replicate
    posterior-mean predictions, and [lower, upper] is the central interval of
    the equal-weight mixture of replicate predictive t distributions. Binary
    responses: mean of the replicate plug-in probabilities.
    """
    X_new = np.asarray(X_new, dtype=np.float64)
    if X_new.ndim != 2 or X_new.shape[1] != model.p:
        raise ValueError(f"X_new has shape {X_new.shape}, expected (*, {model.p})")
    Xs = model.standardization.transform_design(X_new)
    if model.response_kind == "binary":
        probs = np.mean(
            [
                predict_prob(rep.posterior, compress(Xs, rep.projection))
                for rep in model.replicates
            ],
            axis=0,
        )
        return TarpPrediction(response_kind="binary", probability=probs)
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0,1), got {level}")
    dfs, locs, scales, points = [], [], [], []
    for rep in model.replicates:
        Z_new = compress(Xs, rep.projection)
        pred = predictive(rep.posterior, Z_new)
        points.append(point_predict(rep.posterior, Z_new))
        dfs.append(pred.df)
        locs.append(pred.location)
        scales.append(pred.scale_diag)
    dfs = np.asarray(dfs)
    locs = np.asarray(locs)
    scales = np.asarray(scales)
    point = model.standardization.inverse_response(np.mean(points, axis=0))
    lower = mixture_t_quantile(dfs, locs, scales, 0.5 * (1.0 - level))
    upper = mixture_t_quantile(dfs, locs, scales, 0.5 * (1.0 + level))
    return TarpPrediction(
        response_kind="continuous",
        point=point,
        lower=model.standardization.inverse_response(lower),
        upper=model.standardization.inverse_response(upper),
        level=level,
    )
