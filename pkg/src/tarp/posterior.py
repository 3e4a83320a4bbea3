"""Conjugate inference in the compressed space.

With a N(0, sigma^2 I) prior on the compressed coefficients and an
inverse-gamma prior on sigma^2, the Gaussian likelihood gives closed forms:
the coefficient posterior is a scaled multivariate t and held-out responses
follow a multivariate t whose scale adds an identity noise term. Binary
responses use a ridge-penalized logistic fit with the curvature at the mode
(Laplace approximation); probabilities are plug-in at the mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import expit
from scipy.stats import t as t_dist


class ConvergenceError(RuntimeError):
    """Raised when an iterative fit fails to reach its tolerance."""


@dataclass(frozen=True)
class GaussianPosterior:
    """Closed-form posterior summary for the compressed Gaussian model.

    ``precision_inverse`` is (Z'Z + I)^-1 for the compressed design Z; the
    coefficient posterior is multivariate t(df, location, scale) and sigma^2
    is inverse-gamma(ig_shape, ig_rate).
    """

    location: np.ndarray
    precision_inverse: np.ndarray
    scale: np.ndarray
    df: float
    ig_shape: float
    ig_rate: float
    residual_quadratic: float
    a_sigma: float
    b_sigma: float
    n_obs: int

    @property
    def m(self) -> int:
        return self.location.shape[0]

    @property
    def noise_scale2(self) -> float:
        """Predictive noise scale (residual_quadratic + 2 b) / df."""
        return (self.residual_quadratic + 2.0 * self.b_sigma) / self.df


@dataclass(frozen=True)
class PredictiveT:
    """Multivariate-t predictive: df, per-point location and marginal scale."""

    df: float
    location: np.ndarray
    scale_diag: np.ndarray
    scale_matrix: Optional[np.ndarray] = None


@dataclass(frozen=True)
class LaplacePosterior:
    mode: np.ndarray
    hessian_at_mode: np.ndarray
    prior_variance: float
    grad_norm: float
    n_iter: int


def fit_gaussian(
    Z_design: np.ndarray,
    y: np.ndarray,
    a_sigma: float = 0.02,
    b_sigma: float = 0.02,
) -> GaussianPosterior:
    """Exact conjugate fit of the compressed model y = Z theta + e.

    The response is assumed centered. All m x m solves go through one
    Cholesky factorization of Z'Z + I, which is positive definite by
    construction.
    """
    Z_design = np.asarray(Z_design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if Z_design.ndim != 2 or y.shape != (Z_design.shape[0],):
        raise ValueError(
            f"incompatible shapes: design {Z_design.shape}, response {y.shape}"
        )
    if not (np.all(np.isfinite(Z_design)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in compressed design or response")
    if a_sigma <= 0.0 or b_sigma <= 0.0:
        raise ValueError("inverse-gamma hyperparameters must be positive")
    n, m = Z_design.shape
    gram = Z_design.T @ Z_design + np.eye(m)
    chol = cho_factor(gram, lower=True)
    zy = Z_design.T @ y
    location = cho_solve(chol, zy)
    precision_inverse = cho_solve(chol, np.eye(m))
    precision_inverse = 0.5 * (precision_inverse + precision_inverse.T)
    residual_quadratic = float(y @ y - location @ zy)
    residual_quadratic = max(residual_quadratic, 0.0)
    df = n + 2.0 * a_sigma
    scale = (residual_quadratic + 2.0 * b_sigma) / df * precision_inverse
    return GaussianPosterior(
        location=location,
        precision_inverse=precision_inverse,
        scale=scale,
        df=df,
        ig_shape=a_sigma + 0.5 * n,
        ig_rate=b_sigma + 0.5 * residual_quadratic,
        residual_quadratic=residual_quadratic,
        a_sigma=a_sigma,
        b_sigma=b_sigma,
        n_obs=n,
    )


def location_via_gram_inverse(X: np.ndarray, R: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Alternate route to the posterior location: (R X'X R' + I)^-1 (X R')' y.

    Algebraically identical to the fit in :func:`fit_gaussian`; kept as an
    independent cross-check of the assembly order.
    """
    X = np.asarray(X, dtype=np.float64)
    R = R.toarray() if hasattr(R, "toarray") else np.asarray(R, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    gram = R @ (X.T @ X) @ R.T + np.eye(R.shape[0])
    return np.linalg.inv(gram) @ ((X @ R.T).T @ y)


def point_predict(post: GaussianPosterior, Z_new: np.ndarray) -> np.ndarray:
    """Posterior-mean prediction Z_new @ location (squared-error optimal)."""
    Z_new = np.asarray(Z_new, dtype=np.float64)
    if Z_new.ndim != 2 or Z_new.shape[1] != post.m:
        raise ValueError(f"Z_new has shape {Z_new.shape}, expected (*, {post.m})")
    return Z_new @ post.location


def predictive(
    post: GaussianPosterior, Z_new: np.ndarray, full_cov: bool = False
) -> PredictiveT:
    """Predictive t distribution at compressed points Z_new.

    Marginal scale for point i is s2 * (1 + z_i' (Z'Z+I)^-1 z_i) with
    s2 = (residual_quadratic + 2 b) / df, so it never drops below the pure
    noise term s2.
    """
    Z_new = np.asarray(Z_new, dtype=np.float64)
    if Z_new.ndim != 2 or Z_new.shape[1] != post.m:
        raise ValueError(f"Z_new has shape {Z_new.shape}, expected (*, {post.m})")
    location = Z_new @ post.location
    s2 = post.noise_scale2
    proj = Z_new @ post.precision_inverse
    quad = np.einsum("ij,ij->i", proj, Z_new)
    scale_diag = s2 * (1.0 + np.maximum(quad, 0.0))
    scale_matrix = None
    if full_cov:
        scale_matrix = s2 * (np.eye(Z_new.shape[0]) + proj @ Z_new.T)
    return PredictiveT(
        df=post.df, location=location, scale_diag=scale_diag, scale_matrix=scale_matrix
    )


def central_interval(
    pred: PredictiveT, level: float
) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric central interval, location +- t-quantile * sqrt(scale)."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0,1), got {level}")
    half = t_dist.ppf(0.5 * (1.0 + level), pred.df) * np.sqrt(pred.scale_diag)
    return pred.location - half, pred.location + half


def _logistic_objective(theta, Z, y, sigma_theta2):
    h = Z @ theta
    return float(y @ h - np.logaddexp(0.0, h).sum() - theta @ theta / (2.0 * sigma_theta2))


def fit_bernoulli_laplace(
    Z_design: np.ndarray,
    y: np.ndarray,
    sigma_theta2: float = 1.0,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> LaplacePosterior:
    """Mode and curvature of the ridge-penalized logistic log-posterior.

    Damped Newton iterations until the gradient norm falls below ``tol``.
    The prior keeps the mode finite even for separable data, and makes the
    negative Hessian positive definite everywhere.
    """
    Z = np.asarray(Z_design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if Z.ndim != 2 or y.shape != (Z.shape[0],):
        raise ValueError(f"incompatible shapes: design {Z.shape}, response {y.shape}")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("binary response must only contain 0 and 1")
    if sigma_theta2 <= 0.0:
        raise ValueError("prior variance must be positive")
    n, m = Z.shape
    theta = np.zeros(m)
    obj = _logistic_objective(theta, Z, y, sigma_theta2)
    grad_norm = np.inf
    for iteration in range(1, max_iter + 1):
        prob = expit(Z @ theta)
        grad = Z.T @ (y - prob) - theta / sigma_theta2
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < tol:
            hessian = _logistic_hessian(Z, prob, sigma_theta2)
            return LaplacePosterior(
                mode=theta,
                hessian_at_mode=hessian,
                prior_variance=sigma_theta2,
                grad_norm=grad_norm,
                n_iter=iteration - 1,
            )
        hessian = _logistic_hessian(Z, prob, sigma_theta2)
        step = cho_solve(cho_factor(hessian, lower=True), grad)
        damping = 1.0
        # accept flat moves within rounding: near the mode the objective
        # change underflows while the Newton step still sharpens the gradient
        slack = 1e-12 * (1.0 + abs(obj))
        for _ in range(40):
            candidate = theta + damping * step
            cand_obj = _logistic_objective(candidate, Z, y, sigma_theta2)
            if cand_obj >= obj - slack:
                break
            damping *= 0.5
        theta = theta + damping * step
        obj = _logistic_objective(theta, Z, y, sigma_theta2)
    raise ConvergenceError(
        f"logistic mode search did not converge in {max_iter} iterations "
        f"(gradient norm {grad_norm:.3e})"
    )


def _logistic_hessian(Z, prob, sigma_theta2):
    w = prob * (1.0 - prob)
    return Z.T @ (w[:, None] * Z) + np.eye(Z.shape[1]) / sigma_theta2


def predict_prob(post: LaplacePosterior, Z_new: np.ndarray) -> np.ndarray:
    """Plug-in class-1 probabilities logistic(Z_new @ mode)."""
    Z_new = np.asarray(Z_new, dtype=np.float64)
    m = post.mode.shape[0]
    if Z_new.ndim != 2 or Z_new.shape[1] != m:
        raise ValueError(f"Z_new has shape {Z_new.shape}, expected (*, {m})")
    return expit(Z_new @ post.mode)
