"""Held-out evaluation: MSPE, interval coverage/width, classification scores.

Coverage treats intervals as closed. AUC follows the rank (Mann-Whitney)
definition with half credit for ties, and the probability-calibration score
averages squared deviations between empirical positive fractions and bin
midpoints over the nonempty of ten equal probability bins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import rankdata
from scipy.stats import t as t_dist


@dataclass(frozen=True)
class RegressionReport:
    mspe: float
    ecp: float
    mean_width: float
    residuals: np.ndarray

    csv_header = "mspe,ecp,width"

    def to_dict(self) -> dict:
        return {"mspe": self.mspe, "ecp": self.ecp, "mean_width": self.mean_width}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv_row(self) -> str:
        return f"{self.mspe!r},{self.ecp!r},{self.mean_width!r}"


@dataclass(frozen=True)
class ClassificationReport:
    misclassification_rate: float
    auc: Optional[float]
    msd_calibration: float

    csv_header = "misclassification,auc,msd"

    @property
    def auc_defined(self) -> bool:
        return self.auc is not None

    def to_dict(self) -> dict:
        return {
            "misclassification_rate": self.misclassification_rate,
            "auc": self.auc,
            "msd_calibration": self.msd_calibration,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv_row(self) -> str:
        auc = "" if self.auc is None else repr(self.auc)
        return f"{self.misclassification_rate!r},{auc},{self.msd_calibration!r}"


def evaluate_regression(pred, intervals, y_true) -> RegressionReport:
    """MSPE, empirical coverage of the (closed) intervals, and mean width.

    ``intervals`` is an (n, 2) array-like of [lower, upper] bounds.
    """
    pred = np.asarray(pred, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    bounds = np.asarray(intervals, dtype=np.float64)
    if bounds.ndim != 2 or bounds.shape[1] != 2:
        raise ValueError(f"intervals must have shape (n, 2), got {bounds.shape}")
    if not pred.shape == y_true.shape == (bounds.shape[0],):
        raise ValueError(
            f"length mismatch: pred {pred.shape}, intervals {bounds.shape}, "
            f"y_true {y_true.shape}"
        )
    residuals = y_true - pred
    covered = (y_true >= bounds[:, 0]) & (y_true <= bounds[:, 1])
    return RegressionReport(
        mspe=float(np.mean(residuals**2)),
        ecp=float(np.mean(covered)),
        mean_width=float(np.mean(bounds[:, 1] - bounds[:, 0])),
        residuals=residuals,
    )


def auc_score(prob, y_true) -> Optional[float]:
    """Rank-based AUC with half credit for ties; None if one class is absent."""
    prob = np.asarray(prob, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    n_pos = int(np.sum(y_true == 1.0))
    n_neg = int(np.sum(y_true == 0.0))
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(prob)  # average ranks handle ties
    rank_sum = float(np.sum(ranks[y_true == 1.0]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def calibration_msd(prob, y_true, n_bins: int = 10) -> float:
    """Mean squared gap between bin positive-fraction and bin midpoint.

    Probabilities are binned into ``n_bins`` equal subintervals of [0, 1]
    (last bin closed at 1); empty bins are skipped.
    """
    prob = np.asarray(prob, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    bins = np.minimum((prob * n_bins).astype(int), n_bins - 1)
    gaps = []
    for k in range(n_bins):
        members = bins == k
        if not members.any():
            continue
        midpoint = (k + 0.5) / n_bins
        gaps.append((float(y_true[members].mean()) - midpoint) ** 2)
    return float(np.mean(gaps))


def evaluate_classification(
    prob, y_true, threshold: float = 0.5
) -> ClassificationReport:
    prob = np.asarray(prob, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    if prob.shape != y_true.shape:
        raise ValueError(
            f"length mismatch: prob {prob.shape}, y_true {y_true.shape}"
        )
    if np.any((prob < 0.0) | (prob > 1.0)):
        raise ValueError("probabilities must lie in [0,1]")
    labels = (prob >= threshold).astype(np.float64)
    return ClassificationReport(
        misclassification_rate=float(np.mean(labels != y_true)),
        auc=auc_score(prob, y_true),
        msd_calibration=calibration_msd(prob, y_true),
    )


def frequentist_interval(
    residual_mse: float, leverage: float, df: int, level: float
) -> float:
    """Half-width t_{df,(1+level)/2} * sqrt(mse * (1 + leverage)).

    The plug-in interval used by non-Bayesian baselines around a point
    prediction.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0,1), got {level}")
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if leverage < 0.0:
        raise ValueError(f"leverage must be >= 0, got {leverage}")
    return float(
        t_dist.ppf(0.5 * (1.0 + level), df) * np.sqrt(residual_mse * (1.0 + leverage))
    )
