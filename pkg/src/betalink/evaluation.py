"""Accuracy metrics against known truth and MCMC output summaries.

Full estimates (no rejections) score recall and precision over linked
pairs; partial estimates score positive and negative predictive value plus
the rejection rate.  Ratios with empty denominators are undefined and
reported as None, never as zero.  Chain diagnostics use the Geweke
mean-comparison statistic

    z = (mean of first segment - mean of last segment)
        / sqrt(sv_f / n_f + sv_l / n_l)

where sv is each segment's spectral density at frequency zero, estimated
with a Bartlett lag window over the leading 4% of lags, so autocorrelated
chains get properly inflated variances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MatchingLabeling
from .estimators import NON_LINK, REJECT, LinkageEstimate


@dataclass(frozen=True)
class EvalReport:
    """Metrics of an estimate against the true matching; None marks an
    undefined ratio (empty denominator)."""

    kind: str
    recall: float | None = None
    precision: float | None = None
    ppv: float | None = None
    npv: float | None = None
    rejection_rate: float | None = None
    counts: dict[str, int] | None = None

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "recall": self.recall,
            "precision": self.precision,
            "ppv": self.ppv,
            "npv": self.npv,
            "rejection_rate": self.rejection_rate,
            "counts": self.counts,
        }


def _ratio(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


def score_full(est: LinkageEstimate, truth: MatchingLabeling) -> EvalReport:
    """Recall and precision of a full estimate (no rejections allowed)."""
    if est.n_rejects > 0:
        raise ValueError("full scoring is undefined for estimates with rejections")
    _check_dims(est, truth)
    correct, links, true_links = _link_counts(est, truth)
    return EvalReport(
        kind="full",
        recall=_ratio(correct, true_links),
        precision=_ratio(correct, links),
        counts={"correct_links": correct, "links": links, "true_links": true_links},
    )


def score_partial(est: LinkageEstimate, truth: MatchingLabeling) -> EvalReport:
    """Predictive values and rejection rate of a partial estimate.

    PPV is the fraction of declared links that are correct, NPV the
    fraction of declared non-links whose record is truly unmatched, and the
    rejection rate the fraction of records left to review.
    """
    _check_dims(est, truth)
    correct, links, true_links = _link_counts(est, truth)
    n1 = truth.n1
    nonlinks = correct_nonlinks = 0
    for j in range(1, est.n2 + 1):
        if int(est.decisions[j - 1]) == NON_LINK:
            nonlinks += 1
            if truth.labels[j - 1] == n1 + j:
                correct_nonlinks += 1
    rejects = est.n_rejects
    return EvalReport(
        kind="partial",
        recall=_ratio(correct, true_links),
        ppv=_ratio(correct, links),
        npv=_ratio(correct_nonlinks, nonlinks),
        rejection_rate=_ratio(rejects, est.n2),
        counts={
            "correct_links": correct,
            "links": links,
            "true_links": true_links,
            "correct_non_links": correct_nonlinks,
            "non_links": nonlinks,
            "rejects": rejects,
        },
    )


def _check_dims(est: LinkageEstimate, truth: MatchingLabeling) -> None:
    if est.n1 != truth.n1 or est.n2 != truth.n2:
        raise ValueError("estimate and truth cover different file pairs")


def _link_counts(est: LinkageEstimate, truth: MatchingLabeling) -> tuple[int, int, int]:
    correct = links = true_links = 0
    for j in range(1, est.n2 + 1):
        d = int(est.decisions[j - 1])
        t = truth.labels[j - 1]
        if t <= truth.n1:
            true_links += 1
        if d >= 1:
            links += 1
            if d == t:
                correct += 1
    return correct, links, true_links


def _spectral_variance(x: np.ndarray) -> float:
    """Spectral density at frequency zero via a Bartlett lag window over the
    first 4% of lags (at least one)."""
    n = len(x)
    xc = x - x.mean()
    lags = max(1, int(0.04 * n))
    lags = min(lags, n - 1)
    sv = float(np.dot(xc, xc)) / n
    for k in range(1, lags + 1):
        gamma_k = float(np.dot(xc[:-k], xc[k:])) / n
        sv += 2.0 * (1.0 - k / (lags + 1.0)) * gamma_k
    return max(sv, 0.0)


def geweke_z(
    chain: np.ndarray | list[float],
    first: float = 0.1,
    last: float = 0.5,
) -> float | None:
    """Geweke convergence statistic comparing early and late chain means.

    Returns None for a constant chain (the statistic is undefined), and
    +/-inf when both segments are internally constant but their means
    differ.  The statistic is invariant under affine transformations of
    the chain (up to sign).
    """
    x = np.asarray(chain, dtype=np.float64)
    if x.ndim != 1 or len(x) < 100:
        raise ValueError("need a one-dimensional chain of at least 100 draws")
    if not (0 < first < 1 and 0 < last < 1 and first + last <= 1):
        raise ValueError("segment fractions must be in (0, 1) and not overlap")
    if np.all(x == x[0]):
        return None
    n = len(x)
    nf = int(first * n)
    nl = int(last * n)
    seg_f = x[:nf]
    seg_l = x[n - nl :]
    num = float(seg_f.mean() - seg_l.mean())
    den = math.sqrt(_spectral_variance(seg_f) / nf + _spectral_variance(seg_l) / nl)
    if den == 0.0:
        return 0.0 if num == 0.0 else math.copysign(math.inf, num)
    return num / den


@dataclass(frozen=True)
class QuantitySummary:
    """Posterior summary of one scalar: mean, median, and a central
    credible interval."""

    mean: float
    median: float
    lower: float
    upper: float

    def as_dict(self) -> dict:
        return {"mean": self.mean, "median": self.median, "lower": self.lower, "upper": self.upper}


@dataclass(frozen=True)
class OverlapSummary:
    """Posterior summaries of the matched count, the matched share of
    file 2, and the implied number of distinct entities."""

    matches: QuantitySummary
    match_rate: QuantitySummary
    distinct_entities: QuantitySummary
    interval_mass: float = 0.9
    quantile_method: str = "linear"

    def as_dict(self) -> dict:
        return {
            "matches": self.matches.as_dict(),
            "match_rate": self.match_rate.as_dict(),
            "distinct_entities": self.distinct_entities.as_dict(),
            "interval_mass": self.interval_mass,
            "quantile_method": self.quantile_method,
        }


def _summarize(x: np.ndarray, mass: float) -> QuantitySummary:
    tail = (1.0 - mass) / 2.0
    lo, mid, hi = np.quantile(x, [tail, 0.5, 1.0 - tail], method="linear")
    return QuantitySummary(
        mean=float(x.mean()), median=float(mid), lower=float(lo), upper=float(hi)
    )


def overlap_summary(
    overlap_samples: np.ndarray | list[int],
    n1: int,
    n2: int,
    *,
    interval_mass: float = 0.9,
) -> OverlapSummary:
    """Summarize the posterior of the number of matched pairs.

    Quantiles use linear interpolation of order statistics (the numpy
    default), stated in the output for reproducibility.
    """
    x = np.asarray(overlap_samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("no overlap samples")
    if np.any(x < 0) or np.any(x > min(n1, n2)):
        raise ValueError("overlap samples outside [0, min(n1, n2)]")
    return OverlapSummary(
        matches=_summarize(x, interval_mass),
        match_rate=_summarize(x / n2, interval_mass),
        distinct_entities=_summarize(n1 + n2 - x, interval_mass),
        interval_mass=interval_mass,
    )
