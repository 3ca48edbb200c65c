"""Point estimates of the matching derived from posterior link probabilities.

Decisions are taken per file-2 record: link it to a file-1 record, declare
it non-linked, or reject the automatic decision and leave it to clerical
review.  Each decision is charged an additive loss and estimates minimize
posterior expected loss, either by closed-form per-record rules (valid in
the loss regimes below) or by a linear-sum-assignment search that works for
any loss configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import linear_sum_assignment

if TYPE_CHECKING:  # import cycle: bayes builds on fs which builds on this module
    from .bayes import PosteriorSummary

NON_LINK = 0
REJECT = -1

_DECISION_NAMES = {NON_LINK: "non-link", REJECT: "reject"}


class LossRegimeError(ValueError):
    """A closed-form estimator was called outside its loss regime."""


class PosteriorError(ValueError):
    """Posterior marginals violate the one-to-one matching constraints."""


@dataclass(frozen=True)
class LossConfig:
    """Additive losses for the three decision errors plus rejection.

    ``lambda_10`` charges a false non-link (the record had a match),
    ``lambda_01`` a link of a truly unmatched record, ``lambda_11p`` a link
    of a record whose true match is a different file-1 record, and
    ``lambda_r`` a rejection.  ``lambda_r=None`` disables rejection
    entirely (an unbounded rejection price).
    """

    lambda_10: float = 1.0
    lambda_01: float = 1.0
    lambda_11p: float = 2.0
    lambda_r: float | None = None

    def __post_init__(self) -> None:
        for name in ("lambda_10", "lambda_01", "lambda_11p"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lambda_r is not None and self.lambda_r <= 0:
            raise ValueError("lambda_r must be positive (or None to disable rejection)")

    @property
    def allows_reject(self) -> bool:
        return self.lambda_r is not None

    @property
    def full_regime(self) -> bool:
        """No rejection, lambda_10 <= lambda_01, lambda_11p >= lambda_10 + lambda_01."""
        return (
            self.lambda_r is None
            and self.lambda_10 <= self.lambda_01
            and self.lambda_11p >= self.lambda_10 + self.lambda_01
        )

    @property
    def partial_regime(self) -> bool:
        """Rejection allowed with lambda_11p >= lambda_01 >= 2 lambda_r and
        lambda_10 >= 2 lambda_r."""
        return (
            self.lambda_r is not None
            and self.lambda_11p >= self.lambda_01
            and self.lambda_01 >= 2 * self.lambda_r
            and self.lambda_10 >= 2 * self.lambda_r
        )


@dataclass(eq=False)
class LinkageEstimate:
    """One decision per file-2 record.

    ``decisions[j-1]`` holds the linked file-1 index (1-based), NON_LINK
    (0), or REJECT (-1).  Optional per-record diagnostics carry the
    posterior probability behind each decision and its expected loss.
    """

    n1: int
    n2: int
    decisions: np.ndarray
    estimator: str = ""
    probs: np.ndarray | None = None
    losses: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.decisions = np.asarray(self.decisions, dtype=np.int64)
        if self.decisions.shape != (self.n2,):
            raise ValueError("decisions must hold one entry per file-2 record")
        if np.any(self.decisions < REJECT) or np.any(self.decisions > self.n1):
            raise ValueError("decisions contain values outside {-1, 0, 1..n1}")
        linked = self.decisions[self.decisions >= 1]
        if len(np.unique(linked)) != len(linked):
            raise ValueError("two records link to the same file-1 record")

    @property
    def links(self) -> list[tuple[int, int]]:
        return [(int(d), j) for j, d in enumerate(self.decisions, start=1) if d >= 1]

    @property
    def n_links(self) -> int:
        return int(np.sum(self.decisions >= 1))

    @property
    def n_rejects(self) -> int:
        return int(np.sum(self.decisions == REJECT))

    @property
    def n_non_links(self) -> int:
        return int(np.sum(self.decisions == NON_LINK))

    def decision_name(self, j: int) -> str:
        d = int(self.decisions[j - 1])
        return _DECISION_NAMES.get(d, "link")


def validate_posterior(post: PosteriorSummary, tol: float = 1e-9) -> None:
    """Refuse marginals that cannot come from a distribution over matchings.

    Checks that each record's link probabilities plus its non-link
    probability sum to 1 and that no file-1 record accumulates more than
    probability 1 across records, both within ``tol``.
    """
    col: dict[int, float] = {}
    for j in range(1, post.n2 + 1):
        probs = post.pair_probs[j - 1]
        s = sum(probs.values()) + float(post.nonmatch_probs[j - 1])
        if abs(s - 1.0) > tol:
            raise PosteriorError(f"record {j}: link and non-link probabilities sum to {s}")
        for i, p in probs.items():
            if p < -tol:
                raise PosteriorError(f"negative probability at pair ({i}, {j})")
            col[i] = col.get(i, 0.0) + p
    for i, s in col.items():
        if s > 1.0 + tol:
            raise PosteriorError(
                f"file-1 record {i} has total link probability {s} > 1: "
                "marginals violate the one-to-one constraint"
            )


def expected_loss(j: int, decision: int, post: PosteriorSummary, cfg: LossConfig) -> float:
    """Posterior expected loss of one decision for record j.

    ``decision`` uses the LinkageEstimate encoding: a file-1 index to
    link, NON_LINK, or REJECT.
    """
    if decision == REJECT:
        if cfg.lambda_r is None:
            raise LossRegimeError("rejection is disabled under this loss configuration")
        return cfg.lambda_r
    p_nm = float(post.nonmatch_probs[j - 1])
    if decision == NON_LINK:
        return cfg.lambda_10 * (1.0 - p_nm)
    if not (1 <= decision <= post.n1):
        raise ValueError(f"decision {decision} is not a valid file-1 index")
    p_i = post.pair_probs[j - 1].get(decision, 0.0)
    return cfg.lambda_01 * p_nm + cfg.lambda_11p * (1.0 - p_nm - p_i)


def total_expected_loss(est: LinkageEstimate, post: PosteriorSummary, cfg: LossConfig) -> float:
    return sum(
        expected_loss(j, int(est.decisions[j - 1]), post, cfg) for j in range(1, est.n2 + 1)
    )


def _best_candidate(post: PosteriorSummary, j: int) -> tuple[int, float]:
    """Most probable link for record j; ties resolved to the lowest index."""
    probs = post.pair_probs[j - 1]
    if not probs:
        return 0, 0.0
    best_i, best_p = 0, -1.0
    for i in sorted(probs):
        if probs[i] > best_p:
            best_i, best_p = i, probs[i]
    return best_i, best_p


def bayes_full(post: PosteriorSummary, cfg: LossConfig) -> LinkageEstimate:
    """Minimum-expected-loss estimate when rejection is disabled.

    Valid when lambda_r is None, lambda_10 <= lambda_01 and
    lambda_11p >= lambda_10 + lambda_01: each record links to its most
    probable candidate exactly when that probability clears the loss-ratio
    threshold, and ties fall to the conservative non-link.
    """
    if not cfg.full_regime:
        raise LossRegimeError(
            "bayes_full requires lambda_r=None, lambda_10 <= lambda_01 and "
            "lambda_11p >= lambda_10 + lambda_01"
        )
    validate_posterior(post)
    s = cfg.lambda_01 + cfg.lambda_10
    decisions = np.zeros(post.n2, dtype=np.int64)
    probs = np.zeros(post.n2)
    for j in range(1, post.n2 + 1):
        best_i, p_i = _best_candidate(post, j)
        p_nm = float(post.nonmatch_probs[j - 1])
        p_other = max(0.0, 1.0 - p_i - p_nm)
        threshold = cfg.lambda_01 / s + (cfg.lambda_11p - s) / s * p_other
        if best_i >= 1 and p_i > threshold:
            decisions[j - 1] = best_i
            probs[j - 1] = p_i
        else:
            decisions[j - 1] = NON_LINK
            probs[j - 1] = p_nm
    est = LinkageEstimate(post.n1, post.n2, decisions, estimator="bayes-full", probs=probs)
    est.losses = _decision_losses(est, post, cfg)
    return est


def bayes_partial(post: PosteriorSummary, cfg: LossConfig) -> LinkageEstimate:
    """Minimum-expected-loss estimate with rejection.

    Valid when lambda_11p >= lambda_01 >= 2 lambda_r and
    lambda_10 >= 2 lambda_r: link the most probable candidate when its
    probability clears the link threshold, declare a non-link when the
    non-link probability clears its own threshold, and reject otherwise
    (ties reject).
    """
    if not cfg.partial_regime:
        raise LossRegimeError(
            "bayes_partial requires lambda_11p >= lambda_01 >= 2*lambda_r and "
            "lambda_10 >= 2*lambda_r"
        )
    assert cfg.lambda_r is not None
    validate_posterior(post)
    decisions = np.zeros(post.n2, dtype=np.int64)
    probs = np.zeros(post.n2)
    for j in range(1, post.n2 + 1):
        best_i, p_i = _best_candidate(post, j)
        p_nm = float(post.nonmatch_probs[j - 1])
        p_other = max(0.0, 1.0 - p_i - p_nm)
        link_threshold = (
            1.0
            - cfg.lambda_r / cfg.lambda_01
            + (cfg.lambda_11p - cfg.lambda_01) / cfg.lambda_01 * p_other
        )
        if best_i >= 1 and p_i > link_threshold:
            decisions[j - 1] = best_i
            probs[j - 1] = p_i
        elif p_nm > 1.0 - cfg.lambda_r / cfg.lambda_10:
            decisions[j - 1] = NON_LINK
            probs[j - 1] = p_nm
        else:
            decisions[j - 1] = REJECT
            probs[j - 1] = p_nm
    est = LinkageEstimate(post.n1, post.n2, decisions, estimator="bayes-partial", probs=probs)
    est.losses = _decision_losses(est, post, cfg)
    return est


def bayes_estimate_general(post: PosteriorSummary, cfg: LossConfig) -> LinkageEstimate:
    """Minimum-expected-loss estimate for any loss configuration.

    Solves a linear sum assignment over an (n1 + 2 n2) x n2 cost matrix:
    the first n1 rows price linking each file-1 record, one dedicated row
    per record prices its non-link, and one more its rejection, so the
    one-to-one constraint is enforced globally.
    """
    validate_posterior(post)
    n1, n2 = post.n1, post.n2
    reject_rows = n2 if cfg.allows_reject else 0
    cost = np.full((n1 + n2 + reject_rows, n2), np.inf)
    for j in range(1, n2 + 1):
        p_nm = float(post.nonmatch_probs[j - 1])
        for i, p_i in post.pair_probs[j - 1].items():
            cost[i - 1, j - 1] = cfg.lambda_01 * p_nm + cfg.lambda_11p * (1.0 - p_nm - p_i)
        cost[n1 + j - 1, j - 1] = cfg.lambda_10 * (1.0 - p_nm)
        if cfg.allows_reject:
            cost[n1 + n2 + j - 1, j - 1] = cfg.lambda_r
    # Links the posterior never sampled are still legal decisions, priced
    # with probability zero on the linked pair.
    base_link = cfg.lambda_01 * post.nonmatch_probs + cfg.lambda_11p * (
        1.0 - post.nonmatch_probs
    )
    for j in range(n2):
        col = cost[:n1, j]
        col[np.isinf(col)] = base_link[j]
    rows, cols = linear_sum_assignment(cost)
    decisions = np.zeros(n2, dtype=np.int64)
    for r, c in zip(rows, cols):
        j = c + 1
        if r < n1:
            decisions[j - 1] = r + 1
        elif r < n1 + n2:
            decisions[j - 1] = NON_LINK
        else:
            decisions[j - 1] = REJECT
    est = LinkageEstimate(n1, n2, decisions, estimator="bayes-general")
    est.losses = _decision_losses(est, post, cfg)
    return est


def _decision_losses(est: LinkageEstimate, post: PosteriorSummary, cfg: LossConfig) -> np.ndarray:
    return np.array(
        [expected_loss(j, int(est.decisions[j - 1]), post, cfg) for j in range(1, est.n2 + 1)]
    )


@dataclass(frozen=True)
class CrossTab:
    """3x3 cross-tabulation of two estimates' decisions.

    Rows index the first estimate, columns the second, both in the order
    link, reject, non-link.  ``agreed_links`` counts record pairs that both
    estimates link to the same file-1 record; the conventional display of
    the link-link cell is "count [agreed_links]".
    """

    counts: np.ndarray
    agreed_links: int
    labels: tuple[str, str, str] = ("link", "reject", "non-link")

    def cell_text(self, r: int, c: int) -> str:
        if r == 0 and c == 0:
            return f"{int(self.counts[0, 0])} [{self.agreed_links}]"
        return str(int(self.counts[r, c]))


def _decision_class(d: int) -> int:
    if d >= 1:
        return 0
    return 1 if d == REJECT else 2


def crosstab(a: LinkageEstimate, b: LinkageEstimate) -> CrossTab:
    """Cross-tabulate two estimates over the same file pair."""
    if a.n1 != b.n1 or a.n2 != b.n2:
        raise ValueError("estimates cover different file pairs")
    counts = np.zeros((3, 3), dtype=np.int64)
    agreed = 0
    for j in range(a.n2):
        da, db = int(a.decisions[j]), int(b.decisions[j])
        counts[_decision_class(da), _decision_class(db)] += 1
        if da >= 1 and da == db:
            agreed += 1
    return CrossTab(counts=counts, agreed_links=agreed)
