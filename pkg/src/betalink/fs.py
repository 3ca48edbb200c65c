"""Mixture-model linkage: agreement weights, EM fit, MLE matching, and the
three-way link / review / non-link rule.

Comparison vectors are modeled as a two-component mixture: with probability
p a pair is a match and its levels follow per-field distributions m, else
they follow u.  The composite weight of a pair is the log likelihood ratio
summed over its observed fields; missing comparisons contribute nothing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .comparison import MISSING_LEVEL, ComparisonData
from .core import MatchingLabeling
from .estimators import NON_LINK, REJECT, LinkageEstimate

# Floor applied to m/u entries inside weight computations so that observed
# levels with vanishing estimated probability yield large finite weights.
EPS_FLOOR = 1e-6


@dataclass(frozen=True)
class PhiParams:
    """Per-field level distributions for matches (m) and non-matches (u),
    plus the mixture's match proportion p when fitted."""

    m: tuple[np.ndarray, ...]
    u: tuple[np.ndarray, ...]
    p: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "m", tuple(np.asarray(v, dtype=np.float64) for v in self.m))
        object.__setattr__(self, "u", tuple(np.asarray(v, dtype=np.float64) for v in self.u))
        if len(self.m) != len(self.u):
            raise ValueError("m and u must cover the same fields")
        for mf, uf in zip(self.m, self.u):
            if mf.shape != uf.shape or mf.ndim != 1:
                raise ValueError("m and u must be level vectors of equal length per field")
            for v in (mf, uf):
                if np.any(v < 0) or abs(float(v.sum()) - 1.0) > 1e-9:
                    raise ValueError("level distributions must be non-negative and sum to 1")
        if self.p is not None and not (0.0 <= self.p <= 1.0):
            raise ValueError("p must lie in [0, 1]")

    @property
    def n_fields(self) -> int:
        return len(self.m)

    @property
    def level_counts(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.m)


def composite_weight(phi: PhiParams, levels: "list[int | None] | np.ndarray") -> float:
    """Log likelihood ratio of one pair's comparison vector.

    ``levels`` holds one level per field with None (or MISSING_LEVEL) for
    unobserved comparisons, which contribute exactly 0.  Entries of m and u
    are floored at EPS_FLOOR so the weight stays finite.
    """
    total = 0.0
    for f, lvl in enumerate(levels):
        if lvl is None or lvl == MISSING_LEVEL:
            continue
        lvl = int(lvl)
        if not 0 <= lvl < len(phi.m[f]):
            raise ValueError(f"level {lvl} out of range on field {f}")
        total += math.log(max(phi.m[f][lvl], EPS_FLOOR)) - math.log(
            max(phi.u[f][lvl], EPS_FLOOR)
        )
    return total


@dataclass(eq=False)
class WeightMatrix:
    """Composite weights for every pair; -inf marks non-candidate pairs."""

    n1: int
    n2: int
    w: np.ndarray

    def __post_init__(self) -> None:
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.w.shape != (self.n1, self.n2):
            raise ValueError("weight matrix shape must be (n1, n2)")


def _config_weights(phi: PhiParams, cfg_levels: np.ndarray) -> np.ndarray:
    """Composite weight of each distinct comparison vector (floored logs)."""
    n_cfg = len(cfg_levels)
    out = np.zeros(n_cfg)
    for f in range(phi.n_fields):
        col = cfg_levels[:, f].astype(np.int64)
        obs = col != MISSING_LEVEL
        logm = np.log(np.maximum(phi.m[f], EPS_FLOOR))
        logu = np.log(np.maximum(phi.u[f], EPS_FLOOR))
        out[obs] += logm[col[obs]] - logu[col[obs]]
    return out


def weight_matrix(phi: PhiParams, data: ComparisonData) -> WeightMatrix:
    """Composite weights for all candidate pairs of a comparison."""
    if phi.level_counts != data.level_counts:
        raise ValueError("phi level counts do not match the comparison data")
    pk = data.pack()
    cfg_w = _config_weights(phi, pk.levels)
    ids = data.config_matrix()  # (n2, n1), -1 for non-candidates
    w = np.where(ids >= 0, cfg_w[np.maximum(ids, 0)], -np.inf).T
    return WeightMatrix(data.n1, data.n2, np.ascontiguousarray(w))


def default_init(data: ComparisonData, p: float = 0.1) -> PhiParams:
    """EM starting point: m puts mass 0.9 on exact agreement and spreads the
    rest uniformly; u is uniform."""
    m, u = [], []
    for count in data.level_counts:
        mf = np.full(count, 0.1 / (count - 1)) if count > 1 else np.array([1.0])
        mf[0] = 0.9 if count > 1 else 1.0
        m.append(mf)
        u.append(np.full(count, 1.0 / count))
    return PhiParams(m=tuple(m), u=tuple(u), p=p)


@dataclass(eq=False)
class EMFit:
    """Result of an EM run: fitted parameters, the observed-data
    log-likelihood after each iteration, and convergence flags."""

    phi: PhiParams
    loglik: np.ndarray
    n_iter: int
    converged: bool
    degenerate: bool


def em_fit(
    data: ComparisonData,
    init: PhiParams | None = None,
    *,
    tol: float = 1e-8,
    max_iter: int = 1000,
) -> EMFit:
    """Fit the two-component mixture by EM on the comparison data.

    Unobserved comparisons are ignored field-wise (missing at random).
    Iteration stops when the relative log-likelihood change drops below
    ``tol`` or after ``max_iter`` iterations.  A comparison where every
    pair shows the same vector is fitted but flagged degenerate.
    """
    pk = data.pack()
    counts = pk.counts.astype(np.float64)
    n_total = float(counts.sum())
    if n_total == 0:
        raise ValueError("comparison data holds no pairs")
    phi = init if init is not None else default_init(data)
    if phi.level_counts != data.level_counts:
        raise ValueError("init level counts do not match the comparison data")
    p = phi.p if phi.p is not None else 0.1
    m = [v.copy() for v in phi.m]
    u = [v.copy() for v in phi.u]
    fields = range(data.n_fields)
    cols = [pk.levels[:, f].astype(np.int64) for f in fields]
    obs = [c != MISSING_LEVEL for c in cols]
    lls: list[float] = []
    converged = False
    for _ in range(max_iter):
        log_m = np.zeros(pk.n_configs)
        log_u = np.zeros(pk.n_configs)
        with np.errstate(divide="ignore"):
            for f in fields:
                lm = np.log(m[f])
                lu = np.log(u[f])
                log_m[obs[f]] += lm[cols[f][obs[f]]]
                log_u[obs[f]] += lu[cols[f][obs[f]]]
            la = np.log(p) + log_m
            lb = np.log1p(-p) + log_u
        lse = np.logaddexp(la, lb)
        ll = float(np.dot(counts, lse))
        lls.append(ll)
        if len(lls) >= 2 and abs(lls[-1] - lls[-2]) <= tol * max(1.0, abs(lls[-2])):
            converged = True
            break
        g = np.exp(la - lse)  # posterior match responsibility per config
        gw = g * counts
        p = float(np.clip(gw.sum() / n_total, 1e-12, 1.0 - 1e-12))
        for f in fields:
            cg = gw[obs[f]]
            cu = (counts - gw)[obs[f]]
            lv = cols[f][obs[f]]
            num_m = np.bincount(lv, weights=cg, minlength=len(m[f]))
            num_u = np.bincount(lv, weights=cu, minlength=len(u[f]))
            if num_m.sum() > 0:
                m[f] = num_m / num_m.sum()
            if num_u.sum() > 0:
                u[f] = num_u / num_u.sum()
    return EMFit(
        phi=PhiParams(m=tuple(m), u=tuple(u), p=p),
        loglik=np.asarray(lls),
        n_iter=len(lls),
        converged=converged,
        degenerate=pk.n_configs == 1,
    )


def mle_matching(weights: WeightMatrix) -> MatchingLabeling:
    """Matching maximizing the total composite weight of linked pairs.

    Solved as a linear sum assignment with one zero-cost dummy row per
    file-2 record, so pairs with negative weight are never forced into the
    solution; ties resolve deterministically (lowest indices first on the
    documented examples).
    """
    n1, n2 = weights.n1, weights.n2
    cost = np.full((n1 + n2, n2), np.inf)
    w = weights.w
    finite = np.isfinite(w)
    cost[:n1][finite] = -w[finite]
    cost[np.arange(n1, n1 + n2), np.arange(n2)] = 0.0
    rows, cols = linear_sum_assignment(cost)
    labels = [0] * n2
    for r, c in zip(rows, cols):
        j = c + 1
        labels[c] = r + 1 if r < n1 else n1 + j
    return MatchingLabeling(n1, tuple(labels))


def matching_weight(weights: WeightMatrix, z: MatchingLabeling) -> float:
    """Total composite weight of a matching's linked pairs."""
    return float(sum(weights.w[i - 1, j - 1] for i, j in z.matched_pairs()))


@dataclass(frozen=True)
class FSRuleConfig:
    """Admissible error rates for the three-way decision rule: ``mu`` bounds
    the non-match mass allowed into the link region and ``lambda_fs`` the
    match mass allowed into the non-link region."""

    mu: float = 0.0025
    lambda_fs: float = 0.005

    def __post_init__(self) -> None:
        if not (0.0 < self.mu < 1.0 and 0.0 < self.lambda_fs < 1.0):
            raise ValueError("mu and lambda_fs must lie strictly between 0 and 1")


_MAX_RULE_CONFIGS = 1_000_000


@dataclass(frozen=True)
class PatternThresholds:
    """Decision boundaries for one missingness pattern.

    Configurations are sorted by weight (ties by level vector); ranks
    below ``link_rank`` are links and ranks above ``non_link_rank`` are
    non-links.  ``attained_mu`` and ``attained_lambda`` report the error
    mass actually admitted at the discrete cut, which clamps below the
    requested rates.
    """

    observed: tuple[bool, ...]
    link_rank: int
    non_link_rank: int
    attained_mu: float
    attained_lambda: float


@dataclass(eq=False)
class FSDecisions:
    """Three-way decisions for the matched pairs of an MLE matching."""

    pairs: list[tuple[int, int]]
    weights: np.ndarray
    decisions: list[str]
    thresholds: dict[tuple[bool, ...], PatternThresholds]
    config: FSRuleConfig

    def to_estimate(self, n1: int, n2: int) -> LinkageEstimate:
        """Full-file estimate: reviews become rejections, unmatched records
        non-links."""
        decisions = np.full(n2, NON_LINK, dtype=np.int64)
        for (i, j), d in zip(self.pairs, self.decisions):
            decisions[j - 1] = i if d == "link" else (REJECT if d == "review" else NON_LINK)
        return LinkageEstimate(n1, n2, decisions, estimator="fs-rule")


def _pattern_rule(
    phi: PhiParams, observed: tuple[bool, ...], cfg: FSRuleConfig
) -> tuple[dict[tuple[int, ...], int], PatternThresholds]:
    """Rank all configurations of one missingness pattern and locate the
    link/non-link boundaries."""
    fields = [f for f, o in enumerate(observed) if o]
    size = 1
    for f in fields:
        size *= len(phi.m[f])
        if size > _MAX_RULE_CONFIGS:
            raise ValueError("too many level configurations for the decision rule")
    configs = list(itertools.product(*[range(len(phi.m[f])) for f in fields]))
    pm = np.ones(len(configs))
    pu = np.ones(len(configs))
    ws = np.zeros(len(configs))
    for k, cf in enumerate(configs):
        for f, lvl in zip(fields, cf):
            pm[k] *= phi.m[f][lvl]
            pu[k] *= phi.u[f][lvl]
            ws[k] += math.log(max(phi.m[f][lvl], EPS_FLOOR)) - math.log(
                max(phi.u[f][lvl], EPS_FLOOR)
            )
    order = sorted(range(len(configs)), key=lambda k: (-ws[k], configs[k]))
    rank_of = {configs[k]: r for r, k in enumerate(order, start=1)}
    cum_u = np.cumsum(pu[order])
    tail_m = np.cumsum(pm[order][::-1])[::-1]
    h1 = int(np.searchsorted(cum_u, cfg.mu, side="left")) + 1  # first rank with cum_u >= mu
    h2 = 1
    for r in range(len(order), 0, -1):
        if tail_m[r - 1] >= cfg.lambda_fs:
            h2 = r
            break
    meta = PatternThresholds(
        observed=observed,
        link_rank=h1,
        non_link_rank=h2,
        attained_mu=float(cum_u[h1 - 2]) if h1 >= 2 else 0.0,
        attained_lambda=float(tail_m[h2]) if h2 < len(order) else 0.0,
    )
    return rank_of, meta


def fs_decision_rule(
    phi: PhiParams,
    data: ComparisonData,
    matched: MatchingLabeling,
    cfg: FSRuleConfig,
) -> FSDecisions:
    """Split MLE-matched pairs into links, reviews, and non-links.

    Per missingness pattern, configurations are ordered by decreasing
    weight; the link region admits at most ``mu`` of non-match mass and
    the non-link region gives up at most ``lambda_fs`` of match mass.
    When the regions overlap, link wins.
    """
    pairs = matched.matched_pairs()
    pair_levels = data.pair_level_rows(pairs)
    rules: dict[tuple[bool, ...], tuple[dict, PatternThresholds]] = {}
    decisions: list[str] = []
    ws = np.zeros(len(pairs))
    for k, lv in enumerate(pair_levels):
        observed = tuple(int(x) != MISSING_LEVEL for x in lv)
        if observed not in rules:
            rules[observed] = _pattern_rule(phi, observed, cfg)
        rank_of, meta = rules[observed]
        key = tuple(int(x) for x in lv if int(x) != MISSING_LEVEL)
        rank = rank_of[key]
        ws[k] = composite_weight(phi, [int(x) for x in lv])
        if rank <= meta.link_rank - 1:
            decisions.append("link")
        elif rank >= meta.non_link_rank + 1:
            decisions.append("non-link")
        else:
            decisions.append("review")
    return FSDecisions(
        pairs=pairs,
        weights=ws,
        decisions=decisions,
        thresholds={pat: meta for pat, (_, meta) in rules.items()},
        config=cfg,
    )
