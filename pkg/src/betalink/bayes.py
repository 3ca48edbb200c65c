"""Bayesian bipartite matching with a beta prior on the number of links.

The matching labeling Z gets the prior

    P(Z) = (n1 - n12)! / n1! * B(n12 + a_pi, n2 - n12 + b_pi) / B(a_pi, b_pi)

with n12 the number of linked pairs, so every matching of the same size is
equally likely and the size itself follows a beta-binomial.  Observed
comparison levels follow per-field distributions m (matched pairs) or u
(non-matched pairs) under conditional independence; unobserved comparisons
drop out of the likelihood (missing at random).  A Gibbs sampler alternates
Dirichlet draws of (m, u) with sequential label draws per file-2 record;
tiny instances can instead be enumerated exactly with (m, u) integrated
out.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln, gammaln, logsumexp

from .comparison import MISSING_LEVEL, ComparisonData
from .core import MatchingLabeling, count_labelings, enumerate_labelings, overlap_size
from .fs import PhiParams


@dataclass(frozen=True)
class PriorConfig:
    """Hyperparameters: beta prior (alpha_pi, beta_pi) on the match rate and
    Dirichlet priors on each field's m and u vectors (default: all ones).
    ``flat_matching`` swaps the beta prior for a uniform prior over all
    bipartite matchings."""

    alpha_pi: float = 1.0
    beta_pi: float = 1.0
    alpha: tuple[np.ndarray, ...] | None = None
    beta: tuple[np.ndarray, ...] | None = None
    flat_matching: bool = False

    def __post_init__(self) -> None:
        if self.alpha_pi <= 0 or self.beta_pi <= 0:
            raise ValueError("alpha_pi and beta_pi must be positive")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if v is not None:
                arrs = tuple(np.asarray(a, dtype=np.float64) for a in v)
                for a in arrs:
                    if np.any(a <= 0):
                        raise ValueError(f"{name} entries must be positive")
                object.__setattr__(self, name, arrs)

    def resolve(self, level_counts: tuple[int, ...]) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
        """Per-field Dirichlet parameters, filling flat ones where unset."""
        if self.alpha is None:
            alphas = tuple(np.ones(c) for c in level_counts)
        else:
            alphas = self.alpha
        if self.beta is None:
            betas = tuple(np.ones(c) for c in level_counts)
        else:
            betas = self.beta
        if tuple(len(a) for a in alphas) != tuple(level_counts) or tuple(
            len(b) for b in betas
        ) != tuple(level_counts):
            raise ValueError("prior level counts do not match the comparison data")
        return alphas, betas


def prior_log_pmf(z: MatchingLabeling, cfg: PriorConfig) -> float:
    """Log prior probability of a matching labeling."""
    n1, n2 = z.n1, z.n2
    if cfg.flat_matching:
        return -math.log(count_labelings(n1, n2))
    k = overlap_size(z)
    return float(
        gammaln(n1 - k + 1)
        - gammaln(n1 + 1)
        + betaln(k + cfg.alpha_pi, n2 - k + cfg.beta_pi)
        - betaln(cfg.alpha_pi, cfg.beta_pi)
    )


@dataclass(frozen=True)
class SufficientStats:
    """Observed level counts per field among matched pairs (a) and
    non-matched candidate pairs (b)."""

    a: tuple[np.ndarray, ...]
    b: tuple[np.ndarray, ...]

    @classmethod
    def from_labeling(cls, data: ComparisonData, z: MatchingLabeling) -> "SufficientStats":
        if z.n1 != data.n1 or z.n2 != data.n2:
            raise ValueError("labeling does not match the comparison dimensions")
        totals = data.level_totals()
        rows = data.pair_level_rows(z.matched_pairs())
        a = []
        for f, count in enumerate(data.level_counts):
            col = rows[:, f].astype(np.int64)
            obs = col != MISSING_LEVEL
            a.append(np.bincount(col[obs], minlength=count).astype(np.int64))
        b = tuple(totals[f] - a[f] for f in range(data.n_fields))
        return cls(a=tuple(a), b=b)


def sample_phi(stats: SufficientStats, cfg: PriorConfig, rng: np.random.Generator) -> PhiParams:
    """Draw (m, u) from their Dirichlet full conditionals given the stats."""
    level_counts = tuple(len(v) for v in stats.a)
    alphas, betas = cfg.resolve(level_counts)
    m = tuple(rng.dirichlet(stats.a[f] + alphas[f]) for f in range(len(level_counts)))
    u = tuple(rng.dirichlet(stats.b[f] + betas[f]) for f in range(len(level_counts)))
    return PhiParams(m=m, u=u, p=None)


def marginal_log_posterior(
    data: ComparisonData, z: MatchingLabeling, cfg: PriorConfig = PriorConfig()
) -> float:
    """Log posterior mass of one labeling, up to the model constant.

    (m, u) are integrated out exactly, so labelings, modes, and chains
    can be compared on their matchings alone; the matching posterior is
    multimodal on weakly separated data and this score tells a chain
    stuck in a minor mode from one in the dominant mode.
    """
    alphas, betas = cfg.resolve(data.level_counts)
    stats = SufficientStats.from_labeling(data, z)
    lp = prior_log_pmf(z, cfg)
    for f in range(data.n_fields):
        lp += _log_beta_vec(alphas[f] + stats.a[f]) - _log_beta_vec(alphas[f])
        lp += _log_beta_vec(betas[f] + stats.b[f]) - _log_beta_vec(betas[f])
    return float(lp)


def _label_from_gumbel(
    wcol: np.ndarray,
    taken: np.ndarray,
    g: np.ndarray,
    k_minus: int,
    n1: int,
    n2: int,
    alpha_pi: float,
    beta_pi: float,
    flat: bool,
) -> int:
    """Argmax-with-Gumbel-noise draw of one label.

    ``wcol`` holds log link masses (weight of pair (q, j)), ``taken`` marks
    file-1 records linked elsewhere, ``k_minus`` is the number of links
    excluding record j.  Returns a 0-based file-1 index or -1 (unmatched).
    All arithmetic stays in log space.
    """
    masses = np.where(taken, -np.inf, wcol) + g[:n1]
    if flat:
        um = g[n1]
    else:
        free = n1 - k_minus
        if free <= 0:
            # every file-1 record is linked elsewhere: only unmatched mass
            um = np.inf
        else:
            um = (
                math.log(free)
                + math.log(n2 - k_minus - 1 + beta_pi)
                - math.log(k_minus + alpha_pi)
                + g[n1]
            )
    best = int(np.argmax(masses))
    return best if masses[best] > um else -1


def _phi_log_column(
    phi: PhiParams, rows: np.ndarray, cand: np.ndarray
) -> np.ndarray:
    """Log link weights of pairs (1..n1, j) under phi; -inf off-candidates."""
    n1 = len(cand)
    w = np.where(cand, 0.0, -np.inf)
    with np.errstate(divide="ignore"):
        for f in range(phi.n_fields):
            col = rows[:, f].astype(np.int64)
            obs = (col != MISSING_LEVEL) & cand
            w[obs] += np.log(phi.m[f][col[obs]]) - np.log(phi.u[f][col[obs]])
    return w


def sample_label(
    j: int,
    z: MatchingLabeling,
    phi: PhiParams,
    cfg: PriorConfig,
    data: ComparisonData,
    rng: np.random.Generator,
) -> int:
    """Draw a new label for record j from its full conditional.

    Link masses are exp(w_qj) for free candidates q; the unmatched mass is
    (n1 - n12) (n2 - n12 - 1 + b_pi) / (n12 + a_pi) with n12 counted over
    the other records (or 1 under the flat matching prior).  Returns the
    new label: a file-1 index or n1 + j.
    """
    n1, n2 = data.n1, data.n2
    if z.n1 != n1 or z.n2 != n2:
        raise ValueError("labeling does not match the comparison dimensions")
    taken = np.zeros(n1, dtype=bool)
    k_minus = 0
    for jj, lab in enumerate(z.labels, start=1):
        if jj != j and lab <= n1:
            taken[lab - 1] = True
            k_minus += 1
    rows, cand = data.pair_rows_for_j(j)
    wcol = _phi_log_column(phi, rows, cand)
    g = rng.gumbel(size=n1 + 1)
    i0 = _label_from_gumbel(wcol, taken, g, k_minus, n1, n2, cfg.alpha_pi, cfg.beta_pi, cfg.flat_matching)
    return i0 + 1 if i0 >= 0 else n1 + j


@dataclass(eq=False)
class PosteriorSummary:
    """Posterior over matchings reduced to per-record marginals.

    ``pair_probs[j-1]`` maps file-1 candidates to P(Z_j = i); together with
    ``nonmatch_probs[j-1]`` the entries sum to one.  Retained labeling
    samples and the chain of match counts are kept when the summary comes
    from a sampler run.
    """

    n1: int
    n2: int
    pair_probs: list[dict[int, float]]
    nonmatch_probs: np.ndarray
    overlap_samples: np.ndarray | None = None
    samples: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.nonmatch_probs = np.asarray(self.nonmatch_probs, dtype=np.float64)
        if len(self.pair_probs) != self.n2 or self.nonmatch_probs.shape != (self.n2,):
            raise ValueError("marginals must cover every file-2 record")

    def validate(self, tol: float = 1e-12) -> None:
        """Check that each record's marginals sum to one and column sums stay
        at or below one (tolerance 1e-9 on columns)."""
        col: dict[int, float] = {}
        for j in range(1, self.n2 + 1):
            s = sum(self.pair_probs[j - 1].values()) + float(self.nonmatch_probs[j - 1])
            if abs(s - 1.0) > tol:
                raise ValueError(f"record {j} marginals sum to {s}")
            for i, p in self.pair_probs[j - 1].items():
                col[i] = col.get(i, 0.0) + p
        for i, s in col.items():
            if s > 1.0 + 1e-9:
                raise ValueError(f"file-1 record {i} total link probability {s} exceeds 1")

    def candidates(self, j: int) -> list[tuple[int, float]]:
        """Candidates of record j sorted by decreasing probability (ties by
        index)."""
        probs = self.pair_probs[j - 1]
        return sorted(probs.items(), key=lambda kv: (-kv[1], kv[0]))

    def link_probability(self, i: int, j: int) -> float:
        return self.pair_probs[j - 1].get(i, 0.0)

    @classmethod
    def from_samples(
        cls, n1: int, samples: np.ndarray, meta: dict | None = None
    ) -> "PosteriorSummary":
        """Empirical marginals from retained labeling samples (1-based
        labels, one row per retained iteration)."""
        samples = np.asarray(samples)
        kept, n2 = samples.shape
        pair_probs: list[dict[int, float]] = []
        nonmatch = np.zeros(n2)
        for j in range(1, n2 + 1):
            vals, counts = np.unique(samples[:, j - 1], return_counts=True)
            probs: dict[int, float] = {}
            for v, c in zip(vals, counts):
                if v <= n1:
                    probs[int(v)] = c / kept
                else:
                    nonmatch[j - 1] = c / kept
            pair_probs.append(probs)
        overlap = (samples <= n1).sum(axis=1).astype(np.int64)
        return cls(
            n1=n1,
            n2=n2,
            pair_probs=pair_probs,
            nonmatch_probs=nonmatch,
            overlap_samples=overlap,
            samples=samples,
            meta=dict(meta or {}),
        )


def run_gibbs(
    data: ComparisonData,
    cfg: PriorConfig = PriorConfig(),
    *,
    iterations: int,
    burn_in: int,
    seed: int,
    random_scan: bool = False,
) -> PosteriorSummary:
    """Gibbs-sample the matching posterior; deterministic given the seed.

    The chain starts from the empty matching.  Each iteration draws (m, u)
    from their Dirichlet conditionals given the current matching, then
    updates every record's label in file order (or in a fresh seeded
    permutation when ``random_scan``).  Samples after ``burn_in``
    iterations are retained.  Fields observed on no candidate pair are
    excluded from parameter sampling; they carry no information.
    """
    if burn_in < 0 or iterations <= burn_in:
        raise ValueError("need iterations > burn_in >= 0")
    n1, n2 = data.n1, data.n2
    if n2 < 1:
        raise ValueError("file 2 holds no records")
    t0 = time.monotonic()
    pk = data.pack()
    totals = data.level_totals()
    used = [f for f in range(data.n_fields) if totals[f].sum() > 0]
    alphas, betas = cfg.resolve(data.level_counts)
    ids = data.config_matrix()  # (n2, n1)
    masked = not data.complete
    ids_safe = np.maximum(ids, 0) if masked else ids
    # per-used-field views of the packed configuration table
    cfg_cols = [pk.levels[:, f].astype(np.int64) for f in used]
    cfg_obs = [c != MISSING_LEVEL for c in cfg_cols]
    sizes = [len(alphas[f]) for f in used]
    offsets = np.cumsum([0] + [2 * s for s in sizes])
    rng = np.random.default_rng(seed)
    z = np.full(n2, -1, dtype=np.int64)  # empty matching start
    taken = np.zeros(n1, dtype=bool)
    k = 0
    kept = iterations - burn_in
    samples = np.empty((kept, n2), dtype=np.int32)
    j_arange = np.arange(n2)
    unmatched_labels = n1 + j_arange + 1
    for t in range(iterations):
        # (m, u) | Z: Dirichlet via normalized gamma draws, one rng call
        cfg_w = np.zeros(pk.n_configs)
        conc = np.empty(offsets[-1])
        matched = z >= 0
        mc = ids[j_arange[matched], z[matched]]
        for fi, f in enumerate(used):
            lv = pk.levels[mc, f].astype(np.int64)
            obs = lv != MISSING_LEVEL
            a_f = np.bincount(lv[obs], minlength=sizes[fi])
            o = offsets[fi]
            conc[o : o + sizes[fi]] = a_f + alphas[f]
            conc[o + sizes[fi] : o + 2 * sizes[fi]] = (totals[f] - a_f) + betas[f]
        draws = np.maximum(rng.gamma(conc), 1e-300)  # guard log(0) underflow
        with np.errstate(divide="ignore"):
            for fi, f in enumerate(used):
                o = offsets[fi]
                mf = draws[o : o + sizes[fi]]
                uf = draws[o + sizes[fi] : o + 2 * sizes[fi]]
                logr = np.log(mf / mf.sum()) - np.log(uf / uf.sum())
                obs = cfg_obs[fi]
                cfg_w[obs] += logr[cfg_cols[fi][obs]]
        if masked:
            w_all = np.where(ids >= 0, cfg_w[ids_safe], -np.inf)
        else:
            w_all = cfg_w[ids]
        # Z | (m, u): one label at a time, Gumbel-max in log space
        g_all = rng.gumbel(size=(n2, n1 + 1))
        order = rng.permutation(n2) if random_scan else range(n2)
        for pos, j in enumerate(order):
            old = z[j]
            if old >= 0:
                taken[old] = False
                k -= 1
            lbl = _label_from_gumbel(
                w_all[j], taken, g_all[pos], k, n1, n2, cfg.alpha_pi, cfg.beta_pi, cfg.flat_matching
            )
            if lbl >= 0:
                taken[lbl] = True
                k += 1
            z[j] = lbl
        if t >= burn_in:
            samples[t - burn_in] = np.where(z >= 0, z + 1, unmatched_labels)
    meta = {
        "iterations": iterations,
        "burn_in": burn_in,
        "seed": seed,
        "alpha_pi": cfg.alpha_pi,
        "beta_pi": cfg.beta_pi,
        "flat_matching": cfg.flat_matching,
        "random_scan": random_scan,
        "fields": list(data.field_names),
        "elapsed_s": None,
    }
    out = PosteriorSummary.from_samples(n1, samples, meta)
    out.meta["elapsed_s"] = round(time.monotonic() - t0, 3)
    return out


@dataclass(eq=False)
class ExactPosterior:
    """Posterior probability of every matching labeling of a tiny instance,
    computed by enumeration with (m, u) integrated out."""

    n1: int
    n2: int
    labelings: list[tuple[int, ...]]
    log_probs: np.ndarray
    probs: np.ndarray

    def labeling_probability(self, labels: tuple[int, ...]) -> float:
        try:
            idx = self.labelings.index(tuple(labels))
        except ValueError:
            raise ValueError("not a valid labeling for this instance") from None
        return float(self.probs[idx])

    def pair_probability(self, i: int, j: int) -> float:
        sel = [k for k, z in enumerate(self.labelings) if z[j - 1] == i]
        return float(self.probs[sel].sum())

    def to_summary(self) -> PosteriorSummary:
        pair_probs: list[dict[int, float]] = [dict() for _ in range(self.n2)]
        nonmatch = np.zeros(self.n2)
        for z, p in zip(self.labelings, self.probs):
            for j0, lab in enumerate(z):
                if lab <= self.n1:
                    d = pair_probs[j0]
                    d[lab] = d.get(lab, 0.0) + float(p)
                else:
                    nonmatch[j0] += p
        return PosteriorSummary(
            n1=self.n1,
            n2=self.n2,
            pair_probs=pair_probs,
            nonmatch_probs=nonmatch,
            meta={"exact": True},
        )


MAX_EXACT_LABELINGS = 1_000_000


def _log_beta_vec(v: np.ndarray) -> float:
    return float(gammaln(v).sum() - gammaln(v.sum()))


def exact_posterior(
    data: ComparisonData,
    cfg: PriorConfig = PriorConfig(),
    *,
    max_labelings: int = MAX_EXACT_LABELINGS,
) -> ExactPosterior:
    """Enumerate the posterior over all matchings of a tiny instance.

    The likelihood of each labeling integrates the Dirichlet-distributed
    (m, u) exactly, so this is the reference the sampler is tested
    against.  Refuses instances with more than ``max_labelings``
    matchings.
    """
    n1, n2 = data.n1, data.n2
    n_lab = count_labelings(n1, n2)
    if n_lab > max_labelings:
        raise ValueError(f"{n_lab} matchings exceed the exact enumeration cap {max_labelings}")
    alphas, betas = cfg.resolve(data.level_counts)
    totals = data.level_totals()
    rows_by_j = [data.pair_rows_for_j(j) for j in range(1, n2 + 1)]
    fields = range(data.n_fields)
    base = sum(_log_beta_vec(alphas[f]) + _log_beta_vec(betas[f]) for f in fields)
    labelings: list[tuple[int, ...]] = []
    logs = np.empty(n_lab)
    for idx, labels in enumerate(enumerate_labelings(n1, n2)):
        z = MatchingLabeling(n1, labels)
        a = [np.zeros(c, dtype=np.int64) for c in data.level_counts]
        for j, lab in enumerate(labels, start=1):
            if lab <= n1:
                rows, cand = rows_by_j[j - 1]
                if not cand[lab - 1]:
                    continue
                for f in fields:
                    lv = int(rows[lab - 1, f])
                    if lv != MISSING_LEVEL:
                        a[f][lv] += 1
        ll = 0.0
        for f in fields:
            b = totals[f] - a[f]
            ll += _log_beta_vec(alphas[f] + a[f]) + _log_beta_vec(betas[f] + b)
        logs[idx] = prior_log_pmf(z, cfg) + ll - base
        labelings.append(labels)
    norm = logsumexp(logs)
    log_probs = logs - norm
    return ExactPosterior(
        n1=n1,
        n2=n2,
        labelings=labelings,
        log_probs=log_probs,
        probs=np.exp(log_probs),
    )
