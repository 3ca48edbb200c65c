"""Command-line pipeline driver.

Each stage reads and writes plain files so runs can be scripted, cached,
and diffed.  Formats:

* datafiles: CSV with an id column and one column per field; missing
  values use the configured missing token (empty string by default).
* comparison config: JSON with ``missing_token``, ``id_field``, a
  ``fields`` list ({name, kind, comparator, thresholds?, adjacency?}),
  and optional ``blocking`` ({fields: [...]}).
* comparison data: CSV of per-pair disagreement levels plus a
  ``.meta.json`` sidecar holding the shape needed to reload it.
* fitted parameters: JSON with per-field m/u level distributions.
* labelings (ground truth, MLE output): CSV with columns j,label.
* estimates: CSV with columns j,decision,target,prob,expected_loss.
* posterior: a directory holding retained samples, pairwise match
  probabilities, the overlap trace, and chain metadata.

Every output gets a ``.meta.json`` sidecar (or ``meta.json`` inside a
directory output) recording the command, parameters, library versions,
and wall time, so any artifact can be traced back to its inputs.
"""

from __future__ import annotations

import csv
import json
import platform
import time
from pathlib import Path

import click
import numpy as np
import scipy

from .bayes import PosteriorSummary, PriorConfig, run_gibbs
from .comparison import (
    BlockingSpec,
    ComparatorSpec,
    ComparisonData,
    build_comparison_data,
)
from .core import FieldSchema, MatchingLabeling, load_datafile, write_datafile
from .estimators import LinkageEstimate, LossConfig, bayes_full, bayes_partial
from .evaluation import score_full, score_partial
from .fs import FSRuleConfig, PhiParams, em_fit, fs_decision_rule, mle_matching, weight_matrix
from .synth import GeneratorConfig, generate_pair


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("betalink")
    except Exception:
        return "unknown"


def _meta(command: str, params: dict, started: float, **extra) -> dict:
    return {
        "command": command,
        "params": params,
        "versions": {
            "betalink": _package_version(),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "elapsed_s": round(time.monotonic() - started, 3),
        **extra,
    }


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_sidecar(out: Path, meta: dict) -> None:
    _write_json(Path(str(out) + ".meta.json"), meta)


def _fail(stage: str, source, exc: Exception) -> click.ClickException:
    return click.ClickException(f"{stage}: {source}: {exc}")


# -- config ------------------------------------------------------------


def read_compare_config(path: str | Path):
    """Parse a comparison config into schema, comparator specs, blocking."""
    doc = json.loads(Path(path).read_text())
    missing = doc.get("missing_token", "")
    id_field = doc.get("id_field")
    schema, specs = [], []
    for fd in doc["fields"]:
        schema.append(
            FieldSchema(
                name=fd["name"],
                kind=fd.get("kind", "string"),
                missing_token=fd.get("missing_token", missing),
            )
        )
        adjacency = fd.get("adjacency")
        specs.append(
            ComparatorSpec(
                field=fd["name"],
                kind=fd["comparator"],
                thresholds=tuple(fd.get("thresholds", ())),
                adjacency=(
                    frozenset(tuple(pair) for pair in adjacency)
                    if adjacency
                    else None
                ),
            )
        )
    blocking = None
    if doc.get("blocking"):
        blocking = BlockingSpec(fields=tuple(doc["blocking"]["fields"]))
    return tuple(schema), specs, blocking, id_field


def load_comparison(path: str | Path) -> ComparisonData:
    """Reload comparison data written by the compare stage (needs sidecar)."""
    meta_path = Path(str(path) + ".meta.json")
    if not meta_path.exists():
        raise FileNotFoundError(f"missing sidecar {meta_path}")
    meta = json.loads(meta_path.read_text())
    return ComparisonData.from_csv(
        path,
        n1=meta["n1"],
        n2=meta["n2"],
        level_counts=meta["level_counts"],
        complete=meta["complete"],
    )


# -- labelings and estimates -------------------------------------------


def write_labeling(z: MatchingLabeling, path: str | Path) -> None:
    """CSV with columns j,label; label is the linked file-1 record or 0."""
    arr = z.to_array()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "label"])
        for j, lbl in enumerate(arr, start=1):
            w.writerow([j, int(lbl) if lbl <= z.n1 else 0])


def read_labeling(path: str | Path, *, n1: int | None = None) -> MatchingLabeling:
    """Inverse of write_labeling.  Metrics never depend on the exact n1, so
    when none is given the smallest consistent value is used."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    raw = [0] * len(rows)
    for r in rows:
        raw[int(r["j"]) - 1] = int(r["label"])
    if n1 is None:
        n1 = max([lbl for lbl in raw if lbl > 0] + [1])
    labels = tuple(
        lbl if lbl > 0 else n1 + j for j, lbl in enumerate(raw, start=1)
    )
    return MatchingLabeling(n1=n1, labels=labels)


_DECISION_NAMES = {1: "link", 0: "non-link", -1: "reject"}
_DECISION_CODES = {"link": 1, "non-link": 0, "reject": -1}


def write_estimate(est: LinkageEstimate, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "decision", "target", "prob", "expected_loss"])
        for j in range(1, est.n2 + 1):
            d = int(est.decisions[j - 1])
            name = _DECISION_NAMES[1 if d >= 1 else d]
            target = d if d >= 1 else ""
            prob = "" if est.probs is None else f"{est.probs[j - 1]:.10g}"
            loss = "" if est.losses is None else f"{est.losses[j - 1]:.10g}"
            w.writerow([j, name, target, prob, loss])


def read_estimate(path: str | Path) -> LinkageEstimate:
    meta_path = Path(str(path) + ".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n2 = len(rows)
    decisions = np.zeros(n2, dtype=np.int64)
    probs = np.full(n2, np.nan)
    losses = np.full(n2, np.nan)
    have_probs = have_losses = False
    for r in rows:
        j = int(r["j"])
        code = _DECISION_CODES[r["decision"]]
        decisions[j - 1] = int(r["target"]) if code == 1 else code
        if r.get("prob"):
            probs[j - 1] = float(r["prob"])
            have_probs = True
        if r.get("expected_loss"):
            losses[j - 1] = float(r["expected_loss"])
            have_losses = True
    n1 = meta.get("n1", int(decisions.max(initial=1)))
    return LinkageEstimate(
        n1=n1,
        n2=n2,
        decisions=decisions,
        estimator=meta.get("estimator", ""),
        probs=probs if have_probs else None,
        losses=losses if have_losses else None,
    )


# -- fitted parameters ---------------------------------------------------


def write_phi(phi: PhiParams, fields, path: str | Path, **extra) -> None:
    doc = {
        "fields": list(fields),
        "m": [v.tolist() for v in phi.m],
        "u": [v.tolist() for v in phi.u],
        "p": phi.p,
        **extra,
    }
    _write_json(Path(path), doc)


def read_phi(path: str | Path) -> PhiParams:
    doc = json.loads(Path(path).read_text())
    return PhiParams(
        m=tuple(np.asarray(v, dtype=np.float64) for v in doc["m"]),
        u=tuple(np.asarray(v, dtype=np.float64) for v in doc["u"]),
        p=doc.get("p"),
    )


# -- posterior directory -------------------------------------------------


def write_posterior(post: PosteriorSummary, out_dir: str | Path, meta: dict) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    samples = post.samples
    with open(out / "samples.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"z{j}" for j in range(1, post.n2 + 1)])
        w.writerows(samples.tolist())
    with open(out / "pairs.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "prob"])
        for j in range(1, post.n2 + 1):
            for i, p in post.candidates(j):
                w.writerow([i, j, f"{p:.10g}"])
    with open(out / "nonmatch.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "prob"])
        for j in range(1, post.n2 + 1):
            w.writerow([j, f"{post.nonmatch_probs[j - 1]:.10g}"])
    with open(out / "overlap.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample", "overlap"])
        for t, v in enumerate(post.overlap_samples):
            w.writerow([t, int(v)])
    _write_json(out / "meta.json", meta)


def load_posterior(path: str | Path) -> PosteriorSummary:
    d = Path(path)
    meta = json.loads((d / "meta.json").read_text())
    samples = np.loadtxt(d / "samples.csv", delimiter=",", skiprows=1, dtype=np.int64)
    samples = np.atleast_2d(samples)
    return PosteriorSummary.from_samples(meta["n1"], samples, meta)


def _parse_loss(text: str) -> LossConfig:
    parts = [float(x) for x in text.split(",")]
    if len(parts) == 3:
        return LossConfig(*parts)
    if len(parts) == 4:
        return LossConfig(parts[0], parts[1], parts[2], parts[3])
    raise ValueError("--loss needs 3 or 4 comma-separated values")


# -- commands ------------------------------------------------------------


@click.group()
@click.version_option(_package_version(), prog_name="betalink")
def main() -> None:
    """Record linkage pipeline: simulate, compare, fit, match, review."""


@main.command()
@click.option("--records", default=500, show_default=True, help="Records per file.")
@click.option("--overlap", default=0.5, show_default=True, help="Fraction of file 2 that matches file 1.")
@click.option("--errors", default=1, show_default=True, help="Erroneous fields per matched record.")
@click.option("--max-errors-per-field", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
def simulate(records, overlap, errors, max_errors_per_field, seed, out_dir):
    """Generate a synthetic file pair with known ground truth."""
    started = time.monotonic()
    try:
        cfg = GeneratorConfig(
            records_per_file=records,
            overlap=overlap,
            errors_per_record=errors,
            max_errors_per_field=max_errors_per_field,
            seed=seed,
        )
        file1, file2, truth = generate_pair(cfg)
    except Exception as exc:
        raise _fail("simulate", "generator config", exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_datafile(file1, out / "file1.csv")
    write_datafile(file2, out / "file2.csv")
    write_labeling(truth, out / "truth.csv")
    config = {
        "missing_token": "",
        "id_field": "id",
        "fields": [
            {"name": "given_name", "kind": "string", "comparator": "normalized-levenshtein"},
            {"name": "family_name", "kind": "string", "comparator": "normalized-levenshtein"},
            {"name": "age_bracket", "kind": "categorical", "comparator": "binary-agreement"},
            {"name": "occupation", "kind": "categorical", "comparator": "binary-agreement"},
        ],
        "blocking": None,
    }
    _write_json(out / "compare_config.json", config)
    params = {
        "records": records,
        "overlap": overlap,
        "errors": errors,
        "max_errors_per_field": max_errors_per_field,
        "seed": seed,
    }
    _write_json(out / "meta.json", _meta("simulate", params, started, n_matches=cfg.n_matches))
    click.echo(f"wrote {out}/file1.csv, file2.csv, truth.csv ({cfg.n_matches} true matches)")


@main.command()
@click.argument("file1", type=click.Path(exists=True))
@click.argument("file2", type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def compare(file1, file2, config_path, out):
    """Build per-pair comparison levels for two datafiles."""
    started = time.monotonic()
    try:
        schema, specs, blocking, id_field = read_compare_config(config_path)
    except Exception as exc:
        raise _fail("compare", config_path, exc)
    try:
        df1 = load_datafile(file1, schema, id_field=id_field, name="file1")
        df2 = load_datafile(file2, schema, id_field=id_field, name="file2")
    except Exception as exc:
        raise _fail("compare", f"{file1}, {file2}", exc)
    try:
        data = build_comparison_data(df1, df2, specs, blocking=blocking)
    except Exception as exc:
        raise _fail("compare", config_path, exc)
    data.to_csv(out)
    params = {"file1": file1, "file2": file2, "config": config_path}
    swapped = data.n1 != df1.n  # larger file is always file 1 internally
    _write_sidecar(
        Path(out),
        _meta(
            "compare",
            params,
            started,
            n1=data.n1,
            n2=data.n2,
            field_names=list(data.field_names),
            level_counts=list(data.level_counts),
            complete=data.complete,
            n_pairs=data.n_pairs,
            swapped=swapped,
        ),
    )
    click.echo(f"compared {data.n1}x{data.n2} records, {data.n_pairs} candidate pairs")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--tol", default=1e-8, show_default=True)
@click.option("--max-iter", default=1000, show_default=True)
@click.option("--out", required=True, type=click.Path())
def em(input_path, tol, max_iter, out):
    """Fit the two-component mixture by expectation-maximization."""
    started = time.monotonic()
    try:
        data = load_comparison(input_path)
        fit = em_fit(data, tol=tol, max_iter=max_iter)
    except Exception as exc:
        raise _fail("em", input_path, exc)
    write_phi(
        fit.phi,
        data.field_names,
        out,
        loglik=[float(v) for v in fit.loglik],
        n_iter=fit.n_iter,
        converged=fit.converged,
        degenerate=fit.degenerate,
    )
    params = {"input": input_path, "tol": tol, "max_iter": max_iter}
    _write_sidecar(Path(out), _meta("em", params, started, converged=fit.converged))
    click.echo(f"EM converged={fit.converged} after {fit.n_iter} iterations")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--phi", "phi_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def mle(input_path, phi_path, out):
    """Maximum-likelihood bipartite matching from fitted parameters."""
    started = time.monotonic()
    try:
        data = load_comparison(input_path)
        phi = read_phi(phi_path)
        matched = mle_matching(weight_matrix(phi, data))
    except Exception as exc:
        raise _fail("mle", input_path, exc)
    write_labeling(matched, out)
    params = {"input": input_path, "phi": phi_path}
    links = int((matched.to_array() <= data.n1).sum())
    _write_sidecar(Path(out), _meta("mle", params, started, links=links))
    click.echo(f"MLE matching links {links} of {data.n2} records")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--phi", "phi_path", required=True, type=click.Path(exists=True))
@click.option("--matching", "matching_path", required=True, type=click.Path(exists=True))
@click.option("--mu", default=0.0025, show_default=True, help="False-link rate bound.")
@click.option("--lambda-fs", default=0.005, show_default=True, help="False-non-link rate bound.")
@click.option("--out", required=True, type=click.Path())
def fsrule(input_path, phi_path, matching_path, mu, lambda_fs, out):
    """Three-way link/review/non-link decisions for an MLE matching."""
    started = time.monotonic()
    try:
        data = load_comparison(input_path)
        phi = read_phi(phi_path)
        matched = read_labeling(matching_path, n1=data.n1)
        decisions = fs_decision_rule(phi, data, matched, FSRuleConfig(mu=mu, lambda_fs=lambda_fs))
        est = decisions.to_estimate(data.n1, data.n2)
    except Exception as exc:
        raise _fail("fsrule", input_path, exc)
    write_estimate(est, out)
    params = {
        "input": input_path,
        "phi": phi_path,
        "matching": matching_path,
        "mu": mu,
        "lambda_fs": lambda_fs,
    }
    _write_sidecar(
        Path(out),
        _meta(
            "fsrule",
            params,
            started,
            estimator=est.estimator,
            n1=est.n1,
            n2=est.n2,
            links=est.n_links,
            rejects=est.n_rejects,
        ),
    )
    click.echo(f"{est.n_links} links, {est.n_rejects} review, {est.n_non_links} non-links")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--iterations", default=1000, show_default=True)
@click.option("--burn-in", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--alpha-pi", default=1.0, show_default=True)
@click.option("--beta-pi", default=1.0, show_default=True)
@click.option("--flat-matching", is_flag=True, help="Uniform prior over matchings instead of the beta prior.")
@click.option("--random-scan", is_flag=True, help="Permute the label-update order each sweep.")
@click.option("--out", "out_dir", required=True, type=click.Path())
def gibbs(input_path, iterations, burn_in, seed, alpha_pi, beta_pi, flat_matching, random_scan, out_dir):
    """Sample the matching posterior; writes a posterior directory."""
    started = time.monotonic()
    try:
        data = load_comparison(input_path)
        cfg = PriorConfig(alpha_pi=alpha_pi, beta_pi=beta_pi, flat_matching=flat_matching)
        post = run_gibbs(
            data,
            cfg,
            iterations=iterations,
            burn_in=burn_in,
            seed=seed,
            random_scan=random_scan,
        )
    except Exception as exc:
        raise _fail("gibbs", input_path, exc)
    params = {
        "input": input_path,
        "iterations": iterations,
        "burn_in": burn_in,
        "seed": seed,
        "alpha_pi": alpha_pi,
        "beta_pi": beta_pi,
        "flat_matching": flat_matching,
        "random_scan": random_scan,
    }
    meta = _meta("gibbs", params, started, n1=post.n1, n2=post.n2, **post.meta)
    write_posterior(post, out_dir, meta)
    med = int(np.median(post.overlap_samples))
    click.echo(f"retained {len(post.overlap_samples)} samples, median overlap {med}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True), help="Posterior directory.")
@click.option(
    "--loss",
    default="1,1,1",
    show_default=True,
    help="lambda_10,lambda_01,lambda_11' with optional ,lambda_R for a rejection option.",
)
@click.option("--out", required=True, type=click.Path())
def estimate(input_path, loss, out):
    """Loss-minimizing linkage decisions from a sampled posterior."""
    started = time.monotonic()
    try:
        post = load_posterior(input_path)
        cfg = _parse_loss(loss)
        est = bayes_partial(post, cfg) if cfg.lambda_r is not None else bayes_full(post, cfg)
    except Exception as exc:
        raise _fail("estimate", input_path, exc)
    write_estimate(est, out)
    params = {"input": input_path, "loss": loss}
    _write_sidecar(
        Path(out),
        _meta(
            "estimate",
            params,
            started,
            estimator=est.estimator,
            n1=est.n1,
            n2=est.n2,
            links=est.n_links,
            rejects=est.n_rejects,
        ),
    )
    click.echo(f"{est.n_links} links, {est.n_rejects} rejections, {est.n_non_links} non-links")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True), help="Estimate CSV.")
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None, help="Optional metrics JSON path.")
def evaluate(input_path, truth_path, out):
    """Score an estimate against a ground-truth labeling."""
    started = time.monotonic()
    try:
        est = read_estimate(input_path)
        truth = read_labeling(truth_path, n1=est.n1)
        partial = score_partial(est, truth)
        full = score_full(est, truth) if est.n_rejects == 0 else None
    except Exception as exc:
        raise _fail("evaluate", input_path, exc)
    doc = {
        "partial": partial.as_dict(),
        "full": full.as_dict() if full is not None else None,
    }
    click.echo(json.dumps(doc, indent=2, sort_keys=True))
    if out:
        _write_json(Path(out), doc)
        params = {"input": input_path, "truth": truth_path}
        _write_sidecar(Path(out), _meta("evaluate", params, started))


@main.group()
def review() -> None:
    """Clerical review of rejected records."""


@review.command("serve")
@click.option("--estimate", "estimate_path", required=True, type=click.Path(exists=True))
@click.option("--posterior", "posterior_path", required=True, type=click.Path(exists=True))
@click.option("--file1", required=True, type=click.Path(exists=True))
@click.option("--file2", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(), help="Append-only decision log (NDJSON).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8642, show_default=True, type=int)
def review_serve(estimate_path, posterior_path, file1, file2, config_path, log_path, host, port):
    """Serve rejected records and their candidates for human decisions."""
    import uvicorn

    from .review import ReviewStore, create_app

    try:
        store = build_store(estimate_path, posterior_path, file1, file2, config_path, log_path)
    except Exception as exc:
        raise _fail("review serve", estimate_path, exc)
    app = create_app(store)
    click.echo(f"review service on http://{host}:{port} ({store.progress()['pending']} pending tasks)")
    uvicorn.run(app, host=host, port=port, log_level="warning")


def build_store(estimate_path, posterior_path, file1, file2, config_path, log_path):
    """Assemble a ReviewStore from pipeline artifacts on disk."""
    from .review import ReviewStore

    schema, specs, _, id_field = read_compare_config(config_path)
    est = read_estimate(estimate_path)
    post = load_posterior(posterior_path)
    df1 = load_datafile(file1, schema, id_field=id_field, name="file1")
    df2 = load_datafile(file2, schema, id_field=id_field, name="file2")
    return ReviewStore.build(
        estimate=est,
        posterior=post,
        file1=df1,
        file2=df2,
        specs=specs,
        log_path=log_path,
    )


@review.command("merge")
@click.option("--estimate", "estimate_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def review_merge(estimate_path, log_path, out):
    """Merge a persisted decision log into the base estimate."""
    from .review import merge_decisions, read_decision_log

    started = time.monotonic()
    try:
        est = read_estimate(estimate_path)
        decisions = read_decision_log(log_path)
        merged = merge_decisions(est, decisions)
    except Exception as exc:
        raise _fail("review merge", log_path, exc)
    write_estimate(merged, out)
    params = {"estimate": estimate_path, "log": log_path}
    _write_sidecar(
        Path(out),
        _meta(
            "review merge",
            params,
            started,
            estimator=merged.estimator,
            n1=merged.n1,
            n2=merged.n2,
            links=merged.n_links,
            rejects=merged.n_rejects,
        ),
    )
    click.echo(f"{merged.n_links} links, {merged.n_rejects} still rejected")


if __name__ == "__main__":
    main()
