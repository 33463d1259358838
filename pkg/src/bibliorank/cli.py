"""Command-line entry points.

Subcommands: generate, ingest, rank, indicators, correlate, pca, evaluate,
pipeline.  Exit codes: 0 success, 1 validation error, 2 data/input error,
3 non-convergence under --strict.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from bibliorank import corpus as corpus_mod
from bibliorank import indicators as ind_mod
from bibliorank import network as net_mod
from bibliorank import pagerank as pr_mod
from bibliorank import pipeline as pipe_mod
from bibliorank import stats as stats_mod
from bibliorank.errors import BiblioRankError, ConfigError, DataError, NonConvergenceError
from bibliorank.evaluation import coverage, load_winners


def _read_score_file(path: str) -> ind_mod.ScoreVector:
    """Read `author<TAB>score[<TAB>rank]` (header row required)."""
    values: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if "author" not in header or "score" not in header:
            raise DataError(f"{path}: expected an 'author'/'score' header row")
        a_col = header.index("author")
        s_col = header.index("score")
        for raw in fh:
            if not raw.strip():
                continue
            parts = raw.rstrip("\n").split("\t")
            values[parts[a_col]] = float(parts[s_col])
    if not values:
        raise DataError(f"{path}: no score rows")
    return ind_mod.ScoreVector(Path(path).stem, values)


def _score_vectors(paths: list[str], labels: str | None) -> list[ind_mod.ScoreVector]:
    vectors = [_read_score_file(p) for p in paths]
    if labels:
        names = [s.strip() for s in labels.split(",")]
        if len(names) != len(vectors):
            raise ConfigError(f"{len(names)} labels for {len(vectors)} score files")
        for sv, name in zip(vectors, names):
            sv.name = name
    return vectors


def _build_table(vectors, subset_size: int) -> stats_mod.IndicatorTable:
    n = len(vectors[0].values)
    subset, _ = ind_mod.top_k(vectors[0], min(subset_size, n))
    return stats_mod.IndicatorTable.from_scores(vectors, subset)


def cmd_generate(args) -> int:
    c = corpus_mod.generate_synthetic(
        seed=args.seed,
        n_papers=args.papers,
        n_authors=args.authors,
        skew=args.skew,
        year_lo=args.year_lo,
        year_hi=args.year_hi,
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        corpus_mod.serialize_corpus(c, fh)
    print(f"wrote {len(c)} synthetic papers to {args.out}")
    if args.if_table_out:
        table = pipe_mod.generate_impact_factors(c, args.seed)
        with open(args.if_table_out, "w", encoding="utf-8", newline="\n") as fh:
            pipe_mod.dump_impact_factors(table, fh)
        print(f"wrote {len(table.factors)} impact factors to {args.if_table_out}")
    return 0


def cmd_ingest(args) -> int:
    phases = pipe_mod.parse_phases(args.phases) if args.phases else corpus_mod.DEFAULT_PHASES
    with open(args.corpus, encoding="utf-8") as fh:
        full = corpus_mod.parse_corpus(fh, provenance=args.corpus)
    phase_corpora, dropped = corpus_mod.split_phases(full, phases)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stats = {"input_papers": len(full), "dropped_outside_phases": dropped, "phases": {}}
    for phase, pc in zip(phases, phase_corpora):
        filtered, removed = corpus_mod.filter_with_references(pc)
        tag = pipe_mod.phase_tag(phase.label)
        with open(outdir / f"corpus_{tag}.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            corpus_mod.serialize_corpus(filtered, fh)
        stats["phases"][phase.label] = {
            "papers": len(pc),
            "papers_without_references": removed,
            "papers_used": len(filtered),
        }
    print(json.dumps(stats, indent=2, sort_keys=True))
    return 0


def cmd_rank(args) -> int:
    publications = None
    if args.nodes:
        with open(args.nodes, encoding="utf-8") as fh:
            publications = {a: pubs for a, (_, pubs) in net_mod.load_nodes(fh).items()}
    with open(args.edges, encoding="utf-8") as fh:
        graph = net_mod.load_edges(fh, publications=publications)
    teleport = pr_mod.make_teleport(graph, args.teleport)
    cfg = pr_mod.PageRankConfig(
        damping=args.damping,
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
        dangling_policy=args.dangling_policy,
    )
    result = pr_mod.weighted_pagerank(graph, teleport, cfg)
    if args.strict and not result.converged:
        raise NonConvergenceError(
            f"no convergence in {cfg.max_iterations} iterations "
            f"(residual {result.final_residual:.3e})"
        )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("author\tscore\n")
        pr_mod.dump_scores(graph, result, fh)
    print(f"{'converged' if result.converged else 'NOT converged'} "
          f"after {result.iterations} iterations (residual {result.final_residual:.3e})")
    return 0


def cmd_indicators(args) -> int:
    with open(args.corpus, encoding="utf-8") as fh:
        c = corpus_mod.parse_corpus(fh, provenance=args.corpus)
    filtered, _ = corpus_mod.filter_with_references(c)
    graph = net_mod.build_graph(filtered, allow_self_citation=not args.drop_self_citations)
    counts = ind_mod.internal_citation_counts(filtered)
    mode, _, raw = args.prestige.partition(":")
    if mode == "top_fraction":
        hc = ind_mod.highly_cited_papers(filtered, top_fraction=float(raw), counts=counts)
    elif mode == "min_citations":
        hc = ind_mod.highly_cited_papers(filtered, min_citations=int(raw), counts=counts)
    else:
        raise ConfigError(f"invalid prestige spec {args.prestige!r}")

    scores = [
        ind_mod.popularity_scores(graph),
        ind_mod.prestige_scores(graph, filtered, hc),
        ind_mod.extend_scores(ind_mod.h_index_scores(filtered, counts=counts), graph.authors),
    ]
    if args.if_table:
        with open(args.if_table, encoding="utf-8") as fh:
            table = ind_mod.load_impact_factors(fh)
        ifs, misses = ind_mod.if_scores(filtered, table)
        scores.append(ind_mod.extend_scores(ifs, graph.authors))
        print(f"impact-factor misses: {misses}", file=sys.stderr)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for sv in scores:
        rv = ind_mod.to_ranks(sv)
        name = f"indicator_{args.tag}_{sv.name}.tsv" if args.tag else f"indicator_{sv.name}.tsv"
        with open(outdir / name, "w", encoding="utf-8", newline="\n") as fh:
            ind_mod.dump_indicator(rv, sv, fh)
        print(f"wrote {outdir / name}")
    return 0


def cmd_correlate(args) -> int:
    vectors = _score_vectors(args.scores, args.labels)
    table = _build_table(vectors, args.subset_size)
    cm = stats_mod.correlation_matrix(table)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        pipe_mod.write_correlation(cm, fh)
    print(f"wrote {args.out}")
    return 0


def cmd_pca(args) -> int:
    vectors = _score_vectors(args.scores, args.labels)
    table = _build_table(vectors, args.subset_size)
    retention, _, raw = args.retention.partition(":")
    fixed_k = int(raw) if retention == "fixed" else None
    res = stats_mod.pca_varimax(
        table, retention=retention, fixed_k=fixed_k, loading_cutoff=args.cutoff
    )
    with open(args.out_loadings, "w", encoding="utf-8", newline="\n") as fl, \
            open(args.out_components, "w", encoding="utf-8", newline="\n") as fc:
        pipe_mod.write_pca(res, fl, fc)
    print(f"retained {res.n_retained} components "
          f"({100 * res.explained_variance_fractions[: res.n_retained].sum():.2f}% of variance)")
    return 0


def cmd_evaluate(args) -> int:
    vectors = _score_vectors(args.scores, args.labels)
    rank_vectors = [ind_mod.to_ranks(sv) for sv in vectors]
    with open(args.winners, encoding="utf-8") as fh:
        winners = load_winners(fh, provenance=args.winners)
    ks = [int(k) for k in args.ks.split(",")]
    res = coverage(rank_vectors, winners, ks=ks)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        pipe_mod.write_coverage(res, fh)
    if res.missing_winners:
        print(f"winners not in author universe: {', '.join(res.missing_winners)}",
              file=sys.stderr)
    print(f"wrote {args.out}")
    return 0


def cmd_pipeline(args) -> int:
    if args.config:
        cfg = pipe_mod.load_config(args.config, overrides=args.set)
    else:
        cfg = pipe_mod.RunConfig()
        for item in args.set or []:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not key=value")
            key, value = item.split("=", 1)
            pipe_mod.apply_config_entry(cfg, key, value)
        cfg.validate()
    manifest = pipe_mod.run_pipeline(cfg)
    print(f"pipeline complete: {len(manifest['files'])} files in {cfg.outdir} "
          f"(config hash {manifest['config_hash'][:12]})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bibliorank",
        description="Author citation networks, weighted PageRank, and rank comparison.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a seeded synthetic corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--papers", type=int, required=True)
    p.add_argument("--authors", type=int, required=True)
    p.add_argument("--skew", type=float, default=1.0)
    p.add_argument("--year-lo", type=int, default=1956)
    p.add_argument("--year-hi", type=int, default=2008)
    p.add_argument("--out", required=True)
    p.add_argument("--if-table-out", help="also write a synthetic impact-factor table")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="parse, phase-split, and filter a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--phases", help='e.g. "1956-1980;1981-1990;1991-2000;2001-2008"')
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("rank", help="PageRank over an edge-list dump")
    p.add_argument("--edges", required=True)
    p.add_argument("--nodes", help="node dump supplying publication counts")
    p.add_argument("--damping", type=float, required=True)
    p.add_argument("--teleport", default=pr_mod.UNIFORM,
                   choices=[pr_mod.UNIFORM, pr_mod.CITATION_WEIGHTED,
                            pr_mod.PUBLICATION_WEIGHTED])
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.add_argument("--max-iterations", type=int, default=1000)
    p.add_argument("--dangling-policy", default="teleport", choices=["teleport", "uniform"])
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("indicators", help="non-PageRank indicators from a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--tag", default="", help="phase tag used in output file names")
    p.add_argument("--prestige", default="top_fraction:0.10",
                   help="top_fraction:F or min_citations:M")
    p.add_argument("--if-table")
    p.add_argument("--drop-self-citations", action="store_true")
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("correlate", help="Spearman matrix over score files")
    p.add_argument("--scores", nargs="+", required=True)
    p.add_argument("--labels", help="comma-separated column labels")
    p.add_argument("--subset-size", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("pca", help="PCA with varimax rotation over score files")
    p.add_argument("--scores", nargs="+", required=True)
    p.add_argument("--labels")
    p.add_argument("--subset-size", type=int, default=100)
    p.add_argument("--retention", default="kaiser", help="kaiser or fixed:K")
    p.add_argument("--cutoff", type=float, default=0.4)
    p.add_argument("--out-loadings", required=True)
    p.add_argument("--out-components", required=True)
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("evaluate", help="award-winner coverage of top-k lists")
    p.add_argument("--scores", nargs="+", required=True)
    p.add_argument("--labels")
    p.add_argument("--winners", required=True)
    p.add_argument("--ks", default="5,10,20,50")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run the full pipeline from a config")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="config override (repeatable)")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: missing input file: {exc.filename}", file=sys.stderr)
        return 2
    except (DataError, BiblioRankError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
