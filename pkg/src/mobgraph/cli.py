"""Command-line entry points. Each subcommand wraps one pipeline stage;
`pipeline` chains them all with one resolved, reproducible configuration."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import cliques as cliques_mod
from . import cluster as cluster_mod
from . import embed as embed_mod
from . import gexf as gexf_mod
from . import ingest as ingest_mod
from . import reduce as reduce_mod
from . import synth as synth_mod
from . import wl as wl_mod
from .errors import MobgraphError
from .pipeline import (
    PipelineConfig,
    compute_clustering,
    load_config_file,
    resolve_config,
    run_pipeline,
)

THREADS_ENV = "MOBGRAPH_THREADS"

# flag name -> PipelineConfig field, shared by `pipeline` and reused defaults
OVERRIDE_FIELDS = {
    "seed": "seed",
    "input": "input",
    "out": "out",
    "format": "format",
    "threads": "threads",
    "wl_iterations": "wl_iterations",
    "dim": "dim",
    "lr": "lr",
    "min_count": "min_count",
    "umap_neighbors": "umap_neighbors",
    "umap_min_dist": "umap_min_dist",
    "umap_components": "umap_components",
    "clique_min_size": "clique_min_size",
    "min_shared_videos": "min_shared_videos",
    "cluster_space": "cluster_space",
}


def _env_threads() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise MobgraphError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _add_io(parser: argparse.ArgumentParser, need_input: bool = True) -> None:
    if need_input:
        parser.add_argument("--input", required=True, help="input file path")
    parser.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mobgraph",
        description=(
            "Co-commenter network pipeline: build per-channel graphs from "
            "comment tables, embed and cluster them, and rank channels by "
            "their maximal-clique censuses."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and validate a comment table")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["csv", "json-lines"], default="csv")
    p.add_argument("--strict", action="store_true",
                   help="error on duplicate comment ids instead of dropping them")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("graphs", help="build co-commenter graphs and write GEXF")
    _add_io(p)
    p.add_argument("--format", choices=["csv", "json-lines"], default="csv")
    p.add_argument("--min-shared-videos", type=int, default=1)
    p.add_argument("--include-isolated", action="store_true")
    p.add_argument("--merged", action="store_true",
                   help="one merged graph over the whole corpus instead of per channel")
    p.set_defaults(func=cmd_graphs)

    p = sub.add_parser("embed", help="comment table -> embeddings.csv")
    _add_io(p)
    p.add_argument("--format", choices=["csv", "json-lines"], default="csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-shared-videos", type=int, default=1)
    p.add_argument("--wl-iterations", type=int, default=2)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--min-count", type=int, default=5)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--negative", type=int, default=5)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("reduce", help="embeddings.csv -> reduced.csv")
    p.add_argument("--input", required=True, help="embeddings CSV path")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--umap-neighbors", type=int, default=5)
    p.add_argument("--umap-min-dist", type=float, default=0.1)
    p.add_argument("--umap-components", type=int, default=4)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("cluster", help="reduced.csv -> cluster.json + dendrogram.json")
    p.add_argument("--input", required=True, help="reduced CSV path")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=None)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("cliques", help="comment table -> cliques.csv census")
    _add_io(p)
    p.add_argument("--format", choices=["csv", "json-lines"], default="csv")
    p.add_argument("--min-shared-videos", type=int, default=1)
    p.add_argument("--clique-min-size", type=int, default=5)
    p.add_argument("--report", default=None,
                   help="report.json supplying cluster labels for the census rows")
    p.set_defaults(func=cmd_cliques)

    p = sub.add_parser("synth", help="write a synthetic two-family corpus")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--channels", type=int, default=20)
    p.add_argument("--videos", type=int, default=40)
    p.add_argument("--organic", type=int, default=50)
    p.add_argument("--organic-prob", type=float, default=0.1)
    p.add_argument("--heavy-mob-size", type=int, default=12)
    p.add_argument("--heavy-mob-prob", type=float, default=0.6)
    p.add_argument("--light-mob-size", type=int, default=3)
    p.add_argument("--light-mob-prob", type=float, default=0.35)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--input", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["csv", "json-lines"], default=None)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (fallback: ${THREADS_ENV}, then 1)")
    p.add_argument("--wl-iterations", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--min-count", type=int, default=None)
    p.add_argument("--umap-neighbors", type=int, default=None)
    p.add_argument("--umap-min-dist", type=float, default=None)
    p.add_argument("--umap-components", type=int, default=None)
    p.add_argument("--clique-min-size", type=int, default=None)
    p.add_argument("--min-shared-videos", type=int, default=None)
    p.add_argument("--cluster-space", choices=["reduced", "embeddings"], default=None)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="print a human-readable summary of a report.json")
    p.add_argument("--input", required=True, help="report.json path")
    p.set_defaults(func=cmd_report)

    return parser


def cmd_ingest(args: argparse.Namespace) -> int:
    records = ingest_mod.parse_comments(
        args.input, format=args.format,
        on_duplicate="error" if args.strict else "warn",
    )
    channels = ingest_mod.channels_in(records)
    print(f"parsed {len(records)} records across {len(channels)} channels")
    per_channel: dict[str, int] = {}
    for r in records:
        per_channel[r.channel_id] = per_channel.get(r.channel_id, 0) + 1
    for c in channels:
        print(f"  {c}: {per_channel[c]} comments")
    return 0


def cmd_graphs(args: argparse.Namespace) -> int:
    records = ingest_mod.parse_comments(args.input, format=args.format)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    targets = [None] if args.merged else ingest_mod.channels_in(records)
    for channel in targets:
        graph = ingest_mod.build_co_commenter_graph(
            records, channel,
            min_shared_videos=args.min_shared_videos,
            include_isolated=args.include_isolated,
        )
        path = out_dir / f"{graph.name}.gexf"
        gexf_mod.write_gexf(graph, path)
        print(f"{path}: {graph.n_nodes} nodes, {graph.n_edges} edges")
    return 0


def _documents_from_comments(args: argparse.Namespace):
    records = ingest_mod.parse_comments(args.input, format=args.format)
    channels = ingest_mod.channels_in(records)
    documents = []
    for channel in channels:
        graph = ingest_mod.build_co_commenter_graph(
            records, channel, min_shared_videos=args.min_shared_videos
        )
        documents.append(
            wl_mod.extract_document(graph, iterations=args.wl_iterations)
        )
    return channels, documents


def cmd_embed(args: argparse.Namespace) -> int:
    _channels, documents = _documents_from_comments(args)
    vocab = embed_mod.build_vocabulary(documents, min_count=args.min_count)
    matrix = embed_mod.train_embeddings(
        documents, vocab,
        dim=args.dim, initial_lr=args.lr,
        epochs=args.epochs, negative=args.negative, seed=args.seed,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "embeddings.csv"
    embed_mod.write_embeddings_csv(matrix, path)
    print(f"{path}: {len(matrix.graph_ids)} graphs, dim {matrix.dim}, "
          f"vocabulary {len(vocab)}")
    return 0


def cmd_reduce(args: argparse.Namespace) -> int:
    matrix = embed_mod.read_embeddings_csv(args.input)
    coords, info = reduce_mod.reduce_embeddings(
        matrix.vectors,
        n_neighbors=args.umap_neighbors,
        min_dist=args.umap_min_dist,
        n_components=args.umap_components,
        seed=args.seed,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "reduced.csv"
    reduce_mod.write_reduced_csv(matrix.graph_ids, coords, path)
    print(f"{path}: {coords.shape[0]} points in {coords.shape[1]} dimensions "
          f"(a={info['a']:.4f}, b={info['b']:.4f}, init={info['init']})")
    return 0


def cmd_cluster(args: argparse.Namespace) -> int:
    ids, points = reduce_mod.read_reduced_csv(args.input)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    clustering = compute_clustering(
        points, ids, k_min=args.k_min, k_max=args.k_max,
        seed=args.seed, out_dir=out_dir,
    )
    with open(out_dir / "cluster.json", "w", encoding="utf-8") as f:
        json.dump(clustering, f, sort_keys=True, indent=2)
        f.write("\n")
    print(f"k-means selected k={clustering['kmeans']['selected_k']} "
          f"(silhouette {clustering['kmeans']['silhouette']:.4f})")
    print(f"cut-tree selected k={clustering['hierarchical']['selected_k']} "
          f"(silhouette {clustering['hierarchical']['silhouette']:.4f})")
    coph = clustering["hierarchical"]["cophenetic_correlation"]
    if coph is not None:
        print(f"cophenetic correlation: {coph:.4f}")
    return 0


def cmd_cliques(args: argparse.Namespace) -> int:
    records = ingest_mod.parse_comments(args.input, format=args.format)
    channels = ingest_mod.channels_in(records)
    labels: dict[str, int] = {}
    if args.report:
        with open(args.report, "r", encoding="utf-8") as f:
            labels = {
                c: int(l)
                for c, l in json.load(f)["clustering"]["kmeans"]["labels"].items()
            }
    censuses = []
    for channel in channels:
        graph = ingest_mod.build_co_commenter_graph(
            records, channel, min_shared_videos=args.min_shared_videos
        )
        censuses.append(
            cliques_mod.clique_census(graph, min_size=args.clique_min_size)
        )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "cliques.csv"
    cliques_mod.write_census_csv(censuses, labels, path)
    for census in sorted(censuses, key=lambda c: (-c.count, c.channel_id)):
        print(f"  {census.channel_id}: {census.count} maximal cliques "
              f">= {census.min_size} members")
    print(f"wrote {path}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    config = synth_mod.two_family_config(
        seed=args.seed,
        n_channels=args.channels,
        videos_per_channel=args.videos,
        organic_commenters=args.organic,
        organic_prob=args.organic_prob,
        heavy_mob_size=args.heavy_mob_size,
        heavy_mob_prob=args.heavy_mob_prob,
        light_mob_size=args.light_mob_size,
        light_mob_prob=args.light_mob_prob,
    )
    records, truth = synth_mod.generate_corpus(config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    comments = out_dir / "comments.csv"
    ingest_mod.write_comments_csv(records, comments)
    truth_path = out_dir / "truth.json"
    synth_mod.write_ground_truth(truth, truth_path)
    print(f"{comments}: {len(records)} comments across {config.n_channels} channels")
    print(f"{truth_path}: ground-truth families and mob membership")
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {
        field: getattr(args, flag)
        for flag, field in OVERRIDE_FIELDS.items()
        if getattr(args, flag, None) is not None
    }
    if overrides.get("threads") is None and _env_threads() is not None:
        overrides["threads"] = _env_threads()
    config = resolve_config(file_values, overrides)
    report = run_pipeline(config)
    km = report["clustering"]["kmeans"]
    print(f"channels: {len(report['channels'])}")
    print(f"k-means selected k={km['selected_k']} (silhouette {km['silhouette']:.4f})")
    top = report["ranking"]["overall"][:3]
    for channel, cluster, count in top:
        print(f"  {channel} (cluster {cluster}): {count} cliques "
              f">= {report['cliques']['min_size']} members")
    print(f"report: {Path(config.out) / 'report.json'}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    with open(args.input, "r", encoding="utf-8") as f:
        report = json.load(f)
    km = report["clustering"]["kmeans"]
    hier = report["clustering"]["hierarchical"]
    print(f"channels ({len(report['channels'])}): {', '.join(report['channels'])}")
    print(f"k-means: k={km['selected_k']}, silhouette {km['silhouette']:.4f}, "
          f"Davies-Bouldin {km['davies_bouldin']}")
    print(f"cut-tree: k={hier['selected_k']}, silhouette {hier['silhouette']:.4f}, "
          f"Davies-Bouldin {hier['davies_bouldin']}, "
          f"cophenetic {hier['cophenetic_correlation']}")
    print(f"clique census (min size {report['cliques']['min_size']}):")
    for channel, cluster, count in report["ranking"]["overall"]:
        print(f"  {channel} (cluster {cluster}): {count}")
    if report.get("warnings"):
        print("warnings:")
        for message in report["warnings"]:
            print(f"  {message}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MobgraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
