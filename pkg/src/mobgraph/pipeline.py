"""End-to-end orchestration: comments in, ranked channels and artifacts out.

Stage order: ingest -> graphs -> wl -> embed -> reduce -> cluster -> cliques
-> rank -> report. The first failing stage aborts the run, names itself in
the raised error, and leaves an INCOMPLETE marker in the output directory.
Given one seed, two runs produce byte-identical artifacts except timings.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import cliques as cliques_mod
from . import cluster as cluster_mod
from . import embed as embed_mod
from . import gexf as gexf_mod
from . import ingest as ingest_mod
from . import reduce as reduce_mod
from . import wl as wl_mod
from .errors import (
    CoincidentCentroids,
    DegenerateVariance,
    InvalidConfig,
    MobgraphError,
    PipelineStageError,
    SingleCluster,
    TooFewPoints,
)

logger = logging.getLogger(__name__)

INCOMPLETE_MARKER = "INCOMPLETE"


@dataclass
class PipelineConfig:
    """All knobs of the pipeline; defaults are the reference operating point."""

    input: str | None = None
    out: str = "out"
    format: str = "csv"
    seed: int = 0
    threads: int = 1
    min_shared_videos: int = 1
    include_isolated: bool = False
    wl_iterations: int = 2
    wl_weight_buckets: bool = False
    dim: int = 128
    lr: float = 0.025
    min_count: int = 5
    epochs: int = 10
    negative: int = 5
    umap_neighbors: int = 5
    umap_min_dist: float = 0.1
    umap_components: int = 4
    umap_spread: float = 1.0
    umap_epochs: int = 500
    umap_negative_rate: int = 5
    k_min: int = 2
    k_max: int | None = None  # None: min(10, n_channels - 1)
    cluster_space: str = "reduced"  # or "embeddings", for ablation
    clique_min_size: int = 5
    clique_budget: int = 10_000_000
    n_init: int = 10


_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def load_config_file(path: str | Path) -> dict:
    """Read a JSON config file: one flat object, keys = PipelineConfig fields."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config file {path}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InvalidConfig(f"config file {path}: expected a JSON object")
    for key in data:
        if key not in _CONFIG_FIELDS:
            raise InvalidConfig(f"unknown config key {key!r}")
    return data


def resolve_config(file_values: dict | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Defaults, then config-file values, then explicit overrides (None skipped)."""
    merged: dict = {}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key not in _CONFIG_FIELDS:
                raise InvalidConfig(f"unknown config key {key!r}")
            if value is not None:
                merged[key] = value
    config = PipelineConfig(**merged)
    if config.format not in ("csv", "json-lines"):
        raise InvalidConfig(f"format must be 'csv' or 'json-lines', got {config.format!r}")
    if config.cluster_space not in ("reduced", "embeddings"):
        raise InvalidConfig(
            f"cluster_space must be 'reduced' or 'embeddings', got {config.cluster_space!r}"
        )
    if config.threads < 1:
        raise InvalidConfig(f"threads must be >= 1, got {config.threads}")
    return config


def compute_clustering(
    points,
    channels: list[str],
    k_min: int = 2,
    k_max: int | None = None,
    seed: int = 0,
    n_init: int = 10,
    out_dir: Path | None = None,
) -> dict:
    """Model selection, both clusterings, and quality metrics for one point
    set; writes dendrogram.json when out_dir is given. Metrics that are
    undefined for the data at hand come back as None with a logged warning."""
    n = points.shape[0]
    if k_max is None:
        k_max = min(10, n - 1)
    k_star, scores = cluster_mod.select_k_by_silhouette(
        points, k_min=k_min, k_max=k_max, seed=seed, n_init=n_init
    )
    km = cluster_mod.kmeans(points, k_star, seed=seed, n_init=n_init)
    dendrogram = cluster_mod.single_linkage(points)
    cut_scores: dict[int, float] = {}
    for k in range(k_min, k_max + 1):
        cut_scores[k] = cluster_mod.silhouette_score(
            points, cluster_mod.cut_tree(dendrogram, k)
        )
    cut_k = max(cut_scores, key=lambda k: (cut_scores[k], -k))
    cut_labels = cluster_mod.cut_tree(dendrogram, cut_k)

    def guarded(fn: Callable[[], float], what: str) -> float | None:
        try:
            return fn()
        except (CoincidentCentroids, SingleCluster, DegenerateVariance,
                TooFewPoints) as exc:
            logger.warning("%s unavailable: %s", what, exc)
            return None

    cophenetic = guarded(
        lambda: cluster_mod.cophenetic_correlation(dendrogram, points),
        "cophenetic correlation",
    )
    db_kmeans = guarded(
        lambda: cluster_mod.davies_bouldin(points, km.labels),
        "Davies-Bouldin (k-means labels)",
    )
    db_cut = guarded(
        lambda: cluster_mod.davies_bouldin(points, cut_labels),
        "Davies-Bouldin (cut-tree labels)",
    )
    if out_dir is not None:
        with open(out_dir / "dendrogram.json", "w", encoding="utf-8") as f:
            json.dump(
                {
                    "leaves": channels,
                    "merges": [
                        [left, right, height, size]
                        for left, right, height, size in dendrogram.merges
                    ],
                    "n_leaves": dendrogram.n_leaves,
                },
                f, sort_keys=True, indent=2,
            )
            f.write("\n")
    return {
        "kmeans": {
            "selected_k": k_star,
            "silhouette_by_k": {str(k): v for k, v in sorted(scores.items())},
            "silhouette": scores[k_star],
            "labels": {c: int(l) for c, l in zip(channels, km.labels)},
            "davies_bouldin": db_kmeans,
        },
        "hierarchical": {
            "selected_k": cut_k,
            "silhouette_by_k": {str(k): v for k, v in sorted(cut_scores.items())},
            "silhouette": cut_scores[cut_k],
            "labels": {c: int(l) for c, l in zip(channels, cut_labels)},
            "davies_bouldin": db_cut,
            "cophenetic_correlation": cophenetic,
        },
    }


class _WarningCollector(logging.Handler):
    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages: list[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.messages.append(record.getMessage())


def _map_channels(
    channels: list[str], fn: Callable[[str], object], threads: int
) -> dict[str, object]:
    if threads <= 1 or len(channels) <= 1:
        return {c: fn(c) for c in channels}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = pool.map(fn, channels)
    return dict(zip(channels, results))


def strip_timings(report: dict) -> dict:
    """Copy of the report without the wall-clock section; everything else is
    covered by the determinism guarantee."""
    return {k: v for k, v in report.items() if k != "timings"}


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute every stage and return the consolidated report (also written
    to out/report.json)."""
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    marker = out_dir / INCOMPLETE_MARKER
    if marker.exists():
        marker.unlink()

    collector = _WarningCollector()
    root = logging.getLogger("mobgraph")
    root.addHandler(collector)
    timings: dict[str, float] = {}
    current_stage = "ingest"

    def _run(stage: str, fn: Callable[[], object]) -> object:
        nonlocal current_stage
        current_stage = stage
        started = time.perf_counter()
        result = fn()
        timings[stage] = time.perf_counter() - started
        return result

    try:
        # ingest
        def _ingest():
            if config.input is None:
                raise InvalidConfig("no input file configured")
            return ingest_mod.parse_comments(config.input, format=config.format)

        records = _run("ingest", _ingest)
        channels = ingest_mod.channels_in(records)

        # graphs
        def _graphs():
            graphs_dir = out_dir / "graphs"
            graphs_dir.mkdir(exist_ok=True)

            def build(channel: str):
                graph = ingest_mod.build_co_commenter_graph(
                    records,
                    channel,
                    min_shared_videos=config.min_shared_videos,
                    include_isolated=config.include_isolated,
                )
                gexf_mod.write_gexf(graph, graphs_dir / f"{channel}.gexf")
                return graph

            return _map_channels(channels, build, config.threads)

        graphs = _run("graphs", _graphs)

        # wl
        def _wl():
            def extract(channel: str):
                return wl_mod.extract_document(
                    graphs[channel],
                    iterations=config.wl_iterations,
                    weight_buckets=config.wl_weight_buckets,
                )

            by_channel = _map_channels(channels, extract, config.threads)
            return [by_channel[c] for c in channels]

        documents = _run("wl", _wl)

        # embed
        def _embed():
            vocab = embed_mod.build_vocabulary(documents, min_count=config.min_count)
            matrix = embed_mod.train_embeddings(
                documents,
                vocab,
                dim=config.dim,
                initial_lr=config.lr,
                epochs=config.epochs,
                negative=config.negative,
                seed=config.seed,
            )
            embed_mod.write_embeddings_csv(matrix, out_dir / "embeddings.csv")
            return matrix

        matrix = _run("embed", _embed)

        # reduce
        def _reduce():
            coords, info = reduce_mod.reduce_embeddings(
                matrix.vectors,
                n_neighbors=config.umap_neighbors,
                min_dist=config.umap_min_dist,
                n_components=config.umap_components,
                spread=config.umap_spread,
                epochs=config.umap_epochs,
                negative_rate=config.umap_negative_rate,
                seed=config.seed,
            )
            reduce_mod.write_reduced_csv(channels, coords, out_dir / "reduced.csv")
            return coords, info

        coords, reduce_info = _run("reduce", _reduce)

        # cluster
        def _cluster():
            points = coords if config.cluster_space == "reduced" else matrix.vectors
            return compute_clustering(
                points,
                channels,
                k_min=config.k_min,
                k_max=config.k_max,
                seed=config.seed,
                n_init=config.n_init,
                out_dir=out_dir,
            )

        clustering = _run("cluster", _cluster)
        kmeans_labels = clustering["kmeans"]["labels"]

        # cliques
        def _cliques():
            def census(channel: str):
                return cliques_mod.clique_census(
                    graphs[channel],
                    min_size=config.clique_min_size,
                    budget=config.clique_budget,
                )

            by_channel = _map_channels(channels, census, config.threads)
            result = [by_channel[c] for c in channels]
            cliques_mod.write_census_csv(result, kmeans_labels, out_dir / "cliques.csv")
            return result

        censuses = _run("cliques", _cliques)

        # rank
        ranking = _run(
            "rank", lambda: cliques_mod.rank_channels(censuses, kmeans_labels)
        )

        # report
        def _report():
            from . import __version__

            report = {
                "channels": channels,
                "config": dataclasses.asdict(config),
                "graph_stats": {
                    c: {"nodes": graphs[c].n_nodes, "edges": graphs[c].n_edges}
                    for c in channels
                },
                "clustering": clustering,
                "reduce_info": reduce_info,
                "cliques": {
                    "min_size": config.clique_min_size,
                    "counts": {c.channel_id: c.count for c in censuses},
                },
                "ranking": {
                    "overall": [list(row) for row in ranking.overall],
                    "per_cluster": {
                        str(cluster): [list(row) for row in rows]
                        for cluster, rows in ranking.per_cluster.items()
                    },
                },
                "artifacts": {
                    "graphs_dir": "graphs",
                    "embeddings": "embeddings.csv",
                    "reduced": "reduced.csv",
                    "dendrogram": "dendrogram.json",
                    "cliques": "cliques.csv",
                },
                "deterministic": True,
                "version": __version__,
                "warnings": collector.messages,
                "timings": timings,
            }
            with open(out_dir / "report.json", "w", encoding="utf-8") as f:
                json.dump(report, f, sort_keys=True, indent=2)
                f.write("\n")
            return report

        return _run("report", _report)
    except MobgraphError as exc:
        marker.write_text(f"failed at stage: {current_stage}\n{exc}\n", encoding="utf-8")
        raise PipelineStageError(current_stage, exc) from exc
    except Exception as exc:  # noqa: BLE001 - stage context is the contract
        marker.write_text(f"failed at stage: {current_stage}\n{exc}\n", encoding="utf-8")
        raise PipelineStageError(current_stage, exc) from exc
    finally:
        root.removeHandler(collector)
