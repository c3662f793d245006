"""``charnet`` command line: file-based pipeline stages sharing one output directory.

Every stage reads its predecessors' files from ``--out`` and writes its own
outputs there, each with a ``<file>.meta.json`` sidecar holding the hash of
the effective configuration.  Timestamps go only to ``charnet.log``.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence


FILES = {
    "corpus": "corpus.json",
    "mentions": "mentions.csv",
    "mention_counts": "mention_counts.json",
    "chart": "chart.csv",
    "edges": "edges.csv",
    "graph": "graph.graphml",
    "metrics": "metrics.json",
    "layout": "layout.csv",
    "centrality": "centrality.csv",
}


class StageError(RuntimeError):
    pass


@dataclass
class PipelineConfig:
    """Effective settings of a run: defaults, then ``--config`` JSON, then flags."""

    manifest: str | None = None
    aliases: str | None = None
    strategy: str = "sentence"
    window_chars: int = 2000
    characters: list[str] | None = None
    seed: int = 0
    dims: int = 20
    word_dims: int = 300
    word_min_count: int = 5
    word_window: int = 5
    p: float = 1.0
    q: float = 1.0
    walks_per_node: int = 10
    walk_length: int = 80
    walk_window: int = 10
    embed_epochs: int = 5
    weighted: bool = False
    model: str = "gcn"
    features: str = "ohe"
    epochs: int | None = None
    lr: float | None = None
    holdout: float = 0.1
    labels_per_class: int | None = None
    layout_iterations: int = 50
    experiment: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.strategy not in ("sentence", "window"):
            raise ValueError(f"strategy must be 'sentence' or 'window', got {self.strategy!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValueError("seed must be an explicit integer")

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
        for key in ("manifest", "aliases"):
            if data.get(key) and not Path(data[key]).is_absolute():
                data[key] = str(path.parent / data[key])
        return cls(**data)

    def hash(self, stage: str, keys: Sequence[str]) -> str:
        payload = {"stage": stage, **{k: getattr(self, k) for k in sorted(keys)}}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


# which settings each stage depends on (the hash ignores the rest)
STAGE_KEYS = {
    "ingest": ("manifest", "aliases"),
    "mentions": ("aliases",),
    "chart": ("aliases", "characters"),
    "extract": ("strategy", "window_chars"),
    "graph": ("seed", "layout_iterations"),
    "embed word": ("dims", "word_dims", "word_min_count", "word_window", "embed_epochs", "seed"),
    "embed node2vec": ("dims", "p", "q", "walks_per_node", "walk_length", "walk_window", "embed_epochs",
                       "weighted", "seed"),
    "embed le": ("dims", "weighted"),
    "train classify": ("model", "features", "epochs", "lr", "weighted", "seed", "labels_per_class"),
    "train linkpred": ("model", "features", "epochs", "lr", "weighted", "seed", "holdout"),
    "evaluate": ("experiment", "seed"),
    "fixture": ("seed",),
}


class Run:
    """Output directory bookkeeping for one stage invocation."""

    def __init__(self, out: Path, stage: str, config: PipelineConfig):
        self.out = out
        self.stage = stage
        self.config = config
        self.config_hash = config.hash(stage, STAGE_KEYS[stage])
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out / name

    def need(self, name: str, producer: str) -> Path:
        path = self.out / name
        if not path.exists():
            raise StageError(f"missing {path}; run `charnet {producer}` first")
        return path

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        self.sidecar(name)
        return path

    def sidecar(self, name: str) -> None:
        meta = {
            "stage": self.stage,
            "config_hash": self.config_hash,
            "config": {k: getattr(self.config, k) for k in STAGE_KEYS[self.stage]},
            "sha256": hashlib.sha256((self.out / name).read_bytes()).hexdigest(),
        }
        (self.out / f"{name}.meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n",
                                                    encoding="utf-8")

    def log(self, message: str) -> None:
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        with open(self.out / "charnet.log", "a", encoding="utf-8") as fh:
            fh.write(f"{stamp} [{self.stage}] {message}\n")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ------------------------------------------------------------------ stages


def _aliases(cfg: PipelineConfig):
    from .characters import read_alias_table

    if not cfg.aliases:
        raise StageError("an alias table is required (--aliases or config 'aliases')")
    if not Path(cfg.aliases).exists():
        raise StageError(f"alias table {cfg.aliases} does not exist")
    return read_alias_table(cfg.aliases)


def _corpus(run: Run):
    from .corpus import TokenizedCorpus

    return TokenizedCorpus.from_json(run.need(FILES["corpus"], "ingest").read_text(encoding="utf-8"))


def _mentions(run: Run):
    from .characters import read_mentions_csv

    return read_mentions_csv(run.need(FILES["mentions"], "mentions"))


def stage_ingest(run: Run, args) -> None:
    from .corpus import SegmentationConfig, load_corpus, read_manifest

    cfg = run.config
    if not cfg.manifest:
        raise StageError("a corpus manifest is required (--manifest or config 'manifest')")
    if not Path(cfg.manifest).exists():
        raise StageError(f"manifest {cfg.manifest} does not exist")
    seg = _aliases(cfg).segmentation_config() if cfg.aliases else SegmentationConfig()
    corpus = load_corpus(read_manifest(cfg.manifest), seg)
    run.write(FILES["corpus"], corpus.to_json())
    run.log(f"{len(corpus.tokens)} tokens, {len(corpus.sentences)} sentences, {len(corpus.chapters)} chapters")


def stage_mentions(run: Run, args) -> None:
    from .characters import count_mention_types, extract_mentions, mention_counts_by_work, write_mentions_csv

    aliases = _aliases(run.config)
    corpus = _corpus(run)
    mentions = extract_mentions(corpus, aliases)
    write_mentions_csv(mentions, run.path(FILES["mentions"]))
    run.sidecar(FILES["mentions"])
    stats = count_mention_types(corpus, aliases)
    payload = {
        "characters": mention_counts_by_work(mentions),
        "in_dialogue": mention_counts_by_work(m for m in mentions if m.in_dialogue),
        "works": {w: s.to_dict() for w, s in stats.items()},
    }
    run.write(FILES["mention_counts"], _dumps(payload))
    run.log(f"{len(mentions)} mentions")


def stage_chart(run: Run, args) -> None:
    from .characters import narrative_chart

    aliases = _aliases(run.config)
    corpus = _corpus(run)
    keys = run.config.characters or sorted(aliases.canonical_ids)
    chart = narrative_chart(_mentions(run), keys, corpus, known_ids=aliases.canonical_ids)
    run.write(FILES["chart"], chart.to_csv())


def stage_extract(run: Run, args) -> None:
    from .cooccur import sentence_cooccurrences, window_cooccurrences

    mentions = _mentions(run)
    if run.config.strategy == "sentence":
        edges = sentence_cooccurrences(mentions)
    else:
        edges = window_cooccurrences(mentions, _corpus(run), run.config.window_chars)
    run.write(FILES["edges"], edges.to_csv())
    run.log(f"{len(edges)} edges ({run.config.strategy})")


def stage_graph(run: Run, args) -> None:
    from .characters import read_mentions_csv
    from .cooccur import read_edges_csv
    from .evaluation import derive_labels
    from .graph import betweenness, build_graph, degree, graph_metrics, layout_fr, layout_to_csv, write_graphml

    edges = read_edges_csv(run.need(FILES["edges"], "extract"), run.config.strategy)
    nodes, attributes = [], {}
    mentions_path = run.path(FILES["mentions"])
    if mentions_path.exists():
        counts: dict[str, dict[str, int]] = {}
        order: list[str] = []
        for m in read_mentions_csv(mentions_path):
            counts.setdefault(m.canonical_id, {}).setdefault(m.work_id, 0)
            counts[m.canonical_id][m.work_id] += 1
            if m.work_id not in order:
                order.append(m.work_id)
        nodes = sorted(counts)
        labels = derive_labels(counts, order).labels
        attributes = {c: {"label": labels[c], "works": ";".join(w for w in order if counts[c].get(w))}
                      for c in nodes}
    g = build_graph(edges.entries, nodes=nodes, attributes=attributes)
    write_graphml(g, run.path(FILES["graph"]))
    run.sidecar(FILES["graph"])
    metrics = graph_metrics(g) if g.n >= 2 else {"nodes": g.n, "edges": g.m}
    run.write(FILES["metrics"], _dumps(metrics))
    run.write(FILES["layout"], layout_to_csv(layout_fr(g, run.config.layout_iterations, run.config.seed)))
    bc_raw, bc_norm = betweenness(g), betweenness(g, normalized=True)
    lines = ["node,degree,betweenness,betweenness_normalized"]
    lines += [f"{v},{degree(g, v)},{bc_raw[v]!r},{bc_norm[v]!r}" for v in g.nodes]
    run.write(FILES["centrality"], "\n".join(lines) + "\n")
    run.log(f"graph with {g.n} nodes and {g.m} edges")


def _graph(run: Run):
    from .graph import read_graphml

    return read_graphml(run.need(FILES["graph"], "graph"))


def _save_embedding(run: Run, emb, name: str) -> None:
    emb.save(run.path(name))
    run.sidecar(name)
    run.sidecar(f"{name}.json")


def stage_embed(run: Run, args) -> None:
    from .embed import WalkConfig, character_vectors, laplacian_eigenmap, node2vec, word_embeddings

    cfg = run.config
    if args.kind == "word":
        corpus = _corpus(run)
        mentions = _mentions(run)
        words = word_embeddings(corpus, mentions, dim=cfg.word_dims, window=cfg.word_window,
                                min_count=cfg.word_min_count, epochs=cfg.embed_epochs, seed=cfg.seed)
        ids = sorted({m.canonical_id for m in mentions})
        missing = [c for c in ids if c.replace(" ", "_") not in words]
        if missing:
            raise StageError(f"characters below word_min_count have no vector: {missing}")
        _save_embedding(run, words, "words.csv")
        _save_embedding(run, character_vectors(words, ids), "word_context.csv")
    elif args.kind == "node2vec":
        walk = WalkConfig(p=cfg.p, q=cfg.q, walks_per_node=cfg.walks_per_node, walk_length=cfg.walk_length,
                          seed=cfg.seed, weighted=cfg.weighted)
        emb = node2vec(_graph(run), walk, dim=cfg.dims, window=cfg.walk_window, epochs=cfg.embed_epochs)
        _save_embedding(run, emb, "node2vec.csv")
    else:
        g = _graph(run)
        emb = laplacian_eigenmap(g, dim=min(cfg.dims, g.n - 2), weighted=cfg.weighted, component="all")
        _save_embedding(run, emb, "laplacian_eigenmap.csv")


def _features(run: Run, source: str):
    from .embed import EmbeddingMatrix

    if source == "ohe":
        return "ohe"
    producer = {"node2vec": "embed node2vec", "laplacian_eigenmap": "embed le", "word_context": "embed word"}
    if source not in producer:
        raise StageError(f"unknown feature source {source!r}")
    return EmbeddingMatrix.load(run.need(f"{source}.csv", producer[source]))


def stage_train(run: Run, args) -> None:
    from .evaluation import edge_split, roc_auc, semi_supervised_mask
    from .gnn.train import TrainConfig, save_checkpoint, train_link_predictor, train_node_classifier, training_log_csv

    cfg = run.config
    g = _graph(run)
    overrides = {"model": cfg.model, "feature_source": cfg.features, "seed": cfg.seed,
                 "weighted_adjacency": cfg.weighted}
    if cfg.epochs is not None:
        overrides["epochs"] = cfg.epochs
    if cfg.lr is not None:
        overrides["learning_rate"] = cfg.lr
    features = _features(run, cfg.features)
    if args.task == "classify":
        tc = TrainConfig.node_classification(**overrides)
        labels = {v: g.node_attributes.get(v, {}).get("label") for v in g.nodes}
        labeled = [v for v in g.nodes if labels[v]]
        if cfg.labels_per_class:
            train = semi_supervised_mask(labels, cfg.labels_per_class, cfg.seed)
        else:
            train = labeled
        result = train_node_classifier(g, features, labels, train, tc)
        save_checkpoint(run.path("classifier.json"), result.params, tc, classes=list(result.classes),
                        nodes=list(result.nodes))
        run.sidecar("classifier.json")
        preds = result.predictions
        lines = ["node,label,predicted,in_training"]
        lines += [f"{v},{labels[v] or ''},{preds[v]},{str(v in train).lower()}" for v in g.nodes]
        run.write("predictions.csv", "\n".join(lines) + "\n")
        run.write("classify_log.csv", training_log_csv(result.loss_history))
        _save_embedding(run, result.hidden_embedding(), "gnn_hidden.csv")
    else:
        tc = TrainConfig.link_prediction(**overrides)
        split = edge_split(g, cfg.holdout, cfg.seed)
        if not isinstance(features, str) and features.provenance in ("node2vec", "laplacian_eigenmap"):
            run.log("graph embedding features were computed on the full graph, so held-out edges leak into them")
        predictor = train_link_predictor(split.g_train, features, tc)
        pairs, y = split.test_pairs()
        scores = predictor.score_pairs(pairs)
        save_checkpoint(run.path("linkpred.json"), predictor.params, tc, nodes=list(predictor.nodes))
        run.sidecar("linkpred.json")
        lines = ["u,v,label,score"] + [f"{u},{v},{t},{s!r}" for (u, v), t, s in zip(pairs, y, scores)]
        run.write("link_scores.csv", "\n".join(lines) + "\n")
        run.write("linkpred_metrics.json", _dumps({"auc": roc_auc(scores, y), "train_connected": split.train_connected,
                                                   "test_pairs": len(pairs)}))
        run.write("linkpred_log.csv", training_log_csv(predictor.loss_history))


def stage_evaluate(run: Run, args) -> None:
    from .evaluation import ExperimentConfig, MissingArtifactError, run_experiment, write_reports

    exp = dict(run.config.experiment)
    exp.setdefault("artifact_dir", str(run.out))
    exp.setdefault("seed", run.config.seed)
    try:
        reports = run_experiment(ExperimentConfig(**exp))
    except MissingArtifactError as err:
        raise StageError(str(err)) from err
    write_reports(reports, run.out / "evaluation")
    run.sidecar("evaluation/results.csv")
    run.log(f"{len(reports)} reports")


def stage_fixture(run: Run, args) -> None:
    from .benchmark import benchmark_text, planted_partition
    from .graph import write_graphml

    data = resources.files("charnet") / "data"
    for name in ("fixture_corpus.txt", "fixture_aliases.tsv", "fixture_manifest.json"):
        run.write(name, (data / name).read_text(encoding="utf-8"))
    bench = planted_partition(seed=run.config.seed)
    write_graphml(bench.graph, run.path("benchmark.graphml"))
    run.sidecar("benchmark.graphml")
    run.write("benchmark_text.txt", benchmark_text(bench))
    run.write("benchmark_aliases.tsv", "".join(f"{v}\t{v}\n" for v in bench.graph.nodes))
    manifest = {"documents": [{"work_id": "benchmark", "title": "Planted partition", "path": "benchmark_text.txt"}]}
    run.write("benchmark_manifest.json", _dumps(manifest))


STAGES: dict[str, Callable] = {
    "ingest": stage_ingest,
    "mentions": stage_mentions,
    "chart": stage_chart,
    "extract": stage_extract,
    "graph": stage_graph,
    "embed": stage_embed,
    "train": stage_train,
    "evaluate": stage_evaluate,
    "fixture": stage_fixture,
}


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with pipeline settings")
    common.add_argument("--out", default="charnet_out", help="shared output directory (default: %(default)s)")
    common.add_argument("--seed", type=int)
    common.add_argument("--manifest")
    common.add_argument("--aliases")
    common.add_argument("--strategy", choices=("sentence", "window"))
    common.add_argument("--window-chars", type=int, dest="window_chars")
    common.add_argument("--dims", type=int)
    common.add_argument("--p", type=float)
    common.add_argument("--q", type=float)
    common.add_argument("--epochs", type=int)
    common.add_argument("--lr", type=float)
    common.add_argument("--weighted", action="store_true", default=None)
    common.add_argument("--model", choices=("gcn", "gat"))
    common.add_argument("--features", choices=("ohe", "node2vec", "laplacian_eigenmap", "word_context"))
    common.add_argument("--labels-per-class", type=int, dest="labels_per_class")

    parser = argparse.ArgumentParser(prog="charnet", description="Character network pipeline.")
    sub = parser.add_subparsers(dest="stage", metavar="STAGE")
    sub.add_parser("ingest", parents=[common], help="tokenize and segment the corpus -> corpus.json")
    sub.add_parser("mentions", parents=[common], help="resolve aliases -> mentions.csv, mention_counts.json")
    sub.add_parser("chart", parents=[common], help="narrative chart -> chart.csv")
    sub.add_parser("extract", parents=[common], help="co-occurrence edges -> edges.csv")
    sub.add_parser("graph", parents=[common], help="graph, metrics, layout, centrality")
    embed = sub.add_parser("embed", parents=[common], help="word, node2vec or Laplacian eigenmap vectors")
    embed.add_argument("kind", choices=("word", "node2vec", "le"))
    train = sub.add_parser("train", parents=[common], help="train a GCN/GAT classifier or link predictor")
    train.add_argument("task", choices=("classify", "linkpred"))
    sub.add_parser("evaluate", parents=[common], help="run the experiment grid in the config's 'experiment'")
    sub.add_parser("fixture", parents=[common], help="write the bundled fixture corpus and planted benchmark")
    return parser


def _effective_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    names = {f.name for f in dataclasses.fields(PipelineConfig)}
    overrides = {k: v for k, v in vars(args).items() if k in names and v is not None}
    return dataclasses.replace(cfg, **overrides)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    if args.stage is None:
        parser.print_usage(sys.stderr)
        return 2
    stage = args.stage + (f" {args.kind}" if args.stage == "embed" else "") + (
        f" {args.task}" if args.stage == "train" else "")
    try:
        cfg = _effective_config(args)
        run = Run(Path(args.out), stage, cfg)
        STAGES[args.stage](run, args)
    except Exception as err:  # any failure is reported against the stage
        print(f"charnet: stage '{stage}' failed: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
