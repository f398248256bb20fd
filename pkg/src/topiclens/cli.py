"""Command-line entry point.

Subcommands: build, assign, calibrate, compare, rerank-deleted, synth.
Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then command-line flags.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

from . import __version__
from .assign import Assignment, assign_posts, calibrate
from .compare import (
    compare_models,
    deleted_rank_correlation,
    rank_topics,
)
from .corpus import CorpusError, dumps_post, filter_deleted, read_corpus
from .preprocess import (
    MaxMatchSegmenter,
    Preprocessor,
    ResourceError,
    bundled_dictionary_path,
    bundled_table_path,
    load_dictionary,
    load_table,
)
from .synth import SynthSpec, generate, generate_pair, spec_dict
from .topics import CENTROIDS, TopicModel, build_model
from .vectorize import SELECTIONS

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("topiclens")

THREADS_ENV = "TOPICLENS_THREADS"
_AUTO_PARALLEL_POSTS = 50_000


@dataclass(frozen=True)
class Config:
    tag_mode: str = "paired"
    platform: str = ""
    top_tags: int = 100
    top_topics: Optional[int] = None
    selection: str = "frequency"
    centroid: str = "mean"
    threshold: float = 0.9
    linkage: str = "average"
    dictionary: tuple[str, ...] = ()
    user_dict: tuple[str, ...] = ()
    t2s_table: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.tag_mode not in ("paired", "prefix"):
            raise ValueError(f"tag_mode must be paired or prefix, not {self.tag_mode!r}")
        if self.top_tags < 1:
            raise ValueError("top_tags must be >= 1")
        if self.top_topics is not None and not 1 <= self.top_topics <= self.top_tags:
            raise ValueError("top_topics must satisfy 1 <= top_topics <= top_tags")
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}")
        if self.centroid not in CENTROIDS:
            raise ValueError(f"centroid must be one of {CENTROIDS}")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must lie in (0, 1]")
        if self.linkage != "average":
            raise ValueError("only average linkage is supported")

    def snapshot(self) -> dict:
        """Settings that shape outputs; resource paths reduced to file names."""
        out = asdict(self)
        out["dictionary"] = [Path(p).name for p in self.dictionary] or ["<bundled>"]
        out["user_dict"] = [Path(p).name for p in self.user_dict]
        out["t2s_table"] = Path(self.t2s_table).name if self.t2s_table else "<bundled>"
        return out


def load_config_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    known = {f.name for f in fields(Config)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    for key in ("dictionary", "user_dict"):
        if isinstance(data.get(key), str):
            data[key] = (data[key],)
        elif key in data:
            data[key] = tuple(data[key])
    return data


def resolve_config(args, base: Optional[Config] = None) -> Config:
    values = asdict(base) if base is not None else {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for f in fields(Config):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = tuple(flag) if isinstance(flag, list) else flag
    return Config(**values)


def worker_count(n_posts: int) -> int:
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0")
    if n == 0:
        return (os.cpu_count() or 1) if n_posts >= _AUTO_PARALLEL_POSTS else 1
    return n


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def make_manifest(command: str, config: Optional[Config], inputs: dict, extra=None) -> dict:
    manifest = {
        "tool": "topiclens",
        "version": __version__,
        "command": command,
        "inputs": {role: {"name": Path(p).name, "sha256": sha256(p)}
                   for role, p in sorted(inputs.items()) if p},
    }
    if config is not None:
        manifest["config"] = config.snapshot()
    if extra:
        manifest.update(extra)
    return manifest


def resource_inputs(config: Config) -> dict:
    inputs = {"t2s_table": config.t2s_table or bundled_table_path()}
    for i, p in enumerate(config.dictionary or (bundled_dictionary_path(),)):
        inputs[f"dictionary.{i}"] = p
    for i, p in enumerate(config.user_dict):
        inputs[f"user_dict.{i}"] = p
    return inputs


def make_preprocessor(config: Config) -> Preprocessor:
    table = load_table(config.t2s_table)
    dictionary = load_dictionary(*config.dictionary)
    if config.user_dict:
        dictionary.update(load_dictionary(*config.user_dict))
    return Preprocessor(table, MaxMatchSegmenter(dictionary))


def tokenize(path, config: Config, platform: str = ""):
    corpus = read_corpus(path, config.tag_mode, platform or config.platform)
    pre = make_preprocessor(config)
    return corpus, pre.process(corpus.posts, workers=worker_count(len(corpus)))


def dump_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=1) + "\n"


class Outputs:
    """Collects output files and writes them atomically once all are ready."""

    def __init__(self):
        self.files: list[tuple[Path, str]] = []

    def add(self, path, text: str, manifest: Optional[dict] = None):
        path = Path(path)
        self.files.append((path, text))
        if manifest is not None:
            self.files.append((path.with_name(path.name + ".manifest.json"), dump_json(manifest)))

    def commit(self):
        umask = os.umask(0)
        os.umask(umask)
        for path, text in self.files:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
                os.chmod(tmp, 0o666 & ~umask)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise


# commands ----------------------------------------------------------------

def cmd_build(args, out: Outputs):
    config = resolve_config(args)
    corpus, posts = tokenize(args.input, config)
    result = build_model(posts, corpus.platform, config.top_tags, config.selection,
                         config.centroid, config.threshold, config=config.snapshot())
    manifest = make_manifest("build", config, {"input": args.input, **resource_inputs(config)},
                             {"skipped_records": corpus.skipped})
    model = replace(result.model, manifest=manifest)
    if config.top_topics is not None:
        model = model.subset(config.top_topics)
    out.add(args.out, model.dumps())
    if args.dendrogram:
        out.add(args.dendrogram, dump_json({**result.dendrogram.to_dict(), "manifest": manifest}))
    log.info("built %d topics from %d hashtags", len(model.topics), len(result.documents))


def _model_config(model: TopicModel, args) -> Config:
    """Config for reading new corpora against `model`: flags override the
    settings the model was built with."""
    base = {k: v for k, v in model.config.items()
            if k in ("tag_mode", "top_tags", "top_topics", "selection", "centroid", "seed")}
    base["threshold"] = model.threshold
    return resolve_config(args, Config(**base))


def cmd_assign(args, out: Outputs):
    model = TopicModel.load(args.model)
    config = _model_config(model, args)
    _, posts = tokenize(args.input, config)
    assignments = assign_posts(posts, model, config.threshold)
    lines = "".join(json.dumps(a.to_dict(), ensure_ascii=False) + "\n" for a in assignments)
    manifest = make_manifest("assign", config, {"model": args.model, "input": args.input,
                                                **resource_inputs(config)})
    out.add(args.out, lines, manifest)


def cmd_calibrate(args, out: Outputs):
    model = TopicModel.load(args.model)
    config = _model_config(model, args)
    _, posts = tokenize(args.input, config)
    report = calibrate(model, [p for p in posts if p.hashtags], args.target)
    manifest = make_manifest("calibrate", config, {"model": args.model, "input": args.input,
                                                   **resource_inputs(config)})
    out.add(args.out, dump_json({**report.to_dict(), "manifest": manifest}))


def cmd_compare(args, out: Outputs):
    model_a = TopicModel.load(args.model_a)
    model_b = TopicModel.load(args.model_b)
    config = _model_config(model_a, args)
    posts_a = posts_b = None
    if args.corpus_a:
        _, posts_a = tokenize(args.corpus_a, replace(config, tag_mode=args.tag_mode_a
                                                    or model_a.config.get("tag_mode", "paired")))
    if args.corpus_b:
        _, posts_b = tokenize(args.corpus_b, replace(config, tag_mode=args.tag_mode_b
                                                    or model_b.config.get("tag_mode", "paired")))
    report = compare_models(model_a, model_b, args.top_k, posts_a, posts_b, config.threshold)
    inputs = {"model_a": args.model_a, "model_b": args.model_b,
              "corpus_a": args.corpus_a, "corpus_b": args.corpus_b}
    if args.corpus_a or args.corpus_b:
        inputs.update(resource_inputs(config))
    manifest = make_manifest("compare", config if (posts_a or posts_b) else None, inputs,
                             {"top_k": args.top_k, "threshold": config.threshold})
    out.add(args.out, dump_json({**report.to_dict(), "manifest": manifest}))
    if args.matrix:
        out.add(args.matrix, report.matrix.to_csv(), manifest)


def _read_reference(path) -> list:
    with open(path, encoding="utf-8") as fh:
        rows = [json.loads(line) for line in fh if line.strip()]
    return [Assignment(r["id"], r["topic_id"], r["via"], r.get("distance")) for r in rows]


def cmd_rerank_deleted(args, out: Outputs):
    model = TopicModel.load(args.model)
    config = _model_config(model, args)
    corpus, posts = tokenize(args.input, config)
    deleted_ids = {p.id for p in filter_deleted(corpus).posts}
    deleted = [p for p in posts if p.post_id in deleted_ids]
    reference = rank_topics(_read_reference(args.reference)) if args.reference else None
    report = deleted_rank_correlation(model, deleted, config.threshold, args.top_k, reference)
    manifest = make_manifest("rerank-deleted", config,
                             {"model": args.model, "input": args.input,
                              "reference": args.reference, **resource_inputs(config)},
                             {"top_k": args.top_k})
    out.add(args.out, dump_json({**report.to_dict(model), "manifest": manifest}))


def cmd_synth(args, out: Outputs):
    spec = SynthSpec(
        n_topics=args.topics, tags_per_topic=args.tags_per_topic,
        terms_per_topic=args.terms_per_topic, posts_per_tag=args.posts_per_tag,
        tokens_per_post=args.tokens_per_post, noise_prob=args.noise,
        shared_topic_fraction=args.shared_fraction, seed=args.seed,
        noise_terms=args.noise_terms, untagged_posts=args.untagged,
        zipf_exponent=args.zipf, tag_mode=args.tag_mode)
    manifest = {"tool": "topiclens", "version": __version__, "command": "synth",
                "spec": spec_dict(spec)}
    outdir = Path(args.out_dir)
    if args.pair:
        a, b, truth = generate_pair(spec)
        corpora = [("a.jsonl", a), ("b.jsonl", b)]
    else:
        c, truth = generate(spec)
        corpora = [("corpus.jsonl", c)]
    for name, corpus in corpora:
        out.add(outdir / name, _jsonl(corpus.posts), manifest)
    truth_obj = json.loads(truth.to_json())
    out.add(outdir / "truth.json", dump_json({**truth_obj, "manifest": manifest}))
    out.add(outdir / "lexicon.tsv", truth.lexicon_tsv(), manifest)


def _jsonl(posts) -> str:
    return "".join(dumps_post(p) + "\n" for p in posts)


# argument parsing ------------------------------------------------------------

def _add_resources(p):
    g = p.add_argument_group("preprocessing resources")
    g.add_argument("--dictionary", action="append", metavar="TSV",
                   help="segmenter dictionary (term TAB pos); repeatable; replaces the bundled one")
    g.add_argument("--user-dict", dest="user_dict", action="append", metavar="TSV",
                   help="extra dictionary entries layered on top; repeatable")
    g.add_argument("--t2s", dest="t2s_table", metavar="TSV",
                   help="traditional->simplified table (default: bundled)")
    p.add_argument("--config", metavar="FILE", help="key = value settings file")


def _unit_interval(text):
    x = float(text)
    if not 0.0 < x <= 1.0:
        raise argparse.ArgumentTypeError("must lie in (0, 1]")
    return x


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topiclens", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a topic model from a hashtagged corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tag-mode", dest="tag_mode", choices=("paired", "prefix"))
    p.add_argument("--platform")
    p.add_argument("--top-tags", dest="top_tags", type=_positive)
    p.add_argument("--top-topics", dest="top_topics", type=_positive)
    p.add_argument("--selection", choices=SELECTIONS)
    p.add_argument("--centroid", choices=CENTROIDS)
    p.add_argument("--threshold", type=_unit_interval)
    p.add_argument("--dendrogram", metavar="JSON", help="also write the merge tree")
    _add_resources(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("assign", help="assign posts to a model's topics")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tag-mode", dest="tag_mode", choices=("paired", "prefix"))
    p.add_argument("--threshold", type=_unit_interval)
    _add_resources(p)
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("calibrate", help="distance distributions for choosing the threshold")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tag-mode", dest="tag_mode", choices=("paired", "prefix"))
    p.add_argument("--target", type=float, default=0.75,
                   help="intra-topic coverage the recommended threshold must reach")
    _add_resources(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("compare", help="compare two topic models")
    p.add_argument("--model-a", dest="model_a", required=True)
    p.add_argument("--model-b", dest="model_b", required=True)
    p.add_argument("--top-k", dest="top_k", type=_positive)
    p.add_argument("--out", required=True)
    p.add_argument("--matrix", metavar="CSV")
    p.add_argument("--corpus-a", dest="corpus_a", help="corpus A, for coverage on model B")
    p.add_argument("--corpus-b", dest="corpus_b", help="corpus B, for coverage on model A")
    p.add_argument("--tag-mode-a", dest="tag_mode_a", choices=("paired", "prefix"))
    p.add_argument("--tag-mode-b", dest="tag_mode_b", choices=("paired", "prefix"))
    p.add_argument("--threshold", type=_unit_interval)
    _add_resources(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("rerank-deleted", help="rank a model's topics by deleted posts")
    p.add_argument("--model", required=True, help="the (foreign) model to classify into")
    p.add_argument("--input", required=True, help="corpus whose deleted posts are ranked")
    p.add_argument("--out", required=True)
    p.add_argument("--tag-mode", dest="tag_mode", choices=("paired", "prefix"))
    p.add_argument("--top-k", dest="top_k", type=_positive, default=100)
    p.add_argument("--threshold", type=_unit_interval)
    p.add_argument("--reference", metavar="JSONL",
                   help="assignments of the model's own corpus; their ranking is the "
                        "reference order (default: model post counts)")
    _add_resources(p)
    p.set_defaults(func=cmd_rerank_deleted)

    p = sub.add_parser("synth", help="generate a synthetic corpus with planted topics")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--pair", action="store_true", help="generate two platforms")
    p.add_argument("--topics", type=_positive, default=10)
    p.add_argument("--tags-per-topic", dest="tags_per_topic", type=_positive, default=5)
    p.add_argument("--terms-per-topic", dest="terms_per_topic", type=_positive, default=40)
    p.add_argument("--posts-per-tag", dest="posts_per_tag", type=_positive, default=200)
    p.add_argument("--tokens-per-post", dest="tokens_per_post", type=_positive, default=10)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--noise-terms", dest="noise_terms", type=_positive, default=200)
    p.add_argument("--shared-fraction", dest="shared_fraction", type=float, default=0.0)
    p.add_argument("--untagged", type=int, default=0)
    p.add_argument("--zipf", type=float, default=0.0)
    p.add_argument("--tag-mode", dest="tag_mode", choices=("paired", "prefix"), default="paired")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    out = Outputs()
    try:
        args.func(args, out)
        out.commit()
    except (CorpusError, ResourceError, ValueError, KeyError, OSError) as exc:
        print(f"topiclens: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
