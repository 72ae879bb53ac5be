"""Command-line pipeline: every stage runnable and composable from files.

Each subcommand is a thin wrapper over one module operation. Exit codes:
0 on success (a null tagging/answer is success, not failure), 1 on
data/contract errors, 2 on configuration errors. All output goes to
stdout or ``--out`` as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import evaluation
from .core import (
    Intent,
    Query,
    default_entity_name_lexicon,
    default_superlative_lexicon,
    default_type_dictionary,
    load_entity_name_lexicon,
    load_superlative_lexicon,
    load_type_dictionary,
)
from .dict_tagger import tdl_er_dp_tag, tdl_er_tag, tdl_tag
from .errors import ConfigError, ContractError, DataError, RetrievalError
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    IdfTable,
    UNIFORM_IDF,
    featurize,
    read_features_jsonl,
    write_features_jsonl,
)
from .neural import (
    TrainingConfig,
    load_embeddings,
    load_model,
    predict_tagged_query,
    save_model,
    train,
)
from .selector import (
    SelectorConfig,
    load_selector,
    save_selector,
    score,
    select_answer,
    train_selector,
)
from .snippet import generate_snippet
from .tables import (
    LocalCorpusSource,
    candidate_pool,
    extract_tables,
    table_ref,
    write_tables_jsonl,
)
from .train_data import (
    generate,
    read_examples,
    read_query_log,
    write_examples,
)

TAG_MODES = ("tdl", "tdl-er", "tdl-er-dp", "dnn")


@dataclass(frozen=True)
class PipelineConfig:
    """Validated knobs shared by the pipeline stages."""

    rho: float = 0.3
    theta: float = 0.5
    k: int = 5
    m: int = 3
    n: int = 4
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.rho < 1.0):
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho}")
        if not (0.0 < self.theta < 1.0):
            raise ConfigError(f"theta must lie in (0, 1), got {self.theta}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.m < 1 or self.n < 1:
            raise ConfigError(f"m and n must be >= 1, got {self.m}, {self.n}")


def _require(path, what) -> Path:
    if path is None:
        raise ConfigError(f"missing required path: {what}")
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{what} not found: {p}")
    return p


def _emit(payload, out_path=None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _lexicons(args):
    td = (
        load_type_dictionary(_require(args.type_dict, "type dictionary"))
        if args.type_dict
        else default_type_dictionary()
    )
    sl = (
        load_superlative_lexicon(_require(args.superlatives, "superlative lexicon"))
        if args.superlatives
        else default_superlative_lexicon()
    )
    el = (
        load_entity_name_lexicon(_require(args.entity_names, "entity name lexicon"))
        if args.entity_names
        else default_entity_name_lexicon()
    )
    return td, sl, el


def _tag_once(args, config: PipelineConfig):
    td, sl, el = _lexicons(args)
    q = Query.from_text(args.query)
    reason = None
    if args.mode == "tdl":
        tagged = tdl_tag(q, td, sl)
    elif args.mode == "tdl-er":
        tagged = tdl_er_tag(q, td, sl, el)
    elif args.mode == "tdl-er-dp":
        tagged, rejection = tdl_er_dp_tag(q, td, sl, el)
        reason = rejection.value
    elif args.mode == "dnn":
        model = load_model(_require(args.model, "tagger model"))
        tagged = predict_tagged_query(
            model, q, config.rho, Intent(args.intent)
        )
    else:
        raise ConfigError(f"unknown tag mode {args.mode!r}")
    return tagged, reason


def _cmd_tag(args, config):
    tagged, reason = _tag_once(args, config)
    payload = {
        "query": args.query,
        "mode": args.mode,
        "result": tagged.to_dict() if tagged else None,
    }
    if reason is not None:
        payload["reason"] = reason
    _emit(payload, args.out)
    return 0


def _cmd_gen_train(args, config):
    td, sl, el = _lexicons(args)
    log = read_query_log(_require(args.log, "query log"))
    mix = tuple(float(x) for x in args.mix.split(","))
    examples = generate(
        log,
        td,
        sl,
        el,
        min_impressions=args.min_impressions,
        mix=mix,
        seed=config.seed,
    )
    if args.out:
        write_examples(examples, args.out)
        _emit({"examples": len(examples), "out": str(args.out)})
    else:
        for ex in examples:
            print(f"# source={ex.source.value}")
            for token, tag in zip(ex.tokens, ex.tags):
                print(f"{token}\t{tag}")
            print()
    return 0


def _cmd_train_tagger(args, config):
    examples = read_examples(_require(args.train, "training examples"))
    embeddings = None
    if args.embeddings:
        embeddings = load_embeddings(_require(args.embeddings, "embedding file"))
    train_config = TrainingConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        momentum=args.momentum,
        seed=config.seed,
        word_dim=args.word_dim,
        char_dim=args.char_dim,
        char_buckets=args.char_buckets,
        hidden_size=args.hidden_size,
        head=args.head,
    )
    result = train(examples, train_config, embeddings)
    if args.out is None:
        raise ConfigError("missing required path: --out model file")
    save_model(result.model, args.out)
    _emit(
        {
            "out": str(args.out),
            "examples": len(examples),
            "epoch_losses": result.epoch_losses,
        }
    )
    return 0


def _eval_tagger_outputs(args, config, labeled):
    td, sl, el = _lexicons(args)
    model = None
    if args.mode == "dnn":
        model = load_model(_require(args.model, "tagger model"))
    outputs = []
    for item in labeled:
        q = Query.from_text(item.query)
        if args.mode == "tdl":
            tagged = tdl_tag(q, td, sl)
        elif args.mode == "tdl-er":
            tagged = tdl_er_tag(q, td, sl, el)
        elif args.mode == "tdl-er-dp":
            tagged, _ = tdl_er_dp_tag(q, td, sl, el)
        else:
            tagged = predict_tagged_query(model, q, config.rho)
        outputs.append((tagged, item.gold))
    return outputs


def _cmd_eval_tagger(args, config):
    labeled = evaluation.read_labeled_queries(_require(args.eval, "labeled queries"))
    outputs = _eval_tagger_outputs(args, config, labeled)
    metrics = evaluation.tagging_metrics(outputs)
    _emit(
        {
            "mode": args.mode,
            "total": metrics.total,
            "tp": metrics.tp,
            "fp": metrics.fp,
            "precision": metrics.precision,
            "coverage": metrics.coverage,
        },
        args.out,
    )
    return 0


def _pool_for(args, config, tagged):
    source = LocalCorpusSource(
        _require(args.corpus, "corpus directory"), args.ranking
    )
    return candidate_pool(tagged, source, config.k)


def _cmd_extract(args, config):
    if args.html:
        tables = extract_tables(
            Path(_require(args.html, "html file")).read_text(encoding="utf-8"),
            url=args.html,
        )
    else:
        tagged, _ = _tag_once(args, config)
        if tagged is None:
            _emit({"query": args.query, "tables": 0, "result": None}, args.out)
            return 0
        tables = list(_pool_for(args, config, tagged).tables)
    if args.out:
        write_tables_jsonl(tables, args.out)
        _emit({"tables": len(tables), "out": str(args.out)})
    else:
        for table in tables:
            print(json.dumps(table.to_dict(), sort_keys=True))
    return 0


def _featurized_pool(args, config):
    tagged, _ = _tag_once(args, config)
    if tagged is None:
        return None, None, []
    pool = _pool_for(args, config, tagged)
    idf = IdfTable.load(_require(args.idf, "idf table")) if args.idf else UNIFORM_IDF
    records = []
    for table in pool.tables:
        fv = featurize(tagged, table, idf)
        records.append(
            {
                "query": tagged.query.raw_text,
                "table_ref": table_ref(table, pool),
                "features": fv.as_dict(),
            }
        )
    return tagged, pool, records


def _cmd_featurize(args, config):
    tagged, _, records = _featurized_pool(args, config)
    if tagged is None:
        _emit({"query": args.query, "result": None}, args.out)
        return 0
    if args.out:
        write_features_jsonl(records, args.out)
        _emit({"pairs": len(records), "out": str(args.out)})
    else:
        for record in records:
            print(json.dumps(record, sort_keys=True))
    return 0


def _cmd_train_selector(args, config):
    records = read_features_jsonl(_require(args.pairs, "feature pairs"))
    pairs = []
    for record in records:
        if "label" not in record:
            raise DataError("training pairs need a 'label' field")
        pairs.append(
            (FeatureVector.from_dict(record["features"]), int(record["label"]))
        )
    result = train_selector(
        pairs,
        SelectorConfig(
            rounds=args.rounds,
            depth=args.depth,
            learning_rate=args.learning_rate,
            seed=config.seed,
        ),
    )
    if args.out is None:
        raise ConfigError("missing required path: --out model file")
    save_selector(result.model, args.out)
    _emit(
        {
            "out": str(args.out),
            "pairs": len(pairs),
            "final_loss": result.round_losses[-1] if result.round_losses else None,
        }
    )
    return 0


def _cmd_answer(args, config):
    tagged, _ = _tag_once(args, config)
    payload = {
        "query": args.query,
        "answer_table_ref": None,
        "score": None,
        "threshold": config.theta,
    }
    if tagged is None:
        _emit(payload, args.out)
        return 0
    pool = _pool_for(args, config, tagged)
    model = load_selector(_require(args.selector, "selector model"))
    idf = IdfTable.load(_require(args.idf, "idf table")) if args.idf else UNIFORM_IDF
    result = select_answer(tagged, pool, model, config.theta, idf)
    payload["score"] = result.best_score if pool.tables else None
    if result.best_table is not None:
        payload["answer_table_ref"] = table_ref(result.best_table, pool)
    _emit(payload, args.out)
    return 0


def _cmd_snippet(args, config):
    tagged, _ = _tag_once(args, config)
    if tagged is None:
        _emit({"query": args.query, "snippet": None}, args.out)
        return 0
    pool = _pool_for(args, config, tagged)
    model = load_selector(_require(args.selector, "selector model"))
    idf = IdfTable.load(_require(args.idf, "idf table")) if args.idf else UNIFORM_IDF
    result = select_answer(tagged, pool, model, config.theta, idf)
    if result.best_table is None:
        _emit({"query": args.query, "snippet": None}, args.out)
        return 0
    snip = generate_snippet(tagged, result.best_table, config.m, config.n)
    _emit(
        {"query": args.query, "snippet": snip.to_dict(result.best_table)},
        args.out,
    )
    return 0


def _cmd_eval_selector(args, config):
    records = read_features_jsonl(_require(args.pairs, "labeled feature pairs"))
    model = load_selector(_require(args.selector, "selector model"))
    by_query: dict[str, list] = {}
    for record in records:
        if "label" not in record:
            raise DataError("evaluation pairs need a 'label' field")
        by_query.setdefault(record["query"], []).append(record)
    scored = []
    for query, group in sorted(by_query.items()):
        best_score = None
        best_label = None
        any_positive = any(int(r["label"]) == 1 for r in group)
        for record in group:
            s = score(model, FeatureVector.from_dict(record["features"]))
            if best_score is None or s > best_score:
                best_score, best_label = s, int(record["label"])
        scored.append(
            evaluation.ScoredQuery(best_score, best_label, any_positive)
        )
    thetas = [float(x) for x in args.thetas.split(",")]
    points = evaluation.pr_curve(scored, thetas)
    if args.csv:
        evaluation.write_pr_curve_csv(points, args.csv)
    metrics = evaluation.selection_metrics(
        evaluation.outcome_at(s, config.theta) for s in scored
    )
    _emit(
        {
            "queries": len(scored),
            "theta": config.theta,
            "precision": metrics.precision,
            "recall": metrics.recall,
            "curve": [
                {"theta": p.theta, "precision": p.precision, "recall": p.recall}
                for p in points
            ],
        },
        args.out,
    )
    return 0


def _cmd_feature_report(args, config):
    records = read_features_jsonl(_require(args.pairs, "labeled feature pairs"))
    labels = []
    columns: dict[str, list[float]] = {name: [] for name in FEATURE_NAMES}
    for record in records:
        if "label" not in record:
            raise DataError("feature report needs labeled pairs")
        labels.append(int(record["label"]))
        fv = FeatureVector.from_dict(record["features"])
        for name, value in fv.as_dict().items():
            columns[name].append(value)
    groups = {
        "StructureAware_Together": [
            "SubjectColName_SET_Match",
            "SubjectColValues_SET_Match",
            "SectionHeadings_SET_Match",
            "AllHeadings_SET_Match",
            "PremodPostmod_MaxColHits",
        ],
        "TextMatch_Together": [
            "qInPageTitle",
            "qInTableTitle",
            "qInColNames",
            "qInLeftmostCol",
            "qInSecondLeftCol",
            "qInOtherCol",
            "qInSurrText",
        ],
    }
    rows = evaluation.feature_report(columns, labels, groups)
    if args.json:
        _emit(json.loads(evaluation.report_to_json(rows)), args.out)
    else:
        text = evaluation.format_report_text(rows)
        if args.out:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        else:
            print(text)
    return 0


def _add_lexicon_flags(parser):
    parser.add_argument("--type-dict", help="type dictionary file")
    parser.add_argument("--superlatives", help="superlative lexicon file")
    parser.add_argument("--entity-names", help="entity name lexicon file")


def _add_tag_flags(parser):
    parser.add_argument("--query", required=True)
    parser.add_argument("--mode", choices=TAG_MODES, default="tdl-er-dp")
    parser.add_argument("--model", help="tagger model (dnn mode)")
    parser.add_argument(
        "--intent",
        choices=[i.value for i in Intent],
        default=Intent.LIST.value,
        help="intent assigned by the dnn tagger",
    )
    _add_lexicon_flags(parser)


def _add_corpus_flags(parser):
    parser.add_argument("--corpus", help="corpus directory")
    parser.add_argument("--ranking", help="ranking file (default corpus/ranking.tsv)")
    parser.add_argument("--idf", help="idf table file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tableseek",
        description="Answer list-intent and superlative queries with web tables.",
    )
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--rho", type=float, default=None)
    parser.add_argument("--theta", type=float, default=None)
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--m", type=int, default=None)
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tag", help="tag a single query")
    _add_tag_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_tag)

    p = sub.add_parser("gen-train", help="generate training data from a query log")
    p.add_argument("--log", required=True)
    p.add_argument("--min-impressions", type=int, default=100)
    p.add_argument("--mix", default="0.5,0.2,0.3")
    _add_lexicon_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen_train)

    p = sub.add_parser("train-tagger", help="train the neural tagger")
    p.add_argument("--train", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--word-dim", type=int, default=16)
    p.add_argument("--char-dim", type=int, default=8)
    p.add_argument("--char-buckets", type=int, default=256)
    p.add_argument("--hidden-size", type=int, default=16)
    p.add_argument("--head", choices=("softmax", "crf"), default="softmax")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train_tagger)

    p = sub.add_parser("eval-tagger", help="precision/coverage on labeled queries")
    p.add_argument("--eval", required=True)
    p.add_argument("--mode", choices=TAG_MODES, default="tdl-er-dp")
    p.add_argument("--model")
    _add_lexicon_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval_tagger)

    p = sub.add_parser("extract", help="extract relational tables")
    p.add_argument("--html", help="extract from one HTML file")
    p.add_argument("--query", help="extract a query's candidate pool")
    p.add_argument("--mode", choices=TAG_MODES, default="tdl-er-dp")
    p.add_argument("--model")
    p.add_argument(
        "--intent",
        choices=[i.value for i in Intent],
        default=Intent.LIST.value,
    )
    _add_lexicon_flags(p)
    _add_corpus_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("featurize", help="feature vectors for a query's candidates")
    _add_tag_flags(p)
    _add_corpus_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("train-selector", help="train the table-answer classifier")
    p.add_argument("--pairs", required=True, help="labeled feature JSONL")
    p.add_argument("--rounds", type=int, default=200)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train_selector)

    p = sub.add_parser("answer", help="select the table answer for a query")
    _add_tag_flags(p)
    _add_corpus_flags(p)
    p.add_argument("--selector", help="selector model file")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_answer)

    p = sub.add_parser("snippet", help="display snippet of the selected answer")
    _add_tag_flags(p)
    _add_corpus_flags(p)
    p.add_argument("--selector", help="selector model file")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_snippet)

    p = sub.add_parser("eval-selector", help="PR metrics over labeled pairs")
    p.add_argument("--pairs", required=True)
    p.add_argument("--selector", required=True)
    p.add_argument(
        "--thetas", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
    )
    p.add_argument("--csv", help="write the PR curve as CSV")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval_selector)

    p = sub.add_parser("feature-report", help="information gain and phi per feature")
    p.add_argument("--pairs", required=True)
    p.add_argument("--json", action="store_true", help="JSON instead of text")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_feature_report)

    return parser


def _read_config_file(path) -> dict:
    values = {}
    for lineno, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


# path-valued config keys a stage may resolve from the config file
_PATH_KEYS = (
    "type_dict", "superlatives", "entity_names", "embeddings",
    "corpus", "ranking", "idf", "model", "selector",
)


def _resolve_config(args) -> PipelineConfig:
    defaults = PipelineConfig()
    file_values = {}
    if args.config:
        file_values = _read_config_file(_require(args.config, "config file"))

    def pick(name, cast):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        if name in file_values:
            try:
                return cast(file_values[name])
            except ValueError:
                raise ConfigError(
                    f"config key {name} has bad value {file_values[name]!r}"
                ) from None
        return getattr(defaults, name)

    # paths fall back to the config file when the flag was not given
    for key in _PATH_KEYS:
        if getattr(args, key, None) is None and key in file_values:
            setattr(args, key, file_values[key])

    return PipelineConfig(
        rho=pick("rho", float),
        theta=pick("theta", float),
        k=pick("k", int),
        m=pick("m", int),
        n=pick("n", int),
        seed=pick("seed", int),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        return args.func(args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ContractError, RetrievalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
