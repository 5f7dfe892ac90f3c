"""Command-line entry points.

Five commands cover the model lifecycle:

  train     fit on a manifest's training split, evaluate on the rest,
            write bundle.json + report.txt/report.json + heldout.tsv
  tune      randomized hyperparameter search with stratified k-fold CV
            on the training split, refit the winner, write the same
            files plus tune_result.json
  evaluate  score an existing bundle against a labeled manifest
  classify  print one JSON line per document: label + probabilities
  scan      classify and apply a policy; exit 3 if anything is Blocked

Exit codes: 0 success, 2 input or configuration problem, 3 at least one
Block verdict, 4 internal invariant failure.

Determinism: for fixed inputs, config, and --seed every primary output
file is byte-reproducible. The one moving part, the bundle's creation
timestamp, can be pinned with SOURCE_DATE_EPOCH.

train and tune both hold out [split] test_fraction of the manifest
(default 25%) before fitting anything, and tune searches entirely
inside the retained portion. The held-out documents are listed in
heldout.tsv (absolute paths), ready to hand straight back to evaluate;
scoring a bundle against its own heldout.tsv is a leak-free measurement
by construction.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

from .bundle import ModelBundle, build_metadata, classify_text, load_bundle, save_bundle
from .config import load_grid, load_policy, load_run_config
from .corpus import Corpus, load_corpus, read_document_text, split_train_test
from .errors import DocShieldError, InputError, InternalError
from .metrics import confusion, full_report, render_text
from .pipeline import FittedPipeline, fit_pipeline
from .policy import Action, scan_document
from .preprocess import default_stopwords, load_stopwords, preprocess_document
from .tune import TuneResult, randomized_search, stratified_kfold

__all__ = ["main"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BLOCK = 3
EXIT_INTERNAL = 4

TUNE_RESULT_SCHEMA_VERSION = 1


@contextmanager
def _stage(name: str):
    """Prefix any domain error with the phase it happened in."""
    try:
        yield
    except DocShieldError as exc:
        raise type(exc)(f"during {name}: {exc}") from exc


def _stoplist(args):
    if args.stopwords:
        return load_stopwords(args.stopwords)
    return default_stopwords()


def _out_dir(args) -> Path:
    path = Path(args.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def _load_training_corpus(args) -> Corpus:
    with _stage("corpus loading"):
        corpus = load_corpus(args.manifest)
    if len(corpus.label_set) < 2:
        raise InputError(
            f"manifest holds a single class {corpus.label_set[0]!r}; "
            "training needs at least two"
        )
    return corpus


def _tokenize_corpus(corpus: Corpus, stoplist) -> list:
    return [preprocess_document(d, stoplist) for d in corpus.documents]


def _write_heldout_manifest(test: Corpus, path: Path) -> None:
    lines = [
        f"{Path(doc.source_path).resolve()}\t{doc.label}"
        for doc in test.documents
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _evaluate_fitted(pipeline: FittedPipeline, test: Corpus, stoplist, labels):
    with _stage("evaluation"):
        token_docs = _tokenize_corpus(test, stoplist)
        predicted = pipeline.predict_labels(token_docs)
        return full_report(confusion(test.labels(), predicted, labels))


def _write_reports(report, out: Path) -> None:
    (out / "report.txt").write_text(render_text(report), encoding="utf-8")
    _write_json(out / "report.json", report.to_json_dict())


def _fit_and_emit(args, corpus, train, test, stoplist, params) -> float:
    """Shared tail of train and tune: fit on the training split, persist
    the bundle, evaluate on the held-out split, write reports. Returns
    the held-out multi-class accuracy."""
    with _stage("pipeline fitting"):
        token_docs = _tokenize_corpus(train, stoplist)
        pipeline = fit_pipeline(
            token_docs, train.labels(), params, class_labels=corpus.label_set
        )
    bundle = ModelBundle(
        pipeline=pipeline,
        stopwords=stoplist,
        metadata=build_metadata(seed=args.seed, corpus=train),
    )
    out = _out_dir(args)
    save_bundle(bundle, out / "bundle.json")
    report = _evaluate_fitted(pipeline, test, stoplist, corpus.label_set)
    _write_reports(report, out)
    _write_heldout_manifest(test, out / "heldout.tsv")
    return report.multiclass_accuracy


def cmd_train(args) -> int:
    config = load_run_config(args.config)
    corpus = _load_training_corpus(args)
    with _stage("train/test splitting"):
        train, test = split_train_test(corpus, config.test_fraction, args.seed)
    stoplist = _stoplist(args)
    accuracy = _fit_and_emit(args, corpus, train, test, stoplist, config.params)
    print(f"trained on {len(train.documents)} documents, "
          f"held out {len(test.documents)}")
    print(f"held-out multi-class accuracy: {accuracy:.4f}")
    print(f"wrote bundle.json, report.txt, report.json, heldout.tsv "
          f"to {_out_dir(args)}")
    return EXIT_OK


def _tune_result_payload(result: TuneResult, args, n_splits: int, grid) -> dict:
    return {
        "schema_version": TUNE_RESULT_SCHEMA_VERSION,
        "seed": args.seed,
        "n_splits": n_splits,
        "grid": {name: list(values) for name, values in grid.items()},
        "best": {
            "assignment": dict(result.best_assignment),
            "mean_accuracy": result.best_score,
        },
        "trials": [
            {
                "assignment": dict(t.assignment),
                "fold_accuracies": list(t.fold_accuracies),
                "mean_accuracy": t.mean_accuracy,
                "std_accuracy": t.std_accuracy,
            }
            for t in result.trials
        ],
    }


def cmd_tune(args) -> int:
    config = load_run_config(args.config)
    n_candidates = (args.n_candidates if args.n_candidates is not None
                    else config.n_candidates)
    n_splits = args.n_splits if args.n_splits is not None else config.n_splits
    grid = load_grid(args.grid)
    corpus = _load_training_corpus(args)
    with _stage("train/test splitting"):
        train, test = split_train_test(corpus, config.test_fraction, args.seed)
    stoplist = _stoplist(args)

    with _stage("hyperparameter search"):
        token_docs = _tokenize_corpus(train, stoplist)
        folds = stratified_kfold(train.labels(), n_splits, args.seed)
        result = randomized_search(
            token_docs,
            train.labels(),
            grid,
            n_candidates,
            folds,
            args.seed,
            base_params=config.params,
        )

    accuracy = _fit_and_emit(
        args, corpus, train, test, stoplist, result.best_params
    )
    out = _out_dir(args)
    _write_json(out / "tune_result.json",
                _tune_result_payload(result, args, n_splits, grid))
    print(f"searched {len(result.trials)} candidates with "
          f"{n_splits}-fold CV on {len(train.documents)} documents")
    print(f"best assignment: {result.best_assignment} "
          f"(mean CV accuracy {result.best_score:.4f})")
    print(f"held-out multi-class accuracy: {accuracy:.4f}")
    print(f"wrote bundle.json, tune_result.json, report.txt, report.json, "
          f"heldout.tsv to {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    bundle = load_bundle(args.bundle)
    with _stage("corpus loading"):
        corpus = load_corpus(args.manifest)
    foreign = sorted(set(corpus.label_set) - set(bundle.labels))
    if foreign:
        raise InputError(
            f"manifest labels {foreign} are not predicted by this bundle "
            f"(bundle labels: {sorted(bundle.labels)})"
        )
    with _stage("evaluation"):
        token_docs = _tokenize_corpus(corpus, bundle.stopwords)
        predicted = bundle.pipeline.predict_labels(token_docs)
        report = full_report(
            confusion(corpus.labels(), predicted, bundle.labels)
        )
    print(render_text(report), end="")
    if args.out_dir:
        _write_reports(report, _out_dir(args))
    return EXIT_OK


def _each_document(paths):
    for raw in paths:
        path = Path(raw)
        with _stage(f"reading {path}"):
            yield str(path), read_document_text(path)


def cmd_classify(args) -> int:
    bundle = load_bundle(args.bundle)
    for doc_id, text in _each_document(args.paths):
        pred = classify_text(bundle, text, doc_id=doc_id)
        line = {
            "doc_id": pred.doc_id,
            "label": pred.label,
            "labels": list(bundle.labels),
            "probabilities": list(pred.probabilities),
            "unknown_tokens": pred.unknown_tokens,
            "zero_vector": pred.zero_vector,
        }
        print(json.dumps(line, sort_keys=True))
    return EXIT_OK


def cmd_scan(args) -> int:
    bundle = load_bundle(args.bundle)
    policy = load_policy(args.policy)
    blocked = False
    for doc_id, text in _each_document(args.paths):
        verdict = scan_document(bundle, text, policy=policy, doc_id=doc_id)
        blocked = blocked or verdict.action is Action.BLOCK
        line = verdict.to_json_dict()
        line["labels"] = list(bundle.labels)
        print(json.dumps(line, sort_keys=True))
    return EXIT_BLOCK if blocked else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docshield",
        description="Document sensitivity classifier for data-loss prevention.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="fit a model and write a bundle")
    train.add_argument("--manifest", required=True,
                       help="path<TAB>label manifest or labeled directory")
    train.add_argument("--config", help="run config file (INI)")
    train.add_argument("--seed", type=int, default=0,
                       help="random seed for splitting (default 0)")
    train.add_argument("--stopwords", help="custom stopword file")
    train.add_argument("--out-dir", required=True,
                       help="directory for bundle and reports")
    train.set_defaults(func=cmd_train)

    tune = sub.add_parser("tune", help="randomized search, then fit the best")
    tune.add_argument("--manifest", required=True)
    tune.add_argument("--config", help="run config file (INI)")
    tune.add_argument("--grid", required=True,
                      help="grid file listing candidate values")
    tune.add_argument("--n-candidates", type=int,
                      help="candidates to sample (default from config: 12)")
    tune.add_argument("--n-splits", type=int,
                      help="CV folds (default from config: 5)")
    tune.add_argument("--seed", type=int, default=0)
    tune.add_argument("--stopwords", help="custom stopword file")
    tune.add_argument("--out-dir", required=True)
    tune.set_defaults(func=cmd_tune)

    evaluate = sub.add_parser("evaluate", help="score a bundle on a manifest")
    evaluate.add_argument("--bundle", required=True)
    evaluate.add_argument("--manifest", required=True)
    evaluate.add_argument("--out-dir",
                          help="also write report.txt and report.json here")
    evaluate.set_defaults(func=cmd_evaluate)

    classify = sub.add_parser("classify",
                              help="print label + probabilities per document")
    classify.add_argument("--bundle", required=True)
    classify.add_argument("paths", nargs="+", metavar="file")
    classify.set_defaults(func=cmd_classify)

    scan = sub.add_parser("scan", help="classify and apply policy actions")
    scan.add_argument("--bundle", required=True)
    scan.add_argument("--policy", help="policy file ([policy] section)")
    scan.add_argument("paths", nargs="+", metavar="file")
    scan.set_defaults(func=cmd_scan)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except DocShieldError as exc:
        # InputError and BundleError both mean "fix your inputs"
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
