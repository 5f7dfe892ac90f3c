"""Versioned persistence for a fitted classifier.

A bundle is one JSON document holding everything classification needs:
the stopword list the text was cleaned with, the vocabulary, idf
weights, the selected columns, the boosted trees, and enough metadata
(seed, creation time, a fingerprint of the training corpus) to say
where a model came from.

Two guarantees drive the format:

* Determinism. Saving the same bundle twice yields byte-identical
  files: keys are sorted, separators fixed, one trailing newline, and
  floats go through Python's shortest round-trip repr. The creation
  timestamp honours SOURCE_DATE_EPOCH so builds can pin it.
* Paranoid loading. load_bundle revalidates every cross-field
  dimension before returning; a truncated idf array or a tree forest
  of the wrong width is reported by field name, not discovered later
  as a numpy broadcast error.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import BundleError
from .gbdt import GbdtHyperparams, GbdtModel, RegressionTree
from .pipeline import FittedPipeline, PipelineParams, Prediction
from .preprocess import StopwordList, TokenizedDocument, preprocess_text
from .select import Chi2Selector
from .tfidf import TfIdfModel
from .vectorize import Vocabulary

__all__ = [
    "FORMAT_VERSION",
    "PUNCTUATION_RULE",
    "ModelBundle",
    "build_metadata",
    "corpus_fingerprint",
    "stopword_digest",
    "save_bundle",
    "load_bundle",
    "classify_text",
]

FORMAT_VERSION = 1

# Identifier for the punctuation handling baked into preprocess: every
# character in a Unicode P* category becomes a space. Recorded in the
# bundle so a future second rule cannot be silently misapplied.
PUNCTUATION_RULE = "unicode-P-to-space"


def stopword_digest(stoplist: StopwordList) -> str:
    joined = "\n".join(sorted(stoplist.words)).encode("utf-8")
    return hashlib.sha256(joined).hexdigest()


def corpus_fingerprint(corpus) -> str:
    """Order-sensitive digest of (doc_id, label, raw_text) records.

    Fields are length-framed so no concatenation of ids, labels and
    text can collide with a different record split."""
    h = hashlib.sha256()
    for doc in corpus.documents:
        for part in (doc.doc_id, doc.label, doc.raw_text):
            raw = part.encode("utf-8")
            h.update(len(raw).to_bytes(8, "big"))
            h.update(raw)
    return h.hexdigest()


def _created_at() -> str:
    pinned = os.environ.get("SOURCE_DATE_EPOCH")
    moment = int(pinned) if pinned else int(time.time())
    return datetime.fromtimestamp(moment, tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


def build_metadata(seed: int, corpus) -> dict:
    return {
        "seed": int(seed),
        "created_at": _created_at(),
        "corpus_fingerprint": corpus_fingerprint(corpus),
    }


@dataclass
class ModelBundle:
    pipeline: FittedPipeline
    stopwords: StopwordList
    metadata: dict

    @property
    def labels(self) -> tuple:
        return self.pipeline.labels


def classify_text(bundle: ModelBundle, text: str, doc_id: str = "<text>") -> Prediction:
    tokens = preprocess_text(text, bundle.stopwords)
    doc = TokenizedDocument(doc_id=doc_id, tokens=tuple(tokens))
    return bundle.pipeline.predict([doc])[0]


def _floats(arr) -> list:
    return [float(v) for v in arr]


def bundle_to_dict(bundle: ModelBundle) -> dict:
    pipe = bundle.pipeline
    params = pipe.params
    hp = params.gbdt
    return {
        "format_version": FORMAT_VERSION,
        "labels": list(pipe.labels),
        "metadata": dict(bundle.metadata),
        "params": {
            "min_df": params.min_df,
            "tfidf_smoothing": params.tfidf_smoothing,
            "tfidf_norm": params.tfidf_norm,
            "select_k": params.select_k,
            "gbdt": {
                "n_iterations": hp.n_iterations,
                "learning_rate": hp.learning_rate,
                "max_depth": hp.max_depth,
                "min_samples_leaf": hp.min_samples_leaf,
                "seed": hp.seed,
            },
        },
        "preprocess": {
            "punctuation_rule": PUNCTUATION_RULE,
            "stopwords": sorted(bundle.stopwords.words),
            "stopwords_sha256": stopword_digest(bundle.stopwords),
        },
        "vocabulary": list(pipe.vocabulary.index_to_token),
        "tfidf": {
            "idf": _floats(pipe.tfidf_model.idf),
            "n_train_docs": pipe.tfidf_model.n_train_docs,
            "smoothing_mode": pipe.tfidf_model.smoothing_mode,
            "norm": pipe.tfidf_model.norm,
        },
        "selector": {
            "scores": _floats(pipe.selector.scores),
            "selected": list(pipe.selector.selected),
            "k_requested": pipe.selector.k_requested,
        },
        "gbdt": {
            "initial_scores": _floats(pipe.model.initial_scores),
            "learning_rate": pipe.model.learning_rate,
            "n_features": pipe.model.n_features,
            "trees": [
                [tree.to_dict() for tree in per_class]
                for per_class in pipe.model.trees
            ],
        },
    }


def save_bundle(bundle: ModelBundle, path) -> None:
    text = json.dumps(
        bundle_to_dict(bundle),
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    Path(path).write_text(text + "\n", encoding="utf-8")


def _need(mapping: dict, key: str, where: str = "bundle") -> object:
    if key not in mapping:
        raise BundleError(f"{where} is missing required field {key!r}")
    return mapping[key]


def bundle_from_dict(d: dict) -> ModelBundle:
    version = _need(d, "format_version")
    if version != FORMAT_VERSION:
        raise BundleError(
            f"bundle format_version is {version!r}; this build reads "
            f"version {FORMAT_VERSION}"
        )
    labels = tuple(_need(d, "labels"))
    if len(labels) < 2:
        raise BundleError(
            f"labels holds {len(labels)} entries; a classifier needs at least 2"
        )
    if len(set(labels)) != len(labels):
        raise BundleError("labels contains duplicates")
    metadata = dict(_need(d, "metadata"))

    pp = _need(d, "preprocess")
    rule = _need(pp, "punctuation_rule", "preprocess")
    if rule != PUNCTUATION_RULE:
        raise BundleError(
            f"preprocess.punctuation_rule {rule!r} is unknown; this build "
            f"implements {PUNCTUATION_RULE!r}"
        )
    stopwords = StopwordList(words=frozenset(_need(pp, "stopwords", "preprocess")))
    claimed = _need(pp, "stopwords_sha256", "preprocess")
    actual = stopword_digest(stopwords)
    if claimed != actual:
        raise BundleError(
            "preprocess.stopwords_sha256 does not match the embedded list "
            f"(recorded {claimed}, recomputed {actual})"
        )

    vocab_tokens = list(_need(d, "vocabulary"))
    if len(set(vocab_tokens)) != len(vocab_tokens):
        raise BundleError("vocabulary contains duplicate tokens")
    vocabulary = Vocabulary(
        index_to_token=tuple(vocab_tokens),
        token_to_index={tok: j for j, tok in enumerate(vocab_tokens)},
    )
    v_size = len(vocab_tokens)

    tf = _need(d, "tfidf")
    idf = np.array(_need(tf, "idf", "tfidf"), dtype=np.float64)
    if idf.shape[0] != v_size:
        raise BundleError(
            f"tfidf.idf has {idf.shape[0]} entries for a "
            f"{v_size}-token vocabulary"
        )
    tfidf_model = TfIdfModel(
        idf=idf,
        n_train_docs=int(_need(tf, "n_train_docs", "tfidf")),
        smoothing_mode=_need(tf, "smoothing_mode", "tfidf"),
        norm=_need(tf, "norm", "tfidf"),
    )

    sel = _need(d, "selector")
    scores = np.array(_need(sel, "scores", "selector"), dtype=np.float64)
    if scores.shape[0] != v_size:
        raise BundleError(
            f"selector.scores has {scores.shape[0]} entries for a "
            f"{v_size}-token vocabulary"
        )
    selected = tuple(int(j) for j in _need(sel, "selected", "selector"))
    if any(j < 0 or j >= v_size for j in selected):
        raise BundleError(
            f"selector.selected contains indices outside 0..{v_size - 1}"
        )
    if list(selected) != sorted(set(selected)):
        raise BundleError("selector.selected must be strictly increasing")
    selector = Chi2Selector(
        scores=scores,
        selected=selected,
        k_requested=int(_need(sel, "k_requested", "selector")),
    )

    gb = _need(d, "gbdt")
    initial = np.array(_need(gb, "initial_scores", "gbdt"), dtype=np.float64)
    if initial.shape[0] != len(labels):
        raise BundleError(
            f"gbdt.initial_scores has {initial.shape[0]} entries for "
            f"{len(labels)} labels"
        )
    n_features = int(_need(gb, "n_features", "gbdt"))
    if n_features != len(selected):
        raise BundleError(
            f"gbdt.n_features is {n_features} but the selector keeps "
            f"{len(selected)} columns"
        )
    trees = []
    for it, per_class in enumerate(_need(gb, "trees", "gbdt")):
        if len(per_class) != len(labels):
            raise BundleError(
                f"gbdt.trees[{it}] has {len(per_class)} trees for "
                f"{len(labels)} labels"
            )
        trees.append([RegressionTree.from_dict(t) for t in per_class])
    model = GbdtModel(
        class_labels=labels,
        initial_scores=initial,
        trees=trees,
        learning_rate=float(_need(gb, "learning_rate", "gbdt")),
        n_features=n_features,
    )

    pr = _need(d, "params")
    gp = _need(pr, "gbdt", "params")
    params = PipelineParams(
        min_df=int(_need(pr, "min_df", "params")),
        tfidf_smoothing=_need(pr, "tfidf_smoothing", "params"),
        tfidf_norm=_need(pr, "tfidf_norm", "params"),
        select_k=int(_need(pr, "select_k", "params")),
        gbdt=GbdtHyperparams(
            n_iterations=int(_need(gp, "n_iterations", "params.gbdt")),
            learning_rate=float(_need(gp, "learning_rate", "params.gbdt")),
            max_depth=int(_need(gp, "max_depth", "params.gbdt")),
            min_samples_leaf=int(_need(gp, "min_samples_leaf", "params.gbdt")),
            seed=int(_need(gp, "seed", "params.gbdt")),
        ),
    )
    if params.tfidf_smoothing != tfidf_model.smoothing_mode:
        raise BundleError(
            f"params.tfidf_smoothing {params.tfidf_smoothing!r} disagrees "
            f"with tfidf.smoothing_mode {tfidf_model.smoothing_mode!r}"
        )
    if params.tfidf_norm != tfidf_model.norm:
        raise BundleError(
            f"params.tfidf_norm {params.tfidf_norm!r} disagrees with "
            f"tfidf.norm {tfidf_model.norm!r}"
        )

    pipeline = FittedPipeline(
        params=params,
        vocabulary=vocabulary,
        tfidf_model=tfidf_model,
        selector=selector,
        model=model,
    )
    return ModelBundle(pipeline=pipeline, stopwords=stopwords, metadata=metadata)


def load_bundle(path) -> ModelBundle:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BundleError(f"cannot read bundle file {path}: {exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BundleError(f"bundle file {path} is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise BundleError(f"bundle file {path} must hold a JSON object")
    return bundle_from_dict(d)
