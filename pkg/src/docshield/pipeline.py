"""The fitted classification pipeline: vocabulary, tf-idf weights,
chi-squared selection, and the boosted-tree classifier, fitted together
on one training set and applied together at prediction time.

Preprocessing is deliberately outside this module: it holds no fitted
state, so cross-validation can tokenize once and refit everything here
per fold without leakage.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from . import gbdt as gbdt_mod
from . import select as select_mod
from . import tfidf as tfidf_mod
from .errors import InputError
from .gbdt import GbdtHyperparams, GbdtModel, softmax
from .select import Chi2Selector
from .sparse import CsrMatrix
from .tfidf import TfIdfModel
from .vectorize import UnknownTally, Vocabulary, build_vocabulary, count_vectorize

__all__ = ["PipelineParams", "FittedPipeline", "Prediction", "fit_pipeline",
           "GRID_PARAM_NAMES"]

# The dotted names a tuning grid may assign, in their canonical order.
GRID_PARAM_NAMES = (
    "gbdt.learning_rate",
    "gbdt.max_depth",
    "gbdt.min_samples_leaf",
    "gbdt.n_iterations",
    "select.k",
    "tfidf.smoothing_mode",
)


@dataclass(frozen=True)
class PipelineParams:
    min_df: int = 1
    tfidf_smoothing: str = "raw"
    tfidf_norm: str = "l2"
    select_k: int = 1000
    gbdt: GbdtHyperparams = field(default_factory=GbdtHyperparams)

    def with_overrides(self, assignment: Mapping[str, object]) -> "PipelineParams":
        """Apply a tuning-grid assignment of dotted parameter names."""
        out = self
        gbdt_updates = {}
        for name, value in assignment.items():
            if name == "select.k":
                if not isinstance(value, int) or value < 1:
                    raise InputError(f"select.k must be a positive integer, got {value!r}")
                out = replace(out, select_k=value)
            elif name == "tfidf.smoothing_mode":
                if value not in ("raw", "smoothed"):
                    raise InputError(
                        f"tfidf.smoothing_mode must be 'raw' or 'smoothed', got {value!r}"
                    )
                out = replace(out, tfidf_smoothing=value)
            elif name in ("gbdt.n_iterations", "gbdt.learning_rate",
                          "gbdt.max_depth", "gbdt.min_samples_leaf"):
                gbdt_updates[name.split(".", 1)[1]] = value
            else:
                raise InputError(
                    f"unknown tunable parameter {name!r}; valid names: "
                    + ", ".join(GRID_PARAM_NAMES)
                )
        if gbdt_updates:
            # GbdtHyperparams validates ranges in its constructor
            out = replace(out, gbdt=replace(out.gbdt, **gbdt_updates))
        return out


@dataclass(frozen=True)
class Prediction:
    doc_id: str
    label: str
    probabilities: tuple  # aligned with the pipeline's label order
    zero_vector: bool
    unknown_tokens: int


@dataclass
class FittedPipeline:
    params: PipelineParams
    vocabulary: Vocabulary
    tfidf_model: TfIdfModel
    selector: Chi2Selector
    model: GbdtModel

    @property
    def labels(self) -> tuple:
        return self.model.class_labels

    def transform(self, docs: Sequence, unknown_out: Optional[UnknownTally] = None) -> CsrMatrix:
        counts = count_vectorize(docs, self.vocabulary, unknown_out=unknown_out)
        weighted = tfidf_mod.transform(counts, self.tfidf_model)
        return select_mod.apply_selection(weighted, self.selector)

    def predict(self, docs: Sequence) -> list:
        """Full per-document predictions with diagnostics.

        A document whose selected feature vector is all zero (empty after
        preprocessing, every token unknown, or every surviving weight
        zeroed) carries no evidence; its scores fall back to the model's
        initial scores, i.e. the class prior, rather than routing a
        meaningless all-zero row through the trees.
        """
        X = self.transform(docs)
        scores = self.model.predict_scores_batch(X)
        zero_rows = set(X.empty_rows())
        for i in zero_rows:
            scores[i] = self.model.initial_scores
        probs = softmax(scores)
        out = []
        for i, doc in enumerate(docs):
            in_vocab = sum(1 for t in doc.tokens if t in self.vocabulary)
            out.append(
                Prediction(
                    doc_id=doc.doc_id,
                    label=self.labels[int(np.argmax(probs[i]))],
                    probabilities=tuple(float(p) for p in probs[i]),
                    zero_vector=i in zero_rows,
                    unknown_tokens=len(doc.tokens) - in_vocab,
                )
            )
        return out

    def predict_labels(self, docs: Sequence) -> list:
        return [p.label for p in self.predict(docs)]


def fit_pipeline(
    docs: Sequence,
    y: Sequence,
    params: PipelineParams,
    class_labels: Optional[Sequence] = None,
) -> FittedPipeline:
    """Fit every stage on the same training documents, in order."""
    if len(docs) != len(y):
        raise InputError(f"got {len(y)} labels for {len(docs)} documents")
    vocabulary = build_vocabulary(docs, min_df=params.min_df)
    counts = count_vectorize(docs, vocabulary)
    tfidf_model = tfidf_mod.fit_idf(
        counts, smoothing_mode=params.tfidf_smoothing, norm=params.tfidf_norm
    )
    weighted = tfidf_mod.transform(counts, tfidf_model)
    selector = select_mod.fit_selector(weighted, y, k=params.select_k)
    selected = select_mod.apply_selection(weighted, selector)
    model = gbdt_mod.fit(selected, y, params.gbdt, class_labels=class_labels)
    return FittedPipeline(
        params=params,
        vocabulary=vocabulary,
        tfidf_model=tfidf_model,
        selector=selector,
        model=model,
    )
