"""Document sensitivity classification for data-loss prevention.

The package turns raw document text into an enforcement decision in
five fitted stages: preprocessing (case folding, punctuation removal,
stopword filtering, stemming), bag-of-words counting, tf-idf weighting,
chi-squared feature selection, and a multi-class gradient-boosted tree
classifier. A policy layer maps predicted labels to actions, and a
versioned bundle format persists the whole fitted pipeline.

The usual entry points:

    from docshield import load_corpus, fit_pipeline, PipelineParams
    from docshield import save_bundle, load_bundle, classify_text
    from docshield import scan_document, DEFAULT_POLICY

or the ``docshield`` command line for the train / tune / evaluate /
classify / scan workflows.
"""

from .bundle import (
    ModelBundle,
    build_metadata,
    classify_text,
    load_bundle,
    save_bundle,
)
from .config import RunConfig, load_grid, load_policy, load_run_config
from .corpus import Corpus, LabeledDocument, load_corpus, split_train_test
from .errors import BundleError, DocShieldError, InputError, InternalError
from .gbdt import GbdtHyperparams, GbdtModel
from .metrics import ConfusionMatrix, MetricReport, confusion, full_report, render_text
from .pipeline import FittedPipeline, PipelineParams, Prediction, fit_pipeline
from .policy import (
    DEFAULT_POLICY,
    Action,
    PolicyConfig,
    ScanVerdict,
    decide,
    scan_document,
)
from .preprocess import (
    StopwordList,
    TokenizedDocument,
    default_stopwords,
    load_stopwords,
    preprocess_document,
    preprocess_text,
)
from .select import Chi2Selector, fit_selector
from .sparse import CsrMatrix
from .tfidf import TfIdfModel, fit_idf
from .tune import TuneResult, randomized_search, stratified_kfold
from .vectorize import Vocabulary, build_vocabulary, count_vectorize

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "DocShieldError", "InputError", "BundleError", "InternalError",
    # corpus
    "Corpus", "LabeledDocument", "load_corpus", "split_train_test",
    # preprocessing
    "StopwordList", "TokenizedDocument", "default_stopwords",
    "load_stopwords", "preprocess_document", "preprocess_text",
    # representation
    "CsrMatrix", "Vocabulary", "build_vocabulary", "count_vectorize",
    "TfIdfModel", "fit_idf", "Chi2Selector", "fit_selector",
    # model
    "GbdtHyperparams", "GbdtModel",
    "PipelineParams", "FittedPipeline", "Prediction", "fit_pipeline",
    # tuning
    "TuneResult", "randomized_search", "stratified_kfold",
    # evaluation
    "ConfusionMatrix", "MetricReport", "confusion", "full_report",
    "render_text",
    # persistence
    "ModelBundle", "build_metadata", "save_bundle", "load_bundle",
    "classify_text",
    # policy
    "Action", "PolicyConfig", "DEFAULT_POLICY", "ScanVerdict", "decide",
    "scan_document",
    # configuration
    "RunConfig", "load_run_config", "load_grid", "load_policy",
]
