"""Multi-class gradient boosting over regression trees.

Training minimizes multinomial cross-entropy: per iteration the softmax
probabilities of the accumulated scores give residuals r_ik = 1[y_i = k]
- p_ik (the negative gradient), one regression tree per class is grown on
those residuals with exact greedy variance-reduction splits, and each
leaf takes Friedman's K-class Newton step

    gamma = ((K - 1) / K) * sum(r) / sum(|r| * (1 - |r|))

with gamma forced to 0 when the denominator drops below 1e-12. Scores
update by learning_rate * tree(x). Everything is deterministic for fixed
inputs; there is no row or column subsampling.

Trees route a sample left when its feature value is <= the threshold.
Absent sparse entries are literal zeros and route by comparing 0 against
the threshold, consistent with TF-IDF where absence means zero weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .sparse import CsrMatrix

__all__ = [
    "GbdtHyperparams",
    "RegressionTree",
    "GbdtModel",
    "softmax",
    "split_search",
    "fit",
    "multinomial_log_loss",
]


@dataclass(frozen=True)
class GbdtHyperparams:
    n_iterations: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_samples_leaf: int = 2
    # Reserved: the trainer is fully deterministic and draws nothing from
    # this seed today; it exists so stochastic extensions (row subsampling)
    # would not change the model-bundle schema.
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_iterations < 1:
            raise InputError(f"n_iterations must be >= 1, got {self.n_iterations}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise InputError(
                f"learning_rate must be in (0, 1], got {self.learning_rate}"
            )
        if self.max_depth < 1:
            raise InputError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise InputError(
                f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}"
            )


@dataclass
class TreeNode:
    """Internal node (feature, threshold, left, right) or leaf (value)."""

    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    value: Optional[float] = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"value": self.value}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "value" in d:
            return cls(value=float(d["value"]))
        return cls(
            feature=int(d["feature"]),
            threshold=float(d["threshold"]),
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )


@dataclass
class RegressionTree:
    root: TreeNode

    def predict_one(self, x: np.ndarray) -> float:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=np.float64)
        stack = [(self.root, np.arange(X.shape[0]))]
        while stack:
            node, rows = stack.pop()
            if rows.size == 0:
                continue
            if node.is_leaf:
                out[rows] = node.value
            else:
                goes_left = X[rows, node.feature] <= node.threshold
                stack.append((node.left, rows[goes_left]))
                stack.append((node.right, rows[~goes_left]))
        return out

    def to_dict(self) -> dict:
        return self.root.to_dict()

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        return cls(root=TreeNode.from_dict(d))


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax; accepts a single vector or a 2-D batch."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim == 1:
        shifted = s - s.max()
        e = np.exp(shifted)
        return e / e.sum()
    shifted = s - s.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def split_search(
    X: np.ndarray,
    residuals: np.ndarray,
    rows: np.ndarray,
    min_samples_leaf: int,
) -> Optional[tuple]:
    """Best (feature, threshold, gain) for one node, or None.

    Thresholds are midpoints between consecutive distinct sorted values of
    a feature within the node. Gain is the sum-of-squared-error reduction
    divided by the node size, so a perfect split of centered residuals
    scores exactly their variance. Ties prefer the lower feature index,
    then the lower threshold. A best gain <= 0 means no split.
    """
    n = rows.size
    if n < 2 * min_samples_leaf:
        return None
    r = residuals[rows]
    if np.ptp(r) == 0.0:  # constant residuals: SSE is already 0
        return None
    sub = X[rows]
    order = np.argsort(sub, axis=0, kind="stable")
    svals = np.take_along_axis(sub, order, axis=0)
    sres = r[order]

    prefix = np.cumsum(sres, axis=0)
    total = float(r.sum())
    i = np.arange(1, n)[:, None].astype(np.float64)  # left sizes 1..n-1
    left_sum = prefix[:-1]
    sse_red = (
        left_sum**2 / i + (total - left_sum) ** 2 / (n - i) - total**2 / n
    )

    boundary_ok = svals[1:] > svals[:-1]
    size_ok = (i >= min_samples_leaf) & (n - i >= min_samples_leaf)
    valid = boundary_ok & size_ok
    if not valid.any():
        return None
    gains = np.where(valid, sse_red / n, -np.inf)

    # argmax scans rows first within a column (lowest threshold wins) and
    # the per-column comparison below keeps the lowest feature on ties
    best_per_feature = gains.max(axis=0)
    feat = int(np.argmax(best_per_feature))
    best_gain = float(best_per_feature[feat])
    if best_gain <= 0.0:
        return None
    cut = int(np.argmax(gains[:, feat]))
    threshold = float((svals[cut, feat] + svals[cut + 1, feat]) / 2.0)
    return feat, threshold, best_gain


def _leaf_gamma(residuals_in_leaf: np.ndarray, n_classes: int) -> float:
    num = float(residuals_in_leaf.sum())
    absr = np.abs(residuals_in_leaf)
    denom = float((absr * (1.0 - absr)).sum())
    if denom < 1e-12:
        return 0.0
    return ((n_classes - 1) / n_classes) * num / denom


def _build_tree(
    X: np.ndarray,
    residuals: np.ndarray,
    hp: GbdtHyperparams,
    n_classes: int,
) -> RegressionTree:
    def grow(rows: np.ndarray, depth: int) -> TreeNode:
        if depth < hp.max_depth:
            found = split_search(X, residuals, rows, hp.min_samples_leaf)
            if found is not None:
                feat, threshold, _ = found
                goes_left = X[rows, feat] <= threshold
                left = grow(rows[goes_left], depth + 1)
                right = grow(rows[~goes_left], depth + 1)
                return TreeNode(feature=feat, threshold=threshold, left=left, right=right)
        return TreeNode(value=_leaf_gamma(residuals[rows], n_classes))

    return RegressionTree(root=grow(np.arange(X.shape[0]), 0))


@dataclass
class GbdtModel:
    class_labels: tuple
    initial_scores: np.ndarray
    trees: list = field(repr=False)  # n_iterations lists of K RegressionTree
    learning_rate: float
    n_features: int

    def _check_width(self, width: int) -> None:
        if width != self.n_features:
            raise InputError(
                f"input has {width} features but the model was trained "
                f"on {self.n_features}"
            )

    def _dense(self, X) -> np.ndarray:
        if isinstance(X, CsrMatrix):
            self._check_width(X.n_cols)
            return X.to_dense().astype(np.float64, copy=False)
        arr = np.atleast_2d(np.asarray(X, dtype=np.float64))
        self._check_width(arr.shape[1])
        return arr

    def predict_scores_batch(self, X) -> np.ndarray:
        dense = self._dense(X)
        F = np.tile(self.initial_scores, (dense.shape[0], 1))
        for per_class in self.trees:
            for k, tree in enumerate(per_class):
                F[:, k] += self.learning_rate * tree.predict_batch(dense)
        return F

    def predict_scores(self, x) -> np.ndarray:
        return self.predict_scores_batch(x)[0]

    def predict_proba_batch(self, X) -> np.ndarray:
        return softmax(self.predict_scores_batch(X))

    def predict_proba(self, x) -> np.ndarray:
        return self.predict_proba_batch(x)[0]

    def predict_batch(self, X) -> list:
        probs = self.predict_proba_batch(X)
        return [self.class_labels[int(np.argmax(p))] for p in probs]

    def predict(self, x):
        return self.predict_batch(x)[0]

    @property
    def n_iterations(self) -> int:
        return len(self.trees)


def fit(
    X,
    y: Sequence,
    hp: GbdtHyperparams,
    class_labels: Optional[Sequence] = None,
) -> GbdtModel:
    """Train the boosted ensemble. Deterministic for fixed inputs."""
    dense = X.to_dense().astype(np.float64) if isinstance(X, CsrMatrix) else (
        np.asarray(X, dtype=np.float64)
    )
    n, d = dense.shape
    if n == 0:
        raise InputError("cannot fit on an empty matrix")
    if len(y) != n:
        raise InputError(f"got {len(y)} labels for {n} matrix rows")
    present = sorted(set(y))
    if class_labels is None:
        class_labels = present
    else:
        class_labels = list(class_labels)
        missing = [c for c in present if c not in class_labels]
        if missing:
            raise InputError(f"labels {missing} not in declared class set")
    if len(present) < 2:
        raise InputError(
            f"training needs at least two classes, got only {present[0]!r}"
        )
    if n < 2 * hp.min_samples_leaf:
        raise InputError(
            f"{n} rows cannot satisfy min_samples_leaf={hp.min_samples_leaf} "
            "on both sides of any split"
        )
    index_of = {c: k for k, c in enumerate(class_labels)}
    y_idx = np.array([index_of[label] for label in y])
    n_classes = len(class_labels)

    counts = np.bincount(y_idx, minlength=n_classes).astype(np.float64)
    if (counts == 0).any():
        absent = [class_labels[k] for k in np.nonzero(counts == 0)[0]]
        raise InputError(
            f"declared classes {absent} have no training rows; "
            "the log-prior is undefined for an absent class"
        )
    initial = np.log(counts / n)
    one_hot = np.zeros((n, n_classes))
    one_hot[np.arange(n), y_idx] = 1.0

    F = np.tile(initial, (n, 1))
    all_trees = []
    for _ in range(hp.n_iterations):
        probs = softmax(F)
        residuals = one_hot - probs  # shared snapshot for this iteration
        per_class = []
        for k in range(n_classes):
            tree = _build_tree(dense, residuals[:, k], hp, n_classes)
            F[:, k] += hp.learning_rate * tree.predict_batch(dense)
            per_class.append(tree)
        all_trees.append(per_class)

    return GbdtModel(
        class_labels=tuple(class_labels),
        initial_scores=initial,
        trees=all_trees,
        learning_rate=hp.learning_rate,
        n_features=d,
    )


def multinomial_log_loss(probs: np.ndarray, y_idx: np.ndarray) -> float:
    """Mean negative log probability of the true class."""
    clipped = np.clip(probs[np.arange(len(y_idx)), y_idx], 1e-15, 1.0)
    return float(-np.mean(np.log(clipped)))
