"""Hyperparameter search: stratified k-fold plans, uniform sampling from a
parameter grid without replacement, and cross-validated scoring by
accuracy.

Folds are computed once and reused for every candidate, so all candidates
are scored on identical partitions. Every stage of the pipeline is refit
on the training side of each fold; no fitted statistic ever sees the
fold's validation rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import InputError
from .pipeline import GRID_PARAM_NAMES, PipelineParams, fit_pipeline
from .rng import fisher_yates, new_rng

__all__ = [
    "FoldPlan",
    "Trial",
    "TuneResult",
    "stratified_kfold",
    "sample_candidates",
    "cross_validate",
    "randomized_search",
]


@dataclass(frozen=True)
class FoldPlan:
    n_splits: int
    assignments: tuple  # fold index per document
    seed: int

    def fold_indices(self, f: int) -> tuple:
        """(train row indices, validation row indices) for fold f."""
        train = tuple(i for i, a in enumerate(self.assignments) if a != f)
        val = tuple(i for i, a in enumerate(self.assignments) if a == f)
        return train, val


@dataclass(frozen=True)
class Trial:
    assignment: dict
    fold_accuracies: tuple
    mean_accuracy: float
    std_accuracy: float


@dataclass(frozen=True)
class TuneResult:
    best_assignment: dict
    best_params: PipelineParams
    best_score: float
    trials: tuple


def stratified_kfold(y: Sequence, n_splits: int, seed: int) -> FoldPlan:
    """Per-class shuffle then round-robin fold assignment.

    Classes are visited in sorted order against one shared random stream,
    so the plan is a pure function of (y, n_splits, seed).
    """
    if n_splits < 2:
        raise InputError(f"n_splits must be >= 2, got {n_splits}")
    rng = new_rng(seed)
    assignments = [-1] * len(y)
    for label in sorted(set(y)):
        idxs = [i for i, c in enumerate(y) if c == label]
        if len(idxs) < n_splits:
            raise InputError(
                f"class {label!r} has {len(idxs)} documents, fewer than "
                f"n_splits={n_splits}"
            )
        for t, i in enumerate(fisher_yates(idxs, rng)):
            assignments[i] = t % n_splits
    return FoldPlan(n_splits=n_splits, assignments=tuple(assignments), seed=seed)


def _grid_shape(grid: Mapping[str, Sequence]) -> tuple:
    if not grid:
        raise InputError("parameter grid is empty")
    names = sorted(grid)
    for name in names:
        if name not in GRID_PARAM_NAMES:
            raise InputError(
                f"unknown grid parameter {name!r}; valid names: "
                + ", ".join(GRID_PARAM_NAMES)
            )
        if not grid[name]:
            raise InputError(f"grid parameter {name!r} has no values")
    return names, [len(grid[name]) for name in names]


def sample_candidates(
    grid: Mapping[str, Sequence], n_candidates: int, seed: int
) -> list:
    """Uniform sample of assignments from the grid, without replacement.

    Combinations are indexed in mixed radix over the sorted parameter
    names (last name varies fastest); that encoding plus the seeded
    choice makes the sample order reproducible.
    """
    names, radices = _grid_shape(grid)
    size = int(np.prod(radices))
    if n_candidates < 1:
        raise InputError(f"n_candidates must be >= 1, got {n_candidates}")
    if n_candidates > size:
        raise InputError(
            f"n_candidates={n_candidates} exceeds the grid's {size} combinations"
        )
    rng = new_rng(seed)
    picks = rng.choice(size, size=n_candidates, replace=False)
    out = []
    for flat in picks:
        g = int(flat)
        assignment = {}
        for name, radix in zip(reversed(names), reversed(radices)):
            assignment[name] = grid[name][g % radix]
            g //= radix
        out.append({name: assignment[name] for name in names})
    return out


def cross_validate(
    docs: Sequence,
    y: Sequence,
    params: PipelineParams,
    folds: FoldPlan,
    class_labels: Optional[Sequence] = None,
) -> list:
    """Per-fold validation accuracy for one parameter setting."""
    if len(docs) != len(y) or len(y) != len(folds.assignments):
        raise InputError("documents, labels, and fold plan disagree on length")
    if class_labels is None:
        class_labels = sorted(set(y))
    accuracies = []
    for f in range(folds.n_splits):
        train_idx, val_idx = folds.fold_indices(f)
        try:
            fitted = fit_pipeline(
                [docs[i] for i in train_idx],
                [y[i] for i in train_idx],
                params,
                class_labels=class_labels,
            )
        except InputError as exc:
            raise InputError(f"while fitting fold {f}: {exc}") from exc
        predictions = fitted.predict_labels([docs[i] for i in val_idx])
        correct = sum(1 for i, p in zip(val_idx, predictions) if p == y[i])
        accuracies.append(correct / len(val_idx))
    return accuracies


def randomized_search(
    docs: Sequence,
    y: Sequence,
    grid: Mapping[str, Sequence],
    n_candidates: int,
    folds: FoldPlan,
    seed: int,
    base_params: Optional[PipelineParams] = None,
) -> TuneResult:
    """Evaluate sampled candidates by mean CV accuracy; first best wins."""
    if base_params is None:
        base_params = PipelineParams()
    candidates = sample_candidates(grid, n_candidates, seed)
    class_labels = sorted(set(y))
    trials = []
    best_i = -1
    for i, assignment in enumerate(candidates):
        params = base_params.with_overrides(assignment)
        accs = cross_validate(docs, y, params, folds, class_labels=class_labels)
        trials.append(
            Trial(
                assignment=assignment,
                fold_accuracies=tuple(accs),
                mean_accuracy=float(np.mean(accs)),
                std_accuracy=float(np.std(accs)),
            )
        )
        if best_i < 0 or trials[i].mean_accuracy > trials[best_i].mean_accuracy:
            best_i = i
    best = trials[best_i]
    return TuneResult(
        best_assignment=best.assignment,
        best_params=base_params.with_overrides(best.assignment),
        best_score=best.mean_accuracy,
        trials=tuple(trials),
    )
