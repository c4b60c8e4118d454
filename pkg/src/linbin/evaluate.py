"""Repeated cross-validation harness with bias-variance and paired comparisons.

Provides the training pipeline (impute, then normalize or discretize, then
fit), stratified repeated k-fold evaluation with 0-1 loss and RMSE,
bias-variance estimation from repeated 2-fold runs, win-draw-loss aggregation
with an exact two-tailed binomial sign test, and the two synthetic problems
used to probe what per-attribute binning can and cannot linearize.

All preprocessing statistics (imputation fills, normalization bounds, cut
points) are fitted on the training fold only and reapplied to the held-out
fold.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import discretize
from .data import (Attribute, DataError, Dataset, Imputer, NormalizationModel,
                   Schema, fit_imputer, fit_normalizer)
from .objectives import (FeatureMatrix, HingeObjective, LinearModel,
                         MseObjective, NllObjective, ObjectiveConfig,
                         ParameterLayout, default_lambda)
from .solvers import SolverConfig, SolverTrace, solve

CLASSIFIERS = ("LR", "SVC", "SVC-OVA", "ANN0")
_OBJECTIVE_FOR = {"LR": "nll", "SVC": "hinge", "SVC-OVA": "hinge", "ANN0": "mse"}

#: Default instance count separating "Big" from "Little" datasets in reports.
BIG_THRESHOLD = 100_000


def size_category(n_instances: int, threshold: int = BIG_THRESHOLD) -> str:
    return "Big" if n_instances >= threshold else "Little"


@dataclass(frozen=True)
class ExperimentSpec:
    """One evaluation run: classifier, preprocessing, solver, CV shape."""

    classifier: str
    discretize: bool = False
    disc_method: str = "mdlp"
    bins: int = 3
    lam: float | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    rounds: int = 2
    folds: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"unknown classifier {self.classifier!r}; "
                             f"choose from {CLASSIFIERS}")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")

    @property
    def objective_kind(self) -> str:
        return _OBJECTIVE_FOR[self.classifier]

    def resolved_lambda(self) -> float:
        return default_lambda(self.objective_kind) if self.lam is None else self.lam


# ---------------------------------------------------------------------------
# Training pipeline
# ---------------------------------------------------------------------------

def train_model(train: Dataset, classifier: str, lam: float | None = None,
                solver_config: SolverConfig | None = None):
    """Fit one classifier on already-preprocessed data.

    Returns ``(model, traces)``; one-vs-all training yields one trace per
    class, everything else a single trace.
    """
    if classifier not in CLASSIFIERS:
        raise ValueError(f"unknown classifier {classifier!r}")
    solver_config = solver_config or SolverConfig()
    kind = _OBJECTIVE_FOR[classifier]
    lam = default_lambda(kind) if lam is None else lam
    fm = FeatureMatrix.from_dataset(train)
    labels = train.schema.class_labels
    if classifier == "LR":
        obj = NllObjective(fm, ObjectiveConfig("nll", lam=lam))
    elif classifier == "ANN0":
        obj = MseObjective(fm, ObjectiveConfig("mse", lam=lam))
    elif classifier == "SVC":
        if fm.n_classes != 2:
            raise DataError("the squared-hinge classifier needs a binary "
                            "dataset; binarize the classes first or use "
                            "SVC-OVA")
        obj = HingeObjective(fm, ObjectiveConfig("hinge", lam=lam),
                             positive_class=0)
    else:  # SVC-OVA: one +1-vs-rest scorer per class
        betas, traces = [], []
        for c in range(fm.n_classes):
            obj = HingeObjective(fm, ObjectiveConfig("hinge", lam=lam),
                                 positive_class=c)
            beta_c, tr = solve(obj, obj.layout.new_vector(), solver_config)
            betas.append(beta_c)
            traces.append(tr)
        layout = ParameterLayout(fm.n_classes, fm.n_quant, fm.qual_cards)
        model = LinearModel("hinge_ova", layout, np.concatenate(betas),
                            lam, labels)
        return model, traces
    beta, trace = solve(obj, obj.layout.new_vector(), solver_config)
    return LinearModel(kind, obj.layout, beta, lam, labels), [trace]


@dataclass
class TrainedClassifier:
    """A fitted model plus the preprocessing chain learned on its training fold."""

    imputer: Imputer
    normalizer: NormalizationModel | None
    discretizer: discretize.DiscretizationModel | None
    model: LinearModel
    traces: list[SolverTrace]

    def transform(self, data: Dataset) -> Dataset:
        out = self.imputer.transform(data)
        if self.discretizer is not None:
            return discretize.apply(self.discretizer, out)
        if self.normalizer is not None:
            return self.normalizer.transform(out)
        return out

    def predict_labels(self, data: Dataset) -> np.ndarray:
        return self.model.predict_labels(self.transform(data))

    def predict_proba(self, data: Dataset) -> np.ndarray:
        return self.model.predict_proba(self.transform(data))


def train_classifier(spec: ExperimentSpec, train: Dataset) -> TrainedClassifier:
    """Fit preprocessing on the training fold, then fit the classifier."""
    imputer = fit_imputer(train)
    prepared = imputer.transform(train)
    normalizer = None
    disc = None
    if spec.discretize:
        disc = discretize.fit_model(prepared, spec.disc_method, spec.bins)
        prepared = discretize.apply(disc, prepared)
    else:
        normalizer = fit_normalizer(prepared)
        prepared = normalizer.transform(prepared)
    model, traces = train_model(prepared, spec.classifier,
                                spec.resolved_lambda(), spec.solver)
    return TrainedClassifier(imputer, normalizer, disc, model, traces)


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

def zero_one_loss(predictions, truth) -> float:
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise ValueError("prediction/truth length mismatch")
    return float(np.mean(predictions != truth))


def rmse(prob_predictions, truth) -> float:
    """Root mean squared probability error against one-hot targets,
    averaged over instances and classes."""
    p = np.asarray(prob_predictions, dtype=np.float64)
    truth = np.asarray(truth)
    n, c = p.shape
    target = np.zeros_like(p)
    target[np.arange(n), truth] = 1.0
    return float(math.sqrt(((target - p) ** 2).sum() / (n * c)))


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------

@dataclass
class FoldResult:
    round_id: int
    fold_id: int
    zero_one: float
    rmse: float
    train_seconds: float
    test_seconds: float
    traces: list[SolverTrace]


def stratified_fold_assignment(labels, n_folds: int, rng) -> np.ndarray:
    """Deal each class round-robin (from a random start) across folds.

    Guarantees every class reaches at least two folds, so each training
    partition contains every class.  A class with fewer than two members
    cannot satisfy that, which makes stratification impossible.
    """
    labels = np.asarray(labels)
    assignment = np.empty(labels.size, dtype=np.int64)
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if idx.size < 2:
            raise DataError(f"class index {int(c)} has {idx.size} instance(s); "
                            "stratified folding is impossible")
        rng.shuffle(idx)
        start = int(rng.integers(n_folds))
        assignment[idx] = (start + np.arange(idx.size)) % n_folds
    return assignment


def cross_validate(spec: ExperimentSpec, data: Dataset) -> list[FoldResult]:
    """Run ``spec.rounds`` rounds of stratified ``spec.folds``-fold CV.

    Fold assignment for round ``r`` is seeded by (seed, r), so results are a
    pure function of the spec and the data.
    """
    if data.n_instances < spec.folds:
        raise DataError("fewer instances than folds")
    results: list[FoldResult] = []
    for r in range(spec.rounds):
        rng = np.random.default_rng([spec.seed, r])
        assignment = stratified_fold_assignment(data.y, spec.folds, rng)
        for j in range(spec.folds):
            test_idx = np.flatnonzero(assignment == j)
            train_idx = np.flatnonzero(assignment != j)
            train_ds = data.subset(train_idx)
            test_ds = data.subset(test_idx)
            t0 = time.perf_counter()
            clf = train_classifier(spec, train_ds)
            t1 = time.perf_counter()
            predictions = clf.predict_labels(test_ds)
            proba = clf.predict_proba(test_ds)
            t2 = time.perf_counter()
            results.append(FoldResult(
                round_id=r, fold_id=j,
                zero_one=zero_one_loss(predictions, test_ds.y),
                rmse=rmse(proba, test_ds.y),
                train_seconds=t1 - t0, test_seconds=t2 - t1,
                traces=clf.traces))
    return results


# ---------------------------------------------------------------------------
# Bias-variance estimation from repeated 2-fold cross-validation
# ---------------------------------------------------------------------------

@dataclass
class BVResult:
    bias: float
    variance: float
    tallies: np.ndarray


def bias_variance_from_tallies(tallies, labels) -> BVResult:
    """Decompose per-instance prediction tallies into bias and variance.

    With p-hat the empirical prediction distribution of one instance over the
    trials, its bias is ``0.5 * sum_c (1[c = y] - p_c)^2`` and its variance
    ``0.5 * (1 - sum_c p_c^2)``; both are averaged over instances.
    """
    t = np.asarray(tallies, dtype=np.float64)
    labels = np.asarray(labels)
    totals = t.sum(axis=1, keepdims=True)
    if (totals <= 0).any():
        raise ValueError("every instance needs at least one prediction tally")
    p = t / totals
    target = np.zeros_like(p)
    target[np.arange(p.shape[0]), labels] = 1.0
    bias = 0.5 * ((target - p) ** 2).sum(axis=1)
    variance = 0.5 * (1.0 - (p ** 2).sum(axis=1))
    return BVResult(float(bias.mean()), float(variance.mean()), t)


def bias_variance(spec: ExperimentSpec, data: Dataset, trials: int) -> BVResult:
    """Estimate bias/variance by ``trials`` rounds of 2-fold cross-validation.

    Each trial re-partitions the data with a fresh seed, so every instance is
    predicted exactly once per trial by a model that never saw it.
    """
    if trials < 2:
        raise ValueError("need at least two trials")
    tallies = np.zeros((data.n_instances, data.schema.n_classes))
    for trial in range(trials):
        rng = np.random.default_rng([spec.seed, trial, 1])
        assignment = stratified_fold_assignment(data.y, 2, rng)
        for j in (0, 1):
            test_idx = np.flatnonzero(assignment == j)
            clf = train_classifier(spec, data.subset(assignment != j))
            predictions = clf.predict_labels(data.subset(test_idx))
            tallies[test_idx, predictions] += 1.0
    return bias_variance_from_tallies(tallies, data.y)


# ---------------------------------------------------------------------------
# Paired comparison across datasets
# ---------------------------------------------------------------------------

def sign_test(wins: int, losses: int) -> float:
    """Exact two-tailed binomial sign test over non-draws."""
    if wins < 0 or losses < 0:
        raise ValueError("counts must be non-negative")
    n = wins + losses
    if n == 0:
        return 1.0
    k = min(wins, losses)
    tail = sum(math.comb(n, j) for j in range(k + 1))
    return min(1.0, 2.0 * tail / 2 ** n)


@dataclass(frozen=True)
class WDLRecord:
    wins: int
    draws: int
    losses: int
    p_value: float


def wdl_compare(results_a, results_b, tie_tol: float = 1e-4) -> WDLRecord:
    """Win-draw-loss tally of paired per-dataset metrics (lower is better).

    Draws (|a - b| <= tie_tol) are excluded from the sign test.
    """
    a = np.asarray(results_a, dtype=np.float64)
    b = np.asarray(results_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("result lists must be the same length")
    draws = int((np.abs(a - b) <= tie_tol).sum())
    wins = int((a < b - tie_tol).sum())
    losses = a.size - wins - draws
    return WDLRecord(wins, draws, losses, sign_test(wins, losses))


# ---------------------------------------------------------------------------
# Synthetic problems
# ---------------------------------------------------------------------------

def _two_float_schema(relation: str) -> Schema:
    return Schema((Attribute("x1"), Attribute("x2")), ("neg", "pos"),
                  relation=relation)


def synth_band2d(n: int, seed: int) -> Dataset:
    """Uniform points in the unit square; positive iff both coordinates fall
    in the middle third.  An axis-aligned AND: linearly inseparable as-is,
    separable after per-attribute binning."""
    rng = np.random.default_rng(seed)
    x = rng.random((n, 2))
    inside = (x > 1.0 / 3.0) & (x < 2.0 / 3.0)
    y = inside.all(axis=1).astype(np.int64)
    return Dataset(_two_float_schema("band2d"), x, y)


def synth_xor2d(n: int, seed: int) -> Dataset:
    """Uniform points; positive iff exactly one coordinate exceeds one half.
    No per-attribute binning makes this separable for an additive model."""
    rng = np.random.default_rng(seed)
    x = rng.random((n, 2))
    y = ((x[:, 0] > 0.5) ^ (x[:, 1] > 0.5)).astype(np.int64)
    return Dataset(_two_float_schema("xor2d"), x, y)
