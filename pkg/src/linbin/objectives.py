"""Parameter layout and objective functions for mixed-attribute linear models.

All objectives share one block layout: an intercept, one weight per
quantitative attribute, and one weight per (qualitative attribute, category)
pair, so qualitative data enters the model natively instead of via one-hot
input expansion.  Softmax objectives (negative log-likelihood, mean-square
error) keep one block per class; the squared hinge loss uses a single
class-agnostic block over +/-1 labels.

Objectives expose ``value``, ``value_grad``, ``hessian_vec`` and a mean-scaled
``grad_batch`` (for stochastic solvers).  Values are sums over instances; the
ridge penalty ``lam/2 * ||beta||^2`` skips intercepts unless configured
otherwise.  Evaluation order is fixed, so results are deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as kernels
from .data import Dataset

OBJECTIVE_KINDS = ("nll", "hinge", "mse")


@dataclass(frozen=True)
class ObjectiveConfig:
    kind: str
    lam: float = 0.0
    regularize_intercept: bool = False

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.lam < 0:
            raise ValueError("regularization weight must be >= 0")


def default_lambda(kind: str) -> float:
    """Per-objective default weight: the hinge loss is always regularized."""
    return 1.0 if kind == "hinge" else 0.0


@dataclass(frozen=True)
class ParameterLayout:
    """Index arithmetic for flat parameter vectors.

    Slots per block: ``[intercept, quant 0..K-1, qual (k, j) pairs...]``; the
    flat vector concatenates ``n_blocks`` such blocks.
    """

    n_blocks: int
    n_quant: int
    qual_cards: tuple[int, ...]

    def __post_init__(self):
        if self.n_blocks < 1 or self.n_quant < 0:
            raise ValueError("invalid layout dimensions")
        if any(c < 1 for c in self.qual_cards):
            raise ValueError("qualitative cardinalities must be >= 1")

    @property
    def block_size(self) -> int:
        return 1 + self.n_quant + sum(self.qual_cards)

    @property
    def size(self) -> int:
        return self.n_blocks * self.block_size

    def cat_offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.qual_cards)))[:-1].astype(np.int64)

    def intercept(self, block: int) -> int:
        return block * self.block_size

    def quant(self, block: int, i: int) -> int:
        return block * self.block_size + 1 + i

    def qual(self, block: int, k: int, j: int) -> int:
        if not 0 <= j < self.qual_cards[k]:
            raise IndexError("category index out of range")
        return block * self.block_size + 1 + self.n_quant \
            + int(sum(self.qual_cards[:k])) + j

    def new_vector(self) -> np.ndarray:
        return np.zeros(self.size)

    @classmethod
    def for_softmax(cls, fm: "FeatureMatrix") -> "ParameterLayout":
        return cls(fm.n_classes, fm.n_quant, fm.qual_cards)


@dataclass(frozen=True)
class FeatureMatrix:
    """Dataset split into kernel-ready quantitative and categorical parts."""

    xq: np.ndarray
    xcat: np.ndarray
    labels: np.ndarray
    qual_cards: tuple[int, ...]
    n_classes: int

    @classmethod
    def from_dataset(cls, data: Dataset) -> "FeatureMatrix":
        if data.has_missing:
            raise ValueError("dataset still has missing cells; impute first")
        qi = data.schema.quantitative_indices()
        ci = data.schema.qualitative_indices()
        xq = np.ascontiguousarray(data.x[:, qi], dtype=np.float64)
        xcat = np.ascontiguousarray(data.x[:, ci], dtype=np.int64)
        cards = tuple(data.schema.attributes[j].cardinality for j in ci)
        return cls(xq, xcat, np.asarray(data.y, dtype=np.int64),
                   cards, data.schema.n_classes)

    @property
    def n_instances(self) -> int:
        return self.xq.shape[0]

    @property
    def n_quant(self) -> int:
        return self.xq.shape[1]

    def subset(self, idx) -> "FeatureMatrix":
        idx = np.asarray(idx)
        return replace(self,
                       xq=np.ascontiguousarray(self.xq[idx]),
                       xcat=np.ascontiguousarray(self.xcat[idx]),
                       labels=self.labels[idx])


def _as_feature_matrix(data) -> FeatureMatrix:
    return data if isinstance(data, FeatureMatrix) else FeatureMatrix.from_dataset(data)


def linear_scores(beta: np.ndarray, layout: ParameterLayout, data) -> np.ndarray:
    """Decision score of every instance under every parameter block: the
    intercept, plus weight * value per quantitative attribute, plus the one
    selected category slot per qualitative attribute."""
    fm = _as_feature_matrix(data)
    beta2d = np.ascontiguousarray(np.asarray(beta, dtype=np.float64)
                                  .reshape(layout.n_blocks, layout.block_size))
    return kernels.scores(fm.xq, fm.xcat, layout.cat_offsets(), beta2d)


def softmax_probs(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row max for overflow safety."""
    z = np.exp(scores - scores.max(axis=1, keepdims=True))
    return z / z.sum(axis=1, keepdims=True)


class _ObjectiveBase:
    """Shared featurization, layout, and penalty plumbing."""

    def __init__(self, data, config: ObjectiveConfig, layout: ParameterLayout):
        self.fm = _as_feature_matrix(data)
        self.config = config
        self.layout = layout
        self._offsets = layout.cat_offsets()
        mask = np.ones((layout.n_blocks, layout.block_size))
        if not config.regularize_intercept:
            mask[:, 0] = 0.0
        self._reg_mask = mask

    @property
    def n_instances(self) -> int:
        return self.fm.n_instances

    def _beta2d(self, beta: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(
            np.asarray(beta, dtype=np.float64)
            .reshape(self.layout.n_blocks, self.layout.block_size))

    def _scores(self, beta2d: np.ndarray, fm: FeatureMatrix | None = None) -> np.ndarray:
        fm = self.fm if fm is None else fm
        return kernels.scores(fm.xq, fm.xcat, self._offsets, beta2d)

    def _accumulate(self, coef: np.ndarray, fm: FeatureMatrix | None = None) -> np.ndarray:
        fm = self.fm if fm is None else fm
        return kernels.accumulate(fm.xq, fm.xcat, self._offsets,
                                  np.ascontiguousarray(coef),
                                  self.layout.block_size)

    def _penalty(self, beta2d: np.ndarray) -> float:
        if self.config.lam == 0.0:
            return 0.0
        return 0.5 * self.config.lam * float(((beta2d * self._reg_mask) ** 2).sum())

    def value_grad(self, beta):
        raise NotImplementedError

    def value(self, beta) -> float:
        return self.value_grad(beta)[0]


class NllObjective(_ObjectiveBase):
    """Softmax negative log-likelihood with optional ridge penalty."""

    def __init__(self, data, config: ObjectiveConfig | None = None):
        config = config or ObjectiveConfig("nll")
        if config.kind != "nll":
            raise ValueError("config kind must be 'nll'")
        fm = _as_feature_matrix(data)
        super().__init__(fm, config, ParameterLayout.for_softmax(fm))

    def _probs_lognorm(self, beta2d, fm=None):
        s = self._scores(beta2d, fm)
        m = s.max(axis=1, keepdims=True)
        z = np.exp(s - m)
        sz = z.sum(axis=1, keepdims=True)
        return s, z / sz, (m + np.log(sz))[:, 0]

    def value(self, beta) -> float:
        beta2d = self._beta2d(beta)
        s, _, lognorm = self._probs_lognorm(beta2d)
        rows = np.arange(self.fm.n_instances)
        return float((lognorm - s[rows, self.fm.labels]).sum()) + self._penalty(beta2d)

    def value_grad(self, beta):
        beta2d = self._beta2d(beta)
        s, p, lognorm = self._probs_lognorm(beta2d)
        rows = np.arange(self.fm.n_instances)
        value = float((lognorm - s[rows, self.fm.labels]).sum()) + self._penalty(beta2d)
        coef = p.copy()
        coef[rows, self.fm.labels] -= 1.0
        grad = self._accumulate(coef)
        grad += self.config.lam * beta2d * self._reg_mask
        return value, grad.ravel()

    def hessian_vec(self, beta, v):
        beta2d = self._beta2d(beta)
        v2d = self._beta2d(v)
        _, p, _ = self._probs_lognorm(beta2d)
        u = self._scores(v2d)
        coef = p * (u - (p * u).sum(axis=1, keepdims=True))
        hv = self._accumulate(coef)
        hv += self.config.lam * v2d * self._reg_mask
        return hv.ravel()

    def grad_batch(self, beta, idx):
        beta2d = self._beta2d(beta)
        sub = self.fm.subset(idx)
        _, p, _ = self._probs_lognorm(beta2d, sub)
        rows = np.arange(sub.n_instances)
        coef = p
        coef[rows, sub.labels] -= 1.0
        grad = self._accumulate(coef, sub) / sub.n_instances
        grad += (self.config.lam / self.fm.n_instances) * beta2d * self._reg_mask
        return grad.ravel()


class HingeObjective(_ObjectiveBase):
    """L2 (squared) hinge loss over +/-1 labels, single parameter block.

    value = 1/2 ||beta||^2 + lam * sum_l max(0, 1 - y_l z_l)^2 with
    z = beta . phi(x); the penalty skips the intercept unless configured.
    """

    def __init__(self, data, config: ObjectiveConfig | None = None,
                 positive_class: int = 0):
        config = config or ObjectiveConfig("hinge", lam=default_lambda("hinge"))
        if config.kind != "hinge":
            raise ValueError("config kind must be 'hinge'")
        fm = _as_feature_matrix(data)
        if not 0 <= positive_class < fm.n_classes:
            raise ValueError("positive_class out of range")
        super().__init__(fm, config,
                         ParameterLayout(1, fm.n_quant, fm.qual_cards))
        self.signs = np.where(fm.labels == positive_class, 1.0, -1.0)

    def _margins(self, beta2d, fm=None, signs=None):
        z = self._scores(beta2d, fm)[:, 0]
        signs = self.signs if signs is None else signs
        return z, 1.0 - signs * z

    def value(self, beta) -> float:
        beta2d = self._beta2d(beta)
        _, margin = self._margins(beta2d)
        active = margin > 0.0
        pen = 0.5 * float(((beta2d * self._reg_mask) ** 2).sum())
        return pen + self.config.lam * float((margin[active] ** 2).sum())

    def value_grad(self, beta):
        beta2d = self._beta2d(beta)
        z, margin = self._margins(beta2d)
        active = margin > 0.0
        pen = 0.5 * float(((beta2d * self._reg_mask) ** 2).sum())
        value = pen + self.config.lam * float((margin[active] ** 2).sum())
        coef = np.zeros((self.fm.n_instances, 1))
        coef[active, 0] = 2.0 * self.config.lam * (self.signs[active] * z[active]
                                                   - 1.0) * self.signs[active]
        grad = self._accumulate(coef)
        grad += beta2d * self._reg_mask
        return value, grad.ravel()

    def hessian_vec(self, beta, v):
        """Generalized Hessian at beta (active set frozen) applied to v."""
        beta2d = self._beta2d(beta)
        v2d = self._beta2d(v)
        _, margin = self._margins(beta2d)
        active = margin > 0.0
        u = self._scores(v2d)[:, 0]
        coef = np.zeros((self.fm.n_instances, 1))
        coef[active, 0] = 2.0 * self.config.lam * u[active]
        hv = self._accumulate(coef)
        hv += v2d * self._reg_mask
        return hv.ravel()

    def grad_batch(self, beta, idx):
        beta2d = self._beta2d(beta)
        sub = self.fm.subset(idx)
        signs = self.signs[np.asarray(idx)]
        z, margin = self._margins(beta2d, sub, signs)
        active = margin > 0.0
        coef = np.zeros((sub.n_instances, 1))
        coef[active, 0] = 2.0 * self.config.lam * (signs[active] * z[active]
                                                   - 1.0) * signs[active]
        grad = self._accumulate(coef, sub) / sub.n_instances
        grad += beta2d * self._reg_mask / self.fm.n_instances
        return grad.ravel()


class MseObjective(_ObjectiveBase):
    """Mean-square error between one-hot targets and softmax outputs.

    The softmax-output-under-squared-error model; its Hessian-vector product
    is a central finite difference of the analytic gradient.
    """

    def __init__(self, data, config: ObjectiveConfig | None = None):
        config = config or ObjectiveConfig("mse")
        if config.kind != "mse":
            raise ValueError("config kind must be 'mse'")
        fm = _as_feature_matrix(data)
        super().__init__(fm, config, ParameterLayout.for_softmax(fm))

    def _errors(self, beta2d, fm=None):
        fm = self.fm if fm is None else fm
        p = softmax_probs(self._scores(beta2d, fm))
        err = p.copy()
        err[np.arange(fm.n_instances), fm.labels] -= 1.0
        return p, err

    def value(self, beta) -> float:
        beta2d = self._beta2d(beta)
        _, err = self._errors(beta2d)
        return 0.5 * float((err ** 2).sum()) + self._penalty(beta2d)

    def value_grad(self, beta):
        beta2d = self._beta2d(beta)
        p, err = self._errors(beta2d)
        value = 0.5 * float((err ** 2).sum()) + self._penalty(beta2d)
        coef = p * (err - (err * p).sum(axis=1, keepdims=True))
        grad = self._accumulate(coef)
        grad += self.config.lam * beta2d * self._reg_mask
        return value, grad.ravel()

    def hessian_vec(self, beta, v):
        v = np.asarray(v, dtype=np.float64)
        vnorm = float(np.linalg.norm(v))
        if vnorm == 0.0:
            return np.zeros_like(v)
        beta = np.asarray(beta, dtype=np.float64)
        h = 1e-6 * (1.0 + float(np.linalg.norm(beta))) / (vnorm + 1e-300)
        _, g_plus = self.value_grad(beta + h * v)
        _, g_minus = self.value_grad(beta - h * v)
        return (g_plus - g_minus) / (2.0 * h)

    def grad_batch(self, beta, idx):
        beta2d = self._beta2d(beta)
        sub = self.fm.subset(idx)
        p, err = self._errors(beta2d, sub)
        coef = p * (err - (err * p).sum(axis=1, keepdims=True))
        grad = self._accumulate(coef, sub) / sub.n_instances
        grad += (self.config.lam / self.fm.n_instances) * beta2d * self._reg_mask
        return grad.ravel()


def make_objective(kind: str, data, lam: float | None = None,
                   positive_class: int = 0):
    """Construct an objective by kind with the per-kind default weight."""
    lam = default_lambda(kind) if lam is None else lam
    config = ObjectiveConfig(kind, lam=lam)
    if kind == "nll":
        return NllObjective(data, config)
    if kind == "mse":
        return MseObjective(data, config)
    return HingeObjective(data, config, positive_class=positive_class)


# ---------------------------------------------------------------------------
# Trained models
# ---------------------------------------------------------------------------

MODEL_KINDS = ("nll", "mse", "hinge", "hinge_ova")


@dataclass(frozen=True)
class LinearModel:
    """A trained linear classifier: layout, flat parameters, objective kind.

    ``hinge`` holds one block for a binary problem (class 0 is the +1 side);
    ``hinge_ova`` holds one block per class, each trained one-vs-rest.
    """

    kind: str
    layout: ParameterLayout
    beta: np.ndarray
    lam: float
    class_labels: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        beta = np.asarray(self.beta, dtype=np.float64)
        if beta.shape != (self.layout.size,):
            raise ValueError("parameter vector does not match layout size")
        if not np.isfinite(beta).all():
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "beta", beta)

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def decision_scores(self, data) -> np.ndarray:
        raw = linear_scores(self.beta, self.layout, data)
        if self.kind == "hinge":
            return np.column_stack([raw[:, 0], -raw[:, 0]])
        return raw

    def predict_proba(self, data) -> np.ndarray:
        scores = self.decision_scores(data)
        if self.kind in ("nll", "mse"):
            return softmax_probs(scores)
        squashed = 1.0 / (1.0 + np.exp(-2.0 * scores))
        return squashed / squashed.sum(axis=1, keepdims=True)

    def predict_labels(self, data) -> np.ndarray:
        # argmax returns the first maximum, i.e. ties go to the lowest class.
        return self.decision_scores(data).argmax(axis=1)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lambda": self.lam,
            "class_labels": list(self.class_labels),
            "layout": {
                "n_blocks": self.layout.n_blocks,
                "n_quant": self.layout.n_quant,
                "qual_cards": list(self.layout.qual_cards),
            },
            "beta": [float(b) for b in self.beta],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "LinearModel":
        layout = ParameterLayout(d["layout"]["n_blocks"],
                                 d["layout"]["n_quant"],
                                 tuple(d["layout"]["qual_cards"]))
        return cls(d["kind"], layout, np.asarray(d["beta"], dtype=np.float64),
                   float(d["lambda"]), tuple(d["class_labels"]))
