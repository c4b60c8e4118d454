"""Cut-point learning and dataset binning.

Three fitters produce per-attribute cut points: equal-width (``ewd``),
equal-frequency (``efd``), and recursive entropy minimization with an MDL
stopping rule (``mdlp``).  A value maps to interval ``#{t_j <= v}``, so ties
with a threshold fall into the right interval.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data import Attribute, DataError, Dataset

METHODS = ("ewd", "efd", "mdlp")


@dataclass(frozen=True)
class CutPoints:
    """Strictly increasing thresholds for one quantitative attribute."""

    attribute: int
    thresholds: tuple[float, ...]
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown discretization method {self.method!r}")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")

    @property
    def n_intervals(self) -> int:
        return len(self.thresholds) + 1

    def interval_indices(self, values: np.ndarray) -> np.ndarray:
        """Interval of each value: the count of thresholds <= value."""
        return np.searchsorted(np.asarray(self.thresholds),
                               np.asarray(values), side="right")


def _clean_column(column) -> np.ndarray:
    col = np.asarray(column, dtype=np.float64)
    if col.size == 0:
        raise ValueError("column is empty")
    if np.isnan(col).any():
        raise ValueError("column contains missing values; impute first")
    return col


def fit_ewd(column, k: int, attribute: int = 0) -> CutPoints:
    """Equal-width cuts: k intervals of width (max - min) / k."""
    if k < 1:
        raise ValueError("bin count k must be >= 1")
    col = _clean_column(column)
    lo, hi = float(col.min()), float(col.max())
    width = (hi - lo) / k
    if width == 0.0:
        return CutPoints(attribute, (), "ewd")
    return CutPoints(attribute, tuple(lo + j * width for j in range(1, k)), "ewd")


def fit_efd(column, k: int, attribute: int = 0) -> CutPoints:
    """Equal-frequency cuts at runs of ceil(N/k) sorted values.

    A boundary that would split a run of identical values is shifted forward
    past the run, so identical values always share an interval.
    """
    if k < 1:
        raise ValueError("bin count k must be >= 1")
    col = np.sort(_clean_column(column))
    n = col.size
    per_bin = math.ceil(n / k)
    cuts: list[float] = []
    for b in range(1, k):
        idx = b * per_bin
        while idx < n and col[idx - 1] == col[idx]:
            idx += 1
        if idx >= n:
            break
        t = 0.5 * (col[idx - 1] + col[idx])
        if not cuts or t > cuts[-1]:
            cuts.append(float(t))
    return CutPoints(attribute, tuple(cuts), "efd")


def _entropy(counts: np.ndarray) -> float:
    """Shannon entropy in bits of a count vector."""
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _mdlp_best_cut(values: np.ndarray, label_counts_per_group: np.ndarray,
                   group_last: np.ndarray, group_first: np.ndarray):
    """Best boundary cut of one segment and whether MDL accepts it.

    ``values`` are sorted; groups are runs of identical values.  Candidate
    cuts sit between adjacent groups unless both are pure in the same class.
    Returns (threshold, left_size) or None.
    """
    seg_counts = label_counts_per_group.sum(axis=0)
    n = int(seg_counts.sum())
    ent_s = _entropy(seg_counts)
    if ent_s == 0.0 or len(label_counts_per_group) < 2:
        return None
    best_gain = -1.0
    best = None
    left = np.zeros_like(seg_counts)
    for g in range(len(label_counts_per_group) - 1):
        left = left + label_counts_per_group[g]
        cg, cn = label_counts_per_group[g], label_counts_per_group[g + 1]
        if (cg > 0).sum() == 1 and (cn > 0).sum() == 1 and \
                int(cg.argmax()) == int(cn.argmax()):
            continue
        right = seg_counts - left
        nl = int(left.sum())
        el, er = _entropy(left), _entropy(right)
        gain = ent_s - (nl / n) * el - ((n - nl) / n) * er
        if gain > best_gain + 1e-15:
            best_gain = gain
            best = (g, nl, left.copy(), right, el, er)
    if best is None:
        return None
    g, nl, left, right, el, er = best
    k = int((seg_counts > 0).sum())
    k1 = int((left > 0).sum())
    k2 = int((right > 0).sum())
    delta = math.log2(3 ** k - 2) - (k * ent_s - k1 * el - k2 * er)
    threshold = (math.log2(n - 1) + delta) / n
    if best_gain <= threshold:
        return None
    cut_value = 0.5 * (values[group_last[g]] + values[group_first[g + 1]])
    return float(cut_value), nl


def _mdlp_recurse(values: np.ndarray, labels: np.ndarray, n_classes: int,
                  cuts: list[float]) -> None:
    # Group runs of identical values and their class counts.
    change = np.flatnonzero(values[1:] != values[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [values.size]))
    group_counts = np.zeros((starts.size, n_classes), dtype=np.int64)
    for g, (a, b) in enumerate(zip(starts, ends)):
        group_counts[g] = np.bincount(labels[a:b], minlength=n_classes)
    result = _mdlp_best_cut(values, group_counts, ends - 1, starts)
    if result is None:
        return
    cut_value, left_size = result
    cuts.append(cut_value)
    _mdlp_recurse(values[:left_size], labels[:left_size], n_classes, cuts)
    _mdlp_recurse(values[left_size:], labels[left_size:], n_classes, cuts)


def fit_mdlp(column, labels, attribute: int = 0) -> CutPoints:
    """Recursive entropy-minimizing cuts with the MDL acceptance rule.

    At each segment the candidate maximizing information gain is kept iff

        gain > (log2(N-1) + log2(3^k - 2) - (k*E - k1*E1 - k2*E2)) / N

    with E the segment entropy, E1/E2 the half entropies, and k/k1/k2 the
    class counts present in each.  Accepted halves are split recursively.
    """
    col = _clean_column(column)
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != col.shape:
        raise ValueError("column and labels must have the same length")
    order = np.argsort(col, kind="stable")
    cuts: list[float] = []
    _mdlp_recurse(col[order], y[order], int(y.max()) + 1 if y.size else 1, cuts)
    return CutPoints(attribute, tuple(sorted(cuts)), "mdlp")


@dataclass(frozen=True)
class DiscretizationModel:
    """Fitted cut points for every quantitative attribute of a schema."""

    cuts: tuple[CutPoints, ...]
    attribute_names: tuple[str, ...]
    schema_signature: tuple[tuple[str, bool], ...]

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(c.n_intervals for c in self.cuts)

    def to_json(self) -> str:
        entries = [{"attribute": name, "method": c.method,
                    "thresholds": list(c.thresholds)}
                   for name, c in zip(self.attribute_names, self.cuts)]
        return json.dumps(entries, indent=2)


def _signature(dataset: Dataset) -> tuple[tuple[str, bool], ...]:
    return tuple((a.name, a.is_qualitative) for a in dataset.schema.attributes)


def fit_model(train: Dataset, method: str = "mdlp", k: int = 3) -> DiscretizationModel:
    """Fit cut points for every quantitative attribute of ``train``.

    Labels are consulted only by the ``mdlp`` method.
    """
    if method not in METHODS:
        raise ValueError(f"unknown discretization method {method!r}")
    cuts = []
    names = []
    for j in train.schema.quantitative_indices():
        col = train.x[:, j]
        if np.isnan(col).any():
            raise DataError("discretization requires imputed data")
        if method == "ewd":
            cp = fit_ewd(col, k, attribute=j)
        elif method == "efd":
            cp = fit_efd(col, k, attribute=j)
        else:
            cp = fit_mdlp(col, train.y, attribute=j)
        cuts.append(cp)
        names.append(train.schema.attributes[j].name)
    return DiscretizationModel(tuple(cuts), tuple(names), _signature(train))


def _interval_labels(thresholds: tuple[float, ...]) -> tuple[str, ...]:
    if not thresholds:
        return ("(-inf, inf)",)
    edges = [format(t, "g") for t in thresholds]
    labels = [f"(-inf, {edges[0]})"]
    labels += [f"[{a}, {b})" for a, b in zip(edges, edges[1:])]
    labels.append(f"[{edges[-1]}, inf)")
    return tuple(labels)


def apply(model: DiscretizationModel, data: Dataset) -> Dataset:
    """Bin every quantitative attribute into its fitted interval categories."""
    if _signature(data) != model.schema_signature:
        raise DataError("dataset schema does not match the discretizer's "
                        "fitting schema")
    x = np.array(data.x)
    attrs = list(data.schema.attributes)
    for cp in model.cuts:
        j = cp.attribute
        col = x[:, j]
        if np.isnan(col).any():
            raise DataError("discretization requires imputed data")
        x[:, j] = cp.interval_indices(col).astype(np.float64)
        attrs[j] = Attribute(attrs[j].name, _interval_labels(cp.thresholds))
    from dataclasses import replace
    schema = replace(data.schema, attributes=tuple(attrs))
    return Dataset(schema, x, data.y)
