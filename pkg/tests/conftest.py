import numpy as np
import pytest

from linbin import Attribute, Dataset, Schema

MIXED_SCHEMA = Schema(
    (Attribute("q1"), Attribute("q2"),
     Attribute("c1", ("a", "b", "c")), Attribute("c2", ("u", "v", "w", "z"))),
    ("k0", "k1", "k2"),
)


def make_mixed_dataset(n, rng, n_classes=3, informative=True):
    """Random dataset over two quantitative and two qualitative attributes."""
    schema = MIXED_SCHEMA if n_classes == 3 else Schema(
        MIXED_SCHEMA.attributes, tuple(f"k{i}" for i in range(n_classes)))
    x = np.column_stack([
        rng.normal(size=n), rng.normal(size=n),
        rng.integers(3, size=n), rng.integers(4, size=n),
    ])
    if informative:
        logits = np.column_stack(
            [0.8 * x[:, 0] + (x[:, 2] == 0),
             -x[:, 1] + (x[:, 3] == 2)]
            + [0.3 * x[:, 0] * x[:, 1]] * (n_classes - 2))
        probs = np.exp(logits - logits.max(axis=1, keepdims=True))
        probs /= probs.sum(axis=1, keepdims=True)
        y = np.array([rng.choice(n_classes, p=p) for p in probs])
    else:
        y = rng.integers(n_classes, size=n)
    return Dataset(schema, x, y)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def mixed_dataset(rng):
    return make_mixed_dataset(60, rng)
