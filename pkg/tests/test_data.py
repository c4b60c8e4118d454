import math

import numpy as np
import pytest

from linbin import (Attribute, DataError, Dataset, Schema, binarize_majority,
                    fit_apply_normalization, fit_imputer, fit_normalizer,
                    impute_missing, one_hot_encode, parse_arff, parse_csv,
                    to_arff)
from linbin.data import MISSING_CATEGORY

BASIC_ARFF = """\
@relation demo
@attribute height numeric
@attribute weight real
@attribute class {yes,no}
@data
1.5, 60, yes
1.8, 80, no
1.6, 70, yes
"""


class TestParseArff:
    def test_basic_counts(self):
        ds = parse_arff(BASIC_ARFF)
        assert ds.schema.n_quantitative == 2
        assert ds.schema.n_qualitative == 0
        assert ds.schema.n_classes == 2
        assert ds.n_instances == 3
        assert list(ds.y) == [0, 1, 0]

    def test_missing_marker_in_numeric_column(self):
        ds = parse_arff(BASIC_ARFF.replace("1.8, 80", "1.8, ?"))
        assert math.isnan(ds.x[1, 1])
        assert not math.isnan(ds.x[0, 1])

    def test_unknown_nominal_value_names_line(self):
        text = BASIC_ARFF.replace("1.6, 70, yes", "1.6, 70, maybe")
        with pytest.raises(DataError, match="line 8"):
            parse_arff(text)

    def test_row_arity_mismatch(self):
        with pytest.raises(DataError, match="expected 3 values"):
            parse_arff(BASIC_ARFF + "1.1, 2.2\n")

    def test_unsupported_attribute_type(self):
        with pytest.raises(DataError, match="unsupported attribute type"):
            parse_arff("@relation r\n@attribute a string\n"
                       "@attribute class {x,y}\n@data\nfoo,x\n")

    def test_nominal_attributes_and_comments(self):
        text = ("@relation r % trailing comment\n"
                "% full comment line\n"
                "@attribute color {red, green, blue}\n"
                "@attribute size numeric\n"
                "@attribute class {p, n}\n"
                "@data\n"
                "green, 2, p\n"
                "red, ?, n\n")
        ds = parse_arff(text)
        assert ds.schema.attributes[0].values == ("red", "green", "blue")
        assert ds.x[0, 0] == 1.0
        assert math.isnan(ds.x[1, 1])

    def test_class_must_be_nominal(self):
        with pytest.raises(DataError, match="must be nominal"):
            parse_arff("@relation r\n@attribute a numeric\n"
                       "@attribute b numeric\n@data\n1,2\n")

    def test_missing_class_value_rejected(self):
        with pytest.raises(DataError, match="class value"):
            parse_arff(BASIC_ARFF.replace("1.8, 80, no", "1.8, 80, ?"))


class TestRoundTrip:
    def test_serialize_reparse_equal(self, rng):
        schema = Schema((Attribute("q"), Attribute("c", ("a", "b"))),
                        ("yes", "no"), relation="rt", class_name="target")
        x = np.column_stack([rng.normal(size=20), rng.integers(2, size=20)])
        x[3, 0] = np.nan
        x[7, 1] = np.nan
        ds = Dataset(schema, x, rng.integers(2, size=20))
        assert parse_arff(to_arff(ds)) == ds

    def test_quoted_names_round_trip(self):
        schema = Schema((Attribute("the height"), Attribute("k", ("x y", "z"))),
                        ("c 1", "c2"))
        ds = Dataset(schema, [[1.25, 0.0]], [1])
        assert parse_arff(to_arff(ds)) == ds


class TestParseCsv:
    schema = Schema((Attribute("a"), Attribute("b", ("x", "y"))), ("p", "n"))

    def test_matching_header(self):
        ds = parse_csv("a,b,class\n1.0,x,p\n2.0,y,n\n", self.schema)
        assert ds.n_instances == 2
        assert ds.x[1, 1] == 1.0

    def test_empty_cell_is_missing(self):
        ds = parse_csv("a,b,class\n,x,p\n2.0,y,n\n", self.schema)
        assert math.isnan(ds.x[0, 0])

    def test_extra_cell_rejected(self):
        with pytest.raises(DataError, match="expected 3 cells"):
            parse_csv("a,b,class\n1.0,x,p,0\n", self.schema)

    def test_header_mismatch(self):
        with pytest.raises(DataError, match="header"):
            parse_csv("a,wrong,class\n1.0,x,p\n", self.schema)

    def test_unparsable_numeric_cell(self):
        with pytest.raises(DataError, match="cannot parse"):
            parse_csv("a,b,class\noops,x,p\n", self.schema)


class TestImpute:
    def test_quantitative_mean(self):
        schema = Schema((Attribute("a"),), ("p", "n"))
        ds = Dataset(schema, [[1.0], [2.0], [np.nan], [3.0]], [0, 0, 1, 1])
        out = impute_missing(ds)
        assert out.x[2, 0] == 2.0

    def test_qualitative_missing_gains_category(self):
        schema = Schema((Attribute("c", ("a", "b")),), ("p", "n"))
        ds = Dataset(schema, [[0.0], [np.nan], [1.0]], [0, 1, 0])
        out = impute_missing(ds)
        assert out.schema.attributes[0].values == ("a", "b", MISSING_CATEGORY)
        assert out.x[1, 0] == 2.0

    def test_no_missing_is_identity(self, mixed_dataset):
        assert impute_missing(mixed_dataset) == mixed_dataset

    def test_entirely_missing_quantitative_errors(self):
        schema = Schema((Attribute("a"),), ("p", "n"))
        ds = Dataset(schema, [[np.nan], [np.nan]], [0, 1])
        with pytest.raises(DataError, match="entirely missing"):
            impute_missing(ds)

    def test_no_missing_markers_remain(self, rng):
        schema = Schema((Attribute("a"), Attribute("c", ("x", "y", "z"))),
                        ("p", "n"))
        x = np.column_stack([rng.normal(size=30), rng.integers(3, size=30)])
        x[rng.random(30) < 0.3, 0] = np.nan
        x[rng.random(30) < 0.3, 1] = np.nan
        ds = Dataset(schema, x, rng.integers(2, size=30))
        assert not impute_missing(ds).has_missing

    def test_test_fold_missing_without_train_missing_uses_mode(self):
        # Train column is complete, so no extra category is added; a missing
        # test cell falls back to the training mode.
        schema = Schema((Attribute("c", ("a", "b")),), ("p", "n"))
        train = Dataset(schema, [[0.0], [0.0], [1.0]], [0, 0, 1])
        imputer = fit_imputer(train)
        test = Dataset(schema, [[np.nan]], [0])
        out = imputer.transform(test)
        assert out.x[0, 0] == 0.0
        assert out.schema == schema


class TestNormalization:
    def test_endpoints_map_to_unit_interval(self):
        schema = Schema((Attribute("a"),), ("p", "n"))
        train = Dataset(schema, [[0.0], [5.0], [10.0]], [0, 0, 1])
        out, _, _ = fit_apply_normalization(train, train)
        assert list(out.x[:, 0]) == [0.0, 0.5, 1.0]

    def test_test_values_clamped(self):
        schema = Schema((Attribute("a"),), ("p", "n"))
        train = Dataset(schema, [[0.0], [10.0]], [0, 1])
        test = Dataset(schema, [[12.0], [-3.0]], [0, 1])
        _, test_out, _ = fit_apply_normalization(train, test)
        assert list(test_out.x[:, 0]) == [1.0, 0.0]

    def test_constant_column_maps_to_zero(self):
        schema = Schema((Attribute("a"),), ("p", "n"))
        train = Dataset(schema, [[7.0], [7.0]], [0, 1])
        out, _, _ = fit_apply_normalization(train, train)
        assert list(out.x[:, 0]) == [0.0, 0.0]

    def test_requires_imputed_data(self):
        schema = Schema((Attribute("a"),), ("p", "n"))
        ds = Dataset(schema, [[np.nan], [1.0]], [0, 1])
        with pytest.raises(DataError, match="imputed"):
            fit_normalizer(ds)

    def test_all_training_cells_in_unit_interval(self, rng):
        schema = Schema((Attribute("a"), Attribute("b")), ("p", "n"))
        train = Dataset(schema, rng.normal(size=(40, 2)) * 9,
                        rng.integers(2, size=40))
        out, _, _ = fit_apply_normalization(train, train)
        assert out.x.min() >= 0.0 and out.x.max() <= 1.0


class TestBinarizeMajority:
    def _dataset(self, labels, n_classes=3):
        schema = Schema((Attribute("a"),),
                        tuple(f"c{i}" for i in range(n_classes)))
        return Dataset(schema, [[float(i)] for i in range(len(labels))],
                       labels)

    def test_majority_vs_rest_counts(self):
        ds = self._dataset([0] * 5 + [1] * 3 + [2] * 2)
        out = binarize_majority(ds)
        counts = out.class_counts()
        assert list(counts) == [5, 5]
        assert out.schema.class_labels == ("A", "B")

    def test_binary_input_is_bijective_relabeling(self):
        ds = self._dataset([0, 1, 1, 0, 1], n_classes=2)
        out = binarize_majority(ds)
        # majority is class 1 here, so the mapping flips the labels
        assert list(out.y) == [1, 0, 0, 1, 0]
        assert len(set(zip(ds.y, out.y))) == 2

    def test_tie_breaks_to_lowest_class_index(self):
        ds = self._dataset([0, 0, 1, 1, 2])
        out = binarize_majority(ds)
        assert list(out.y) == [0, 0, 1, 1, 1]

    def test_instance_count_preserved(self, mixed_dataset):
        out = binarize_majority(mixed_dataset)
        assert out.n_instances == mixed_dataset.n_instances
        assert out.class_counts().sum() == mixed_dataset.n_instances


class TestOneHot:
    def test_three_categories_expand_to_indicators(self):
        schema = Schema((Attribute("c", ("a", "b", "c")),), ("p", "n"))
        ds = Dataset(schema, [[0.0]], [0])
        out = one_hot_encode(ds)
        assert [a.name for a in out.schema.attributes] == ["c=a", "c=b", "c=c"]
        assert list(out.x[0]) == [1.0, 0.0, 0.0]

    def test_all_quantitative_unchanged(self):
        schema = Schema((Attribute("a"), Attribute("b")), ("p", "n"))
        ds = Dataset(schema, [[1.0, 2.0]], [0])
        assert one_hot_encode(ds) == ds

    def test_binary_attribute_indicators_sum_to_one(self, rng):
        schema = Schema((Attribute("c", ("x", "y")),), ("p", "n"))
        ds = Dataset(schema, rng.integers(2, size=(25, 1)).astype(float),
                     rng.integers(2, size=25))
        out = one_hot_encode(ds)
        assert out.x.shape[1] == 2
        np.testing.assert_array_equal(out.x.sum(axis=1), np.ones(25))

    def test_preserves_instances_and_labels(self, mixed_dataset):
        out = one_hot_encode(mixed_dataset)
        assert out.n_instances == mixed_dataset.n_instances
        np.testing.assert_array_equal(out.y, mixed_dataset.y)
        # each encoded group contributes exactly one 1 per row
        assert out.x[:, 2:].sum() == 2 * mixed_dataset.n_instances
