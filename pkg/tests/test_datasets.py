from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diverse_ensembles.datasets import (
    Dataset,
    Standardizer,
    kfold_split,
    load_csv,
    one_hot,
    synthetic_binary,
    synthetic_multiclass,
    train_test_folds,
)
from diverse_ensembles.errors import (
    DatasetTooSmall,
    DegenerateAlpha,
    KTooLarge,
    MissingLabelColumn,
    OutOfRangeLabel,
    ParseError,
)
from diverse_ensembles.tree_ensemble import train_tree

DATA = Path(__file__).resolve().parents[1] / "data"


class TestBundledData:
    def test_iris(self):
        ds = load_csv(DATA / "iris.csv")
        assert (ds.n, ds.n_classes, ds.q) == (150, 3, 4)
        assert np.bincount(ds.labels).tolist() == [50, 50, 50]

    def test_segment(self):
        ds = load_csv(DATA / "segment.csv")
        assert (ds.n, ds.n_classes, ds.q) == (2310, 7, 19)

    def test_breast_w(self):
        ds = load_csv(DATA / "breast-w.csv")
        # 699 records, 16 with a missing bare-nuclei value
        assert (ds.n, ds.n_classes, ds.q) == (683, 2, 9)
        assert ds.dropped_rows == 16
        assert ds.class_names == ["benign", "malignant"]

    def test_reload_identical(self):
        assert load_csv(DATA / "iris.csv") == load_csv(DATA / "iris.csv")


class TestLoadCsv:
    def write(self, tmp_path, text):
        path = tmp_path / "d.csv"
        path.write_text(text)
        return path

    def test_single_row(self, tmp_path):
        with pytest.raises(DatasetTooSmall):
            load_csv(self.write(tmp_path, "a,b,y\n1,2,x\n"))

    def test_label_by_name_and_nominal(self, tmp_path):
        path = self.write(tmp_path, "y,colour,w\nb,red,1.5\na,blue,2\nb,red,3\n")
        ds = load_csv(path, label_column="y")
        assert ds.class_names == ["b", "a"]
        assert ds.labels.tolist() == [0, 1, 0]
        assert ds.feature_kinds == ["nominal", "numeric"]
        np.testing.assert_array_equal(ds.X[:, 0], [0, 1, 0])

    def test_numeric_labels_sorted(self, tmp_path):
        ds = load_csv(self.write(tmp_path, "x,y\n1,4\n2,2\n3,4\n"))
        assert ds.class_names == ["2", "4"]
        assert ds.labels.tolist() == [1, 0, 1]

    def test_missing_rows_dropped(self, tmp_path):
        ds = load_csv(self.write(tmp_path, "x,z,y\n1,?,a\n2,3,b\n4,5,a\n,1,b\n"))
        assert ds.n == 2 and ds.dropped_rows == 2

    def test_mixed_column(self, tmp_path):
        with pytest.raises(ParseError) as info:
            load_csv(self.write(tmp_path, "x,y\n1,a\nfoo,b\n3,a\n"))
        assert info.value.row == 3

    def test_ragged_row(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(self.write(tmp_path, "x,y\n1,a\n2\n"))

    def test_missing_label_column(self, tmp_path):
        path = self.write(tmp_path, "x,y\n1,a\n2,b\n")
        with pytest.raises(MissingLabelColumn):
            load_csv(path, label_column="target")
        with pytest.raises(MissingLabelColumn):
            load_csv(path, label_column=5)

    def test_no_header(self, tmp_path):
        ds = load_csv(self.write(tmp_path, "1,2,a\n3,4,b\n"), header=False)
        assert ds.n == 2 and ds.feature_names is None


class TestOneHot:
    def test_example(self):
        np.testing.assert_array_equal(one_hot([0, 2, 1], 3), [[1, 0, 0], [0, 0, 1], [0, 1, 0]])

    @given(st.lists(st.integers(0, 4), min_size=1, max_size=50))
    def test_roundtrip_and_counts(self, labels):
        Y = one_hot(labels, 5)
        np.testing.assert_array_equal(np.argmax(Y, axis=1), labels)
        np.testing.assert_array_equal(Y.sum(axis=0), np.bincount(labels, minlength=5))

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeLabel):
            one_hot([0, 3], 3)


class TestKfold:
    def test_iris_protocol(self):
        folds = kfold_split(150, 10, seed=0)
        assert [len(f) for f in folds] == [15] * 10

    def test_leave_one_out(self):
        folds = kfold_split(7, 7, seed=1)
        assert sorted(int(f[0]) for f in folds) == list(range(7))

    @given(st.integers(2, 200), st.integers(2, 20), st.integers(0, 10**6))
    def test_partition(self, n, k, seed):
        if k > n:
            with pytest.raises(KTooLarge):
                kfold_split(n, k, seed)
            return
        folds = kfold_split(n, k, seed)
        allidx = np.concatenate(folds)
        assert sorted(allidx.tolist()) == list(range(n))
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1

    @given(st.integers(0, 10**6))
    def test_stratified(self, seed):
        labels = np.repeat([0, 1, 2], [50, 30, 20])
        folds = kfold_split(100, 10, seed, stratify_labels=labels)
        assert sorted(np.concatenate(folds).tolist()) == list(range(100))
        for f in folds:
            counts = np.bincount(labels[f], minlength=3)
            assert np.all(np.abs(counts - [5, 3, 2]) <= 1)

    def test_rotation(self):
        folds = kfold_split(20, 4, seed=3)
        pairs = list(train_test_folds(folds))
        assert len(pairs) == 4
        for (train, test), fold in zip(pairs, folds):
            np.testing.assert_array_equal(test, fold)
            assert len(train) == 15 and not set(train) & set(test)

    def test_k_too_small(self):
        with pytest.raises(ValueError):
            kfold_split(10, 1, 0)


class TestSynthetic:
    def test_positive_count(self):
        ds = synthetic_binary(100, 0.5, 2.0, seed=0)
        assert ds.labels.sum() == 50

    def test_degenerate_alpha(self):
        with pytest.raises(DegenerateAlpha):
            synthetic_binary(10, 0.0, 1.0, 0)
        with pytest.raises(DegenerateAlpha):
            synthetic_binary(10, 0.01, 1.0, 0)
        with pytest.raises(DatasetTooSmall):
            synthetic_binary(1, 0.5, 1.0, 0)

    def test_uninformative(self):
        ds = synthetic_binary(4000, 0.5, 0.0, seed=1)
        corr = np.corrcoef(ds.X[:, 0], ds.labels)[0, 1]
        assert abs(corr) < 0.05

    def test_well_separated_tree(self):
        ds = synthetic_binary(500, 0.5, 10.0, seed=2)
        tree = train_tree(ds.X, ds.labels, 2, max_depth=2)
        assert np.mean(tree.predict(ds.X) == ds.labels) >= 0.99

    def test_multiclass_shape(self):
        ds = synthetic_multiclass(100, 25, 5, 4, seed=0)
        assert ds.X.shape == (100, 25) and ds.n_classes == 4


class TestDataset:
    def test_validation(self):
        with pytest.raises(OutOfRangeLabel):
            Dataset(np.zeros((3, 1)), [0, 1, 2], 2, ["numeric"])
        with pytest.raises(DatasetTooSmall):
            Dataset(np.zeros((1, 1)), [0], 2, ["numeric"])
        with pytest.raises(ValueError):
            Dataset(np.zeros((3, 2)), [0, 1, 0], 2, ["numeric"])

    def test_subset(self):
        ds = synthetic_binary(10, 0.5, 1.0, 0)
        sub = ds.subset([0, 3, 4])
        assert sub.n == 3 and np.array_equal(sub.X, ds.X[[0, 3, 4]])


def test_standardizer(rng):
    X = rng.standard_normal((50, 3)) * [1, 5, 0] + [0, 2, 7]
    scale = Standardizer(X)
    Z = scale(X)
    np.testing.assert_allclose(Z.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(Z.std(axis=0), [1, 1, 0], atol=1e-12)
