import numpy as np
import pytest

from dagscope.data import (
    BinaryDag,
    CyclicGraphError,
    DataFormatError,
    Dataset,
    WeightedGraph,
    center_and_scale,
    default_names,
    read_csv,
    read_matrix_csv,
    write_csv,
    write_matrix_csv,
)


def _dataset(seed=0, n=50, d=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(2.0, 1.5, (n, d)) * np.array([1.0, 3.0, 0.5])
    return Dataset.from_samples(X)


class TestDataset:
    def test_from_samples_records_population_stats(self):
        X = np.array([[1.0, 2.0], [3.0, 6.0], [5.0, 10.0]])
        ds = Dataset.from_samples(X)
        assert np.allclose(ds.col_means, [3.0, 6.0])
        # population convention: denominator n, not n - 1
        assert np.allclose(ds.col_stds, X.std(axis=0, ddof=0))
        assert ds.n == 3 and ds.d == 2
        assert ds.names == ("X0", "X1")

    def test_default_names(self):
        assert default_names(3) == ("X0", "X1", "X2")

    def test_rejects_constant_column(self):
        X = np.ones((5, 2))
        X[:, 0] = np.arange(5)
        with pytest.raises(DataFormatError) as err:
            Dataset.from_samples(X)
        assert err.value.col == 1

    def test_rejects_nonfinite(self):
        X = np.ones((4, 2))
        X[1, 1] = np.nan
        X[:, 0] = np.arange(4)
        with pytest.raises(DataFormatError):
            Dataset.from_samples(X)

    def test_rejects_too_small(self):
        with pytest.raises(DataFormatError):
            Dataset.from_samples(np.ones((1, 3)))
        with pytest.raises(DataFormatError):
            Dataset.from_samples(np.arange(4.0).reshape(4, 1))

    def test_samples_read_only(self):
        ds = _dataset()
        with pytest.raises(ValueError):
            ds.samples[0, 0] = 99.0


class TestCenterAndScale:
    def test_center_zeroes_means(self):
        ds = center_and_scale(_dataset(), "center")
        assert np.all(np.abs(ds.samples.mean(axis=0)) < 1e-12)

    def test_center_idempotent(self):
        once = center_and_scale(_dataset(), "center")
        twice = center_and_scale(once, "center")
        assert np.all(np.abs(twice.col_means) < 1e-12)
        assert np.allclose(once.samples, twice.samples, atol=1e-12)

    def test_standardize_unit_stds(self):
        ds = center_and_scale(_dataset(), "standardize")
        assert np.allclose(ds.samples.std(axis=0), 1.0, atol=1e-10)
        assert np.all(np.abs(ds.samples.mean(axis=0)) < 1e-12)

    def test_standardize_absorbs_rescale(self):
        base = _dataset()
        rescaled = center_and_scale(base, "rescale", factors=[2.5, 0.1, 7.0])
        a = center_and_scale(base, "standardize")
        b = center_and_scale(rescaled, "standardize")
        assert np.allclose(a.samples, b.samples, atol=1e-10)

    def test_rescale_identity(self):
        base = _dataset()
        out = center_and_scale(base, "rescale", factors=[1.0, 1.0, 1.0])
        assert np.array_equal(out.samples, base.samples)

    def test_rescale_single_column_scales_std(self):
        base = _dataset()
        out = center_and_scale(base, "rescale", factors=[1.0, 1.0, 2.0])
        assert np.allclose(out.col_stds[2], 2.0 * base.col_stds[2])
        assert np.allclose(out.col_stds[:2], base.col_stds[:2])

    def test_none_is_identity(self):
        base = _dataset()
        assert center_and_scale(base, "none") is base

    def test_standardize_zero_variance_rejected(self):
        X = np.column_stack([np.arange(5.0), np.ones(5)])
        ds = Dataset.from_samples(X, allow_constant=True)
        with pytest.raises(DataFormatError) as err:
            center_and_scale(ds, "standardize")
        assert err.value.col == 1

    def test_rescale_validates_factors(self):
        base = _dataset()
        with pytest.raises(ValueError):
            center_and_scale(base, "rescale")
        with pytest.raises(ValueError):
            center_and_scale(base, "rescale", factors=[1.0, -1.0, 1.0])
        with pytest.raises(ValueError):
            center_and_scale(base, "rescale", factors=[1.0, 1.0])

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            center_and_scale(_dataset(), "whiten")


class TestCsv:
    def test_parse_with_header(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1,2\n3,4\n5,6\n")
        ds = read_csv(path)
        assert ds.n == 3 and ds.d == 2
        assert ds.names == ("a", "b")
        assert np.array_equal(ds.samples, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])

    def test_parse_without_header(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("1,2\n3,4\n5,6\n")
        ds = read_csv(path)
        assert ds.names == ("X0", "X1")
        assert ds.n == 3

    def test_round_trip_exact(self, tmp_path):
        ds = _dataset(seed=3)
        path = tmp_path / "rt.csv"
        write_csv(ds, path)
        back = read_csv(path)
        assert np.array_equal(back.samples, ds.samples)
        assert back.names == ds.names

    def test_non_numeric_cell_names_row_col(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3,x\n5,6\n")
        with pytest.raises(DataFormatError) as err:
            read_csv(path)
        assert err.value.row == 2 and err.value.col == 1

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3\n5,6\n")
        with pytest.raises(DataFormatError) as err:
            read_csv(path)
        assert err.value.row == 2

    def test_too_few_rows_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DataFormatError):
            read_csv(path)

    def test_nonfinite_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3,inf\n5,6\n")
        with pytest.raises(DataFormatError):
            read_csv(path)

    def test_matrix_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        M = rng.normal(0, 1, (4, 4))
        path = tmp_path / "m.csv"
        write_matrix_csv(M, path)
        assert np.array_equal(read_matrix_csv(path), M)


class TestWeightedGraph:
    def test_validation(self):
        with pytest.raises(ValueError):
            WeightedGraph(weights=np.ones((2, 3)), names=("a", "b"))
        with pytest.raises(ValueError):
            WeightedGraph(weights=np.ones((2, 2)), names=("a",))

    def test_support(self):
        W = np.array([[0.0, 0.5], [-0.2, 0.0]])
        g = WeightedGraph(weights=W, names=("a", "b"))
        assert np.array_equal(g.support(0.3), [[False, True], [False, False]])
        assert np.array_equal(g.support(0.1), [[False, True], [True, False]])

    def test_json_round_trip(self):
        W = np.array([[0.0, 1.25], [0.0, 0.0]])
        g = WeightedGraph(weights=W, names=("u", "v"))
        back = WeightedGraph.from_json_dict(g.to_json_dict())
        assert np.array_equal(back.weights, g.weights)
        assert back.names == g.names


class TestBinaryDag:
    def test_from_adjacency_chain(self):
        adj = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=bool)
        dag = BinaryDag.from_adjacency(adj)
        assert dag.topological_order == (0, 1, 2)
        assert dag.edge_count == 2
        assert dag.edges() == [(0, 1), (1, 2)]

    def test_from_adjacency_cycle_rejected(self):
        adj = np.array([[0, 1], [1, 0]], dtype=bool)
        with pytest.raises(CyclicGraphError) as err:
            BinaryDag.from_adjacency(adj)
        cycle = err.value.cycle
        assert cycle is not None and cycle[0] == cycle[-1]

    def test_inconsistent_order_rejected(self):
        adj = np.array([[0, 1], [0, 0]], dtype=bool)
        with pytest.raises(ValueError):
            BinaryDag(adjacency=adj, topological_order=(1, 0))

    def test_order_must_be_permutation(self):
        adj = np.zeros((2, 2), dtype=bool)
        with pytest.raises(ValueError):
            BinaryDag(adjacency=adj, topological_order=(0, 0))
