import numpy as np
import pytest

from dagscope.simulate import (
    GroundTruthSem,
    SemSpec,
    ToyPairSpec,
    chain_adjacency,
    effective_noise_covariance,
    fig1_like_spec,
    find_flip_seed,
    reconstruct,
    simulate,
    simulate_toy_pair,
)


class TestSemSpecValidation:
    def test_needs_edges_or_adjacency(self):
        with pytest.raises(ValueError):
            SemSpec(d=3, n=10, seed=0)

    def test_rejects_cyclic_adjacency(self):
        adj = np.array([[0, 1], [1, 0]])
        with pytest.raises(ValueError):
            SemSpec(d=2, n=10, seed=0, adjacency=adj)

    def test_rejects_bad_ranges(self):
        with pytest.raises(ValueError):
            SemSpec(d=1, n=10, seed=0, edges=0)
        with pytest.raises(ValueError):
            SemSpec(d=3, n=1, seed=0, edges=2)
        with pytest.raises(ValueError):
            SemSpec(d=3, n=10, seed=0, edges=2, weight_range=(2.0, 0.5))
        with pytest.raises(ValueError):
            SemSpec(d=3, n=10, seed=0, edges=2, noise="poisson")
        with pytest.raises(ValueError):
            SemSpec(d=3, n=10, seed=0, edges=2, noise_scale=(1.0, 1.0))

    def test_json_round_trip(self):
        spec = SemSpec(d=4, n=100, seed=7, edges=3, target_stds=(1.0, 2.0, 3.0, 4.0))
        back = SemSpec.from_json_dict(spec.to_json_dict())
        assert back.d == spec.d and back.seed == spec.seed
        assert back.target_stds == spec.target_stds


class TestSimulate:
    def test_basic_shape_and_centering(self):
        truth = simulate(SemSpec(d=4, n=1000, seed=0, edges=4))
        assert truth.dataset.samples.shape == (1000, 4)
        assert np.all(np.abs(truth.dataset.samples.mean(axis=0)) < 1e-12)

    def test_determinism_bitwise(self):
        spec = SemSpec(d=5, n=200, seed=123, edges=6)
        a = simulate(spec)
        b = simulate(spec)
        assert np.array_equal(a.dataset.samples, b.dataset.samples)
        assert np.array_equal(a.graph.weights, b.graph.weights)
        assert np.array_equal(a.noise, b.noise)

    def test_different_seeds_differ(self):
        a = simulate(SemSpec(d=4, n=100, seed=0, edges=4))
        b = simulate(SemSpec(d=4, n=100, seed=1, edges=4))
        assert not np.array_equal(a.dataset.samples, b.dataset.samples)

    def test_noise_streams_stable_under_extra_node(self):
        # per-column noise substreams: adding a node must not change the
        # noise drawn for existing columns
        a = simulate(SemSpec(d=4, n=300, seed=9, edges=0))
        b = simulate(SemSpec(d=5, n=300, seed=9, edges=0))
        assert np.array_equal(a.noise, b.noise[:, :4])

    def test_density_zero_pure_noise(self):
        truth = simulate(SemSpec(d=4, n=500, seed=3, edges=0))
        assert np.all(truth.graph.weights == 0.0)
        centered_noise = truth.noise - truth.noise.mean(axis=0)
        assert np.allclose(truth.dataset.samples, centered_noise, atol=1e-12)

    def test_sem_reconstruction(self):
        for seed in range(5):
            truth = simulate(SemSpec(d=5, n=400, seed=seed, edges=7))
            assert np.allclose(reconstruct(truth), truth.dataset.samples, atol=1e-10)

    def test_sem_reconstruction_with_target_stds(self):
        truth = simulate(fig1_like_spec(4))
        assert np.allclose(reconstruct(truth), truth.dataset.samples, atol=1e-10)

    def test_weight_magnitudes_in_range(self):
        truth = simulate(SemSpec(d=6, n=50, seed=5, edges=10, weight_range=(0.5, 2.0)))
        w = truth.graph.weights[truth.graph.support(0.0)]
        assert np.all((np.abs(w) >= 0.5) & (np.abs(w) <= 2.0))

    def test_explicit_adjacency_respected(self):
        adj = chain_adjacency(4)
        truth = simulate(SemSpec(d=4, n=100, seed=2, adjacency=adj, weight_range=(1.0, 1.0)))
        assert np.array_equal(truth.graph.support(0.0), adj)
        assert np.all(np.abs(truth.graph.weights[adj]) == 1.0)

    def test_chain_variance_grows(self):
        # unit weights along a chain with fresh unit noise: variance law
        # Var(X_{k+1}) = Var(X_k) + Var(noise) makes variances increase
        adj = chain_adjacency(3)
        truth = simulate(
            SemSpec(d=3, n=10000, seed=8, adjacency=adj, weight_range=(1.0, 1.0))
        )
        # force positive chain weights for the monotone check
        if np.all(truth.graph.weights[adj] > 0):
            v = truth.dataset.col_stds**2
            assert v[0] < v[1] < v[2]

    def test_target_stds_hit_exactly(self):
        truth = simulate(fig1_like_spec(0))
        assert np.allclose(truth.dataset.col_stds, (0.86, 1.56, 1.07, 0.76), atol=1e-12)

    def test_gaussian_noise_mode(self):
        truth = simulate(SemSpec(d=3, n=5000, seed=1, edges=0, noise="gaussian", noise_scale=2.0))
        assert np.allclose(truth.noise_stds, 2.0)
        assert abs(truth.dataset.col_stds[0] - 2.0) < 0.1

    def test_uniform_noise_std(self):
        truth = simulate(SemSpec(d=3, n=20000, seed=1, edges=0, noise_scale=1.0))
        assert np.allclose(truth.noise_stds, 1.0 / np.sqrt(3.0))
        assert np.allclose(truth.dataset.col_stds, 1.0 / np.sqrt(3.0), atol=0.01)

    def test_binary_matches_support(self):
        truth = simulate(SemSpec(d=5, n=100, seed=6, edges=6))
        dag = truth.binary()
        assert np.array_equal(dag.adjacency, truth.graph.support(0.0))


class TestToyPair:
    def test_exact_linear_relation(self):
        spec = ToyPairSpec(gamma=2.0, n=1000, seed=0)
        truth = simulate_toy_pair(spec)
        X = truth.dataset.samples
        # gamma a power of two: the scaled copy is exact, bit for bit
        assert np.array_equal(X[:, 1], 2.0 * X[:, 0])

    def test_std_ratio(self):
        for gamma in (0.5, 1.0, 4.0):
            truth = simulate_toy_pair(ToyPairSpec(gamma=gamma, n=500, seed=1))
            stds = truth.dataset.col_stds
            assert np.isclose(stds[1] / stds[0], gamma, rtol=1e-12)

    def test_variance_ratio_gamma4(self):
        truth = simulate_toy_pair(ToyPairSpec(gamma=4.0, n=1000, seed=2))
        v = truth.dataset.col_stds**2
        assert np.isclose(v[1] / v[0], 16.0, rtol=1e-12)

    def test_truth_direction_and_symmetry_flag(self):
        truth = simulate_toy_pair(ToyPairSpec(gamma=3.0, n=100, seed=3))
        assert truth.symmetric
        assert truth.graph.weights[0, 1] == 3.0
        assert truth.graph.weights[1, 0] == 0.0

    def test_gamma_one_columns_identical(self):
        truth = simulate_toy_pair(ToyPairSpec(gamma=1.0, n=200, seed=4))
        X = truth.dataset.samples
        assert np.array_equal(X[:, 0], X[:, 1])

    def test_validation(self):
        with pytest.raises(ValueError):
            ToyPairSpec(gamma=0.0, n=100, seed=0)
        with pytest.raises(ValueError):
            ToyPairSpec(gamma=2.0, n=1, seed=0)

    def test_determinism(self):
        spec = ToyPairSpec(gamma=2.0, n=300, seed=9)
        assert np.array_equal(
            simulate_toy_pair(spec).dataset.samples, simulate_toy_pair(spec).dataset.samples
        )


class TestEffectiveNoiseCovariance:
    def test_plain(self):
        truth = simulate(SemSpec(d=3, n=100, seed=0, edges=2))
        sigma = effective_noise_covariance(truth)
        assert np.array_equal(sigma, np.diag(truth.noise_stds**2))

    def test_with_column_factors(self):
        truth = simulate(SemSpec(d=3, n=100, seed=0, edges=2))
        f = np.array([1.0, 2.0, 0.5])
        sigma = effective_noise_covariance(truth, f)
        assert np.allclose(sigma, np.diag((truth.noise_stds * f) ** 2))


class TestFindFlipSeed:
    def test_zero_budget_not_found(self):
        assert find_flip_seed(fig1_like_spec(0), max_seeds=0) is None

    def test_empty_truth_not_found(self):
        # nothing to flip: a centered fit on pure noise never matches a
        # nonexistent structure in a way standardization can break
        spec = SemSpec(d=4, n=200, seed=0, edges=0)
        assert find_flip_seed(spec, max_seeds=2) is None
