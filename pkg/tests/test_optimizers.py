import numpy as np
import pytest

from cgft.fusion import (
    GaConfig,
    PsoConfig,
    ScoreMatrix,
    equal_weights,
    fitness,
    optimize_weights_ga,
    optimize_weights_pso,
)

GRID_TOL = 0.005


def random_scores(rng, model_id, n, k):
    raw = rng.uniform(0.02, 1.0, size=(n, k))
    return ScoreMatrix(model_id, raw / raw.sum(axis=1, keepdims=True))


def grid_search_2d(mat_a, mat_b, labels, step=0.01):
    """Oracle: exhaustive fused-argmax accuracy over the weight grid.

    Computed directly from the raw matrices, independent of the fusion code
    under test. The all-zero corner is undefined and skipped.
    """
    A, B = mat_a.values, mat_b.values
    y = np.asarray(labels)
    grid = np.round(np.arange(0.0, 1.0 + step / 2, step), 10)
    best = 1.0
    for w1 in grid:
        for w2 in grid:
            if w1 == 0.0 and w2 == 0.0:
                continue
            preds = (w1 * A + w2 * B).argmax(axis=1)
            err = 1.0 - np.mean(preds == y)
            if err < best:
                best = err
    return best


def complementary_pair(seed, n=200, k=4):
    """Two models with disjoint systematic confusions plus noise."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, k, n)
    swaps = {"a": (0, 1), "b": (2, 3)}
    mats = {}
    for name in ("a", "b"):
        raw = rng.uniform(0.05, 0.3, size=(n, k))
        raw[np.arange(n), labels] += 0.8
        x, ysw = swaps[name]
        confused = (labels == x) | (labels == ysw)
        flip = confused & (rng.random(n) < 0.65)
        rows = np.flatnonzero(flip)
        raw[rows[:, None], [x, ysw]] = raw[rows[:, None], [ysw, x]]
        mats[name] = ScoreMatrix(name, raw / raw.sum(axis=1, keepdims=True))
    return mats["a"], mats["b"], labels


@pytest.fixture(scope="module")
def pair():
    return complementary_pair(seed=11)


class TestSeedGuarantees:
    def test_perfect_single_model_found_immediately(self):
        rng = np.random.default_rng(5)
        labels = rng.integers(0, 3, 30)
        good = np.full((30, 3), 0.05)
        good[np.arange(30), labels] = 0.9
        bad = np.full((30, 3), 0.05)
        bad[np.arange(30), (labels + 1) % 3] = 0.9
        scores = [ScoreMatrix("good", good / good.sum(1, keepdims=True)),
                  ScoreMatrix("bad", bad / bad.sum(1, keepdims=True))]
        for result in (
            optimize_weights_pso(scores, labels, PsoConfig(seed=1, iterations=3)),
            optimize_weights_ga(scores, labels, GaConfig(seed=1, generations=3)),
        ):
            assert result.fitness == 0.0

    def test_never_worse_than_equal_or_any_single_model(self):
        rng = np.random.default_rng(6)
        for trial in range(4):
            m = int(rng.integers(2, 4))
            k = int(rng.integers(2, 5))
            scores = [random_scores(rng, f"m{i}", 40, k) for i in range(m)]
            labels = rng.integers(0, k, 40)
            floor = min(
                [fitness(equal_weights(m), scores, labels)]
                + [fitness(np.eye(m)[i], scores, labels) for i in range(m)]
            )
            seed = trial + 100
            pso = optimize_weights_pso(scores, labels, PsoConfig(seed=seed, iterations=15))
            ga = optimize_weights_ga(scores, labels, GaConfig(seed=seed, generations=15))
            assert pso.fitness <= floor
            assert ga.fitness <= floor

    def test_identical_models_pin_fitness_to_equal_weights(self, pair):
        a, _, labels = pair
        scores = [a, ScoreMatrix("copy", a.values.copy())]
        target = fitness(equal_weights(2), scores, labels)
        pso = optimize_weights_pso(scores, labels, PsoConfig(seed=2, iterations=10))
        ga = optimize_weights_ga(scores, labels, GaConfig(seed=2, generations=10))
        assert pso.fitness == target
        assert ga.fitness == target


class TestGridOracle:
    def test_pso_matches_grid_search(self, pair):
        a, b, labels = pair
        oracle = grid_search_2d(a, b, labels)
        result = optimize_weights_pso([a, b], labels, PsoConfig(seed=21))
        assert abs(result.fitness - oracle) <= GRID_TOL

    def test_ga_matches_grid_search(self, pair):
        a, b, labels = pair
        oracle = grid_search_2d(a, b, labels)
        result = optimize_weights_ga([a, b], labels, GaConfig(seed=21))
        assert abs(result.fitness - oracle) <= GRID_TOL

    def test_blend_actually_beats_both_single_models(self, pair):
        # sanity on the fixture itself: fusion must have something to gain
        a, b, labels = pair
        singles = min(fitness([1, 0], [a, b], labels), fitness([0, 1], [a, b], labels))
        assert grid_search_2d(a, b, labels) < singles


class TestContracts:
    def test_swarm_too_small_for_seeding(self, pair):
        a, b, labels = pair
        scores = [a, b, ScoreMatrix("c", a.values.copy())]
        with pytest.raises(ValueError, match="at least 4"):
            optimize_weights_pso(scores, labels, PsoConfig(swarm_size=3, seed=0))
        with pytest.raises(ValueError, match="at least 4"):
            optimize_weights_ga(scores, labels, GaConfig(population_size=3, seed=0))

    def test_results_deterministic_per_seed(self, pair):
        a, b, labels = pair
        cfg = PsoConfig(seed=33, iterations=20)
        r1 = optimize_weights_pso([a, b], labels, cfg)
        r2 = optimize_weights_pso([a, b], labels, cfg)
        assert np.array_equal(r1.weights, r2.weights)
        assert r1.fitness == r2.fitness
        assert r1.history == r2.history
        gcfg = GaConfig(seed=33, generations=20)
        g1 = optimize_weights_ga([a, b], labels, gcfg)
        g2 = optimize_weights_ga([a, b], labels, gcfg)
        assert np.array_equal(g1.weights, g2.weights)
        assert g1.fitness == g2.fitness

    def test_weights_stay_in_unit_box(self, pair):
        a, b, labels = pair
        pso = optimize_weights_pso([a, b], labels, PsoConfig(seed=3, iterations=30))
        ga = optimize_weights_ga([a, b], labels, GaConfig(seed=3, generations=30))
        for w in (pso.weights, ga.weights):
            assert w.min() >= 0.0 and w.max() <= 1.0

    def test_ga_best_per_generation_never_worsens(self, pair):
        a, b, labels = pair
        result = optimize_weights_ga([a, b], labels, GaConfig(seed=8, generations=40))
        hist = np.array(result.history)
        assert (np.diff(hist) <= 0).all()

    def test_ga_without_variation_keeps_initial_best(self, pair):
        a, b, labels = pair
        cfg = GaConfig(seed=9, generations=25, crossover_prob=0.0, mutation_prob=0.0)
        result = optimize_weights_ga([a, b], labels, cfg)
        assert result.history[0] == result.history[-1] == result.fitness

    def test_pso_config_validation(self):
        with pytest.raises(ValueError):
            PsoConfig(swarm_size=1)
        with pytest.raises(ValueError):
            GaConfig(crossover_prob=1.5)
