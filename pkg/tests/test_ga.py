import numpy as np
import pytest

from anomtax.data import Dataset, SplitRatios, stratified_split
from anomtax.ga import (
    GaConfig,
    Individual,
    PreparedSplits,
    apply_mutation,
    compare,
    crossover,
    evaluate_fitness,
    init_population,
    mutate,
    prepare_splits,
    run_ga,
    select,
)
from anomtax.mlp import Topology, TrainingConfig


TOPO = Topology(2, 4, 2)
TCFG = TrainingConfig(max_epochs=40)


def tiny_splits(seed=0):
    """Small separable 2-class problem for fast fitness evaluations."""
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.normal((0.25, 0.25), 0.06, (30, 2)),
                   rng.normal((0.75, 0.75), 0.06, (30, 2))])
    ds = Dataset(x, labels=[0] * 30 + [3] * 30)
    # map labels {0,3} onto classes {0,1} via class_ids instead
    ds = Dataset(x, class_ids=[0] * 30 + [1] * 30, num_classes=2)
    train, val, test = stratified_split(ds, SplitRatios(), seed)
    return prepare_splits(train, val, test, 2)


class TestInitPopulation:
    def test_size_and_genome_length(self):
        cfg = GaConfig(population_size=15, seed=0)
        pop = init_population(cfg, Topology())
        assert len(pop) == 15
        assert all(ind.genome.shape == (74,) for ind in pop)
        assert all(0 <= ind.genome.min() and ind.genome.max() <= 1
                   for ind in pop)

    def test_deterministic(self):
        cfg = GaConfig(seed=9)
        a = init_population(cfg, TOPO)
        b = init_population(cfg, TOPO)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.genome, y.genome)

    def test_single_individual(self):
        pop = init_population(GaConfig(population_size=1, seed=0), TOPO)
        assert len(pop) == 1


class TestCrossover:
    def test_golden_example(self):
        i1, i2 = crossover([1, 2, 3, 4], [5, 6, 7, 8], k=3, alpha=0.3)
        np.testing.assert_allclose(i1, [1, 2, 5.8, 6.8], atol=1e-12)
        np.testing.assert_allclose(i2, [5, 6, 3.0 * 0.7 + 7 * 0.3,
                                        4 * 0.7 + 8 * 0.3], atol=1e-12)

    def test_identical_parents(self):
        p = np.linspace(0, 1, 10)
        i1, i2 = crossover(p, p, k=4, alpha=0.3)
        np.testing.assert_allclose(i1, p, atol=1e-15)
        np.testing.assert_allclose(i2, p, atol=1e-15)

    def test_alpha_one_is_identity(self):
        rng = np.random.default_rng(0)
        p1, p2 = rng.random(8), rng.random(8)
        i1, i2 = crossover(p1, p2, k=5, alpha=1.0)
        np.testing.assert_array_equal(i1, p1)
        np.testing.assert_array_equal(i2, p2)

    def test_cut_range_enforced(self):
        p = np.zeros(6)
        with pytest.raises(ValueError):
            crossover(p, p, k=1, alpha=0.3)
        with pytest.raises(ValueError):
            crossover(p, p, k=6, alpha=0.3)

    def test_matches_per_gene_loop(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            n = int(rng.integers(3, 20))
            p1, p2 = rng.random(n), rng.random(n)
            alpha = float(rng.random())
            for k in range(2, n):
                i1, i2 = crossover(p1, p2, k, alpha)
                for j in range(n):
                    if j + 1 < k:  # 1-based positions before the cut
                        e1, e2 = p1[j], p2[j]
                    else:
                        e1 = p1[j] * alpha + p2[j] * (1 - alpha)
                        e2 = p2[j] * alpha + p1[j] * (1 - alpha)
                    assert abs(i1[j] - e1) <= 1e-12
                    assert abs(i2[j] - e2) <= 1e-12


class TestMutation:
    def test_positive_step(self):
        out = apply_mutation(np.array([0.5]), 0, magnitude=0.2,
                             direction_draw=0.7)
        assert out[0] == pytest.approx(0.7, abs=1e-12)

    def test_negative_step_clamps(self):
        out = apply_mutation(np.array([0.1]), 0, magnitude=0.5,
                             direction_draw=0.2)
        assert out[0] == 0.0

    def test_rate_zero_never_mutates(self):
        rng = np.random.default_rng(2)
        g = rng.random(10)
        cfg = GaConfig(mutation_rate=0.0, seed=0)
        for _ in range(20):
            assert mutate(g, cfg, rng) is g

    def test_rate_one_always_mutates_one_gene(self):
        rng = np.random.default_rng(3)
        cfg = GaConfig(mutation_rate=1.0, seed=0)
        for _ in range(20):
            g = rng.random(10)
            out = mutate(g, cfg, rng)
            changed = np.flatnonzero(out != g)
            assert changed.size <= 1
            assert 0 <= out.min() and out.max() <= 1

    def test_genome_closure_under_many_operations(self):
        rng = np.random.default_rng(4)
        cfg = GaConfig(mutation_rate=0.8, seed=0)
        g1, g2 = rng.random(12), rng.random(12)
        for _ in range(200):
            k = int(rng.integers(2, 12))
            g1, g2 = crossover(g1, g2, k, cfg.crossover_alpha)
            g1 = mutate(g1, cfg, rng)
            g2 = mutate(g2, cfg, rng)
            assert 0 <= g1.min() and g1.max() <= 1
            assert 0 <= g2.min() and g2.max() <= 1


class TestSelect:
    def test_truncation_keeps_best(self):
        pop = [Individual(np.zeros(4), f) for f in (0.1, 0.5, 0.3)]
        pool = select(pop, GaConfig(population_size=3, selection_rate=0.7,
                                    seed=0), np.random.default_rng(0))
        assert len(pool) == 3
        assert pool[0].fitness == 0.1 and pool[1].fitness == 0.3
        assert pool[2].fitness == 0.5  # only candidate left to sample

    def test_rate_one_pure_truncation(self):
        rng = np.random.default_rng(5)
        pop = [Individual(np.zeros(4), float(f)) for f in rng.random(6)]
        pool = select(pop, GaConfig(population_size=6, selection_rate=1.0,
                                    seed=0), rng)
        fits = [ind.fitness for ind in pool]
        assert fits == sorted(fits)

    def test_equal_fitness_gives_permutation(self):
        pop = [Individual(np.full(4, i / 10), 0.5) for i in range(5)]
        pool = select(pop, GaConfig(population_size=5, selection_rate=0.4,
                                    seed=0), np.random.default_rng(1))
        assert sorted(id(ind) for ind in pool) == \
            sorted(id(ind) for ind in pop)


class TestEvaluateFitness:
    def test_perfect_genome_scores_zero(self):
        splits = tiny_splits()
        # train once to find weights that solve the problem, then inject
        # the trained weights as a genome evaluated without training steps
        from anomtax.mlp import init_weights, train_scg, predict_batch
        w0 = init_weights(TOPO, np.random.default_rng(0))
        model = train_scg(w0, TOPO, splits.x_train, splits.t_train,
                          cfg=TCFG)
        assert (predict_batch(model, splits.x_test) != splits.y_test).sum() \
            == 0
        ind = Individual(np.clip(model.weights, 0, 1))
        fitness = evaluate_fitness(ind, TOPO, splits, TCFG)
        assert fitness == 0.0

    def test_fitness_cached_and_pure(self):
        splits = tiny_splits()
        genome = np.random.default_rng(1).random(TOPO.genome_length)
        f1 = evaluate_fitness(Individual(genome.copy()), TOPO, splits, TCFG)
        ind = Individual(genome.copy())
        f2 = evaluate_fitness(ind, TOPO, splits, TCFG)
        f3 = evaluate_fitness(ind, TOPO, splits, TCFG)
        assert f1 == f2 == f3
        assert ind.fitness == f1

    def test_single_class_test_set(self):
        # a model trained on one class only predicts that class, so a
        # one-class test set scores a perfect 0.0
        rng = np.random.default_rng(2)
        x = rng.normal((0.5, 0.5), 0.1, (24, 2))
        from anomtax.mlp import one_hot
        one_class = PreparedSplits(
            x_train=x, t_train=one_hot(np.zeros(24, dtype=int), 2),
            x_val=np.zeros((0, 2)), t_val=np.zeros((0, 2)),
            x_test=x[:8], y_test=np.zeros(8, dtype=int),
            num_classes=2)
        genome = rng.random(TOPO.genome_length)
        fitness = evaluate_fitness(Individual(genome), TOPO, one_class, TCFG)
        assert fitness == 0.0


class TestRunGa:
    def test_goal_one_stops_first_cycle(self):
        splits = tiny_splits()
        cfg = GaConfig(cycles=5, population_size=3, goal=1.0, seed=0)
        run = run_ga(cfg, TOPO, splits, TCFG)
        assert run.stop_reason == "goal"
        assert len(run.cycles) == 1

    def test_elitism_best_non_increasing(self):
        splits = tiny_splits()
        cfg = GaConfig(cycles=6, population_size=5, goal=-1.0, seed=1)
        run = run_ga(cfg, TOPO, splits, TCFG)
        best = [c.best_fitness for c in run.cycles]
        assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
        assert run.stop_reason == "cycles"

    def test_evaluation_budget(self):
        splits = tiny_splits()
        cfg = GaConfig(cycles=4, population_size=5, goal=-1.0, seed=2)
        run = run_ga(cfg, TOPO, splits, TCFG)
        assert run.evaluations <= 4 * 5

    def test_deterministic(self):
        splits = tiny_splits()
        cfg = GaConfig(cycles=3, population_size=4, goal=-1.0, seed=3)
        a = run_ga(cfg, TOPO, splits, TCFG)
        b = run_ga(cfg, TOPO, splits, TCFG)
        assert a.cycles == b.cycles
        np.testing.assert_array_equal(a.best.genome, b.best.genome)

    def test_parallel_matches_sequential(self):
        splits = tiny_splits()
        seq = run_ga(GaConfig(cycles=3, population_size=4, goal=-1.0,
                              seed=4, workers=1), TOPO, splits, TCFG)
        par = run_ga(GaConfig(cycles=3, population_size=4, goal=-1.0,
                              seed=4, workers=3), TOPO, splits, TCFG)
        assert seq.cycles == par.cycles
        np.testing.assert_array_equal(seq.best.genome, par.best.genome)
        np.testing.assert_array_equal(seq.best_model.weights,
                                      par.best_model.weights)


class TestCompare:
    def test_report_consistency_and_determinism(self):
        splits = tiny_splits()
        cfg = GaConfig(cycles=3, population_size=4, goal=-1.0, seed=5)
        a = compare(splits, TOPO, TCFG, cfg)
        b = compare(splits, TOPO, TCFG, cfg)
        assert a.nn_error == b.nn_error
        assert a.ga_error == b.ga_error
        np.testing.assert_array_equal(a.nn_confusion.counts,
                                      b.nn_confusion.counts)
        # the reported GA error is the best individual's cached fitness
        assert a.ga_error == a.ga_run.best.fitness
