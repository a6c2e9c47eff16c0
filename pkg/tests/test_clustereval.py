import numpy as np
import pytest

from vqaworkbench.clustering import PrioritizeConfig
from vqaworkbench.evalharness.clustereval import (
    EvalItem,
    RepresentationTable,
    cluster_representations,
    eval_items_from_records,
    evaluate_clustering,
    load_representations,
    make_method,
    partition_random,
    partition_single_cluster,
    partition_singletons,
    save_representations,
)
from vqaworkbench.synthetic import make_planted_dataset


@pytest.fixture
def planted():
    return make_planted_dataset(12, seed=3)


@pytest.fixture
def items(planted):
    return eval_items_from_records(planted.records)


class TestBaselines:
    def test_random_k1_single_cluster(self):
        part = partition_random(list(range(6)), 1, seed=0)
        assert part == [frozenset(range(6))]

    def test_random_deterministic_per_seed(self):
        a = partition_random(list(range(8)), 3, seed=11)
        b = partition_random(list(range(8)), 3, seed=11)
        assert a == b

    def test_random_uniform_over_seeds(self):
        # uniform assignment means any two answers share a cluster with
        # probability 1/k; check every pair over 10,000 seeds within 3 sigma
        n, k, trials = 4, 4, 10000
        items = list(range(n))
        together = np.zeros((n, n))
        for seed in range(trials):
            for cluster in partition_random(items, k, seed=seed):
                for i in cluster:
                    for j in cluster:
                        if i < j:
                            together[i, j] += 1
        expected = trials / k
        sigma = (trials * (1 / k) * (1 - 1 / k)) ** 0.5
        for i in range(n):
            for j in range(i + 1, n):
                assert abs(together[i, j] - expected) <= 3 * sigma

    def test_singletons(self):
        part = partition_singletons(list(range(5)))
        assert len(part) == 5 and all(len(c) == 1 for c in part)

    def test_single_cluster(self):
        part = partition_single_cluster(list(range(5)))
        assert part == [frozenset(range(5))]

    def test_one_answer_degenerate(self):
        assert partition_singletons([0]) == partition_single_cluster([0])

    def test_random_k_out_of_range(self):
        with pytest.raises(ValueError):
            partition_random([0, 1], 3, seed=0)


class TestRepresentations:
    def test_round_trip_and_lookup(self, tmp_path):
        rows = {("q1", 0): np.array([1.0, 0.0]), ("q1", 1): np.array([0.0, 1.0])}
        manifest = tmp_path / "reps.json"
        save_representations(manifest, rows, dim=2, source="unit-test")
        table = load_representations(manifest)
        assert len(table) == 2 and table.dim == 2
        assert np.allclose(table[("q1", 1)], [0.0, 1.0])

    def test_missing_key_named(self):
        table = RepresentationTable({("q1", 0): np.zeros(2)}, dim=2)
        with pytest.raises(LookupError) as err:
            table[("q9", 4)]
        assert "q9" in str(err.value) and "4" in str(err.value)

    def test_identical_vectors_cluster_together(self):
        table = RepresentationTable(
            {("q", 0): np.array([1.0, 1.0]), ("q", 1): np.array([1.0, 1.0])}, dim=2
        )
        part = cluster_representations(table, "q", [0, 1], k=1)
        assert part == [frozenset({0, 1})]

    def test_separated_blobs_recover_gold(self):
        vectors = {}
        for i in range(3):
            vectors[("q", i)] = np.array([0.0, 0.0]) + i * 0.01
        for i in range(3, 6):
            vectors[("q", i)] = np.array([9.0, 9.0]) + (i - 3) * 0.01
        table = RepresentationTable(vectors, dim=2)
        part = cluster_representations(table, "q", list(range(6)), k=2, restarts=8)
        assert sorted(part, key=min) == [frozenset({0, 1, 2}), frozenset({3, 4, 5})]

    def test_k_above_n_rejected(self):
        table = RepresentationTable({("q", 0): np.zeros(2)}, dim=2)
        with pytest.raises(ValueError):
            cluster_representations(table, "q", [0], k=2)


class TestEvaluateClustering:
    def test_gold_vs_gold_is_perfect(self, items):
        rows = evaluate_clustering({"gold": lambda item: list(item.gold)}, items)
        assert rows[0].avg_p == rows[0].avg_r == rows[0].avg_f1 == 100.0

    def test_perfect_precision_row(self, items):
        method = make_method("perfect-precision")
        row = evaluate_clustering({"perfect-precision": method}, items)[0]
        assert row.avg_p == 100.0

    def test_perfect_recall_row(self, items):
        method = make_method("perfect-recall")
        row = evaluate_clustering({"perfect-recall": method}, items)[0]
        assert row.avg_r == 100.0

    def test_glove_initial_beats_random_on_planted(self, planted, items):
        config = PrioritizeConfig(k_max=5, restarts=8, seed=0)
        glove = make_method("glove-initial", table=planted.table, config=config)
        random = make_method("random", seed=0)
        rows = evaluate_clustering({"glove-initial": glove, "random": random}, items)
        by_name = {r.method: r for r in rows}
        assert by_name["glove-initial"].avg_f1 > by_name["random"].avg_f1

    def test_skips_items_without_gold(self, items):
        bad = EvalItem(question_id="empty", gold=(), answer_texts={})
        rows = evaluate_clustering({"pp": make_method("perfect-precision")}, list(items) + [bad])
        assert rows[0].n_skipped == 1
        assert rows[0].n_examples == len(items)

    def test_well_separated_representations_hit_100(self, items):
        # use the true blob structure as fake "model" representations
        vectors = {}
        for item in items:
            for ci, cluster in enumerate(item.gold):
                for idx in cluster:
                    vectors[(item.question_id, idx)] = np.array([ci * 10.0, 0.0])
        table = RepresentationTable(vectors, dim=2)
        method = make_method("representations", reps=table)
        row = evaluate_clustering({"reps": method}, items)[0]
        assert row.avg_f1 == pytest.approx(100.0)
