import math

import numpy as np
import pytest

from vqaworkbench.clustering import (
    PrioritizeConfig,
    balance_score,
    default_penalty,
    is_yes_no_only,
    kmeans,
    prioritize,
    select_k,
)
from vqaworkbench.synthetic import make_embedding_table

from conftest import make_example


def brute_force_min_inertia(points, k):
    points = np.asarray(points, dtype=float)
    n = len(points)
    best = math.inf

    def recurse(i, groups):
        nonlocal best
        if i == n:
            if len(groups) == k:
                inertia = 0.0
                for g in groups:
                    pts = points[g]
                    inertia += ((pts - pts.mean(axis=0)) ** 2).sum()
                best = min(best, inertia)
            return
        if len(groups) + (n - i) < k:
            return
        for g in groups:
            g.append(i)
            recurse(i + 1, groups)
            g.pop()
        if len(groups) < k:
            groups.append([i])
            recurse(i + 1, groups)
            groups.pop()

    recurse(0, [])
    return best


class TestKmeans:
    def test_two_blobs_one_outlier(self):
        result = kmeans([[0.0], [1.0], [10.0]], 2, restarts=10, seed=0)
        assert result.inertia == pytest.approx(0.5)
        # 0 and 1 together, 10 alone
        assert result.assignments[0] == result.assignments[1] != result.assignments[2]

    def test_k_equals_n_is_zero_inertia(self):
        result = kmeans([[0.0], [3.0], [7.0], [9.0]], 4, restarts=10, seed=0)
        assert result.inertia == 0.0
        assert sorted(result.assignments) == [0, 1, 2, 3]

    def test_identical_points_k1(self):
        result = kmeans([[2.0, 2.0], [2.0, 2.0]], 1, restarts=3, seed=0)
        assert result.inertia == 0.0
        assert np.allclose(result.centroids[0], [2.0, 2.0])

    def test_argument_errors(self):
        with pytest.raises(ValueError):
            kmeans([[1.0]], 2, restarts=1, seed=0)
        with pytest.raises(ValueError):
            kmeans([], 1, restarts=1, seed=0)

    def test_trace_non_increasing(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(40, 3))
        result = kmeans(pts, 4, restarts=5, seed=1)
        trace = result.inertia_trace
        assert len(trace) >= 1
        assert all(a >= b - 1e-12 for a, b in zip(trace, trace[1:]))
        assert trace[-1] == pytest.approx(result.inertia)

    def test_centroids_are_member_means(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(15, 2))
        result = kmeans(pts, 3, restarts=8, seed=0)
        assign = np.asarray(result.assignments)
        for c in range(result.k):
            members = pts[assign == c]
            if len(members):
                assert np.allclose(result.centroids[c], members.mean(axis=0))

    def test_matches_brute_force_on_small_inputs(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            n = int(rng.integers(2, 9))
            d = int(rng.integers(1, 4))
            k = int(rng.integers(1, n + 1))
            pts = rng.normal(size=(n, d))
            result = kmeans(pts, k, restarts=math.comb(n, k), seed=0)
            assert result.inertia == pytest.approx(brute_force_min_inertia(pts, k), rel=1e-9, abs=1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(30, 2))
        a = kmeans(pts, 3, restarts=4, seed=9)
        b = kmeans(pts, 3, restarts=4, seed=9)
        assert a.assignments == b.assignments and a.inertia == b.inertia


class TestSelectK:
    def test_zero_penalty_takes_k_max(self):
        pts = [[0.0], [1.0], [4.0], [9.0], [16.0]]
        result = select_k(pts, k_max=4, penalty=0.0, restarts=100, seed=0)
        assert result.k == 4
        assert result.score == pytest.approx(result.inertia)

    def test_huge_penalty_takes_k1(self):
        pts = [[0.0], [1.0], [10.0]]
        result = select_k(pts, k_max=3, penalty=1000.0, restarts=10, seed=0)
        assert result.k == 1

    def test_worked_example(self):
        # inertias: k=1 -> sum (x - 11/3)^2 = 546/9, k=2 -> 0.5, k=3 -> 0
        pts = [[0.0], [1.0], [10.0]]
        result = select_k(pts, k_max=3, penalty=1.0, restarts=10, seed=0)
        assert result.k == 2
        assert result.score == pytest.approx(2.5)
        k1 = kmeans(pts, 1, restarts=1, seed=0)
        assert k1.inertia == pytest.approx(546 / 9)


class TestBalance:
    def test_uniform_sizes(self):
        result = kmeans([[0.0]] * 5 + [[9.0]] * 5, 2, restarts=5, seed=0)
        assert balance_score(result) == pytest.approx(1.0)

    def test_nine_one(self):
        result = kmeans([[0.0]] * 9 + [[9.0]], 2, restarts=5, seed=0)
        assert balance_score(result) == pytest.approx(0.469, abs=5e-4)

    def test_k1_is_one(self):
        result = kmeans([[0.0], [5.0]], 1, restarts=2, seed=0)
        assert balance_score(result) == 1.0


class TestYesNoOnly:
    def test_plain_yes_no(self):
        assert is_yes_no_only(make_example(answers=("yes", "no", "yes")))

    def test_maybe_escapes(self):
        assert not is_yes_no_only(make_example(answers=("yes", "maybe")))

    def test_punctuation_stripped(self):
        assert is_yes_no_only(make_example(answers=("Yes.", "no")))


class TestPrioritize:
    def _table(self):
        return make_embedding_table(n_topics=4, words_per_topic=4, seed=0)

    def test_drops_yes_no_only(self):
        table = self._table()
        examples = [
            make_example(qid="a", answers=("t0w0", "t1w0")),
            make_example(qid="b", answers=("yes", "no")),
        ]
        result = prioritize(examples, table, PrioritizeConfig(k_max=2, restarts=4, seed=0))
        assert [it.question_id for it in result.items] == ["a"]
        assert result.dropped_yes_no_ids == ("b",)

    def test_tie_falls_back_to_question_id(self):
        table = self._table()
        examples = [
            make_example(qid="z", answers=("t0w0", "t1w0")),
            make_example(qid="a", answers=("t0w0", "t1w0")),
        ]
        result = prioritize(examples, table, PrioritizeConfig(k_max=2, restarts=4, seed=0))
        assert [it.question_id for it in result.items] == ["a", "z"]
        assert result.items[0].rank_key[:2] == result.items[1].rank_key[:2]

    def test_all_oov_quarantined(self):
        table = self._table()
        examples = [make_example(qid="oov", answers=("zzz", "qqq"))]
        result = prioritize(examples, table, PrioritizeConfig(k_max=2, restarts=4, seed=0))
        assert result.items == ()
        assert result.quarantined_ids == ("oov",)

    def test_engineered_order(self):
        # tight split -> low inertia ranks first; smeared answers rank later
        table = self._table()
        examples = [
            make_example(qid="tight", answers=("t0w0", "t0w1", "t1w0", "t1w1")),
            make_example(qid="loose", answers=("t0w0", "t1w0", "t2w0", "t3w0")),
        ]
        result = prioritize(examples, table, PrioritizeConfig(k_max=3, restarts=8, seed=0))
        assert [it.question_id for it in result.items] == ["tight", "loose"]

    def test_permutation_of_survivors(self):
        table = self._table()
        examples = [make_example(qid=f"q{i}", answers=("t0w0", f"t{i % 4}w1")) for i in range(6)]
        result = prioritize(examples, table, PrioritizeConfig(k_max=2, restarts=4, seed=0))
        assert sorted(it.question_id for it in result.items) == sorted(ex.question_id for ex in examples)

    def test_parallel_matches_sequential(self):
        table = self._table()
        examples = [make_example(qid=f"q{i}", answers=(f"t{i % 4}w0", f"t{(i + 1) % 4}w1", "t2w2")) for i in range(9)]
        config = PrioritizeConfig(k_max=3, restarts=6, seed=0)
        sequential = prioritize(examples, table, config, jobs=1)
        parallel = prioritize(examples, table, config, jobs=4)
        assert [it.question_id for it in sequential.items] == [it.question_id for it in parallel.items]
        assert [it.rank_key for it in sequential.items] == [it.rank_key for it in parallel.items]


def test_default_penalty_is_msd_over_4():
    pts = [[0.0], [2.0]]
    # global centroid 1, squared distances 1 and 1 -> msd 1 -> /4
    assert default_penalty(pts) == pytest.approx(0.25)
