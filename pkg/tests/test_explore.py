import math
import random

import numpy as np
import pytest

from causal_atlas import explore, oracle, pipeline, projection, refine, slices


def make_state(seed=1, roots=("RootA", "RootB"), depth=1, max_topics=30):
    config = slices.SliceConfig(
        slice_id="t",
        domain="t",
        domain_phrase="test systems",
        roots=list(roots),
        depth_limit=depth,
        max_topics=max_topics,
        per_node_children=3,
        questions_per_topic=2,
        statements_per_topic=2,
        oracle=oracle.OracleConfig(backend="synthetic", seed=seed),
        gt=refine.GTConfig(dim=32, seed=seed),
        manifold=projection.ManifoldConfig(n_neighbors=8, seed=seed, n_epochs=60),
    )
    state, _ = pipeline.build_slice(config)
    return state


class TestNovelty:
    def test_duplicated_point_has_zero_novelty(self):
        pts = np.vstack([np.zeros((4, 2)), np.ones((3, 2))])
        assert explore.novelty(pts[0], pts, k=3) == 0.0

    def test_outlier_has_max_novelty(self):
        rng = np.random.Generator(np.random.PCG64(0))
        cluster = rng.normal(0, 0.05, (50, 2))
        outlier = np.array([[10.0, 10.0]])
        pts = np.vstack([cluster, outlier])
        scores = explore.novelty_scores(pts, k=5)
        assert int(np.argmax(scores)) == 50

    def test_uniform_grid_equal_novelty(self):
        xs, ys = np.meshgrid(np.arange(5, dtype=float), np.arange(4, dtype=float))
        pts = np.column_stack([xs.ravel(), ys.ravel()])
        scores = explore.novelty_scores(pts, k=2)
        assert float(scores.max() - scores.min()) < 1e-9


class TestUtility:
    def entry(self, depth=0, degree=0, triples=0, novelty=0.0):
        return explore.FrontierEntry(
            topic_id=0, depth=depth, degree=degree, triple_count=triples, novelty=novelty
        )

    def test_depth_term_only(self):
        w = explore.UtilityWeights(w1=1, w2=0, w3=0, w4=0, alpha=0.0)
        assert explore.utility(self.entry(depth=7), w) == pytest.approx(1.0)

    def test_degree_term_only(self):
        w = explore.UtilityWeights(w1=0, w2=1, w3=0, w4=0)
        assert explore.utility(self.entry(degree=3), w) == pytest.approx(3.0)

    def test_hand_evaluated_formula(self):
        w = explore.UtilityWeights(w1=1, w2=1, w3=1, w4=1, alpha=math.log(2))
        entry = self.entry(depth=1, degree=2, triples=3, novelty=0.5)
        assert explore.utility(entry, w) == pytest.approx(6.0)

    def test_monotone_in_each_component(self):
        w = explore.UtilityWeights(w1=1, w2=1, w3=1, w4=1, alpha=0.5)
        base = explore.utility(self.entry(1, 1, 1, 1.0), w)
        assert explore.utility(self.entry(1, 2, 1, 1.0), w) >= base
        assert explore.utility(self.entry(1, 1, 2, 1.0), w) >= base
        assert explore.utility(self.entry(1, 1, 1, 2.0), w) >= base

    def test_depth_decay_strictly_decreasing(self):
        w = explore.UtilityWeights(w1=1, w2=0, w3=0, w4=0, alpha=0.5)
        values = [explore.utility(self.entry(depth=d), w) for d in range(5)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            explore.UtilityWeights(w1=0, w2=0, w3=0, w4=0)
        with pytest.raises(ValueError):
            explore.UtilityWeights(w1=-1)


class TestSelectBatch:
    def entries(self, utilities):
        return [
            explore.FrontierEntry(topic_id=i, depth=0, degree=0, triple_count=0, novelty=u)
            for i, u in enumerate(utilities)
        ]

    def test_tie_break_prefers_low_topic_ids(self):
        w = explore.UtilityWeights(w1=1, w2=0, w3=0, w4=0, alpha=0.0)
        picked = explore.select_batch(self.entries([1.0, 1.0, 1.0]), w, 2, "top_k")
        assert picked == [0, 1]

    def test_dominant_entry_always_selected(self):
        w = explore.UtilityWeights(w1=0, w2=0, w3=0, w4=1)
        entries = self.entries([0.001, 1e9, 0.002])
        assert 1 in explore.select_batch(entries, w, 1, "top_k")
        for seed in range(10):
            assert 1 in explore.select_batch(entries, w, 1, "proportional", seed=seed)

    def test_proportional_first_pick_frequencies(self):
        w = explore.UtilityWeights(w1=0, w2=0, w3=0, w4=1)
        entries = self.entries([1.0, 2.0, 3.0])
        counts = [0, 0, 0]
        for seed in range(10000):
            first = explore.select_batch(entries, w, 1, "proportional", seed=seed)[0]
            counts[first] += 1
        freqs = [c / 10000 for c in counts]
        assert freqs[0] == pytest.approx(1 / 6, abs=0.02)
        assert freqs[1] == pytest.approx(2 / 6, abs=0.02)
        assert freqs[2] == pytest.approx(3 / 6, abs=0.02)

    def test_argmax_invariant_under_weight_scaling(self):
        rng = random.Random(0)
        for _ in range(20):
            entries = [
                explore.FrontierEntry(
                    topic_id=i,
                    depth=rng.randrange(4),
                    degree=rng.randrange(5),
                    triple_count=rng.randrange(5),
                    novelty=rng.random(),
                )
                for i in range(8)
            ]
            w = explore.UtilityWeights(w1=1, w2=0.5, w3=0.5, w4=1, alpha=0.5)
            for c in (0.1, 3.0, 42.0):
                scaled = explore.UtilityWeights(w1=c, w2=0.5 * c, w3=0.5 * c, w4=c, alpha=0.5)
                assert explore.select_batch(entries, w, 3, "top_k") == explore.select_batch(
                    entries, scaled, 3, "top_k"
                )

    def test_batch_size_capped_by_frontier(self):
        w = explore.UtilityWeights()
        assert len(explore.select_batch(self.entries([1.0, 2.0]), w, 10, "top_k")) == 2


class TestDeepen:
    def test_zero_budget_empty_delta(self):
        state = make_state()
        frontier = explore.compute_frontier(state, max_depth=3)
        batch = [frontier[0].topic_id, frontier[1].topic_id]
        budget = oracle.Budget(0)
        delta = explore.deepen(state, batch, explore.DepthPolicy(), budget)
        assert delta.calls_used == 0
        assert delta.topics_deepened == []

    def test_exact_call_accounting_mid_batch_stop(self):
        state = make_state()
        frontier = explore.compute_frontier(state, max_depth=3)
        batch = [e.topic_id for e in frontier[:2]]
        # policy needing 3 calls per topic: expand + 1 question + 1 statement
        policy = explore.DepthPolicy(
            question_calls_full=1, statement_calls_full=1, question_calls_reduced=1, statement_calls_reduced=1
        )
        budget = oracle.Budget(3)
        delta = explore.deepen(state, batch, policy, budget)
        assert budget.calls_made + budget.remaining == budget.initial
        assert delta.calls_used == 3
        assert delta.topics_deepened == [batch[0]]

    def test_depth_aware_policy_reduces_statement_calls(self):
        policy = explore.DepthPolicy(full_depth=2, statement_calls_full=2, statement_calls_reduced=1)
        assert policy.statement_calls(1) == 2
        assert policy.statement_calls(4) == 1
        assert policy.calls_per_topic(1) > policy.calls_per_topic(4)

    def test_deepen_call_log_differs_by_depth(self):
        state = make_state(depth=1)
        policy = explore.DepthPolicy(full_depth=0, statement_calls_full=2, statement_calls_reduced=1)
        shallow = next(n for n in state.topic_graph.nodes if n.depth == 0)
        deep = next(n for n in state.topic_graph.nodes if n.depth == 1)
        b1 = oracle.Budget(100)
        explore.deepen(state, [shallow.id], policy, b1)
        b2 = oracle.Budget(100)
        explore.deepen(state, [deep.id], policy, b2)
        assert b1.calls_made > b2.calls_made


class TestActiveLoop:
    def test_zero_waves_leaves_slice_unchanged(self):
        state = make_state()
        topics_before = len(state.topic_graph)
        triples_before = len(state.triples)
        log = explore.active_loop(state, explore.UtilityWeights(), 10, 0)
        assert log.waves == []
        assert len(state.topic_graph) == topics_before
        assert len(state.triples) == triples_before

    def test_budget_ceiling_across_waves(self):
        state = make_state()
        waves, per_wave = 3, 7
        log = explore.active_loop(state, explore.UtilityWeights(), per_wave, waves, batch_size=2)
        assert log.total_calls <= waves * per_wave
        for wave in log.waves:
            assert wave.calls_used <= per_wave

    def test_growth_and_rebuild(self):
        state = make_state()
        nodes_before = state.graph.node_count
        log = explore.active_loop(state, explore.UtilityWeights(), 12, 2, batch_size=3)
        assert log.total_calls > 0
        assert state.graph.node_count >= nodes_before

    def test_seed_boost_confines_selection(self):
        # two-cluster manifold: seeds on one cluster with zero novelty weight
        state = make_state(depth=1, max_topics=40)
        frontier = explore.compute_frontier(state, max_depth=3)
        assert frontier
        seeds = [state.topic_graph.node(frontier[0].topic_id).label]
        boosts = explore.seed_boosts(state, frontier, seeds, factor=1e6, radius=0.5)
        if boosts:  # the seed topic matched variables in the manifold
            w = explore.UtilityWeights(w1=1, w2=0.5, w3=0.5, w4=0)
            batch = explore.select_batch(frontier, w, 1, "top_k", boost=boosts)
            assert batch[0] in boosts


def test_match_topic_variables_token_subsequence():
    state = make_state()
    node = state.topic_graph.nodes[0]
    matched = explore.match_topic_variables(state, node.label)
    for v in matched:
        phrase_tokens = state.graph.phrases[v].split()
        topic_tokens = node.normalized_label.split()
        it = iter(phrase_tokens)
        assert all(tok in it for tok in topic_tokens)
