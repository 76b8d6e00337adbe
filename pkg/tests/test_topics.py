import json

import pytest

from causal_atlas import oracle, topics
from causal_atlas.errors import MalformedRecord, TransportError


def synthetic_config(seed=1, parallelism=1):
    return oracle.OracleConfig(backend="synthetic", seed=seed, parallelism=parallelism)


class TestParseNumberedList:
    def test_walkthrough_response_shape(self):
        text = "1. Gross Domestic Product (GDP) and its measurement\n2. Inflation and price indices"
        assert topics.parse_numbered_list(text) == [
            "Gross Domestic Product (GDP) and its measurement",
            "Inflation and price indices",
        ]

    def test_empty_input(self):
        assert topics.parse_numbered_list("") == []

    def test_enumerator_variants_and_bare_lines(self):
        diagnostics = topics.ParseDiagnostics()
        text = "3) Unemployment types and rates\nnoise line without enumerator"
        labels = topics.parse_numbered_list(text, diagnostics)
        assert labels == ["Unemployment types and rates", "noise line without enumerator"]
        assert diagnostics.skipped_lines == 0

    def test_dash_enumerator_and_blank_lines(self):
        text = "1 - First\n\n2. Second\n\n\n3) Third"
        assert topics.parse_numbered_list(text) == ["First", "Second", "Third"]


def test_normalize_label():
    assert topics.normalize_label("  Gross   Domestic Product. ") == "gross domestic product"
    assert topics.normalize_label("Trade") == topics.normalize_label("trade!")


class TestExpandBfs:
    def test_zero_depth_keeps_only_roots(self):
        graph = topics.expand_bfs(["A"], 0, 10, 3, synthetic_config())
        assert len(graph) == 1
        assert graph.nodes[0].depth == 0
        assert graph.nodes[0].path == ["A"]

    def test_depth_two_counts_and_paths(self):
        graph = topics.expand_bfs(["A"], 2, 1000, 3, synthetic_config())
        assert len(graph) <= 1 + 3 + 9
        for node in graph.nodes:
            assert len(node.path) == node.depth + 1
            if node.depth == 2:
                assert len(node.path) == 3
        graph.check_invariants()

    def test_bfs_order_non_decreasing_depth(self):
        graph = topics.expand_bfs(["A", "B"], 3, 60, 3, synthetic_config())
        depths = [n.depth for n in graph.nodes]
        assert depths == sorted(depths)

    def test_dedup_by_normalized_label(self):
        graph = topics.expand_bfs(["A"], 2, 1000, 4, synthetic_config())
        norms = [n.normalized_label for n in graph.nodes]
        assert len(set(norms)) == len(norms)

    def test_cap_is_hard_at_every_step(self):
        graph = topics.expand_bfs(["A", "B", "C"], 3, 17, 5, synthetic_config())
        assert len(graph) <= 17
        graph.check_invariants()

    def test_replay_determinism(self):
        g1 = topics.expand_bfs(["A", "B"], 2, 100, 3, synthetic_config(seed=9))
        g2 = topics.expand_bfs(["A", "B"], 2, 100, 3, synthetic_config(seed=9))
        assert g1.equals(g2)

    def test_parallel_expansion_matches_serial(self):
        serial = topics.expand_bfs(["A", "B"], 2, 100, 3, synthetic_config(seed=9))
        parallel = topics.expand_bfs(["A", "B"], 2, 100, 3, synthetic_config(seed=9, parallelism=4))
        assert serial.equals(parallel)

    def test_transport_failure_persists_partial_graph(self, tmp_path):
        config = oracle.OracleConfig(
            backend="remote", endpoint_url="http://127.0.0.1:9/x", retries=0, timeout=0.2
        )
        checkpoint = tmp_path / "partial.jsonl"
        with pytest.raises(TransportError):
            topics.expand_bfs(["A"], 2, 100, 3, config, checkpoint_path=checkpoint)
        partial = topics.load_topics(checkpoint)
        assert [n.label for n in partial.nodes] == ["A"]

    def test_duplicate_proposals_counted(self):
        graph = topics.TopicGraph(depth_limit=1, max_topics=10)
        graph.add_node("Root", None)
        graph.add_node("Child", 0)
        assert graph.add_node("child ", 0) is None
        assert graph.duplicate_proposals == 1


class TestPersistence:
    def test_empty_graph_round_trip(self, tmp_path):
        graph = topics.TopicGraph(depth_limit=0, max_topics=1)
        path = tmp_path / "topics.jsonl"
        topics.persist_topics(graph, path)
        loaded = topics.load_topics(path)
        assert len(loaded) == 0

    def test_three_node_round_trip(self, tmp_path):
        graph = topics.TopicGraph(depth_limit=2, max_topics=10)
        graph.add_node("Root", None)
        graph.add_node("Left", 0)
        graph.add_node("Right", 0)
        path = tmp_path / "topics.jsonl"
        topics.persist_topics(graph, path)
        loaded = topics.load_topics(path, depth_limit=2, max_topics=10)
        assert graph.equals(loaded)

    def test_corrupt_line_reports_line_number(self, tmp_path):
        graph = topics.TopicGraph(depth_limit=1, max_topics=10)
        graph.add_node("Root", None)
        graph.add_node("Child", 0)
        path = tmp_path / "topics.jsonl"
        topics.persist_topics(graph, path)
        lines = path.read_text().splitlines()
        lines[1] = '{"id": 1, "label": "broken"'
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(MalformedRecord) as err:
            topics.load_topics(path)
        assert err.value.line == 2

    def test_topic_list_is_tab_separated(self, tmp_path):
        graph = topics.expand_bfs(["A"], 1, 10, 3, synthetic_config())
        path = tmp_path / "topic_list.txt"
        topics.write_topic_list(graph, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "0\tA"
        assert all("\t" in line for line in lines)
