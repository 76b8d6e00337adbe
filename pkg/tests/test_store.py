import json

import numpy as np
import pytest

from causal_atlas import oracle, pipeline, projection, refine, slices, store
from causal_atlas.errors import HashMismatch, IncompleteSlice, UnknownFormatVersion


def make_config(slice_id="s1", seed=1, roots=("RootA", "RootB")):
    return slices.SliceConfig(
        slice_id=slice_id,
        domain=slice_id,
        domain_phrase="test systems",
        roots=list(roots),
        depth_limit=1,
        max_topics=20,
        per_node_children=3,
        questions_per_topic=2,
        statements_per_topic=2,
        oracle=oracle.OracleConfig(backend="synthetic", seed=seed),
        gt=refine.GTConfig(dim=32, seed=seed),
        manifold=projection.ManifoldConfig(n_neighbors=6, seed=seed, n_epochs=50),
    )


@pytest.fixture()
def built(tmp_path):
    config = make_config()
    state, profile, manifest = pipeline.build_and_store_slice(config, tmp_path)
    return tmp_path / config.slice_id, state, profile, manifest


class TestWriteLoad:
    def test_round_trip_field_identity(self, built):
        slice_dir, state, _, manifest = built
        loaded = store.load_slice(slice_dir)
        assert loaded.topic_graph.equals(state.topic_graph)
        assert loaded.question_records == state.question_records
        assert loaded.statement_records == state.statement_records
        assert loaded.triples == state.triples
        assert loaded.graph.phrases == state.graph.phrases
        assert np.array_equal(loaded.embeddings, state.embeddings)
        assert np.array_equal(loaded.embeddings_init, state.embeddings_init)
        assert np.allclose(loaded.coords, state.coords)
        assert loaded.revision == manifest.revision == 1

    def test_interrupted_write_reports_incomplete(self, built):
        slice_dir, _, _, _ = built
        (slice_dir / store.MANIFEST_NAME).unlink()
        with pytest.raises(IncompleteSlice):
            store.load_slice(slice_dir)

    def test_rewrite_bumps_revision(self, built):
        slice_dir, state, _, manifest = built
        again = store.write_slice(slice_dir, state)
        assert again.revision == manifest.revision + 1

    def test_hash_mismatch_detected(self, built):
        slice_dir, state, _, _ = built
        target = slice_dir / store.artifact_names(state.slice_id)["triples"]
        target.write_text(target.read_text() + "tampered\n")
        with pytest.raises(HashMismatch):
            store.load_slice(slice_dir)

    def test_unknown_format_version(self, built):
        slice_dir, _, _, _ = built
        manifest_path = slice_dir / store.MANIFEST_NAME
        data = json.loads(manifest_path.read_text())
        data["format_version"] = 999
        manifest_path.write_text(json.dumps(data))
        with pytest.raises(UnknownFormatVersion):
            store.load_slice(slice_dir)

    def test_timing_table_emitted(self, built):
        slice_dir, state, profile, manifest = built
        table = (slice_dir / store.timing_filename(state.slice_id)).read_text()
        assert "1: Topic graph" in table
        assert "5.1: Write slice" in table
        assert "Total" in table
        assert manifest.timing is not None
        assert abs(sum(profile.as_dict().values()) - profile.total) <= 0.05 * max(profile.total, 1e-9)

    def test_empty_slice_round_trip(self, tmp_path):
        config = make_config(slice_id="empty")
        state = slices.SliceState(
            config=config,
            topic_graph=__import__("causal_atlas.topics", fromlist=["TopicGraph"]).TopicGraph(1, 1),
        )
        store.write_slice(tmp_path / "empty", state)
        loaded = store.load_slice(tmp_path / "empty")
        assert len(loaded.topic_graph) == 0
        assert loaded.triples == []


class TestReplayDeterminism:
    def test_same_seed_byte_identical_artifacts(self, tmp_path):
        config_a = make_config(slice_id="rep")
        state_a, _, _ = pipeline.build_and_store_slice(config_a, tmp_path / "a")
        config_b = make_config(slice_id="rep")
        state_b, _, _ = pipeline.build_and_store_slice(config_b, tmp_path / "b")
        names = store.artifact_names("rep")
        for name in names.values():
            pa = tmp_path / "a" / "rep" / name
            pb = tmp_path / "b" / "rep" / name
            assert pa.exists() == pb.exists()
            if pa.exists():
                assert pa.read_bytes() == pb.read_bytes(), name


class TestUnify:
    def test_single_slice_identity_modulo_provenance(self, tmp_path):
        config = make_config(slice_id="u1")
        state, _ = pipeline.build_slice(config)
        union = store.unify_slices([state], slice_id="u")
        assert union.graph.phrases == state.graph.phrases
        assert union.graph.edge_count == state.graph.edge_count
        edge_keys = lambda g: sorted(
            (g.phrases[e.head], e.relation.value, g.phrases[e.tail], e.domain, e.multiplicity)
            for e in g.edges
        )
        assert edge_keys(union.graph) == edge_keys(state.graph)

    def test_disjoint_slices_sum_nodes(self):
        a, _ = pipeline.build_slice(make_config(slice_id="a", roots=("Alpha",)))
        b, _ = pipeline.build_slice(make_config(slice_id="b", roots=("Omega",)))
        shared = set(a.graph.ids) & set(b.graph.ids)
        union = store.unify_slices([a, b])
        assert union.graph.node_count == a.graph.node_count + b.graph.node_count - len(shared)

    def test_shared_phrase_merges_node_with_edges_from_both(self):
        from causal_atlas.corpus import CausalRecord

        a, _ = pipeline.build_slice(make_config(slice_id="a", roots=("Alpha",)))
        b, _ = pipeline.build_slice(make_config(slice_id="b", roots=("Beta",)))
        a.statement_records.append(
            CausalRecord(topic="Alpha", path=["Alpha"], statements=["Inflation causes unrest."])
        )
        b.statement_records.append(
            CausalRecord(topic="Beta", path=["Beta"], statements=["Inflation reduces savings."])
        )
        a.rebuild_triples_and_graph()
        b.rebuild_triples_and_graph()
        union = store.unify_slices([a, b])
        v = union.graph.ids["inflation"]
        incident = union.graph.out_edges[v] + union.graph.in_edges[v]
        domains = {union.graph.edges[i].domain for i in incident}
        assert domains == {"a", "b"}

    def test_associative_up_to_provenance(self):
        a, _ = pipeline.build_slice(make_config(slice_id="a", roots=("Alpha",)))
        b, _ = pipeline.build_slice(make_config(slice_id="b", roots=("Beta",)))
        c, _ = pipeline.build_slice(make_config(slice_id="c", roots=("Gamma",)))
        left = store.unify_slices([store.unify_slices([a, b]), c])
        right = store.unify_slices([a, store.unify_slices([b, c])])
        key = lambda g: sorted(
            (g.phrases[e.head], e.relation.value, g.phrases[e.tail], e.domain, e.multiplicity)
            for e in g.edges
        )
        assert sorted(left.graph.phrases) == sorted(right.graph.phrases)
        assert key(left.graph) == key(right.graph)
