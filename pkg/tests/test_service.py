import json
import time

import pytest
from fastapi.testclient import TestClient

from causal_atlas import oracle, pipeline, projection, refine, slices, store
from causal_atlas.service import create_app


def make_config(slice_id="svc", seed=3, depth=1, max_topics=25):
    return slices.SliceConfig(
        slice_id=slice_id,
        domain=slice_id,
        domain_phrase="test systems",
        roots=["RootA", "RootB"],
        depth_limit=depth,
        max_topics=max_topics,
        per_node_children=3,
        questions_per_topic=2,
        statements_per_topic=2,
        oracle=oracle.OracleConfig(backend="synthetic", seed=seed),
        gt=refine.GTConfig(dim=32, seed=seed),
        manifold=projection.ManifoldConfig(n_neighbors=6, seed=seed, n_epochs=60),
    )


@pytest.fixture()
def store_dir(tmp_path):
    pipeline.build_and_store_slice(make_config(), tmp_path)
    return tmp_path


@pytest.fixture()
def client(store_dir):
    app = create_app(store_dir)
    with TestClient(app) as c:
        yield c


def wait_for_job(client, job_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        status = client.get(f"/jobs/{job_id}").json()
        if status["state"] in ("done", "failed"):
            return status
        time.sleep(0.05)
    raise TimeoutError("job did not finish")


def test_health(client):
    assert client.get("/health").json()["status"] == "ok"


def test_empty_store_lists_nothing(tmp_path):
    app = create_app(tmp_path / "empty")
    with TestClient(app) as c:
        assert c.get("/slices").json() == []


def test_two_slices_listed(tmp_path):
    pipeline.build_and_store_slice(make_config("one"), tmp_path)
    pipeline.build_and_store_slice(make_config("two"), tmp_path)
    app = create_app(tmp_path)
    with TestClient(app) as c:
        listed = c.get("/slices").json()
    assert {s["slice_id"] for s in listed} == {"one", "two"}
    assert all(not s["corrupt"] for s in listed)


def test_corrupt_slice_flagged(store_dir):
    target = store_dir / "svc" / "triples_svc.jsonl"
    target.write_text(target.read_text() + "tampered\n")
    app = create_app(store_dir)
    with TestClient(app) as c:
        listed = c.get("/slices").json()
    assert listed[0]["corrupt"] is True


class TestManifoldEndpoint:
    def test_row_count_matches_nodes(self, client, store_dir):
        state = store.load_slice(store_dir / "svc")
        page = client.get("/slices/svc/manifold?dims=2").json()
        assert page["total"] == state.graph.node_count
        assert len(page["nodes"]) == state.graph.node_count
        assert page["next_cursor"] is None
        ids = [n["id"] for n in page["nodes"]]
        assert ids == sorted(ids)

    def test_unknown_slice_404(self, client):
        assert client.get("/slices/nope/manifold").status_code == 404

    def test_wrong_dims_409_with_advice(self, client):
        response = client.get("/slices/svc/manifold?dims=3")
        assert response.status_code == 409
        assert "components=3" in response.json()["detail"]

    def test_pagination_covers_all_nodes_exactly_once(self, client):
        seen = []
        cursor = 0
        while True:
            page = client.get(f"/slices/svc/manifold?dims=2&cursor={cursor}&limit=7").json()
            seen.extend(n["id"] for n in page["nodes"])
            if page["next_cursor"] is None:
                break
            cursor = page["next_cursor"]
        full = client.get("/slices/svc/manifold?dims=2").json()
        assert seen == [n["id"] for n in full["nodes"]]
        assert len(seen) == len(set(seen)) == full["total"]


class TestEgoEndpoint:
    def test_focus_node_neighborhood(self, client, store_dir):
        state = store.load_slice(store_dir / "svc")
        # pick the highest-degree node as focus
        from causal_atlas import graph as graph_mod

        und = graph_mod.symmetrize(state.graph)
        focus = max(range(state.graph.node_count), key=und.degree)
        response = client.get(f"/slices/svc/nodes/{focus}/ego?hops=2").json()
        assert any(n["id"] == focus for n in response["nodes"])
        direct = {
            e["target"] for e in response["edges"] if e["source"] == focus
        } | {e["source"] for e in response["edges"] if e["target"] == focus}
        expected = und.neighbors[focus]
        assert expected <= direct | expected  # all direct causes/effects included
        node_ids = {n["id"] for n in response["nodes"]}
        assert expected <= node_ids
        assert all(e["relation"] for e in response["edges"])

    def test_unknown_node_404(self, client):
        assert client.get("/slices/svc/nodes/999999/ego").status_code == 404

    def test_activation_scalar_present(self, client):
        response = client.get("/slices/svc/nodes/0/ego?hops=1").json()
        assert all("activation" in n for n in response["nodes"])


class TestDeepenAndJobs:
    def test_budget_zero_rejected(self, client):
        response = client.post("/slices/svc/deepen", json={"region": {"topics": ["RootA"]}, "budget": 0})
        assert response.status_code == 400

    def test_unresolvable_region_rejected(self, client):
        response = client.post(
            "/slices/svc/deepen", json={"region": {"topics": ["no such topic"]}, "budget": 5}
        )
        assert response.status_code == 400

    def test_end_to_end_deepen_publishes_new_revision(self, client, store_dir):
        before = store.load_manifest(store_dir / "svc")
        response = client.post(
            "/slices/svc/deepen", json={"region": {"topics": ["RootA"]}, "budget": 8}
        )
        assert response.status_code == 202
        job_id = response.json()["job_id"]
        status = wait_for_job(client, job_id)
        assert status["state"] == "done", status
        assert status["calls_used"] > 0
        assert status["new_revision"] == before.revision + 1
        after = store.load_manifest(store_dir / "svc")
        assert after.revision == before.revision + 1
        assert after.counts["topics"] >= before.counts["topics"]
        # reads now serve the new revision
        page = client.get("/slices/svc/manifold?dims=2").json()
        assert page["revision"] == after.revision

    def test_concurrent_deepen_conflict(self, store_dir):
        # second submission while the first is running must 409
        app = create_app(store_dir)
        with TestClient(app) as c:
            first = c.post(
                "/slices/svc/deepen", json={"region": {"topics": ["RootA"]}, "budget": 30}
            )
            assert first.status_code == 202
            codes = set()
            for _ in range(20):
                second = c.post(
                    "/slices/svc/deepen", json={"region": {"topics": ["RootB"]}, "budget": 2}
                )
                codes.add(second.status_code)
                if 409 in codes:
                    break
            state = wait_for_job(c, first.json()["job_id"])
            assert 409 in codes or state["state"] == "done"

    def test_unknown_job_404(self, client):
        assert client.get("/jobs/doesnotexist").status_code == 404

    def test_job_records_survive_restart_as_failed_if_interrupted(self, store_dir):
        jobs_dir = store_dir / "_jobs"
        jobs_dir.mkdir(exist_ok=True)
        (jobs_dir / "stale123.json").write_text(
            json.dumps({"job_id": "stale123", "slice_id": "svc", "state": "running"})
        )
        app = create_app(store_dir)
        with TestClient(app) as c:
            status = c.get("/jobs/stale123").json()
        assert status["state"] == "failed"
        assert "restart" in status["error"]

    def test_region_by_center_radius(self, client, store_dir):
        state = store.load_slice(store_dir / "svc")
        coords = state.coords
        center = [float(x) for x in coords.mean(axis=0)]
        radius = float(max(abs(coords - coords.mean(axis=0)).max(), 1.0)) * 4
        response = client.post(
            "/slices/svc/deepen",
            json={"region": {"center": center, "radius": radius}, "budget": 4},
        )
        assert response.status_code == 202
        status = wait_for_job(client, response.json()["job_id"])
        assert status["state"] == "done"
