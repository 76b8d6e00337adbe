"""Command-line interface.

Local batch commands (`build`, `explore`, `analyze`, `unify`) drive the core
package directly against a store directory; `serve` starts the HTTP service;
`slices`, `deepen`, and `job` are thin HTTP clients for a running service.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import analysis, config as config_mod, explore as explore_mod
from . import pipeline, store
from .errors import CausalAtlasError


def _print(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


# -- local commands ----------------------------------------------------------


def cmd_build(args) -> int:
    overrides = dict(
        roots=[r.strip() for r in args.roots.split(",")] if args.roots else None,
        depth_limit=args.depth,
        max_topics=args.max_topics,
        domain=args.domain,
    )
    cfg = config_mod.load_slice_config(args.config, args.slice, **overrides)
    if not cfg.roots:
        print("error: no roots given (use --roots or [slice] roots in the config)", file=sys.stderr)
        return 2
    state, profile, manifest = pipeline.build_and_store_slice(cfg, args.store)
    print(profile.render_table())
    _print(
        {
            "slice": cfg.slice_id,
            "revision": manifest.revision,
            "topics": len(state.topic_graph),
            "triples": len(state.triples),
            "nodes": state.graph.node_count,
            "edges": state.graph.edge_count,
        }
    )
    return 0


def cmd_explore(args) -> int:
    slice_dir = Path(args.store) / args.slice
    state = store.load_slice(slice_dir)
    weights = explore_mod.UtilityWeights(w1=args.w1, w2=args.w2, w3=args.w3, w4=args.w4, alpha=args.alpha)
    seeds = [s.strip() for s in args.seed_topics.split(",") if s.strip()] if args.seed_topics else None
    log = explore_mod.active_loop(
        state,
        weights,
        budget_per_wave=args.budget,
        waves=args.waves,
        task_seeds=seeds,
        batch_size=args.batch_size,
        mode=args.mode,
        seed=args.seed,
    )
    manifest = store.write_slice(slice_dir, state)
    _print(
        {
            "slice": args.slice,
            "revision": manifest.revision,
            "total_calls": log.total_calls,
            "waves": [
                {
                    "wave": w.wave,
                    "selected": w.selected,
                    "calls_used": w.calls_used,
                    "new_topics": w.new_topics,
                    "nodes": w.node_count,
                    "edges": w.edge_count,
                }
                for w in log.waves
            ],
        }
    )
    return 0


def cmd_analyze(args) -> int:
    if args.what == "triangles":
        acc_tri, acc_edge = analysis.triangle_benchmark(args.n_graphs, args.seed)
        _print({"triangle_channel_accuracy": acc_tri, "edges_only_accuracy": acc_edge})
        return 0
    state = store.load_slice(Path(args.store) / args.slice)
    if args.what == "spectrum":
        from . import graph as graph_mod

        nodes = graph_mod.largest_component_nodes(state.graph)
        k = min(args.k, len(nodes))
        report = analysis.laplacian_spectrum(state.graph, k, nodes)
        _print(
            {
                "component_size": report.component_size,
                "eigenvalues": report.eigenvalues,
                "fiedler_value": report.fiedler_value(),
            }
        )
    elif args.what == "stability":
        other = store.load_slice(Path(args.store) / args.other_slice)
        if state.coords is None or other.coords is None:
            print("error: both slices need manifold coordinates", file=sys.stderr)
            return 2
        report = analysis.stability_metrics(
            (state.graph, state.coords), (other.graph, other.coords), k=args.k
        )
        _print(
            {
                "distance_correlation": report.distance_correlation,
                "knn_jaccard": report.knn_jaccard,
                "consistency": [report.consistency_a, report.consistency_b],
                "shared_nodes": report.shared_nodes,
            }
        )
    elif args.what == "noise":
        claims = [c.strip() for c in args.claims.split(";") if c.strip()]
        noisy_records = analysis.inject_noise(state.statement_records, claims)
        import copy

        noisy_state = copy.deepcopy(state)
        noisy_state.statement_records = noisy_records
        noisy_state.rebuild_triples_and_graph()
        noisy_state.rebuild_manifold()
        report = analysis.robustness_report(state.graph, noisy_state.graph, noisy_state.coords)
        _print(
            {
                "injected_nodes": report.injected_node_count,
                "degree_percentiles": report.degree_percentiles,
                "centroid_distance_percentiles": report.centroid_distance_percentiles,
                "lambda2_clean": report.lambda2_clean,
                "lambda2_noisy": report.lambda2_noisy,
                "lambda2_relative_change": report.lambda2_relative_change,
            }
        )
    return 0


def cmd_unify(args) -> int:
    states = [store.load_slice(Path(args.store) / s) for s in args.slices]
    union = store.unify_slices(states, slice_id=args.out)
    union.rebuild_manifold()
    manifest = store.write_slice(Path(args.store) / args.out, union)
    _print(
        {
            "slice": args.out,
            "revision": manifest.revision,
            "nodes": union.graph.node_count,
            "edges": union.graph.edge_count,
        }
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.store_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# -- thin HTTP client commands -------------------------------------------------


def _client(url: str):
    import httpx

    return httpx.Client(base_url=url, timeout=30.0)


def cmd_slices(args) -> int:
    with _client(args.url) as client:
        response = client.get("/slices")
        response.raise_for_status()
        _print(response.json())
    return 0


def cmd_deepen(args) -> int:
    region: dict = {}
    if args.topics:
        region["topics"] = [t.strip() for t in args.topics.split(",") if t.strip()]
    if args.center:
        region["center"] = [float(x) for x in args.center.split(",")]
        region["radius"] = args.radius
    payload = {"region": region, "budget": args.budget, "waves": args.waves}
    with _client(args.url) as client:
        response = client.post(f"/slices/{args.slice}/deepen", json=payload)
        response.raise_for_status()
        job = response.json()
        _print(job)
        if not args.wait:
            return 0
        while True:
            status = client.get(f"/jobs/{job['job_id']}").json()
            if status["state"] in ("done", "failed"):
                _print(status)
                return 0 if status["state"] == "done" else 1
            time.sleep(args.poll_interval)


def cmd_job(args) -> int:
    with _client(args.url) as client:
        response = client.get(f"/jobs/{args.job_id}")
        response.raise_for_status()
        _print(response.json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causal-atlas", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="run the full pipeline and store a slice")
    p.add_argument("--slice", required=True)
    p.add_argument("--store", default="./slices")
    p.add_argument("--config", default=None, help="INI config with [oracle]/[slice] sections")
    p.add_argument("--roots", default=None, help="comma-separated root topics")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--max-topics", dest="max_topics", type=int, default=None)
    p.add_argument("--domain", default=None)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("explore", help="budgeted active deepening of a stored slice")
    p.add_argument("--slice", required=True)
    p.add_argument("--store", default="./slices")
    p.add_argument("--budget", type=int, required=True, help="oracle calls per wave")
    p.add_argument("--waves", type=int, default=1)
    p.add_argument("--seed-topics", dest="seed_topics", default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=4)
    p.add_argument("--mode", choices=("top_k", "proportional"), default="top_k")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--w1", type=float, default=1.0)
    p.add_argument("--w2", type=float, default=0.5)
    p.add_argument("--w3", type=float, default=0.5)
    p.add_argument("--w4", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("analyze", help="structural diagnostics")
    p.add_argument("what", choices=("spectrum", "stability", "noise", "triangles"))
    p.add_argument("--slice", default=None)
    p.add_argument("--store", default="./slices")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--other-slice", dest="other_slice", default=None)
    p.add_argument("--claims", default="", help="semicolon-separated false claims to inject")
    p.add_argument("--n-graphs", dest="n_graphs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("unify", help="merge slices into a union slice")
    p.add_argument("slices", nargs="+")
    p.add_argument("--store", default="./slices")
    p.add_argument("--out", default="union")
    p.set_defaults(func=cmd_unify)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--store-dir", dest="store_dir", default="./slices")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("slices", help="list slices via a running service")
    p.add_argument("--url", default="http://127.0.0.1:8000")
    p.set_defaults(func=cmd_slices)

    p = sub.add_parser("deepen", help="submit a deepen job via a running service")
    p.add_argument("--url", default="http://127.0.0.1:8000")
    p.add_argument("--slice", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--waves", type=int, default=1)
    p.add_argument("--topics", default=None, help="comma-separated topic labels")
    p.add_argument("--center", default=None, help="comma-separated manifold coordinates")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--wait", action="store_true", help="poll until the job finishes")
    p.add_argument("--poll-interval", dest="poll_interval", type=float, default=0.5)
    p.set_defaults(func=cmd_deepen)

    p = sub.add_parser("job", help="query job status via a running service")
    p.add_argument("job_id")
    p.add_argument("--url", default="http://127.0.0.1:8000")
    p.set_defaults(func=cmd_job)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "analyze" and args.what != "triangles" and not args.slice:
        parser.error("analyze requires --slice (except 'triangles')")
    if args.command == "analyze" and args.what == "stability" and not args.other_slice:
        parser.error("analyze stability requires --other-slice")
    try:
        return args.func(args)
    except CausalAtlasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
