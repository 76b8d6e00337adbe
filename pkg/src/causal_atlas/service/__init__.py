"""HTTP facade over stored slices: browse manifolds and ego-graphs, submit
budgeted deepen jobs, poll job status."""

from .app import create_app

__all__ = ["create_app"]
