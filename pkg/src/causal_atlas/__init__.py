"""causal-atlas: builds large causal models from LLM-elicited causal text.

Pipeline: topic expansion -> causal questions/statements -> typed triples ->
multi-relational graph -> refined embeddings -> 2D/3D manifold, with spectral
diagnostics, budgeted active exploration, versioned slice storage, and an
HTTP service for browsing and steering.
"""

__version__ = "0.1.0"
