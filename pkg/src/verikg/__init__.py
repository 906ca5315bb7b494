"""Verification-centric knowledge graph engine.

Builds typed IR artifacts from specifications and RTL, materializes them as a
queryable knowledge graph, and drives closed-loop property refinement
(generation, syntax repair, counterexample-guided correction, coverage
augmentation) against a built-in explicit-state formal checker.
"""

__version__ = "0.1.0"
