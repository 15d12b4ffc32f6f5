"""
Numerical core: structural causal models, the causally fair dissimilarity,
losses, DRO objectives and trainers, duality oracles and fairness metrics.

Nothing in this package imports Django; settings are passed in by callers.
"""
