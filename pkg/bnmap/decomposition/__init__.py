"""Moral graphs, heuristic tree decompositions and cluster annotation."""
