"""Belief updating and MAP solvers over annotated decompositions."""
