"""bnmap - exact and approximate MAP inference for discrete Bayesian networks."""

__version__ = "1.0.0"
__description__ = "Pareto-set MAP over binary tree decompositions, with certified hard-instance generators"
