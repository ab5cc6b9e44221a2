"""Absorbed random walks in the quarter plane: exact and asymptotic absorption probabilities."""
