"""Abelian extensions of Q, norm principles and counting checks."""
