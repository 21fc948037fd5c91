"""Computation layer: combinatorics, measure, permutation category, envelope and algebras."""
