"""Exact computations in the Delannoy category and its algebra objects."""
