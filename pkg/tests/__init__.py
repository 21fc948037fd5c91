"""Tests for the Delannoy category toolkit."""
