"""Command-line scripts for the Delannoy category toolkit."""
