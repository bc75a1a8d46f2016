"""Admissible graphs, configuration sampling, weights and Taylor components."""
