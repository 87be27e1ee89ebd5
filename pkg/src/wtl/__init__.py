"""Formal-series engine for the genus-zero Whitham tau-structure and Hurwitz stabilization."""
