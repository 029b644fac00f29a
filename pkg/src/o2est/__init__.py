"""Finite-dimensional verification workbench."""
