"""Exact cohomological obstruction engine for Sasakian 7-manifolds."""
