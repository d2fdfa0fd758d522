"""Invariant metrics, cone-boundary asymptotics and Levi-flat tooling."""

__version__ = "0.1.0"
