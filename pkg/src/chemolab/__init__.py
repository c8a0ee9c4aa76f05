"""Simulation and verification lab for nonlocal chemotaxis with logistic damping."""

from chemolab.theory import ModelParams, Sign, check_hypothesis

__all__ = ["ModelParams", "Sign", "check_hypothesis"]
