"""Initial densities: Gaussian bumps, uniform balls, and spatially uniform data.

Every family is rescaled so the discrete mass equals the requested mass
exactly on the given geometry.
"""

from __future__ import annotations

import numpy as np

from chemolab.geometry import BoxGrid, Field, Geometry

FAMILIES = ("gaussian", "uniform_ball", "uniform")


def _radius(geom: Geometry, center=None) -> np.ndarray:
    if isinstance(geom, BoxGrid) and center is not None:
        xs = geom.mesh()
        return np.sqrt(sum((x - c) ** 2 for x, c in zip(xs, center)))
    return geom.radius()


def _normalize(geom: Geometry, shape: np.ndarray, mass: float) -> Field:
    total = float(np.sum(geom.weights() * shape))
    if mass == 0 or total == 0:
        return Field(geom, np.zeros(geom.shape))
    return Field(geom, shape * (mass / total))


def gaussian(geom: Geometry, mass: float, width: float, center=None) -> Field:
    r = _radius(geom, center)
    return _normalize(geom, np.exp(-((r / width) ** 2)), mass)


def uniform_ball(geom: Geometry, mass: float, radius: float, center=None) -> Field:
    r = _radius(geom, center)
    return _normalize(geom, (r <= radius).astype(float), mass)


def uniform(geom: Geometry, mass: float) -> Field:
    return _normalize(geom, np.ones(geom.shape), mass)


def make_initial(geom: Geometry, family: str, mass: float, width: float = 1.0, center=None) -> Field:
    if family == "gaussian":
        return gaussian(geom, mass, width, center)
    if family == "uniform_ball":
        return uniform_ball(geom, mass, width, center)
    if family == "uniform":
        return uniform(geom, mass)
    raise ValueError(f"unknown initial-data family {family!r}; expected one of {FAMILIES}")
