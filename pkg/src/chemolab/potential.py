"""Newtonian interaction field c = U * rho, normalised so that Laplace(c) = n alpha_n rho.

Two realisations:

* periodic box: spectral Poisson solve of Laplace(c) = n alpha_n (rho - mean rho);
* radial mesh: d c / d r = M(r) / r^(n-1) with M the enclosed mass.  The
  ``neutralize`` option subtracts the ball-averaged density, which is the
  radial counterpart of the box's neutralising background and makes the
  field vanish for uniform data.
"""

from __future__ import annotations

import numpy as np

from chemolab.errors import DimensionTooLow, SingularityAtOrigin, UnsupportedGrid
from chemolab.geometry import BoxGrid, Field, RadialMesh, unit_ball_volume

__all__ = [
    "unit_ball_volume",
    "potential_value",
    "wavenumbers",
    "spectral_laplacian",
    "interaction_field_box",
    "interaction_gradient_radial",
    "radial_face_gradient",
    "box_radial_profile",
    "shell_average",
]


def potential_value(x_norm: float, n: int) -> float:
    if n < 3:
        raise DimensionTooLow(f"n must be >= 3, got {n}")
    if x_norm <= 0:
        raise SingularityAtOrigin("U is singular at x = 0")
    return x_norm ** (2 - n) / (2 - n)


def wavenumbers(grid: BoxGrid) -> list[np.ndarray]:
    """Broadcastable angular wavenumber arrays for rfftn layout."""
    N, h = grid.points_per_axis, grid.spacing
    ks = []
    for ax in range(grid.n):
        if ax == grid.n - 1:
            k = 2 * np.pi * np.fft.rfftfreq(N, d=h)
        else:
            k = 2 * np.pi * np.fft.fftfreq(N, d=h)
        shape = [1] * grid.n
        shape[ax] = k.size
        ks.append(k.reshape(shape))
    return ks


def _irfftn(a: np.ndarray, grid: BoxGrid) -> np.ndarray:
    return np.fft.irfftn(a, s=grid.shape, axes=tuple(range(grid.n)))


def _k2(grid: BoxGrid) -> np.ndarray:
    return sum(k**2 for k in wavenumbers(grid))


def spectral_laplacian(values: np.ndarray, grid: BoxGrid) -> np.ndarray:
    """The discrete Laplacian used to audit the box solver."""
    return _irfftn(-_k2(grid) * np.fft.rfftn(values), grid)


def interaction_field_box(rho: Field) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    """Solve Laplace(c) = n alpha_n (rho - mean) on the periodic box.

    Returns the zero-mean potential c and its spectral gradient components.
    """
    grid = rho.geometry
    if not isinstance(grid, BoxGrid):
        raise UnsupportedGrid("interaction_field_box needs a BoxGrid")
    N = grid.points_per_axis
    coef = grid.n * unit_ball_volume(grid.n)
    src_hat = np.fft.rfftn(rho.values)
    ks = wavenumbers(grid)
    k2 = sum(k**2 for k in ks)
    k2[(0,) * grid.n] = 1.0
    c_hat = -coef * src_hat / k2
    c_hat[(0,) * grid.n] = 0.0
    c = _irfftn(c_hat, grid)
    grads = []
    for ax, k in enumerate(ks):
        ik = 1j * k
        # odd derivative of the Nyquist mode is not representable on a real grid
        if ax == grid.n - 1:
            ik = ik.copy()
            ik[..., -1] = 0.0
        else:
            ik = ik.copy()
            idx = [slice(None)] * grid.n
            idx[ax] = N // 2
            ik[tuple(idx)] = 0.0
        grads.append(_irfftn(ik * c_hat, grid))
    return c, tuple(grads)


def _enclosed_mass_faces(rho: Field) -> np.ndarray:
    mesh = rho.geometry
    return np.concatenate(([0.0], np.cumsum(rho.values * mesh.cell_volumes)))


def radial_face_gradient(rho: Field, neutralize: bool = False) -> np.ndarray:
    """dc/dr at the cell faces r_{i+1/2}, i = -1..cells-1 (length cells + 1)."""
    mesh = rho.geometry
    if not isinstance(mesh, RadialMesh):
        raise UnsupportedGrid("radial_face_gradient needs a RadialMesh")
    M = _enclosed_mass_faces(rho)
    e = mesh.edges
    if neutralize:
        M = M - (M[-1] / mesh.volume) * unit_ball_volume(mesh.n) * e**mesh.n
    g = np.zeros_like(e)
    g[1:] = M[1:] / e[1:] ** (mesh.n - 1)
    if neutralize:
        g[-1] = 0.0
    return g


def interaction_gradient_radial(rho: Field, neutralize: bool = False) -> np.ndarray:
    """dc/dr at the cell centres, M(r_i) / r_i^(n-1).

    M(r_i) adds the partial shell [r_{i-1/2}, r_i] of cell i to the mass of
    the cells inside it.
    """
    mesh = rho.geometry
    if not isinstance(mesh, RadialMesh):
        raise UnsupportedGrid("interaction_gradient_radial needs a RadialMesh")
    an = unit_ball_volume(mesh.n)
    r = mesh.centers
    inner = _enclosed_mass_faces(rho)[:-1]
    M = inner + rho.values * an * (r**mesh.n - mesh.edges[:-1] ** mesh.n)
    if neutralize:
        M = M - (rho.mass / mesh.volume) * an * r**mesh.n
    return M / r ** (mesh.n - 1)


def box_radial_profile(
    rho: Field, grads: tuple[np.ndarray, ...], add_background: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Radial component of the box gradient at every node, with node radii.

    ``add_background`` restores the field of the neutralising background,
    alpha_n * mean(rho) * r, so the result is comparable to the free-space
    enclosed-mass field near the box centre.
    """
    grid = rho.geometry
    xs = grid.mesh()
    r = np.sqrt(sum(x**2 for x in xs))
    gr = sum(g * x for g, x in zip(grads, xs)) / r
    if add_background:
        gr = gr + unit_ball_volume(grid.n) * rho.values.mean() * r
    return r.ravel(), gr.ravel()


def shell_average(
    r: np.ndarray, values: np.ndarray, width: float, r_stop: float
) -> tuple[np.ndarray, np.ndarray]:
    """Average scattered (r, value) samples over shells of the given width.

    Returns the mean radius and mean value of every non-empty shell below
    ``r_stop``.
    """
    edges = np.arange(0.0, r_stop + 0.5 * width, width)
    idx = np.digitize(r, edges)
    rs, vs = [], []
    for i in range(1, len(edges)):
        sel = idx == i
        if sel.any():
            rs.append(r[sel].mean())
            vs.append(values[sel].mean())
    return np.array(rs), np.array(vs)
