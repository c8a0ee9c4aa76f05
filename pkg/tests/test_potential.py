"""Geometry, checkpoints and the interaction field on both grids."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chemolab.errors import DimensionTooLow, SingularityAtOrigin, UnsupportedGrid
from chemolab.geometry import (
    BoxGrid,
    Field,
    RadialMesh,
    field_from_bytes,
    field_to_bytes,
    load_field,
    load_field_metadata,
    save_field,
    unit_ball_volume,
)
from chemolab.initial import gaussian, make_initial, uniform, uniform_ball
from chemolab.potential import (
    box_radial_profile,
    interaction_field_box,
    interaction_gradient_radial,
    potential_value,
    radial_face_gradient,
    shell_average,
    spectral_laplacian,
)


class TestUnitBall:
    @pytest.mark.parametrize(
        "n, v", [(3, 4 * math.pi / 3), (4, math.pi**2 / 2), (6, math.pi**3 / 6)]
    )
    def test_closed_forms(self, n, v):
        assert unit_ball_volume(n) == pytest.approx(v, rel=1e-14)

    @pytest.mark.parametrize("n", range(5, 15))
    def test_recurrence(self, n):
        assert unit_ball_volume(n) == pytest.approx(unit_ball_volume(n - 2) * 2 * math.pi / n, rel=1e-12)

    def test_low_dimension(self):
        with pytest.raises(DimensionTooLow):
            unit_ball_volume(2)


class TestPotentialValue:
    @pytest.mark.parametrize("x, n, v", [(1, 3, -1), (2, 3, -0.5), (1, 4, -0.5)])
    def test_worked(self, x, n, v):
        assert potential_value(x, n) == v

    def test_origin(self):
        with pytest.raises(SingularityAtOrigin):
            potential_value(0.0, 3)

    @given(st.floats(1e-3, 1e3), st.integers(3, 9))
    def test_negative(self, x, n):
        assert potential_value(x, n) < 0


class TestGrids:
    @pytest.mark.parametrize("N", [6, 12, 4])
    def test_box_rejects_bad_sizes(self, N):
        with pytest.raises(UnsupportedGrid):
            BoxGrid(1.0, N)

    def test_box_only_three_dimensions(self):
        with pytest.raises(UnsupportedGrid):
            BoxGrid(1.0, 16, n=4)

    def test_box_spacing(self):
        g = BoxGrid(2.0, 16)
        assert g.spacing == 0.25 and g.axis[0] == pytest.approx(-2 + 0.125)

    @pytest.mark.parametrize("n", [3, 4, 7])
    def test_radial_weights_sum_to_ball(self, n):
        mesh = RadialMesh(n, 2.5, 37)
        assert mesh.weights().sum() == pytest.approx(mesh.volume, rel=1e-10)
        assert np.all(mesh.weights() > 0) and np.all(mesh.centers > 0)

    def test_radial_min_cells(self):
        with pytest.raises(UnsupportedGrid):
            RadialMesh(3, 1.0, 8)

    def test_field_rejects_negative(self):
        with pytest.raises(ValueError):
            Field(RadialMesh(3, 1.0, 16), -np.ones(16))


class TestInitial:
    @pytest.mark.parametrize("family", ["gaussian", "uniform_ball", "uniform"])
    def test_exact_mass(self, family):
        mesh = RadialMesh(3, 5.0, 64)
        f = make_initial(mesh, family, 2.5, 1.0)
        assert f.mass == pytest.approx(2.5, rel=1e-13)

    def test_box_gaussian_mass(self):
        f = gaussian(BoxGrid(4.0, 16), 3.0, 1.0)
        assert f.mass == pytest.approx(3.0, rel=1e-13)

    def test_zero_mass(self):
        assert make_initial(RadialMesh(3, 1.0, 16), "gaussian", 0.0).linf == 0

    def test_uniform_ball_support(self):
        mesh = RadialMesh(3, 4.0, 40)
        f = uniform_ball(mesh, 1.0, 2.0)
        assert np.all(f.values[mesh.centers > 2.0] == 0)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            make_initial(RadialMesh(3, 1.0, 16), "delta", 1.0)


class TestCheckpoint:
    @pytest.mark.parametrize("geom", [BoxGrid(3.0, 8), RadialMesh(5, 2.0, 20)])
    def test_round_trip(self, geom, rng, tmp_path):
        f = Field(geom, rng.random(geom.shape))
        back = field_from_bytes(field_to_bytes(f))
        assert back.geometry == geom
        np.testing.assert_array_equal(back.values, f.values)
        save_field(f, tmp_path / "x.chlb", metadata="[model]\nn = 3\n")
        assert load_field_metadata(tmp_path / "x.chlb") == "[model]\nn = 3\n"
        np.testing.assert_array_equal(load_field(tmp_path / "x.chlb").values, f.values)

    def test_bad_magic(self):
        with pytest.raises(ValueError):
            field_from_bytes(b"XXXX" + bytes(40))

    def test_layout(self):
        f = Field(RadialMesh(3, 1.0, 16), np.arange(16.0))
        raw = field_to_bytes(f)
        assert raw[:4] == b"CHLB"
        np.testing.assert_array_equal(np.frombuffer(raw[-128:], "<f8"), np.arange(16.0))


def smooth_random_field(grid, rng, modes=4):
    xs = grid.mesh()
    L = 2 * grid.extent
    v = np.full(grid.shape, 2.0 * modes)
    for _ in range(modes):
        k = rng.integers(-3, 4, size=3)
        phase = rng.uniform(0, 2 * np.pi)
        v += np.cos(2 * np.pi * sum(ki * x for ki, x in zip(k, xs)) / L + phase)
    return Field(grid, v)


class TestBoxSolver:
    def test_constant_density(self):
        g = BoxGrid(2.0, 16)
        c, grads = interaction_field_box(Field(g, np.full(g.shape, 3.0)))
        assert np.abs(c).max() < 1e-12
        assert max(np.abs(x).max() for x in grads) < 1e-12

    def test_single_mode(self):
        g = BoxGrid(np.pi, 16)
        x, _, _ = g.mesh()
        rho = Field(g, 1 + np.cos(2 * x))
        c, grads = interaction_field_box(rho)
        coef = 3 * unit_ball_volume(3)
        np.testing.assert_allclose(c, -coef * np.cos(2 * x) / 4, atol=1e-12)
        np.testing.assert_allclose(grads[0], coef * np.sin(2 * x) / 2, atol=1e-12)

    def test_residual_random_smooth(self, rng):
        g = BoxGrid(2.0, 32)
        rho = smooth_random_field(g, rng)
        c, _ = interaction_field_box(rho)
        coef = 3 * unit_ball_volume(3)
        res = spectral_laplacian(c, g) - coef * (rho.values - rho.values.mean())
        assert np.abs(res).max() <= 1e-10 * coef * rho.linf

    def test_needs_box(self):
        with pytest.raises(UnsupportedGrid):
            interaction_field_box(Field(RadialMesh(3, 1.0, 16), np.ones(16)))


class TestRadialField:
    def test_zero(self):
        mesh = RadialMesh(3, 1.0, 16)
        assert np.all(interaction_gradient_radial(Field(mesh, np.zeros(16))) == 0)

    def test_uniform_ball_inside_and_outside(self):
        mesh = RadialMesh(3, 4.0, 400)
        R, rho0 = 2.0, 1.5
        f = Field(mesh, np.where(mesh.centers < R, rho0, 0.0))
        g = interaction_gradient_radial(f)
        r = mesh.centers
        inside, outside = r < R, r > R
        np.testing.assert_allclose(g[inside], rho0 * 4 * np.pi / 3 * r[inside], rtol=1e-12)
        np.testing.assert_allclose(
            g[outside], rho0 * 4 * np.pi / 3 * R**3 / r[outside] ** 2, rtol=1e-12
        )

    def test_face_gradient_matches_enclosed_mass(self):
        mesh = RadialMesh(4, 3.0, 30)
        f = gaussian(mesh, 2.0, 1.0)
        g = radial_face_gradient(f)
        M = np.concatenate(([0], np.cumsum(f.values * mesh.cell_volumes)))
        np.testing.assert_allclose(g[1:], M[1:] / mesh.edges[1:] ** 3)
        assert g[0] == 0

    def test_neutralized_uniform_is_zero(self):
        mesh = RadialMesh(3, 1.0, 32)
        f = uniform(mesh, 2.0)
        assert np.abs(radial_face_gradient(f, neutralize=True)).max() < 1e-12
        assert np.abs(interaction_gradient_radial(f, neutralize=True)).max() < 1e-12

    @given(arrays(np.float64, 24, elements=st.floats(0, 10)))
    def test_nonnegative(self, vals):
        mesh = RadialMesh(3, 2.0, 24)
        assert np.all(interaction_gradient_radial(Field(mesh, vals)) >= 0)


def test_shell_average_of_linear_profile():
    r = np.linspace(0, 1, 1001)
    rs, vs = shell_average(r, 2 * r, 0.1, 1.0)
    np.testing.assert_allclose(vs, 2 * rs)


def test_box_profile_background_term():
    g = BoxGrid(2.0, 16)
    f = Field(g, np.full(g.shape, 1.0))
    _, grads = interaction_field_box(f)
    r, gr = box_radial_profile(f, grads)
    np.testing.assert_allclose(gr, unit_ball_volume(3) * r, atol=1e-12)
