import numpy as np
import pytest

from mfglab.errors import ConfigError, DomainError, NumericalFailure
from mfglab.grid import (
    AnalyticField,
    Field2D,
    GridSpec,
    SolutionPair,
    field_from_analytic,
    interpolate_trajectory,
    jet_from_analytic,
    mass_drift,
    read_field_csv,
    read_pair_ncdf,
    sample_field,
    sample_jets,
    shift_rows,
    spatial_derivative,
    time_derivative,
    total_mass,
    write_field_csv,
    write_pair_ncdf,
)


@pytest.fixture
def grid():
    return GridSpec(length=1.0, num_cells=64, horizon=1.0, num_steps=32)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(length=0.0, num_cells=64, horizon=1.0, num_steps=32),
        dict(length=1.0, num_cells=64, horizon=-1.0, num_steps=32),
        dict(length=1.0, num_cells=4, horizon=1.0, num_steps=32),
        dict(length=1.0, num_cells=10.5, horizon=1.0, num_steps=32),
        dict(length=1.0, num_cells=64, horizon=1.0, num_steps=1),
    ],
)
def test_invalid_grids(kwargs):
    with pytest.raises(ConfigError):
        GridSpec(**kwargs)


def test_grid_nodes_and_refinement(grid):
    assert grid.shape == (33, 64)
    assert grid.dx == pytest.approx(1.0 / 64)
    assert grid.x[-1] == pytest.approx(1.0 - grid.dx)
    assert grid.t[-1] == pytest.approx(1.0)

    fine = grid.refined(2)
    assert fine.shape == (129, 256)
    assert fine.dx == pytest.approx(grid.dx / 4)
    assert fine.dt == pytest.approx(grid.dt / 4)

    t, x = grid.mesh()
    assert t.shape == x.shape == grid.shape


def test_field_checks(grid):
    with pytest.raises(ConfigError):
        Field2D(np.zeros((3, 3)), grid, "u")

    bad = np.ones(grid.shape)
    bad[4, 7] = np.nan
    with pytest.raises(NumericalFailure):
        Field2D(bad, grid, "u")

    with pytest.raises(ValueError):
        Field2D(np.ones(grid.shape), grid, "velocity")

    # rounding noise below zero is clipped, real negatives are not
    m = np.ones(grid.shape)
    m[0, 0] = -1e-15
    assert Field2D(m, grid, "m").numpy()[0, 0] == 0.0
    m[0, 0] = -1e-6
    with pytest.raises(DomainError):
        Field2D(m, grid, "m")


def _stencil_errors(n):
    g = GridSpec(length=1.0, num_cells=n, horizon=1.0, num_steps=8)
    k = 2 * np.pi
    f = sample_field(g, lambda t, x: (1 + t) * np.sin(k * x))
    exact_x = sample_field(g, lambda t, x: (1 + t) * k * np.cos(k * x)).numpy()
    exact_xx = sample_field(g, lambda t, x: -(1 + t) * k**2 * np.sin(k * x)).numpy()
    e1 = np.max(np.abs(spatial_derivative(f, 1).numpy() - exact_x))
    e2 = np.max(np.abs(spatial_derivative(f, 2).numpy() - exact_xx))
    return e1, e2


def test_spatial_stencils_are_second_order():
    coarse = _stencil_errors(64)
    fine = _stencil_errors(128)
    for a, b in zip(coarse, fine):
        assert a < 1e-1
        assert a / b == pytest.approx(4.0, rel=0.05)

    f = sample_field(GridSpec(1.0, 16, 1.0, 4), lambda t, x: x)
    with pytest.raises(DomainError):
        spatial_derivative(f, 3)


def test_time_derivative_exact_on_quadratics(grid):
    f = sample_field(grid, lambda t, x: t**2 - 3 * t + np.cos(2 * np.pi * x))
    exact = sample_field(grid, lambda t, x: 2 * t - 3 + 0 * x).numpy()
    np.testing.assert_allclose(time_derivative(f).numpy(), exact, atol=1e-10)


def test_mass(grid):
    m = sample_field(grid, lambda t, x: 1.0 + 0.5 * np.cos(2 * np.pi * x), "m")
    assert total_mass(m, 0) == pytest.approx(1.0, abs=1e-14)
    assert mass_drift(m) <= 1e-14

    with pytest.raises(DomainError):
        total_mass(m.with_values(m.values, "u"), 0)


def test_shift_rows(grid):
    k = 2 * np.pi
    f = sample_field(grid, lambda t, x: np.sin(k * x) + 0 * t)

    # whole cells are exact rolls
    np.testing.assert_array_equal(
        shift_rows(f, 3 * grid.dx).numpy(), np.roll(f.numpy(), 3, axis=1)
    )

    shifts = np.linspace(0.0, 0.37, grid.num_steps + 1)
    expected = sample_field(
        grid, lambda t, x: np.sin(k * (x - shifts[:, np.newaxis]))
    ).numpy()
    np.testing.assert_allclose(shift_rows(f, shifts).numpy(), expected, atol=1e-12)


def test_solution_pair(grid):
    u = sample_field(grid, lambda t, x: np.cos(2 * np.pi * x) + 0 * t, "u")
    m = sample_field(grid, lambda t, x: np.ones_like(x + t), "m")
    pair = SolutionPair(u, m, u_slope=0.5)
    np.testing.assert_allclose(
        pair.u_full(), u.numpy() + 0.5 * grid.x[np.newaxis, :]
    )

    with pytest.raises(ConfigError):
        SolutionPair(m, u)
    other = GridSpec(1.0, 64, 2.0, 32)
    with pytest.raises(ConfigError):
        SolutionPair(u, Field2D(np.ones(other.shape), other, "m"))


def test_interpolate_trajectory(grid):
    m = sample_field(grid, lambda t, x: (1.0 + 0.5 * t * np.cos(2 * np.pi * x)), "m")
    fine = grid.refined(1)
    out = interpolate_trajectory(m, fine)

    assert out.role == "m"
    assert out.grid == fine
    # coarse nodes are kept, the new ones are averages of their neighbours
    np.testing.assert_allclose(out.numpy()[::2, ::2], m.numpy(), atol=1e-14)
    np.testing.assert_allclose(
        out.numpy()[::2, 1::2],
        0.5 * (m.numpy() + np.roll(m.numpy(), -1, axis=1)),
        atol=1e-14,
    )
    assert mass_drift(out) <= 1e-13

    with pytest.raises(ConfigError):
        interpolate_trajectory(m, GridSpec(2.0, 64, 1.0, 32))


def test_csv_round_trip(tmp_path, grid):
    rng = np.random.default_rng(3)
    u = Field2D(rng.normal(size=grid.shape), grid, "u")
    path = tmp_path / "u.csv"
    write_field_csv(u, path)

    with open(path) as f:
        assert f.readline().strip() == "t,x,value"

    back = read_field_csv(path, "u", grid)
    np.testing.assert_array_equal(back.numpy(), u.numpy())

    rebuilt = read_field_csv(path, "u")
    assert rebuilt.grid.shape == grid.shape
    assert rebuilt.grid.length == pytest.approx(1.0)

    with pytest.raises(ConfigError):
        read_field_csv(path, "u", grid.refined(1))


def test_ncdf_round_trip(tmp_path, grid):
    rng = np.random.default_rng(4)
    pair = SolutionPair(
        Field2D(rng.normal(size=grid.shape), grid, "u"),
        Field2D(rng.uniform(0.5, 1.5, size=grid.shape), grid, "m"),
        u_slope=-0.25,
    )
    path = tmp_path / "output.nc"
    write_pair_ncdf(pair, str(path))
    back = read_pair_ncdf(str(path))

    assert back.grid == grid
    assert back.u_slope == -0.25
    np.testing.assert_array_equal(back.u.numpy(), pair.u.numpy())
    np.testing.assert_array_equal(back.m.numpy(), pair.m.numpy())


def test_analytic_jets_match_finite_differences():
    rng = np.random.default_rng(11)
    f = AnalyticField.random(rng)
    t, x, h = 0.3, 0.7, 1e-5
    jet = jet_from_analytic(f, t, x)

    d = lambda c, dt, dx: float(f.derivative(c, 0, 0, t + dt, x + dx))
    assert float(jet.u_t) == pytest.approx((d("u", h, 0) - d("u", -h, 0)) / (2 * h), abs=1e-7)
    assert float(jet.m_x) == pytest.approx((d("m", 0, h) - d("m", 0, -h)) / (2 * h), abs=1e-7)
    assert float(jet.u_xx) == pytest.approx(
        (d("u", 0, h) - 2 * d("u", 0, 0) + d("u", 0, -h)) / h**2, abs=1e-3
    )


def test_positive_slope_fields():
    rng = np.random.default_rng(5)
    for _ in range(10):
        f = AnalyticField.random(rng, positive_ux=True)
        t, x = np.meshgrid(np.linspace(-1, 1, 21), np.linspace(0, 2, 41), indexing="ij")
        ux = f.derivative("u", 0, 1, t, x)
        assert np.all((ux >= 0.5) & (ux <= 1.5))
        assert np.all(f.derivative("m", 0, 0, t, x) > 0)


def test_sample_jets_box():
    jets = sample_jets(np.random.default_rng(0), 500, positive_ux=True)
    assert jets.m.shape == (500,)
    assert np.all((jets.m >= 0.1) & (jets.m <= 3.0))
    assert np.all(jets.u_x >= 0.1)
    assert jets.is_finite()


def test_field_from_analytic_drops_the_slope():
    f = AnalyticField.random(np.random.default_rng(6), length=1.0, positive_ux=True)
    grid = GridSpec(length=1.0, num_cells=32, horizon=1.0, num_steps=8)
    t, x = grid.mesh()

    u = field_from_analytic(f, grid, "u")
    np.testing.assert_allclose(u.numpy() + f.u_slope * x, f.derivative("u", 0, 0, t, x), atol=1e-14)
    m = field_from_analytic(f, grid, "m")
    np.testing.assert_allclose(m.numpy(), f.derivative("m", 0, 0, t, x), atol=1e-14)
