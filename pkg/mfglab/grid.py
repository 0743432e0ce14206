#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

"""
Space-time discretization of the periodic domain [0, L) x [t0, t0 + T]:
grid description, discrete fields, finite-difference stencils, quadrature,
CSV and netCDF serialization, and manufactured trigonometric fields that provide exact jets.
"""

import logging
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence, Tuple

import numpy as np
import tensorflow as tf
from netCDF4 import Dataset

from mfglab.errors import ConfigError, DomainError, NumericalFailure
from mfglab.modules.utils import (
    DTYPE,
    compute_gradient_periodic,
    compute_gradient_time,
    compute_laplacian_periodic,
    fourier_shift,
)

logger = logging.getLogger(__name__)

ROLES = ("u", "m", "diagnostic")

# negative densities above this are rounding noise and get clipped to zero
DENSITY_TOLERANCE = 1e-13


@dataclass(frozen=True)
class GridSpec:
    length: float
    num_cells: int
    horizon: float
    num_steps: int
    t0: float = 0.0

    def __post_init__(self):
        if not self.length > 0 or not self.horizon > 0:
            raise ConfigError("length and horizon must be positive")
        if int(self.num_cells) != self.num_cells or self.num_cells < 8:
            raise ConfigError(f"num_cells must be an integer >= 8, got {self.num_cells}")
        if int(self.num_steps) != self.num_steps or self.num_steps < 2:
            raise ConfigError(f"num_steps must be an integer >= 2, got {self.num_steps}")
        object.__setattr__(self, "num_cells", int(self.num_cells))
        object.__setattr__(self, "num_steps", int(self.num_steps))

    @property
    def dx(self) -> float:
        return self.length / self.num_cells

    @property
    def dt(self) -> float:
        return self.horizon / self.num_steps

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.num_steps + 1, self.num_cells)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.num_cells, dtype=np.float64) * self.dx

    @property
    def t(self) -> np.ndarray:
        return self.t0 + np.arange(self.num_steps + 1, dtype=np.float64) * self.dt

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """(t, x) arrays of shape (M+1, N)"""
        return np.meshgrid(self.t, self.x, indexing="ij")

    def refined(self, levels: int = 1) -> "GridSpec":
        """halve dx and dt `levels` times"""
        factor = 2**levels
        return replace(
            self,
            num_cells=self.num_cells * factor,
            num_steps=self.num_steps * factor,
        )

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "num_cells": self.num_cells,
            "horizon": self.horizon,
            "num_steps": self.num_steps,
            "t0": self.t0,
        }


@dataclass(frozen=True)
class Field2D:
    values: tf.Tensor
    grid: GridSpec
    role: str = "diagnostic"

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role}")
        values = tf.convert_to_tensor(self.values, dtype=DTYPE)
        if tuple(values.shape) != self.grid.shape:
            raise ConfigError(
                f"field shape {tuple(values.shape)} does not match grid {self.grid.shape}"
            )
        if not bool(tf.reduce_all(tf.math.is_finite(values))):
            raise NumericalFailure(f"non-finite entries in {self.role} field")
        if self.role == "m":
            lowest = float(tf.reduce_min(values))
            if lowest < -DENSITY_TOLERANCE:
                raise DomainError(f"negative density {lowest:.3e} in field")
            values = tf.maximum(values, 0.0)
        object.__setattr__(self, "values", values)

    def numpy(self) -> np.ndarray:
        return self.values.numpy()

    def with_values(self, values, role: Optional[str] = None) -> "Field2D":
        return Field2D(values, self.grid, self.role if role is None else role)

    def sup_norm(self, interior: bool = False) -> float:
        v = self.values[1:-1] if interior else self.values
        return float(tf.reduce_max(tf.abs(v)))


@dataclass(frozen=True)
class SolutionPair:
    """
    discrete (u, m) on a common grid; the value function is
    u(t, x) = u.values + u_slope * x, the linear part being kept analytically
    """

    u: Field2D
    m: Field2D
    u_slope: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.m.grid:
            raise ConfigError("u and m must live on the same grid")
        if self.u.role != "u" or self.m.role != "m":
            raise ConfigError("SolutionPair expects a value field and a density field")

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    def u_full(self) -> np.ndarray:
        """u including the linear gauge part"""
        return self.u.numpy() + self.u_slope * self.grid.x[np.newaxis, :]


@dataclass(frozen=True)
class JetPoint:
    """
    a point of the second-order jet; every entry may be a float or an array,
    all arrays sharing one shape (batched jets)
    """

    t: float = 0.0
    x: float = 0.0
    u: float = 0.0
    m: float = 0.0
    u_t: float = 0.0
    m_t: float = 0.0
    u_x: float = 0.0
    m_x: float = 0.0
    u_tx: float = 0.0
    m_tx: float = 0.0
    u_xx: float = 0.0
    m_xx: float = 0.0

    def replace(self, **changes) -> "JetPoint":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.as_dict().values())


JET_NAMES = tuple(f.name for f in fields(JetPoint))


def spatial_derivative(field: Field2D, order: int) -> Field2D:
    """centered periodic first or second derivative along x"""
    if order == 1:
        out = compute_gradient_periodic(field.values, field.grid.dx)
    elif order == 2:
        out = compute_laplacian_periodic(field.values, field.grid.dx)
    else:
        raise DomainError(f"spatial_derivative supports order 1 or 2, got {order}")
    return Field2D(out, field.grid, "diagnostic")


def time_derivative(field: Field2D) -> Field2D:
    """centered in the interior, second-order one-sided at the first and last level"""
    return Field2D(
        compute_gradient_time(field.values, field.grid.dt), field.grid, "diagnostic"
    )


def total_mass(density: Field2D, time_index: int) -> float:
    if density.role != "m":
        raise DomainError("total_mass expects a density field")
    return float(tf.reduce_sum(density.values[time_index])) * density.grid.dx


def mass_drift(density: Field2D) -> float:
    """max over time levels of |total mass - 1|"""
    masses = tf.reduce_sum(density.values, axis=-1) * density.grid.dx
    return float(tf.reduce_max(tf.abs(masses - 1.0)))


def shift_rows(field: Field2D, shifts) -> Field2D:
    """periodic translation out(t_n, x) = field(t_n, x - shifts[n])"""
    out = fourier_shift(field.values, shifts, field.grid.length)
    return Field2D(out, field.grid, field.role)


def interpolate_trajectory(field: Field2D, grid: GridSpec) -> Field2D:
    """
    piecewise-linear transfer of a field onto another grid of the same domain,
    periodic in x; nonnegative fields stay nonnegative
    """
    src = field.grid
    if not np.isclose(src.length, grid.length) or not np.isclose(src.horizon, grid.horizon):
        raise ConfigError("interpolate_trajectory needs grids on the same domain")
    values = field.numpy()
    in_x = np.array([np.interp(grid.x, src.x, row, period=src.length) for row in values])
    out = np.array([np.interp(grid.t, src.t, col) for col in in_x.T]).T
    return Field2D(out, grid, field.role)


def sample_field(grid: GridSpec, fn, role: str = "diagnostic") -> Field2D:
    """evaluate fn(t, x) on the grid nodes"""
    t, x = grid.mesh()
    return Field2D(np.broadcast_to(fn(t, x), grid.shape), grid, role)


@dataclass(frozen=True)
class TrigTerm:
    """A * Re(exp((rate + i freq) t + i phase)) * Re(exp(i (2 pi mode / L) x + i shift))"""

    amplitude: float
    rate: float = 0.0
    freq: float = 0.0
    phase: float = 0.0
    mode: int = 1
    shift: float = 0.0


@dataclass(frozen=True)
class AnalyticField:
    """
    manufactured (u, m) built from separable trigonometric terms;
    u = u_const + u_rate t + u_slope x + sum(u_terms), m = m_const + sum(m_terms)
    """

    length: float
    u_terms: Tuple[TrigTerm, ...] = ()
    m_terms: Tuple[TrigTerm, ...] = ()
    u_const: float = 0.0
    u_rate: float = 0.0
    u_slope: float = 0.0
    m_const: float = 1.0

    def __post_init__(self):
        bound = sum(
            abs(term.amplitude) * np.exp(abs(term.rate)) for term in self.m_terms
        )
        if self.m_const - bound <= 0:
            logger.warning("m component of the analytic field may reach zero for |t| <= 1")

    def _term(self, term: TrigTerm, nt: int, nx: int, t, x):
        s = complex(term.rate, term.freq)
        k = 2.0 * np.pi * term.mode / self.length
        time = np.real(s**nt * np.exp(s * np.asarray(t) + 1j * term.phase))
        space = np.real((1j * k) ** nx * np.exp(1j * (k * np.asarray(x) + term.shift)))
        return term.amplitude * time * space

    def derivative(self, component: str, nt: int, nx: int, t, x):
        """closed-form d^nt/dt^nt d^nx/dx^nx of component 'u' or 'm'"""
        t = np.asarray(t, dtype=np.float64)
        x = np.asarray(x, dtype=np.float64)
        zero = np.zeros(np.broadcast(t, x).shape)
        if component == "u":
            terms, out = self.u_terms, zero.copy()
            if nt == 0 and nx == 0:
                out = out + self.u_const + self.u_rate * t + self.u_slope * x
            elif nt == 1 and nx == 0:
                out = out + self.u_rate
            elif nt == 0 and nx == 1:
                out = out + self.u_slope
        elif component == "m":
            terms, out = self.m_terms, zero.copy()
            if nt == 0 and nx == 0:
                out = out + self.m_const
        else:
            raise ValueError(f"component must be 'u' or 'm', got {component}")
        for term in terms:
            out = out + self._term(term, nt, nx, t, x)
        return out

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        length: float = 2.0,
        n_terms: int = 2,
        amplitude: float = 0.5,
        positive_ux: bool = False,
    ) -> "AnalyticField":
        """
        random trigonometric field; with positive_ux the u component carries a unit
        slope and small enough oscillations that u_x stays in [0.5, 1.5]
        """

        def draw(scale):
            mode = int(rng.integers(1, 3))
            k = 2.0 * np.pi * mode / length
            amp = rng.uniform(-scale, scale)
            if positive_ux:
                amp = amp / (n_terms * k * np.exp(0.5) * (1.0 + 2.0))
            return TrigTerm(
                amplitude=amp,
                rate=rng.uniform(-0.5, 0.5),
                freq=rng.uniform(0.0, 2.0),
                phase=rng.uniform(0.0, 2.0 * np.pi),
                mode=mode,
                shift=rng.uniform(0.0, 2.0 * np.pi),
            )

        u_terms = tuple(draw(amplitude) for _ in range(n_terms))
        m_terms = tuple(
            TrigTerm(
                amplitude=rng.uniform(-amplitude, amplitude),
                rate=rng.uniform(-0.5, 0.5),
                freq=rng.uniform(0.0, 2.0),
                phase=rng.uniform(0.0, 2.0 * np.pi),
                mode=int(rng.integers(1, 3)),
                shift=rng.uniform(0.0, 2.0 * np.pi),
            )
            for _ in range(n_terms)
        )
        m_const = 0.5 + np.exp(0.5) * sum(abs(term.amplitude) for term in m_terms)

        return cls(
            length=length,
            u_terms=u_terms,
            m_terms=m_terms,
            u_const=rng.uniform(-1.0, 1.0),
            u_rate=rng.uniform(-1.0, 1.0),
            u_slope=1.0 if positive_ux else 0.0,
            m_const=m_const,
        )


def jet_from_analytic(f: AnalyticField, t, x) -> JetPoint:
    d = f.derivative
    return JetPoint(
        t=np.asarray(t, dtype=np.float64) + np.zeros(np.broadcast(t, x).shape),
        x=np.asarray(x, dtype=np.float64) + np.zeros(np.broadcast(t, x).shape),
        u=d("u", 0, 0, t, x),
        m=d("m", 0, 0, t, x),
        u_t=d("u", 1, 0, t, x),
        m_t=d("m", 1, 0, t, x),
        u_x=d("u", 0, 1, t, x),
        m_x=d("m", 0, 1, t, x),
        u_tx=d("u", 1, 1, t, x),
        m_tx=d("m", 1, 1, t, x),
        u_xx=d("u", 0, 2, t, x),
        m_xx=d("m", 0, 2, t, x),
    )


def field_from_analytic(f: AnalyticField, grid: GridSpec, component: str) -> Field2D:
    """sample one component on the grid; the u slope is dropped (kept by SolutionPair)"""
    t, x = grid.mesh()
    values = f.derivative(component, 0, 0, t, x)
    if component == "u":
        values = values - f.u_slope * x
    return Field2D(values, grid, component)


def sample_jets(
    rng: np.random.Generator, n: int, positive_ux: bool = False
) -> JetPoint:
    """
    n random jets in the box t, x, u in [-2, 2], m in [0.1, 3], derivatives in [-2, 2];
    u_x is drawn from [0.1, 2] when positive_ux (power Hamiltonians)
    """
    box = lambda lo, hi: rng.uniform(lo, hi, size=n)
    return JetPoint(
        t=box(-2.0, 2.0),
        x=box(-2.0, 2.0),
        u=box(-2.0, 2.0),
        m=box(0.1, 3.0),
        u_t=box(-2.0, 2.0),
        m_t=box(-2.0, 2.0),
        u_x=box(0.1, 2.0) if positive_ux else box(-2.0, 2.0),
        m_x=box(-2.0, 2.0),
        u_tx=box(-2.0, 2.0),
        m_tx=box(-2.0, 2.0),
        u_xx=box(-2.0, 2.0),
        m_xx=box(-2.0, 2.0),
    )


def write_field_csv(field: Field2D, path) -> None:
    """row-major by time level, header t,x,value"""
    t, x = field.grid.mesh()
    rows = np.column_stack([t.ravel(), x.ravel(), field.numpy().ravel()])
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header="t,x,value", comments="")


def read_field_csv(path, role: str, grid: Optional[GridSpec] = None) -> Field2D:
    """
    read a field written by write_field_csv; the grid is rebuilt from the node
    coordinates unless one is given, in which case the coordinates must match it
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise ConfigError(f"{path}: expected three columns t,x,value")
    ts = np.unique(data[:, 0])
    xs = np.unique(data[:, 1])
    if len(ts) * len(xs) != data.shape[0]:
        raise ConfigError(f"{path}: rows do not form a full space-time grid")
    if grid is None:
        dx = xs[1] - xs[0]
        grid = GridSpec(
            length=float(dx * len(xs)),
            num_cells=len(xs),
            horizon=float(ts[-1] - ts[0]),
            num_steps=len(ts) - 1,
            t0=float(ts[0]),
        )
    elif grid.shape != (len(ts), len(xs)) or not np.allclose(xs, grid.x, atol=1e-12):
        raise ConfigError(f"{path}: field does not match grid {grid.to_dict()}")
    return Field2D(data[:, 2].reshape(len(ts), len(xs)), grid, role)


def read_table_csv(path) -> Tuple[np.ndarray, np.ndarray]:
    """two-column numeric table with one header line"""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise ConfigError(f"{path}: expected two columns")
    return data[:, 0], data[:, 1]


def write_pair_ncdf(pair: SolutionPair, path) -> None:
    """u and m on dimensions (time, x); the grid and u_slope go to global attributes"""
    grid = pair.grid
    nc = Dataset(path, "w", format="NETCDF4")

    nc.createDimension("time", grid.num_steps + 1)
    E = nc.createVariable("time", np.dtype("float64").char, ("time",))
    E.long_name = "time"
    E.axis = "T"
    E[:] = grid.t

    nc.createDimension("x", grid.num_cells)
    E = nc.createVariable("x", np.dtype("float64").char, ("x",))
    E.long_name = "x"
    E.axis = "X"
    E[:] = grid.x

    for var, field_, long_name in (
        ("u", pair.u, "value function (periodic part)"),
        ("m", pair.m, "density"),
    ):
        E = nc.createVariable(var, np.dtype("float64").char, ("time", "x"))
        E.long_name = long_name
        E[:, :] = field_.numpy()

    nc.length = grid.length
    nc.horizon = grid.horizon
    nc.t0 = grid.t0
    nc.u_slope = pair.u_slope
    nc.close()


def read_pair_ncdf(path) -> SolutionPair:
    nc = Dataset(path, "r")
    grid = GridSpec(
        length=float(nc.length),
        num_cells=len(nc.dimensions["x"]),
        horizon=float(nc.horizon),
        num_steps=len(nc.dimensions["time"]) - 1,
        t0=float(nc.t0),
    )
    u = np.array(nc.variables["u"][:, :], dtype=np.float64)
    m = np.array(nc.variables["m"][:, :], dtype=np.float64)
    u_slope = float(nc.u_slope)
    nc.close()
    return SolutionPair(Field2D(u, grid, "u"), Field2D(m, grid, "m"), u_slope)
