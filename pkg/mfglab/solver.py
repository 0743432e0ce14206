#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

"""
Forward-backward solver for the periodic MFG system.

The HJB equation is swept backward from u(T) = G with implicit diffusion and the
Hamiltonian taken on the later level; the Kolmogorov equation is swept forward
from m(0) = m0 with a conservative upwind advective flux and implicit diffusion.
Both implicit solves are exact FFT inversions of the periodic circulant matrix.
A damped Picard iteration couples the two sweeps.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import tensorflow as tf

from mfglab.errors import ConfigError, DomainError, NumericalFailure
from mfglab.grid import (
    Field2D,
    GridSpec,
    SolutionPair,
    mass_drift,
    spatial_derivative,
    time_derivative,
)
from mfglab.model import ProblemSpec, eval_coupling, eval_hamiltonian
from mfglab.modules.utils import (
    DTYPE,
    compute_divflux_periodic,
    compute_gradient_periodic,
    compute_gradient_staggered,
    compute_laplacian_periodic,
    solve_periodic_diffusion,
)

logger = logging.getLogger(__name__)

SLOPE_TYPES = ("godunov", "minmod", "superbee")


@dataclass(frozen=True)
class PicardConfig:
    damping: float = 0.5
    tolerance: float = 1e-8
    max_iter: int = 200
    stability_safety: float = 0.9
    slope_type: str = "godunov"

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ConfigError(f"damping must lie in (0, 1], got {self.damping}")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError("max_iter must be a positive integer")
        if not self.stability_safety > 0:
            raise ConfigError("stability_safety must be positive")
        if self.slope_type not in SLOPE_TYPES:
            raise ConfigError(f"slope_type must be one of {SLOPE_TYPES}")

    @classmethod
    def from_params(cls, params) -> "PicardConfig":
        """read the pic_ parameters, falling back on the defaults"""
        return cls(
            damping=getattr(params, "pic_damping", 0.5),
            tolerance=getattr(params, "pic_tol", 1e-8),
            max_iter=getattr(params, "pic_max_iter", 200),
            stability_safety=getattr(params, "pic_stability_safety", 0.9),
            slope_type=getattr(params, "pic_slope_type", "godunov"),
        )


@dataclass
class SolveReport:
    iterations: int = 0
    final_update_norm: float = float("inf")
    residual_norms: Tuple[float, float] = (float("nan"), float("nan"))
    sweep_residual_norms: Tuple[float, float] = (float("nan"), float("nan"))
    mass_drift: float = float("nan")
    converged: bool = False
    substeps: int = 1
    history: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_update_norm": self.final_update_norm,
            "residual_norm_F1": self.residual_norms[0],
            "residual_norm_F2": self.residual_norms[1],
            "sweep_residual_norm_u": self.sweep_residual_norms[0],
            "sweep_residual_norm_m": self.sweep_residual_norms[1],
            "mass_drift": self.mass_drift,
            "converged": self.converged,
            "substeps": self.substeps,
            "history": list(self.history),
        }


def _check_finite(s, what, level):
    if not bool(tf.reduce_all(tf.math.is_finite(s))):
        raise NumericalFailure(f"non-finite value in the {what} at time level {level}")


def _first_nonfinite(values: np.ndarray, backward: bool = False) -> Optional[int]:
    bad = np.flatnonzero(~np.all(np.isfinite(values), axis=-1))
    if bad.size == 0:
        return None
    return int(bad[-1] if backward else bad[0])


class SweepKernels:
    """
    the HJB and Kolmogorov sweeps of one problem on one grid, with both time loops
    compiled to graph while-loops; one instance is traced once and reused across
    Picard cycles. The Hamiltonian in the HJB loop goes through the numpy closed forms.
    """

    def __init__(
        self, spec: ProblemSpec, grid: GridSpec, cfg: Optional[PicardConfig] = None
    ):
        self.spec = spec
        self.grid = grid
        self.cfg = cfg or PicardConfig()
        self.dx, self.dt = grid.dx, grid.dt
        self._failure = None
        self._hjb_graph = tf.function(self._hjb_loop)
        self._fp_graph = tf.function(self._fp_loop)

    def _hamiltonian(self, ux):
        with np.errstate(over="ignore", invalid="ignore"):
            try:
                H = eval_hamiltonian(self.spec.hamiltonian, ux, 0)
            except DomainError as e:
                # re-raised once the graph returns
                self._failure = self._failure or e
                return np.full_like(ux, np.nan)
        return np.broadcast_to(np.asarray(H, dtype=np.float64), ux.shape).copy()

    def _hjb_loop(self, u_T, f_traj):
        M = self.grid.num_steps
        coeff = self.spec.epsilon * self.dt / self.dx**2

        out = tf.TensorArray(DTYPE, size=M + 1)
        out = out.write(M, u_T)
        u = u_T
        for n in tf.range(M - 1, -1, -1):
            ux = compute_gradient_periodic(u, self.dx)
            H = tf.numpy_function(self._hamiltonian, [ux], DTYPE)
            H.set_shape(ux.shape)
            u = solve_periodic_diffusion(u + self.dt * (f_traj[n + 1] - H), coeff)
            out = out.write(n, u)
        return out.stack()

    def _fp_loop(self, m0, v, nsub):
        M = self.grid.num_steps
        eps, dx = self.spec.epsilon, self.dx

        out = tf.TensorArray(DTYPE, size=M + 1)
        out = out.write(0, m0)
        m = m0
        for n in tf.range(M):
            h = self.dt / tf.cast(nsub[n], DTYPE)
            for _ in tf.range(nsub[n]):
                divflux = compute_divflux_periodic(v[n], m, dx, h, self.cfg.slope_type)
                m = solve_periodic_diffusion(m - h * divflux, eps * h / dx**2)
            out = out.write(n + 1, m)
        return out.stack()

    def _raise_pending(self):
        if self._failure is not None:
            failure, self._failure = self._failure, None
            raise failure

    def hjb(self, m_traj: Field2D, m_terminal=None) -> Field2D:
        """
        (I - dt eps D2) u^n = u^{n+1} + dt (f(m^{n+1}) - H(D1 u^{n+1})), u^M = G(x[, m_T]);
        m_terminal feeds a density-dependent G and defaults to m_traj at the last level
        """
        spec, M = self.spec, self.grid.num_steps

        m = np.maximum(m_traj.numpy(), spec.coupling.floor)
        f_traj = tf.constant(eval_coupling(spec.coupling, m), dtype=DTYPE)
        if m_terminal is None:
            m_terminal = m_traj.numpy()[-1]

        u_T = tf.constant(spec.terminal_values(self.grid.x, m_terminal), dtype=DTYPE)
        _check_finite(u_T, "terminal cost", M)

        u = self._hjb_graph(u_T, f_traj)
        self._raise_pending()

        level = _first_nonfinite(u.numpy(), backward=True)
        if level is not None:
            raise NumericalFailure(f"non-finite value in the HJB sweep at time level {level}")
        return Field2D(u, self.grid, "u")

    def drift(self, u_values, u_slope: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
        """
        edge velocities v = -H'(D+ u) for every step (row n drives n -> n+1) and
        the number of CFL sub-steps each step needs
        """
        ux = compute_gradient_staggered(u_values[:-1], self.dx).numpy() + u_slope
        with np.errstate(over="ignore", invalid="ignore"):
            v = -np.asarray(eval_hamiltonian(self.spec.hamiltonian, ux, 1), dtype=np.float64)

        level = _first_nonfinite(v)
        if level is not None:
            raise NumericalFailure(f"non-finite value in the Kolmogorov drift at time level {level}")

        vmax = np.max(np.abs(v), axis=-1)
        nsub = np.maximum(
            1, np.ceil(2.0 * self.dt * vmax / (self.dx * self.cfg.stability_safety))
        ).astype(np.int32)
        return v, nsub

    def fp(self, u_traj: Field2D) -> Tuple[Field2D, int]:
        """m^{n+1} from m^n by upwind transport and implicit diffusion, sub-stepped"""
        v, nsub = self.drift(u_traj.values)
        if np.any(nsub > 1):
            logger.debug(
                "%d levels need FP sub-steps (max %d)", np.count_nonzero(nsub > 1), nsub.max()
            )

        m0 = tf.constant(initial_density(self.spec, self.grid), dtype=DTYPE)
        m = self._fp_graph(m0, tf.constant(v, dtype=DTYPE), tf.constant(nsub))

        level = _first_nonfinite(m.numpy())
        if level is not None:
            raise NumericalFailure(f"non-finite value in the Kolmogorov sweep at time level {level}")
        return Field2D(m, self.grid, "m"), int(nsub.max())


def initial_density(spec: ProblemSpec, grid: GridSpec) -> np.ndarray:
    return spec.initial_values(grid.x, grid.length)


def check_normalization(spec: ProblemSpec, grid: GridSpec) -> None:
    m0 = initial_density(spec, grid)
    if np.any(m0 < 0):
        raise ConfigError("the initial density must be nonnegative")
    mass = float(np.sum(m0) * grid.dx)
    if abs(mass - 1.0) > 1e-12:
        raise ConfigError(f"the initial density has mass {mass!r}, expected 1")


def hjb_backward_sweep(
    m_traj: Field2D,
    spec: ProblemSpec,
    grid: Optional[GridSpec] = None,
    m_terminal=None,
) -> Field2D:
    """
    (I - dt eps D2) u^n = u^{n+1} + dt (f(m^{n+1}) - H(D1 u^{n+1})), u^M = G(x[, m_T]);
    m_terminal feeds a density-dependent G and defaults to m_traj at the last level
    """
    return SweepKernels(spec, grid or m_traj.grid).hjb(m_traj, m_terminal)


def fp_forward_sweep(
    u_traj: Field2D,
    spec: ProblemSpec,
    grid: Optional[GridSpec] = None,
    cfg: Optional[PicardConfig] = None,
) -> Field2D:
    """
    m^{n+1} from m^n by conservative upwind transport with velocity -H'(u_x)
    on the cell edges and implicit diffusion; sub-stepped under the CFL bound
    """
    return SweepKernels(spec, grid or u_traj.grid, cfg).fp(u_traj)[0]


def fp_flux_balance(
    pair: SolutionPair,
    spec: ProblemSpec,
    grid: Optional[GridSpec] = None,
    cfg: Optional[PicardConfig] = None,
) -> np.ndarray:
    """
    divergence of the Kolmogorov scheme's own edge flux eps D+ m - v m_upwind,
    diffusion on the later and transport on the earlier state of every sub-step,
    averaged over the sub-steps of each step; row n belongs to the step n -> n+1
    """
    grid = grid or pair.grid
    cfg = cfg or PicardConfig()
    eps, dx, dt = spec.epsilon, grid.dx, grid.dt

    kernels = SweepKernels(spec, grid, cfg)
    v, nsub = kernels.drift(pair.u.values, pair.u_slope)
    v = tf.constant(v, dtype=DTYPE)
    m = pair.m.values

    diffusion = eps * compute_laplacian_periodic(m[1:], dx)
    transport = compute_divflux_periodic(v, m[:-1], dx, dt, cfg.slope_type)
    balance = (diffusion - transport).numpy()

    # replay the intermediate states of sub-stepped levels
    for n in map(int, np.flatnonzero(nsub > 1)):
        k_max = int(nsub[n])
        h = dt / k_max
        mc, total = m[n], 0.0
        for k in range(k_max):
            divflux = compute_divflux_periodic(v[n], mc, dx, h, cfg.slope_type)
            if k == k_max - 1:
                mc_next = m[n + 1]
            else:
                mc_next = solve_periodic_diffusion(mc - h * divflux, eps * h / dx**2)
            total += eps * compute_laplacian_periodic(mc_next, dx) - divflux
            mc = mc_next
        balance[n] = total.numpy() / k_max

    return balance


def pde_residuals(
    pair: SolutionPair, spec: ProblemSpec, grid: Optional[GridSpec] = None
) -> Tuple[Field2D, Field2D]:
    """F1 and F2 on the grid with centered stencils; the u slope is differentiated exactly"""
    grid = grid or pair.grid
    eps = spec.epsilon

    u_t = time_derivative(pair.u).numpy()
    u_x = spatial_derivative(pair.u, 1).numpy() + pair.u_slope
    u_xx = spatial_derivative(pair.u, 2).numpy()
    m = pair.m.numpy()
    m_t = time_derivative(pair.m).numpy()
    m_x = spatial_derivative(pair.m, 1).numpy()
    m_xx = spatial_derivative(pair.m, 2).numpy()

    H = eval_hamiltonian(spec.hamiltonian, u_x, 0)
    dH = eval_hamiltonian(spec.hamiltonian, u_x, 1)
    d2H = eval_hamiltonian(spec.hamiltonian, u_x, 2)
    f = eval_coupling(spec.coupling, np.maximum(m, spec.coupling.floor))

    F1 = -u_t - eps * u_xx + H - f
    F2 = m_t - eps * m_xx - m_x * dH - m * d2H * u_xx

    return Field2D(F1, grid, "diagnostic"), Field2D(F2, grid, "diagnostic")


class PicardIteration:
    """
    damped fixed point m <- (1 - theta) m + theta FP(HJB(m)); one call of step()
    is one Picard cycle, the best iterate (smallest update norm) is kept
    """

    def __init__(
        self,
        spec: ProblemSpec,
        grid: GridSpec,
        cfg: Optional[PicardConfig] = None,
        initial_guess: Optional[Field2D] = None,
    ):
        self.spec = spec
        self.grid = grid
        self.cfg = cfg or PicardConfig()

        check_normalization(spec, grid)

        if initial_guess is None:
            m0 = initial_density(spec, grid)
            initial_guess = Field2D(np.tile(m0, (grid.num_steps + 1, 1)), grid, "m")
        self.m = initial_guess
        self.kernels = SweepKernels(spec, grid, self.cfg)

        self.report = SolveReport()
        self.best = None
        self.best_norm = float("inf")
        self.substeps = 1

    @property
    def done(self) -> bool:
        return self.report.converged or self.report.iterations >= self.cfg.max_iter

    def _terminal_density(self):
        # density-dependent terminal cost is lagged from the previous iterate
        return self.m.numpy()[-1]

    def step(self) -> float:
        u = self.kernels.hjb(self.m, self._terminal_density())
        m_new, nsub = self.kernels.fp(u)
        self.substeps = max(self.substeps, nsub)

        norm = float(tf.reduce_max(tf.abs(m_new.values - self.m.values)))

        self.report.iterations += 1
        self.report.history.append(norm)
        self.report.final_update_norm = norm

        if norm < self.best_norm:
            self.best_norm = norm
            self.best = (u, m_new)

        if norm <= self.cfg.tolerance:
            self.report.converged = True
            self.m = m_new
        else:
            theta = self.cfg.damping
            self.m = Field2D(
                (1.0 - theta) * self.m.values + theta * m_new.values, self.grid, "m"
            )

        return norm

    def result(self) -> Tuple[SolutionPair, SolveReport]:
        if not self.report.converged:
            logger.warning(
                "Picard iteration stopped after %d cycles, update norm %.3e > %.1e",
                self.report.iterations,
                self.report.final_update_norm,
                self.cfg.tolerance,
            )
        # a converged run stops at its first norm <= tolerance, which is also the best one
        u, m = self.best
        self.report.final_update_norm = self.best_norm

        pair = SolutionPair(u, m)

        # consistency of the returned pair with both discrete sweeps
        u_check = self.kernels.hjb(m)
        m_check, _ = self.kernels.fp(u)
        self.report.sweep_residual_norms = (
            float(tf.reduce_max(tf.abs(u_check.values - u.values))),
            float(tf.reduce_max(tf.abs(m_check.values - m.values))),
        )

        F1, F2 = pde_residuals(pair, self.spec, self.grid)
        self.report.residual_norms = (F1.sup_norm(), F2.sup_norm())
        self.report.mass_drift = mass_drift(m)
        self.report.substeps = self.substeps

        return pair, self.report


def solve_picard(
    spec: ProblemSpec,
    grid: GridSpec,
    cfg: Optional[PicardConfig] = None,
    initial_guess: Optional[Field2D] = None,
) -> Tuple[SolutionPair, SolveReport]:
    """
    alternate the HJB and Kolmogorov sweeps until sup|m_new - m_old| <= tolerance
    or max_iter; a non-converged run returns its best iterate with converged=False
    """
    it = PicardIteration(spec, grid, cfg, initial_guess)

    start = time.time()
    while not it.done:
        norm = it.step()
        logger.debug("Picard cycle %d: update norm %.3e", it.report.iterations, norm)

    pair, report = it.result()
    logger.info(
        "Picard: %d cycles, update norm %.3e, converged %s (%.2f s)",
        report.iterations,
        report.final_update_norm,
        report.converged,
        time.time() - start,
    )
    return pair, report
