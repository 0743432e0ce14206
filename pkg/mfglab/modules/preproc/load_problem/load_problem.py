#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import json
import os
import time

import numpy as np

from mfglab.errors import ConfigError
from mfglab.grid import GridSpec, read_table_csv
from mfglab.model import CouplingSpec, HamiltonianSpec, ProblemSpec
from mfglab.solver import check_normalization


def params(parser):
    parser.add_argument(
        "--prob_length",
        type=float,
        default=1.0,
        help="Length L of the periodic domain [0, L) (default: %(default)s)",
    )
    parser.add_argument(
        "--prob_num_cells",
        type=int,
        default=64,
        help="Number of grid cells N in space (default: %(default)s)",
    )
    parser.add_argument(
        "--prob_horizon",
        type=float,
        default=1.0,
        help="Time horizon T (default: %(default)s)",
    )
    parser.add_argument(
        "--prob_num_steps",
        type=int,
        default=128,
        help="Number of time steps M (default: %(default)s)",
    )
    parser.add_argument(
        "--prob_epsilon",
        type=float,
        default=0.3,
        help="Diffusion coefficient epsilon > 0 (default: %(default)s)",
    )
    parser.add_argument(
        "--prob_hamiltonian",
        type=json.loads,
        default={"family": "quadratic"},
        help="Hamiltonian block: family (quadratic, cubic, power, exponential) and coefficients p, k, h, h2, h1, h0, q (default: %(default)s)",
    )
    parser.add_argument(
        "--prob_coupling",
        type=json.loads,
        default={"family": "power", "alpha": 1.0, "gamma": 2.0},
        help="Coupling block: family (log, power, table), alpha, gamma, or a table file with columns m,f (default: %(default)s)",
    )
    parser.add_argument(
        "--prob_initial_density",
        type=json.loads,
        default={"kind": "uniform"},
        help="Initial density: uniform, cosine (amplitude, mode), gaussian (center, width) or table (file with columns x,m) (default: %(default)s)",
    )
    parser.add_argument(
        "--prob_terminal_cost",
        type=json.loads,
        default={"kind": "zero"},
        help="Terminal cost: zero, constant (value), cosine (amplitude, mode), table (file with columns x,G) or density (weight, G = weight m(T)) (default: %(default)s)",
    )


def initialize(params, state):
    state.tcomp_load_problem = [time.time()]

    state.grid = GridSpec(
        length=params.prob_length,
        num_cells=params.prob_num_cells,
        horizon=params.prob_horizon,
        num_steps=params.prob_num_steps,
    )

    hamiltonian = HamiltonianSpec.from_dict(params.prob_hamiltonian)
    coupling = CouplingSpec.from_dict(params.prob_coupling, table_loader=_load_table)
    terminal, on_density = _terminal_cost(params.prob_terminal_cost, params.prob_length)

    state.spec = ProblemSpec(
        hamiltonian=hamiltonian,
        coupling=coupling,
        epsilon=params.prob_epsilon,
        horizon=params.prob_horizon,
        terminal_cost=terminal,
        terminal_depends_on_density=on_density,
        initial_density=_initial_density(params.prob_initial_density, params.prob_length),
    )
    check_normalization(state.spec, state.grid)

    if hasattr(state, "logger"):
        state.logger.info(
            "Problem: H = %s, f = %s, eps = %s, grid %s",
            hamiltonian.describe(),
            coupling.to_dict(),
            params.prob_epsilon,
            state.grid.to_dict(),
        )

    state.tcomp_load_problem[-1] -= time.time()
    state.tcomp_load_problem[-1] *= -1


def update(params, state):
    pass


def finalize(params, state):
    pass


def _load_table(path):
    if not os.path.exists(path):
        raise ConfigError(f"table file {path} does not exist")
    return read_table_csv(path)


def _keys(block, allowed, what):
    unknown = set(block) - set(allowed) - {"kind"}
    if unknown:
        raise ConfigError(f"unknown {what} keys {sorted(unknown)}")


def _normalized(fn, length):
    # x is a full grid row, so the discrete mass sum(m0) dx is set to one
    def m0(x):
        values = np.asarray(fn(x), dtype=np.float64)
        return values / (np.sum(values) * length / values.size)

    return m0


def _initial_density(block, length):
    kind = block.get("kind", "uniform")

    if kind == "uniform":
        _keys(block, (), "initial density")
        return None

    if kind == "cosine":
        _keys(block, ("amplitude", "mode"), "initial density")
        a, k = float(block.get("amplitude", 0.5)), int(block.get("mode", 1))
        if not abs(a) <= 1.0:
            raise ConfigError("cosine initial density needs |amplitude| <= 1")
        if k < 1:
            raise ConfigError("cosine initial density needs mode >= 1")
        return lambda x: (1.0 + a * np.cos(2.0 * np.pi * k * x / length)) / length

    if kind == "gaussian":
        _keys(block, ("center", "width"), "initial density")
        c, w = float(block.get("center", 0.5 * length)), float(block.get("width", 0.1))
        if not w > 0:
            raise ConfigError("gaussian initial density needs width > 0")

        def bump(x):
            d = (x - c + 0.5 * length) % length - 0.5 * length
            return np.exp(-0.5 * (d / w) ** 2)

        return _normalized(bump, length)

    if kind == "table":
        _keys(block, ("file",), "initial density")
        xs, ms = _load_table(block["file"])
        if np.any(ms < 0):
            raise ConfigError("tabulated initial density must be nonnegative")
        return _normalized(lambda x: np.interp(x, xs, ms, period=length), length)

    raise ConfigError(f"unknown initial density kind '{kind}'")


def _terminal_cost(block, length):
    """(G, depends on m(T))"""
    kind = block.get("kind", "zero")

    if kind == "zero":
        _keys(block, (), "terminal cost")
        return None, False

    if kind == "constant":
        _keys(block, ("value",), "terminal cost")
        value = float(block.get("value", 0.0))
        return (lambda x: np.full_like(x, value)), False

    if kind == "cosine":
        _keys(block, ("amplitude", "mode"), "terminal cost")
        a, k = float(block.get("amplitude", 0.1)), int(block.get("mode", 1))
        return (lambda x: a * np.cos(2.0 * np.pi * k * x / length)), False

    if kind == "table":
        _keys(block, ("file",), "terminal cost")
        xs, gs = _load_table(block["file"])
        return (lambda x: np.interp(x, xs, gs, period=length)), False

    if kind == "density":
        _keys(block, ("weight",), "terminal cost")
        weight = float(block.get("weight", 1.0))
        return (lambda x, m: weight * m), True

    raise ConfigError(f"unknown terminal cost kind '{kind}'")
