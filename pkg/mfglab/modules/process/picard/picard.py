#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import time

from mfglab.grid import read_field_csv
from mfglab.modules.utils import str2bool
from mfglab.solver import SLOPE_TYPES, PicardConfig, PicardIteration


def params(parser):
    parser.add_argument(
        "--pic_damping",
        type=float,
        default=0.5,
        help="Relaxation theta in m <- (1 - theta) m + theta FP(HJB(m)), in (0, 1] (default: %(default)s)",
    )
    parser.add_argument(
        "--pic_tol",
        type=float,
        default=1e-8,
        help="Stop when sup|m_new - m_old| falls below this value (default: %(default)s)",
    )
    parser.add_argument(
        "--pic_max_iter",
        type=int,
        default=200,
        help="Maximum number of Picard cycles (default: %(default)s)",
    )
    parser.add_argument(
        "--pic_stability_safety",
        type=float,
        default=0.9,
        help="Bound on 2 dt max|H'| / dx above which the transport step is sub-divided (default: %(default)s)",
    )
    parser.add_argument(
        "--pic_slope_type",
        type=str,
        choices=SLOPE_TYPES,
        default="godunov",
        help="Reconstruction of the upwind density flux (default: %(default)s)",
    )
    parser.add_argument(
        "--pic_initial_guess",
        type=str,
        default="",
        help="Optional m.csv used as the first density iterate (default: %(default)s)",
    )
    parser.add_argument(
        "--pic_verbose",
        type=str2bool,
        default=False,
        help="Log every Picard cycle (default: %(default)s)",
    )


def initialize(params, state):
    state.tcomp_picard = []

    guess = None
    if params.pic_initial_guess:
        guess = read_field_csv(params.pic_initial_guess, "m", state.grid)

    state.picard = PicardIteration(
        state.spec, state.grid, PicardConfig.from_params(params), guess
    )
    state.it = 0
    state.update_norm = float("inf")


def update(params, state):
    state.tcomp_picard.append(time.time())

    state.update_norm = state.picard.step()
    state.it = state.picard.report.iterations

    if params.pic_verbose and hasattr(state, "logger"):
        state.logger.info(
            "Picard cycle %d, update norm %.3e, FP sub-steps %d",
            state.it,
            state.update_norm,
            state.picard.substeps,
        )

    state.tcomp_picard[-1] -= time.time()
    state.tcomp_picard[-1] *= -1


def finalize(params, state):
    state.pair, state.report = state.picard.result()

    if not state.report.converged:
        state.exit_code = max(getattr(state, "exit_code", 0), 2)

    if hasattr(state, "logger"):
        state.logger.info("Picard report: %s", state.report.to_dict())
