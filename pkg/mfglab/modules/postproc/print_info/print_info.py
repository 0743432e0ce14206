#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import datetime

from mfglab.grid import mass_drift


def params(parser):
    pass


def initialize(params, state):
    print(
        "mfglab  clock   :    Picard cycle   |    update norm    |   FP sub-steps   "
    )


def update(params, state):
    """
    This serves to print key info on the fly during computation
    """
    print(
        "mfglab %s :      %6d       |     %10.3e    |     %6d  "
        % (
            datetime.datetime.now().strftime("%H:%M:%S"),
            state.it,
            state.update_norm,
            state.picard.substeps,
        )
    )


def finalize(params, state):
    if not hasattr(state, "report"):
        return
    r = state.report
    print(
        "mfglab : %s after %d cycles, update norm %.3e, residuals (%.3e, %.3e), mass drift %.3e"
        % (
            "converged" if r.converged else "NOT converged",
            r.iterations,
            r.final_update_norm,
            r.residual_norms[0],
            r.residual_norms[1],
            mass_drift(state.pair.m),
        )
    )
