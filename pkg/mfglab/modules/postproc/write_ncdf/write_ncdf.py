#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import os
import time

from mfglab.grid import write_pair_ncdf


def params(parser):
    parser.add_argument(
        "--wncd_output_file",
        type=str,
        default="output.nc",
        help="Output ncdf data file (default: %(default)s)",
    )


def initialize(params, state):
    state.tcomp_write_ncdf = []
    os.makedirs(params.out, exist_ok=True)


def update(params, state):
    pass


def finalize(params, state):
    state.tcomp_write_ncdf.append(time.time())

    path = os.path.join(params.out, params.wncd_output_file)
    if hasattr(state, "logger"):
        state.logger.info("Write NCDF file " + path)

    write_pair_ncdf(state.pair, path)

    state.tcomp_write_ncdf[-1] -= time.time()
    state.tcomp_write_ncdf[-1] *= -1
