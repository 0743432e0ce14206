#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import json
import os
import time

from mfglab.errors import ConfigError
from mfglab.grid import SolutionPair, read_field_csv, read_pair_ncdf


def params(parser):
    parser.add_argument(
        "--lcsv_dir",
        type=str,
        default="",
        help="Folder holding a previous solve output, the output folder if empty (default: %(default)s)",
    )
    parser.add_argument(
        "--lcsv_u_file",
        type=str,
        default="u.csv",
        help="Value function file, columns t,x,value (default: %(default)s)",
    )
    parser.add_argument(
        "--lcsv_m_file",
        type=str,
        default="m.csv",
        help="Density file, columns t,x,value (default: %(default)s)",
    )
    parser.add_argument(
        "--lcsv_ncdf_file",
        type=str,
        default="",
        help="Read (u, m) from this netCDF file of write_ncdf instead of the CSV files (default: %(default)s)",
    )


def initialize(params, state):
    state.tcomp_load_csv = [time.time()]

    folder = params.lcsv_dir or params.out

    if params.lcsv_ncdf_file:
        state.pair = read_pair_ncdf(os.path.join(folder, params.lcsv_ncdf_file))
        if state.pair.grid.shape != state.grid.shape:
            raise ConfigError(
                f"netCDF fields of shape {state.pair.grid.shape} do not match grid {state.grid.to_dict()}"
            )
        state.tcomp_load_csv[-1] -= time.time()
        state.tcomp_load_csv[-1] *= -1
        return

    u_path = os.path.join(folder, params.lcsv_u_file)
    m_path = os.path.join(folder, params.lcsv_m_file)
    for path in (u_path, m_path):
        if not os.path.exists(path):
            raise FileNotFoundError(
                f"{path} not found: run the solve command first or pass --solve-first"
            )

    u_slope = 0.0
    report_path = os.path.join(folder, "report.json")
    if os.path.exists(report_path):
        with open(report_path) as f:
            u_slope = float(json.load(f).get("u_slope", 0.0))

    state.pair = SolutionPair(
        read_field_csv(u_path, "u", state.grid),
        read_field_csv(m_path, "m", state.grid),
        u_slope,
    )

    if hasattr(state, "logger"):
        state.logger.info("Loaded (u, m) from %s and %s", u_path, m_path)

    state.tcomp_load_csv[-1] -= time.time()
    state.tcomp_load_csv[-1] *= -1


def update(params, state):
    pass


def finalize(params, state):
    pass
