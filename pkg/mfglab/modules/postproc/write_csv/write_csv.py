#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import json
import os
import time

from mfglab.grid import write_field_csv


def params(parser):
    parser.add_argument(
        "--wcsv_u_file",
        type=str,
        default="u.csv",
        help="Output file of the value function (default: %(default)s)",
    )
    parser.add_argument(
        "--wcsv_m_file",
        type=str,
        default="m.csv",
        help="Output file of the density (default: %(default)s)",
    )
    parser.add_argument(
        "--wcsv_report_file",
        type=str,
        default="report.json",
        help="Output file of the solver report (default: %(default)s)",
    )


def initialize(params, state):
    state.tcomp_write_csv = []
    os.makedirs(params.out, exist_ok=True)


def update(params, state):
    pass


def finalize(params, state):
    state.tcomp_write_csv.append(time.time())

    write_field_csv(state.pair.u, os.path.join(params.out, params.wcsv_u_file))
    write_field_csv(state.pair.m, os.path.join(params.out, params.wcsv_m_file))

    record = {}
    if hasattr(state, "report"):
        record.update(state.report.to_dict())
    record["u_slope"] = state.pair.u_slope
    record["grid"] = state.pair.grid.to_dict()
    record["hamiltonian"] = state.spec.hamiltonian.to_dict()
    record["coupling"] = state.spec.coupling.to_dict()
    record["epsilon"] = state.spec.epsilon

    with open(os.path.join(params.out, params.wcsv_report_file), "w") as f:
        json.dump(record, f, indent=2)

    if hasattr(state, "logger"):
        state.logger.info("Wrote u, m and the report to %s", params.out)

    state.tcomp_write_csv[-1] -= time.time()
    state.tcomp_write_csv[-1] *= -1
