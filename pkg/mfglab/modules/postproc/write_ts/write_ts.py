#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import csv
import json
import os
import time

import numpy as np
from netCDF4 import Dataset

from mfglab.modules.process.picard import params as params_picard
from mfglab.noether import conserved_integral, feedback_summary
from mfglab.solver import PicardConfig
from mfglab.verify import conservation_laws_for, conservation_study, refinement_pairs


def params(parser):
    params_picard(parser)

    parser.add_argument(
        "--wts_conserved_file",
        type=str,
        default="conserved.csv",
        help="Conserved integrals per law, columns law_id,t,Q,drift (default: %(default)s)",
    )
    parser.add_argument(
        "--wts_residuals_file",
        type=str,
        default="residuals.json",
        help="Divergence residuals, drifts and refinement ratios per law (default: %(default)s)",
    )
    parser.add_argument(
        "--wts_feedback_file",
        type=str,
        default="feedback.csv",
        help="Mean control and mass per time level, columns t,mean_control,mass (default: %(default)s)",
    )
    parser.add_argument(
        "--wts_output_file",
        type=str,
        default="",
        help="Optional netCDF time series of the conserved integrals, none if empty (default: %(default)s)",
    )


def initialize(params, state):
    state.tcomp_write_ts = []
    os.makedirs(params.out, exist_ok=True)


def update(params, state):
    pass


def finalize(params, state):
    state.tcomp_write_ts.append(time.time())

    spec, pair = state.spec, state.pair
    laws = conservation_laws_for(spec)

    series = {law.id: conserved_integral(law, pair, spec) for law in laws}

    with open(os.path.join(params.out, params.wts_conserved_file), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["law_id", "t", "Q", "drift"])
        for law_id, values in series.items():
            q0 = values[0][1]
            for t, q in values:
                writer.writerow([law_id, repr(t), repr(q), repr(abs(q - q0))])

    cfg = PicardConfig.from_params(params)
    pairs = refinement_pairs(spec, pair, params.refine, cfg)
    study = conservation_study(spec, pairs, cfg)
    with open(os.path.join(params.out, params.wts_residuals_file), "w") as f:
        json.dump(
            {"levels": [p.grid.to_dict() for p in pairs], "laws": study}, f, indent=2
        )

    feedback = feedback_summary(pair, spec)
    with open(os.path.join(params.out, params.wts_feedback_file), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "mean_control", "mass"])
        for row in feedback:
            writer.writerow([repr(v) for v in row])

    if params.wts_output_file:
        _write_ncdf_ts(os.path.join(params.out, params.wts_output_file), series, feedback)

    if hasattr(state, "logger"):
        state.logger.info(
            "Report for laws %s written to %s", list(series.keys()), params.out
        )

    state.tcomp_write_ts[-1] -= time.time()
    state.tcomp_write_ts[-1] *= -1


def _write_ncdf_ts(path, series, feedback):
    nc = Dataset(path, "w", format="NETCDF4")

    nc.createDimension("time", None)
    E = nc.createVariable("time", np.dtype("float64").char, ("time",))
    E.long_name = "time"
    E.axis = "T"
    E[:] = np.array([row[0] for row in feedback])

    for law_id, values in series.items():
        E = nc.createVariable(law_id, np.dtype("float64").char, ("time",))
        E.long_name = f"conserved integral of {law_id}"
        E[:] = np.array([q for _, q in values])

    for k, name in ((1, "mean_control"), (2, "mass")):
        E = nc.createVariable(name, np.dtype("float64").char, ("time",))
        E.long_name = name.replace("_", " ")
        E[:] = np.array([row[k] for row in feedback])

    nc.close()
