#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import json
import os
import time

import numpy as np

from mfglab.errors import ConfigError
from mfglab.modules.process.picard import params as params_picard
from mfglab.solver import PicardConfig
from mfglab.verify import (
    refinement_pairs,
    verify_conservation,
    verify_flows,
    verify_noether_identity,
    verify_symmetries,
    verify_variational,
)


def params(parser):
    # refinement studies re-solve with the pic_ settings
    params_picard(parser)

    parser.add_argument(
        "--vrf_n_jets",
        type=int,
        default=1000,
        help="Number of random jets for the symmetries and variational suites (default: %(default)s)",
    )
    parser.add_argument(
        "--vrf_n_points",
        type=int,
        default=100,
        help="Number of random points for the noether-identity suite (default: %(default)s)",
    )
    parser.add_argument(
        "--vrf_flow_points",
        type=int,
        default=50,
        help="Number of sample points of the group-law check (default: %(default)s)",
    )
    parser.add_argument(
        "--vrf_flow_a",
        type=float,
        default=0.1,
        help="Flow parameter applied to the stored solution (default: %(default)s)",
    )
    parser.add_argument(
        "--vrf_flow_factor",
        type=float,
        default=5.0,
        help="Allowed growth of the residual sup-norms under a flow (default: %(default)s)",
    )
    parser.add_argument(
        "--vrf_output_file",
        type=str,
        default="",
        help="Verification report, verify_<what>.json if empty (default: %(default)s)",
    )


def initialize(params, state):
    state.tcomp_verify = []


def update(params, state):
    pass


def finalize(params, state):
    state.tcomp_verify.append(time.time())

    rng = np.random.default_rng(params.seed)
    spec = state.spec
    what = params.what

    if what == "symmetries":
        result = verify_symmetries(spec, rng, params.vrf_n_jets)
    elif what == "variational":
        result = verify_variational(spec, rng, params.vrf_n_jets)
    elif what == "noether-identity":
        result = verify_noether_identity(spec, rng, params.vrf_n_points)
    elif what == "conservation":
        if not hasattr(state, "pair"):
            raise ConfigError("the conservation suite needs a solution: load_csv or picard")
        cfg = PicardConfig.from_params(params)
        pairs = refinement_pairs(spec, state.pair, params.refine, cfg)
        result = verify_conservation(spec, pairs, cfg)
    else:
        result = verify_flows(
            spec,
            rng,
            getattr(state, "pair", None),
            a=params.vrf_flow_a,
            factor=params.vrf_flow_factor,
            n_points=params.vrf_flow_points,
        )

    report = result.to_dict()
    report["seed"] = params.seed

    os.makedirs(params.out, exist_ok=True)
    path = os.path.join(params.out, params.vrf_output_file or f"verify_{what}.json")
    with open(path, "w") as f:
        json.dump(report, f, indent=2, default=float)

    for item in result.items:
        print(
            "mfglab verify %-16s : %-40s %s  (%.3e vs %.1e)"
            % (
                what,
                item.name,
                "pass" if item.passed else "FAIL",
                item.value,
                item.threshold,
            )
        )

    state.verify_result = result
    if not result.passed:
        state.exit_code = max(getattr(state, "exit_code", 0), 4)
        if hasattr(state, "logger"):
            state.logger.error("verification failed for %s", ", ".join(result.failed))

    state.tcomp_verify[-1] -= time.time()
    state.tcomp_verify[-1] *= -1
