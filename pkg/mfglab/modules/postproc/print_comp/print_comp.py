#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import os

import numpy as np
import matplotlib

from mfglab.modules.utils import str2bool

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def params(parser):
    parser.add_argument(
        "--pcomp_plot",
        type=str2bool,
        default=True,
        help="Also draw the timing of each component and of every Picard cycle (default: %(default)s)",
    )


def initialize(params, state):
    pass


def update(params, state):
    pass


def finalize(params, state):
    components = [A for A in state.__dict__.keys() if A.startswith("tcomp_")]

    lines = []
    for c in components:
        times = getattr(state, c)
        lines.append(
            "     %24s  |  mean time per call : %8.4f  |  total : %8.4f  |  calls : %6d"
            % (c[6:], np.mean(times) if times else 0.0, np.sum(times), len(times))
        )

    if hasattr(state, "report"):
        report = state.report
        lines.append(
            "     %24s  |  cycles : %6d  |  converged : %5s  |  final update : %.3e"
            % ("picard", report.iterations, report.converged, report.final_update_norm)
        )
    if hasattr(state, "picard"):
        lines.append(
            "     %24s  |  sub-steps of the last transport sweep : %d"
            % ("fp sweep", state.picard.substeps)
        )

    print("Computational statistics report:")
    with open(os.path.join(params.out, "computational-statistics.txt"), "w") as f:
        for line in lines:
            print(line, file=f)
            print(line)

    if params.pcomp_plot:
        _plot_timings(params, state, components)


def _plot_timings(params, state, components):
    """
    total time per component, and the wall time of each Picard cycle
    """
    total = [float(np.sum(getattr(state, c))) for c in components]
    if sum(total) <= 0:
        return

    cycles = getattr(state, "tcomp_picard", [])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4), dpi=200)
    ax1.barh([c[6:] for c in components], total, color="tab:blue")
    ax1.set_xlabel("total time (s)")

    if cycles:
        ax2.plot(np.arange(1, len(cycles) + 1), cycles, "o-", color="tab:orange")
    ax2.set_xlabel("Picard cycle")
    ax2.set_ylabel("time (s)")

    plt.tight_layout()
    plt.savefig(os.path.join(params.out, "computational-timings.png"), pad_inches=0)
    plt.close("all")
