#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import os
import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def params(parser):
    parser.add_argument(
        "--plt2d_vars",
        nargs="+",
        default=["u", "m"],
        help="Fields to plot in the (x, t) plane (default: %(default)s)",
    )
    parser.add_argument(
        "--plt2d_cmap",
        type=str,
        default="viridis",
        help="Matplotlib colormap (default: %(default)s)",
    )


def initialize(params, state):
    state.tcomp_plot2d = []
    os.makedirs(params.out, exist_ok=True)


def update(params, state):
    pass


def finalize(params, state):
    state.tcomp_plot2d.append(time.time())

    grid = state.pair.grid
    extent = [0.0, grid.length, grid.t[0], grid.t[-1]]
    labels = {"u": "value function u", "m": "density m"}

    for var in params.plt2d_vars:
        values = state.pair.u_full() if var == "u" else state.pair.m.numpy()

        fig, ax = plt.subplots(figsize=(6, 5), dpi=200)
        im = ax.imshow(
            values,
            origin="lower",
            aspect="auto",
            cmap=params.plt2d_cmap,
            extent=extent,
        )
        ax.set_xlabel("x")
        ax.set_ylabel("t")
        plt.colorbar(im, label=labels.get(var, var))
        plt.savefig(
            os.path.join(params.out, "plot2d-" + var + ".png"),
            bbox_inches="tight",
            pad_inches=0.2,
        )
        plt.close(fig)

    state.tcomp_plot2d[-1] -= time.time()
    state.tcomp_plot2d[-1] *= -1
