#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import json
import sys
from json import JSONDecodeError
from typing import Optional, Sequence, TextIO

import tensorflow as tf
from mfglab import (
    State,
    params_core,
    print_params,
    run_intializers,
    run_processes,
    run_finalizers,
    setup_mfglab_modules,
    setup_mfglab_params,
    print_gpu_info,
    add_logger,
    compute_device,
)
from mfglab.errors import ConfigError, NumericalFailure
from mfglab.model import HamiltonianSpec, normalize_hamiltonian

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY_FAILED = 4


def normalize_stream(stdin: TextIO, stdout: TextIO) -> int:
    """general-form Hamiltonian JSON in, canonical form and transformation record out"""
    block = json.loads(stdin.read())
    raw = HamiltonianSpec.from_dict(block)
    canonical, record = normalize_hamiltonian(raw)
    json.dump(
        {"canonical": canonical.to_dict(), "record": record.to_dict()},
        stdout,
        indent=2,
    )
    stdout.write("\n")
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None) -> int:
    state = State()  # class acting as a dictionary
    parser = params_core()
    params, _ = parser.parse_known_args(argv)

    if params.command == "normalize":
        return normalize_stream(sys.stdin, sys.stdout)

    if params.gpu_info:
        print_gpu_info()

    if params.logging:
        add_logger(params=params, state=state)
        tf.get_logger().setLevel(params.logging_level)

    imported_modules = setup_mfglab_modules(params, parser)
    params = setup_mfglab_params(parser, imported_modules, argv)

    if params.print_params:
        print_params(params=params)

    state.exit_code = EXIT_OK

    with tf.device(compute_device(params)):
        run_intializers(imported_modules, params, state)
        run_processes(imported_modules, params, state)
        run_finalizers(imported_modules, params, state)

    return state.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        return run(argv)
    except SystemExit as e:
        # argparse usage errors and --help
        return EXIT_OK if not e.code else EXIT_CONFIG
    except JSONDecodeError as e:
        print(f"error: line {e.lineno} column {e.colno}: {e.msg}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, OSError, ModuleNotFoundError, AttributeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
