#!/usr/bin/env python3

"""
Copyright (C) 2021-2023 mfglab developers
Published under the GNU GPL (Version 3), check at the LICENSE file
"""

import os, json
from json import JSONDecodeError
import importlib
import sys
import argparse
from argparse import ArgumentParser, Namespace
from pathlib import Path
from functools import partial
from typing import List, Any, Dict, Optional, Sequence
from types import ModuleType
import logging

import tensorflow as tf

import mfglab
from mfglab.verify import SUITES

MFGLAB_DESCRIPTION = r"""
  ┌──────────────────────────────────────────────────────────────────────────────────┐
  │ mfglab: a laboratory for one-dimensional second-order mean field games.          │
  │ It solves the coupled HJB / Kolmogorov system on a periodic domain, classifies   │
  │ its point symmetries and checks the associated conservation laws numerically.    │
  │                                                                                  │
  │   commands:  solve | verify | normalize | report                                 │
  └──────────────────────────────────────────────────────────────────────────────────┘
"""

COMMANDS = ("solve", "verify", "normalize", "report")

MODULE_FOLDERS = ("preproc", "process", "postproc")


class State:
    pass


class CommandParser(ArgumentParser):
    """
    the command, when given, is the first argument; an argument list opening with
    an option runs the default command, so option values are never taken for it
    """

    def parse_known_args(self, args=None, namespace=None):
        args = list(sys.argv[1:] if args is None else args)
        if not args or args[0].startswith("-"):
            args = [COMMANDS[0]] + args
        return super().parse_known_args(args, namespace)


# this create core parameters for any mfglab run
def params_core() -> argparse.ArgumentParser:
    parser = CommandParser(
        description=MFGLAB_DESCRIPTION,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        conflict_handler="resolve",
    )

    parser.add_argument(
        "command",
        nargs="?",
        choices=COMMANDS,
        default="solve",
        help="What to do with the configured problem, first when given (default: %(default)s)",
    )
    parser.add_argument(
        "--param_file",
        "--config",
        dest="param_file",
        type=str,
        default="params.json",
        help="Path for the JSON parameter file. (default: %(default)s)",
    )
    parser.add_argument(
        "--modules_preproc",
        type=list,
        default=["load_problem"],
        help="List of pre-processing modules (default: %(default)s)",
    )
    parser.add_argument(
        "--modules_process",
        type=list,
        default=["picard"],
        help="List of processing modules (default: %(default)s)",
    )
    parser.add_argument(
        "--modules_postproc",
        type=list,
        default=["print_info", "write_csv"],
        help="List of post-processing modules (default: %(default)s)",
    )
    parser.add_argument(
        "--what",
        type=str,
        choices=SUITES,
        default="symmetries",
        help="Verification suite run by the verify command (default: %(default)s)",
    )
    parser.add_argument(
        "--solve-first",
        "--solve_first",
        dest="solve_first",
        action="store_true",
        default=False,
        help="Solve the problem before verifying or reporting instead of loading u.csv, m.csv (default: %(default)s)",
    )
    parser.add_argument(
        "--refine",
        type=int,
        default=0,
        help="Number of (dx, dt) halvings used by refinement studies (default: %(default)s)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=42,
        help="Seed of the random jets, points and fields (default: %(default)s)",
    )
    parser.add_argument(
        "--out",
        type=str,
        default=".",
        help="Output directory (default: %(default)s)",
    )
    parser.add_argument(
        "--logging",
        action="store_true",
        default=False,
        help="Activates the logging (default: %(default)s)",
    )
    parser.add_argument(
        "--logging_level",
        default=30,
        type=int,
        help="Determine logging level used for logger (default: %(default)s)",
    )
    parser.add_argument(
        "--logging_file",
        type=str,
        default="",
        help="Logging file name, if empty it prints in the screen (default: %(default)s)",
    )
    parser.add_argument(
        "--print_params",
        action="store_false",
        default=True,
        help="Print definitive parameters in a file for record (default: %(default)s)",
    )
    parser.add_argument(
        "--gpu_info",
        action="store_true",
        default=False,
        help="Print CUDA and GPU information to the screen (default: %(default)s)",
    )
    parser.add_argument(
        "--gpu_id",
        type=int,
        default=0,
        help="Id of the GPU to use (default: %(default)s)",
    )
    parser.add_argument(
        "--saved_params_filename",
        type=str,
        default="params_saved",
        help="Name of the file to store the parameters used in the run (default: %(default)s)",
    )

    return parser


def default_modules(params: Namespace) -> Dict[str, List[str]]:
    """module lists of a command when the parameter file does not name them"""
    out = Path(params.out)
    have_csv = (out / "u.csv").exists() and (out / "m.csv").exists()

    if params.command == "verify":
        preproc, process = ["load_problem"], []
        if params.solve_first:
            process = ["picard"]
        elif params.what == "conservation" or (params.what == "flows" and have_csv):
            preproc.append("load_csv")
        return {
            "modules_preproc": preproc,
            "modules_process": process,
            "modules_postproc": ["verify"],
        }

    if params.command == "report":
        if params.solve_first or not have_csv:
            preproc, process = ["load_problem"], ["picard"]
        else:
            preproc, process = ["load_problem", "load_csv"], []
        return {
            "modules_preproc": preproc,
            "modules_process": process,
            "modules_postproc": ["write_ts"],
        }

    return {
        "modules_preproc": ["load_problem"],
        "modules_process": ["picard"],
        "modules_postproc": ["print_info", "write_csv"],
    }


def setup_mfglab_modules(
    params: Namespace, parser: Optional[ArgumentParser] = None
) -> List[ModuleType]:
    modules_dict = default_modules(params)
    modules_dict.update(get_modules_list(params.param_file))
    if parser is not None:
        parser.set_defaults(**modules_dict)
    imported_modules = load_modules(modules_dict)
    imported_modules = load_dependent_modules(imported_modules)

    return imported_modules


def setup_mfglab_params(
    parser: ArgumentParser,
    imported_modules: List[ModuleType],
    argv: Optional[Sequence[str]] = None,
) -> Namespace:
    for module in imported_modules:
        module.params(parser)

    core_and_module_params = parser.parse_args(argv)
    params = load_user_defined_params(
        param_file=core_and_module_params.param_file,
        params_dict=vars(core_and_module_params),
    )

    # command-line values still win over the JSON file
    parser.set_defaults(**params)
    params = parser.parse_args(argv)

    return params


def run_intializers(modules: List, params: Any, state: State) -> None:
    for module in modules:
        module.initialize(params, state)


def run_processes(modules: List, params: Any, state: State) -> None:
    if hasattr(state, "picard"):
        while not state.picard.done:
            for module in modules:
                module.update(params, state)


def run_finalizers(modules: List, params: Any, state: State) -> None:
    for module in modules:
        module.finalize(params, state)


def add_logger(params, state) -> None:
    if params.logging_file == "":
        pathf = None
    else:
        pathf = params.logging_file

    logging.basicConfig(
        filename=pathf,
        encoding="utf-8",
        filemode="w",
        level=params.logging_level,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    logging.root.setLevel(params.logging_level)

    state.logger = logging.getLogger("mfglab_logger")


def remove_comments(json_str) -> str:
    # comment lines are blanked, not dropped, so decoder positions stay valid
    lines = json_str.split("\n")
    cleaned_lines = [
        "" if line.strip().startswith(("//", "#")) else line for line in lines
    ]
    cleaned_text = "\n".join(cleaned_lines)
    return cleaned_text


def load_json_file(
    param_file: str, remove_param_comments: bool = True
) -> Dict[str, Any]:
    with open(param_file, "r") as json_file:
        json_text = json_file.read()

    if remove_param_comments:
        json_text = remove_comments(json_text)

    dic_params = json.loads(json_text)
    return dic_params


def get_modules_list(params_path: str) -> Dict[str, List[str]]:
    """the module lists named in the parameter file (possibly none of them)"""
    try:
        params_dict = load_json_file(params_path)
    except JSONDecodeError as e:
        raise JSONDecodeError(
            msg=f"{params_path}: please check the JSON structure ({e.msg})",
            doc=e.doc,
            pos=e.pos,
        )
    return {
        key: params_dict[key]
        for key in ("modules_preproc", "modules_process", "modules_postproc")
        if key in params_dict
    }


def load_user_defined_params(param_file: str, params_dict: Dict[str, Any]):
    try:
        json_defined_params = load_json_file(param_file=param_file)
    except JSONDecodeError as e:
        raise JSONDecodeError(
            msg=f"{param_file}: please check the JSON structure ({e.msg})",
            doc=e.doc,
            pos=e.pos,
        )

    unrecognized_json_arguments = [
        k for k in json_defined_params.keys() if k not in params_dict
    ]
    if unrecognized_json_arguments:
        raise ValueError(
            f"The following argument specified in the JSON file does not exist among the core arguments nor the modules you have chosen: {unrecognized_json_arguments[0]}"
        )

    params_dict.update(json_defined_params)
    return params_dict


def load_modules(modules_dict: Dict) -> List[ModuleType]:
    """Returns a list of actionable modules to then apply the update, initialize, finalize functions on."""

    imported_modules = []
    for folder in MODULE_FOLDERS:
        imported_modules += load_modules_from_directory(
            modules_list=modules_dict.get(f"modules_{folder}", []), module_folder=folder
        )
    return imported_modules


def validate_module(module) -> None:
    """Validates that a module has the required functions to be used in mfglab."""
    required_functions = ["params", "initialize", "finalize", "update"]
    for function in required_functions:
        if not hasattr(module, function):
            raise AttributeError(
                f"Module {module} is missing the required function ({function}). If it is a custom python package, make sure to include the 4 required functions: ['params', 'initialize', 'finalize', 'update']."
            )


def load_modules_from_directory(
    modules_list: List[str], module_folder: str
) -> List[ModuleType]:
    imported_modules = []
    for module_name in modules_list:
        module_path = f"mfglab.modules.{module_folder}.{module_name}"
        try:
            module = importlib.import_module(module_path)
        except ModuleNotFoundError:
            logging.info(
                f"Error importing module: {module_path}, checking for custom package in current working directory."
            )
            try:
                module = importlib.import_module(module_name)
            except ModuleNotFoundError:
                raise ModuleNotFoundError(
                    f"Can not find module {module_name}. Make sure it is either in the 1) {Path(mfglab.__file__).parent}/modules/{module_folder} directory or 2) in your current working directory."
                )

        validate_module(module)
        imported_modules.append(module)

    return imported_modules


def has_dependencies(module: Any) -> bool:
    if hasattr(module, "dependencies"):
        return True
    return False


def load_dependent_modules(imported_modules: List) -> List[ModuleType]:
    """dependencies run before the modules that need them; each module is kept once"""
    imported_dependencies = []
    for module in imported_modules:
        if has_dependencies(module):
            for dependency in module.dependencies:
                load_modules_partial = partial(load_modules_from_directory, [dependency])
                for directory in MODULE_FOLDERS:
                    try:
                        dependent_module = load_modules_partial(module_folder=directory)[0]
                    except ModuleNotFoundError:
                        logging.info(
                            f"Could not find dependency {dependency} in directory {directory}."
                        )
                        continue
                    if (
                        dependent_module not in imported_modules
                        and dependent_module not in imported_dependencies
                    ):
                        imported_dependencies.append(dependent_module)
                    break

    return imported_dependencies + list(imported_modules)


def print_gpu_info() -> None:
    gpus = tf.config.experimental.list_physical_devices("GPU")
    print(f"{'CUDA Enviroment':-^150}")
    tf.sysconfig.get_build_info().pop("cuda_compute_capabilities", None)
    print(f"{json.dumps(tf.sysconfig.get_build_info(), indent=2, default=str)}")
    print(f"{'Available GPU Devices':-^150}")
    for gpu in gpus:
        gpu_info = {"gpu_id": gpu.name, "device_type": gpu.device_type}
        device_details = tf.config.experimental.get_device_details(gpu)
        gpu_info.update(device_details)

        print(f"{json.dumps(gpu_info, indent=2, default=str)}")
    print(f"{'':-^150}")


def compute_device(params: Namespace) -> str:
    if tf.config.list_physical_devices("GPU"):
        return f"/GPU:{params.gpu_id}"
    return "/CPU:0"


# Print parameters in a dedicated file
def print_params(params: Namespace) -> None:
    os.makedirs(params.out, exist_ok=True)
    param_file = os.path.join(params.out, params.saved_params_filename + ".json")

    with open(param_file, "w") as json_file:
        json.dump(params.__dict__, json_file, indent=2, default=str)
