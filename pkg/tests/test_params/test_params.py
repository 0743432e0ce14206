import mfglab
import pytest
from argparse import Namespace
from json import JSONDecodeError
from pathlib import Path

PARAM_FILES = Path(__file__).parent / "param_files"


def test_load_json_params_with_comments():
    """Tests that adding comments to the json will not fail with a decode error."""

    mfglab.get_modules_list(PARAM_FILES / "params_comments.json")


def test_load_modules():
    """Tests that the core and custom module lists of the params.json file are read."""
    modules_dict = mfglab.get_modules_list(PARAM_FILES / "params.json")
    assert modules_dict == {
        "modules_preproc": ["load_problem", "load_csv"],
        "modules_process": ["picard", "mass_monitor"],
        "modules_postproc": ["print_info", "write_csv", "verify"],
    }


def test_missing_module_lists_are_left_to_the_command():
    assert mfglab.get_modules_list(PARAM_FILES / "params_unknown_key.json") == {}


def test_malformed_json_reports_the_line():
    with pytest.raises(JSONDecodeError) as excinfo:
        mfglab.get_modules_list(PARAM_FILES / "params_malformed.json")
    assert excinfo.value.lineno == 4
    assert "params_malformed.json" in excinfo.value.msg


def test_params_core():
    parser = mfglab.params_core()
    params, __ = parser.parse_known_args([])

    assert vars(params) == {
        "command": "solve",
        "param_file": "params.json",
        "modules_preproc": ["load_problem"],
        "modules_process": ["picard"],
        "modules_postproc": ["print_info", "write_csv"],
        "what": "symmetries",
        "solve_first": False,
        "refine": 0,
        "seed": 42,
        "out": ".",
        "logging": False,
        "logging_level": 30,
        "logging_file": "",
        "print_params": True,
        "gpu_info": False,
        "gpu_id": 0,
        "saved_params_filename": "params_saved",
    }


def test_config_alias():
    parser = mfglab.params_core()
    params, __ = parser.parse_known_args(["verify", "--config", "other.json", "--solve-first"])
    assert params.command == "verify"
    assert params.param_file == "other.json"
    assert params.solve_first


def test_default_modules(tmp_path):
    def modules(**kwargs):
        base = dict(command="solve", what="symmetries", solve_first=False, out=str(tmp_path))
        base.update(kwargs)
        return mfglab.default_modules(Namespace(**base))

    assert modules()["modules_process"] == ["picard"]
    assert modules(command="verify") == {
        "modules_preproc": ["load_problem"],
        "modules_process": [],
        "modules_postproc": ["verify"],
    }
    assert modules(command="verify", what="conservation")["modules_preproc"] == [
        "load_problem",
        "load_csv",
    ]
    assert modules(command="verify", solve_first=True)["modules_process"] == ["picard"]

    # report solves when no fields were written yet
    assert modules(command="report")["modules_process"] == ["picard"]
    for name in ("u.csv", "m.csv"):
        (tmp_path / name).write_text("t,x,u\n")
    assert modules(command="report")["modules_preproc"] == ["load_problem", "load_csv"]
    assert modules(command="report")["modules_postproc"] == ["write_ts"]


def test_unknown_json_key_is_rejected():
    parser = mfglab.params_core()
    for module in mfglab.load_modules({"modules_preproc": ["load_problem"]}):
        module.params(parser)
    params, __ = parser.parse_known_args([])

    with pytest.raises(ValueError, match="prob_viscosity"):
        mfglab.load_user_defined_params(
            str(PARAM_FILES / "params_unknown_key.json"), vars(params)
        )


def test_command_line_wins_over_json():
    argv = ["--config", str(PARAM_FILES / "params_comments.json"), "--prob_num_cells", "48"]
    parser = mfglab.params_core()
    params, __ = parser.parse_known_args(argv)
    modules = mfglab.setup_mfglab_modules(params, parser)
    params = mfglab.setup_mfglab_params(parser, modules, argv)

    assert params.prob_num_cells == 48
    assert params.prob_epsilon == 0.3
    assert params.prob_initial_density["kind"] == "cosine"
    assert params.modules_postproc == ["print_info", "write_csv"]
