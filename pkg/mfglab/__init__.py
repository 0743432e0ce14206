#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

import sys
import os
sys.path.append(os.getcwd())  # custom modules may live in the working directory

from .common import (
    State,
    params_core,
    load_modules,
    add_logger,
    print_params,
    load_dependent_modules,
    get_modules_list,
    default_modules,
    load_user_defined_params,
    run_intializers,
    run_processes,
    run_finalizers,
    setup_mfglab_modules,
    setup_mfglab_params,
    print_gpu_info,
    compute_device,
)

from . import modules
