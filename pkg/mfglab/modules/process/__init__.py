#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

# modules are imported by name from the run driver; importing them here would
# mix their params, initialize, update and finalize functions
