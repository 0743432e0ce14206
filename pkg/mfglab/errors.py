#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

"""
Exception hierarchy shared by the library layer and the run driver.
The run driver maps these to process exit codes (see mfglab_run.py).
"""


class MfglabError(Exception):
    pass


class DomainError(MfglabError, ValueError):
    """A pointwise evaluation left the domain of a closed form (density floor,
    non-integer power at a non-positive argument, singular exponent, flow domain)."""


class ConfigError(MfglabError, ValueError):
    """Invalid problem or run configuration."""


class NonCanonicalError(ConfigError):
    """A catalog was asked about a Hamiltonian that has not been normalized."""


class InapplicableLawError(MfglabError, ValueError):
    """A conservation law or generator was used outside its applicability cell."""


class NumericalFailure(MfglabError, ArithmeticError):
    """Non-finite values appeared during a sweep."""
