#!/usr/bin/env python
# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3)

from setuptools import setup, find_packages


with open("README.md", "r") as f:
    readme = f.read()

setup(
    name="mfglab-model",
    version="0.3.0",
    author="mfglab developers",
    license="gpl-3.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"mfglab": ["modules/*/*/*.md"]},
    entry_points={"console_scripts": ["mfglab_run = mfglab.mfglab_run:main"]},
    description="mfglab - symmetries, conservation laws and a solver for 1D second-order mean field games",
    long_description=readme,
    long_description_content_type="text/markdown",
    python_requires=">=3.9",
    install_requires=[
        "tensorflow>=2.14",
        "numpy",
        "matplotlib",
        "scipy",
        "sympy",
        "netCDF4",
    ],
    extras_require={"test": ["pytest", "hypothesis"]},
)
