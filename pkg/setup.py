#!/usr/bin/env python
# -*- coding: utf-8 -*-

import importlib.util
from codecs import open  # Use a consistent encoding.
from os import path
from pathlib import Path

from setuptools import setup, find_packages

here = path.abspath(path.dirname(__file__))

# Get the long description from the relevant file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

# Read the version from gluegis/constants.py without importing the package.
vspec = importlib.util.spec_from_file_location(
    "version",
    str(Path(__file__).resolve().parent / 'gluegis' / 'constants.py')
)
vmod = importlib.util.module_from_spec(vspec)
vspec.loader.exec_module(vmod)
version = getattr(vmod, '__version__')

setup(
    name='gluegis',
    description="gluegis: a GLUE grid information service.",
    long_description=long_description,
    long_description_content_type='text/markdown',
    packages=find_packages(
        exclude=["*.tests", "*.tests.*", "tests.*", "tests", "examples",
                 "docs", "testdata"]),
    version=version,
    install_requires=[
        "pydantic>=2.4,<3",
        "SQLAlchemy>=1.4,<3",
    ],
    extras_require={
        'dev': [
            "pytest>=7",
            "hypothesis>=6.70",
        ],
    },
    entry_points={
        'console_scripts': ['gluegis=gluegis.cli:main'],
    },
    python_requires=">=3.9",
    license='Apache License 2.0',  # noqa
    keywords=[
        "grid", "glue", "information service", "resource discovery",
        "matchmaking", "ldif", "xml"
    ],
    # See https://PyPI.python.org/PyPI?%3Aaction=list_classifiers
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: System :: Distributed Computing',
        'License :: OSI Approved :: Apache Software License',  # noqa
        'Programming Language :: Python :: 3.9',
    ],
)
