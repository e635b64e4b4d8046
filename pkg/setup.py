"""Build hook for the optional compiled simulation kernel.

The package works without it; penny._kernel falls back to the pure
Python twin when the extension is missing or PENNY_PURE_PYTHON=1.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PENNY_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("penny._kernel.simcore", ["src/penny/_kernel/simcore.pyx"])],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
