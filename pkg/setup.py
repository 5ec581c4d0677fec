# Builds the optional compiled kernel.  The package works without it (the
# pure-Python reference kernel in henonlocus._kernel.reference is always
# available); Cython + a C compiler just make grid/trace workloads faster.
#
#   pip install -e . --no-build-isolation      # builds _fastkernel if it can
#   HENONLOCUS_PURE=1                          # forces the pure backend at runtime

import os

from setuptools import setup

_PYX = os.path.join("src", "henonlocus", "_kernel", "_fastkernel.pyx")

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    if os.path.exists(_PYX):
        ext_modules = cythonize(
            [
                Extension(
                    "henonlocus._kernel._fastkernel",
                    [_PYX],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
except ImportError:
    pass

setup(ext_modules=ext_modules)
