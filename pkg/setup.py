"""Build script for the optional compiled kernel.

The package works without the extension (a pure Python kernel is selected at
import time); building it just makes the Monte Carlo engine much faster.
-ffp-contract=off keeps the compiled kernel bit-identical to the pure one:
fused multiply-adds would round differently.
"""
import os

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np

    extra_args = ["-O2", "-ffp-contract=off"]
    if os.name == "nt":  # pragma: no cover - not a supported CI target
        extra_args = ["/O2", "/fp:strict"]
    ext_modules = cythonize(
        [
            Extension(
                "pconj.kernel._fast",
                ["src/pconj/kernel/_fast.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=extra_args,
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    # No Cython at build time: install the pure Python package only.
    ext_modules = []

setup(ext_modules=ext_modules)
