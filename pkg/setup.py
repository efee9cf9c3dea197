"""Build the optional Cython core; the package falls back to numpy if it is missing."""

import os
import sys

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("TRICOV_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        sys.stderr.write("Cython/numpy unavailable, skipping compiled core\n")
        return []
    ext = Extension(
        "tricov._core",
        ["src/tricov/_core.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(ext_modules=_extensions())
