"""Build the compiled kernel extension.

The extension is optional: if it fails to build (no C compiler, no OpenMP),
the package installs anyway and falls back to the pure-Python kernels at
import time.
"""

import os
import sys

from setuptools import Extension, setup


def extensions():
    if not os.path.exists("src/pipal/_core.pyx"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("pipal: Cython not available, building without compiled core", file=sys.stderr)
        return []
    ext = Extension(
        "pipal._core",
        ["src/pipal/_core.pyx"],
        extra_compile_args=["-O3", "-fopenmp"],
        extra_link_args=["-fopenmp"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
