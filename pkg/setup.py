"""Builds the optional compiled kernel; the package works without it."""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "gespar._core",
                ["src/gespar/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython/NumPy at build time: install pure-Python only, the kernel
    # backend falls back automatically at import.
    extensions = []

setup(ext_modules=extensions)
