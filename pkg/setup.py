"""Build script: compiles the coefficient-recurrence kernels as a C extension.

The extension is optional; if the build fails the package falls back to the
pure-Python kernels in fracstep._kernels_py at import time.
"""

import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "fracstep._kernels",
        ["src/fracstep/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
