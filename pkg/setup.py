import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # The package still works without the compiled kernels: limbpose.kernels
    # falls back to the numpy implementation at import time.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "limbpose.kernels._native",
                ["src/limbpose/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
