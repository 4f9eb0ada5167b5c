import os
import sys

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy  # noqa: F401
except ImportError:  # pure-Python install; the numpy fallback is used
    ext_modules = []
else:
    if sys.platform == "win32":
        omp = ["/openmp"], []
    elif os.environ.get("PTAU_NO_OPENMP"):
        omp = [], []
    else:
        omp = ["-fopenmp"], ["-fopenmp"]
    ext_modules = cythonize(
        [Extension("ptau._kernel", ["src/ptau/_kernel.pyx"],
                   extra_compile_args=["-O3"] + omp[0], extra_link_args=omp[1])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
