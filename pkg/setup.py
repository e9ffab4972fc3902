import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the numpy fallback is used at runtime
    cythonize = None

openmp = [] if os.environ.get("SCORE_DAG_NO_OPENMP") else ["-fopenmp"]

ext_modules = []
if cythonize is not None and not os.environ.get("SCORE_DAG_PURE_BUILD"):
    ext_modules = cythonize(
        [
            Extension(
                "score_dag._core",
                ["src/score_dag/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"] + openmp,
                extra_link_args=openmp,
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
