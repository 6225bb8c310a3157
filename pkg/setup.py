"""Builds the optional compiled LSTM kernel.

The package works without it: mtoct.kernels falls back to the numpy
implementation when the extension is missing or fails to build.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "mtoct.kernels._lstm_cy",
                ["src/mtoct/kernels/_lstm_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
