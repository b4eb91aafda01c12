"""Build script: compiles the optional Cython kernel.

The package works without the extension (a numpy fallback is selected at
import time), so the build is marked optional and install never fails on a
missing C toolchain.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "xxprobe._kernels._rk4_cy",
                ["src/xxprobe/_kernels/_rk4_cy.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
