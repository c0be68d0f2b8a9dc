"""Build script: compiles the optional Cython kernel extension.

If Cython (or a C compiler) is unavailable the package still installs;
eraserlab._kernels falls back to the pure NumPy implementation at import.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "eraserlab._kernels._core",
                ["src/eraserlab/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
