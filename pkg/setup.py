from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "tcspin.lindblad._kernel",
                ["src/tcspin/lindblad/_kernel.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ]
    )
except ImportError:
    # Pure-python fallback backend is selected at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
