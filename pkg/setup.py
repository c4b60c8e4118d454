import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Pure-Python install: the NumPy kernel backend is used instead.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "linbin._kernels._core",
                ["src/linbin/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
