"""Build script: compiles the optional Cython kernel extension.

The extension is marked optional; if no compiler or Cython is available the
install proceeds and the package falls back to the numpy kernels at import.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sympass._kernels",
                ["src/sympass/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level="3",
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
