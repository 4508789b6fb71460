import os

from setuptools import setup

ext_modules = []
if not os.environ.get("RECURLAB_PURE_PYTHON"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "recurlab._scan",
                    ["src/recurlab/_scan.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-march=native", "-fopenmp"],
                    extra_link_args=["-fopenmp"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # the numpy fallback in recurlab.kernels takes over
        ext_modules = []

setup(ext_modules=ext_modules)
