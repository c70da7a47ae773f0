import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MORLEYGRAPH_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "morleygraph._kernels._speedups",
                    ["src/morleygraph/_kernels/_speedups.pyx"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # pure-Python fallback is selected at import time
        ext_modules = []

setup(ext_modules=ext_modules)
