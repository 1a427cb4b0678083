"""Build script: compiles the optional correlation kernel extension.

The package works without the extension; cqedkit.kernels falls back to a
vectorized numpy implementation when the compiled module is unavailable.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("cqedkit._fastcorr", ["src/cqedkit/_fastcorr.pyx"])],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
