"""Build script for the optional Cython kernels.

The package works without them: ``chiral_rabi._kernels`` falls back to the
pure numpy implementation when the extension is missing.  Set
``CHIRAL_RABI_NO_EXT=1`` to skip compilation entirely.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CHIRAL_RABI_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "chiral_rabi._kernels._ext",
                    ["src/chiral_rabi/_kernels/_ext.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
