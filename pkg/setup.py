"""Build the optional Cython kernels; the package falls back to numpy without them."""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "hyperkge._kernels",
                ["src/hyperkge/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    ext_modules = []


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: compiled kernels not built ({exc}); using numpy fallback", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using numpy fallback", file=sys.stderr)


setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
