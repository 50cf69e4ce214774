"""Build script: compiles the optional C kernel extension.

The package works without the extension (a pure-Python kernel twin is
selected at import time), so any compiler or Cython failure downgrades
to a pure-Python install instead of aborting.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        sys.stderr.write(
            "warning: could not build the jumpdensity C kernels (%s); "
            "falling back to the pure-Python kernels\n" % exc
        )


def extensions():
    if os.environ.get("JUMPDENSITY_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        sys.stderr.write("warning: Cython not available; pure-Python install\n")
        return []
    ext = Extension(
        "jumpdensity._kernels._ckernels",
        ["src/jumpdensity/_kernels/_ckernels.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
