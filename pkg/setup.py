"""Build script for the optional compiled kernel core.

The package works without the extension (a pure numpy/Python backend is
selected at import time), so a failed compile downgrades to a warning
instead of aborting the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            sys.stderr.write(
                f"warning: compiled kernels skipped ({exc}); "
                "using pure-Python backend\n"
            )

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            sys.stderr.write(
                f"warning: building {ext.name} failed ({exc}); "
                "using pure-Python backend\n"
            )


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "drheal._kernels._core",
        ["src/drheal/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        # -ffp-contract=off keeps the scalar physics bit-identical to the
        # pure-Python backend (no FMA contraction).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
