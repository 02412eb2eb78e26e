"""Build script: compiles the optional _speedups extension.

The extension is a performance add-on only. If Cython or a C compiler is
missing (or MEMROUTE_PURE is set), the install completes without it and
memroute.kernels falls back to the pure-Python implementation at import.
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that downgrades compiler failures to a warning."""

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
        print("*" * 72)
        print("WARNING: building the memroute._speedups extension failed:")
        print(f"    {exc}")
        print("memroute will use the pure-Python kernels instead.")
        print("*" * 72)


ext_modules = []
if not os.environ.get("MEMROUTE_PURE"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/memroute/_speedups.pyx"],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        print("Cython not available; skipping the _speedups extension.")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
