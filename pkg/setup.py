"""Build script: compiles the optional Cython stepping kernel.

Set PWSC_NO_EXT=1 to skip the extension entirely; the package falls back
to the pure-Python kernel at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PWSC_NO_EXT") != "1":
    from Cython.Build import cythonize

    ext = Extension(
        "pwsc._kernel",
        ["src/pwsc/_kernel.pyx"],
        # -ffp-contract=off keeps the compiled kernel bit-compatible with
        # the pure-Python fallback (no FMA contraction).
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    ext_modules = cythonize(ext, language_level="3")

setup(ext_modules=ext_modules)
