"""Build script: compiles the optional Cython kernel for the XB log-density grid.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compilation only disables the fast path.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "xbxreg.kernels._xbkernel",
                ["src/xbxreg/kernels/_xbkernel.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"xbxreg: skipping Cython extension build ({exc})")
    ext_modules = []

setup(ext_modules=ext_modules)
