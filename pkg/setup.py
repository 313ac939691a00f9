"""Build script: compiles the hot-kernel extension when a toolchain is present.

The package is fully functional without the extension (the pure NumPy
backend is selected at import time), so compilation failures degrade to a
warning instead of failing the install.
"""

from setuptools import setup


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        import warnings

        warnings.warn("Cython/NumPy unavailable; installing with pure-Python kernels only")
        return []
    ext = Extension(
        "mertens._kernels._native",
        sources=["src/mertens/_kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
