"""Build script: compiles the optional accelerator extension when Cython and a
C compiler are present, and degrades to the pure-numpy backend otherwise."""

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "prodnls._kernels._accel",
                ["src/prodnls/_kernels/_accel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
