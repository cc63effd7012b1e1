import os

from setuptools import setup

ext_modules = []
if not os.environ.get("METISFORGE_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "metisforge._raster_kernel",
                    ["src/metisforge/_raster_kernel.pyx"],
                    include_dirs=[numpy.get_include()],
                    # no FMA contraction: results must match the Python twin bit for bit
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:  # build without Cython -> pure-Python fallback
        ext_modules = []

setup(ext_modules=ext_modules)
