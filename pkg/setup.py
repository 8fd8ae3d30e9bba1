"""Build the optional Cython kernels; the package works without them."""
import os

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    pass
else:
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "renewalkit.kernels._ckernels",
                [os.path.join("src", "renewalkit", "kernels", "_ckernels.pyx")],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
