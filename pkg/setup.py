import numpy as np
from setuptools import Extension, setup
from Cython.Build import cythonize

ext = Extension(
    "vesselmip._ckernels",
    ["src/vesselmip/_ckernels.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3", "-ffp-contract=off"],
    optional=True,
)

setup(ext_modules=cythonize([ext], compiler_directives={"language_level": "3"}))
