import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "weakgauss._ckernel",
        ["src/weakgauss/_ckernel.pyx"],
        include_dirs=[np.get_include()],
        # no fast-math / fp contraction: results must match the numpy fallback
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
