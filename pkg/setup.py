import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off: keep the compiled kernels bit-identical to the numpy
# backend (no FMA contraction), so the backends can be cross-checked exactly.
extensions = [
    Extension(
        "swimex._kernels_cy",
        ["src/swimex/_kernels_cy.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
