from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "fpeval._kernels._sweepcore",
                ["src/fpeval/_kernels/_sweepcore.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
)
