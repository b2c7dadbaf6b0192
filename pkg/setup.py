from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "uavjam._kernels._native",
        ["src/uavjam/_kernels/_native.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level="3"))
