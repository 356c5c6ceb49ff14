from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "blockycover._kernels",
        sources=["src/blockycover/_kernels.pyx"],
        language="c++",
        extra_compile_args=["-O3"],
        optional=True,
    ),
]

setup(ext_modules=cythonize(extensions, language_level=3))
