from setuptools import Extension, setup

# The compiled kernels are an optional fast path: if Cython (or a C
# compiler) is unavailable the package falls back to the pure-Python
# implementations in singtutor._kernels_py at import time.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("singtutor._kernels", ["src/singtutor/_kernels.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
