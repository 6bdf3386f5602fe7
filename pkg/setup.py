from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("trackduel._dp_core", ["src/trackduel/_dp_core.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # The package still works without the compiled kernel: trackduel.dp
    # falls back to the numpy implementation at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
