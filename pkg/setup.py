"""Build script for the optional compiled kernel extension.

The package works without the extension: ``mdlsynth._kernels`` falls back to
the pure-numpy implementation when the compiled module is missing or when
``MDLSYNTH_PURE=1`` is set.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "mdlsynth._kernels._fast",
                ["src/mdlsynth/_kernels/_fast.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
