import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("STOCKCAST_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "stockcast._kernels",
                    ["src/stockcast/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no contraction: keeps the kernel bit-identical to the Python twin
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
