import os

from setuptools import Extension, setup

# The compiled Gibbs kernel is optional: if Cython or a C compiler is
# missing the package installs anyway and falls back to the pure-Python
# sweep at import time.  -ffp-contract=off keeps the compiled arithmetic
# bit-identical to the Python fallback (no fused multiply-add).
extensions = []
if os.environ.get("KMODEL_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize

        extensions = cythonize(
            [
                Extension(
                    "kmodel._gibbs",
                    ["src/kmodel/_gibbs.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        extensions = []

setup(ext_modules=extensions)
