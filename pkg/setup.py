from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "cantorjump._ckernels",
                ["src/cantorjump/_ckernels.pyx"],
                # Contraction off: the compiled lane must match the pure lane
                # bit for bit, and FMA fusion would perturb rounding.
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython: install the pure-Python lane only.
    extensions = []

setup(ext_modules=extensions)
