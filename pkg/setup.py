"""Builds the optional compiled kernel.

The package works without it (a numpy fallback is selected at import),
but the Gibbs classifier is an order of magnitude slower in that mode.
"""
from setuptools import Extension, setup


def _simd_flags():
    # AVX2 roughly halves the forward kernel time; only enabled when the
    # build machine advertises it so the default build stays portable.
    try:
        with open("/proc/cpuinfo") as fh:
            flags = fh.read()
        if " avx2" in flags and " fma" in flags:
            return ["-mavx2", "-mfma"]
    except OSError:
        pass
    return []


try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "haplopop._copying",
                ["src/haplopop/_copying.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"] + _simd_flags(),
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
