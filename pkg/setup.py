from setuptools import Extension, setup

# The compiled arc-geometry kernels are optional: the package falls back to
# the numpy backend when the extension is absent (see nilsphere._kernels).
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "nilsphere._kernels._cyarcs",
                ["src/nilsphere/_kernels/_cyarcs.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
