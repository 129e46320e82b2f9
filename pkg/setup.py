"""Build the optional Cython kernel module.

The pure numpy fallback in ``dyadic_sharp._kernels_py`` is used when the
extension is missing, so a failed compile never breaks installation.
"""

import numpy as np
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover
            print(f"warning: Cython kernels not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover
            print(f"warning: {ext.name} not built ({exc}); using numpy fallback")


extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "dyadic_sharp._ckernels",
                ["src/dyadic_sharp/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
