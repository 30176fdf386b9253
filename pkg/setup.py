"""Build the optional compiled walk-on-spheres kernel.

Without Cython or a C compiler the package installs anyway and runs on the
numpy fallback in ``haymanwu._wos_fallback``.
"""

import setuptools

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            setuptools.Extension(
                "haymanwu._wos_core",
                ["src/haymanwu/_wos_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setuptools.setup(ext_modules=ext_modules)
