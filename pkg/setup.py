from setuptools import Extension, setup

# The compiled kernel is optional: the package falls back to the pure-Python
# implementation in nilshift._kernels_py when the extension is absent.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("nilshift._kernels_cy", ["src/nilshift/_kernels_cy.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
