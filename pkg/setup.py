"""Build hook: compile the optional Cython kernel, fall back to pure Python."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/crmap/_speedups.pyx"],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"crmap: building without compiled kernel ({exc})")

setup(ext_modules=ext_modules)
