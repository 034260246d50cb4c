from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

# The extension compiles the whole C++ core directly; there is no separate
# native-library install step for the wheel.
ext = Pybind11Extension(
    "fedbayes._core",
    sources=[
        "src/dataset.cpp",
        "src/naive_bayes.cpp",
        "src/weighted.cpp",
        "src/optimizer.cpp",
        "src/federation.cpp",
        "src/experiment.cpp",
        "bindings/module.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
