import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup


def eigen_include():
    for candidate in ("/usr/include/eigen3", "/usr/local/include/eigen3"):
        if os.path.isdir(candidate):
            return candidate
    raise RuntimeError("Eigen3 headers not found")


ext = Pybind11Extension(
    "coptact._coptact",
    sources=[
        "python/bindings.cpp",
        "src/geometry.cpp",
        "src/sensor_model.cpp",
        "src/kinematics.cpp",
        "src/calibration.cpp",
        "src/synthetic.cpp",
        "src/sysid.cpp",
        "src/probe.cpp",
        "src/io.cpp",
        "src/cli.cpp",
    ],
    include_dirs=["include", "vendor", eigen_include()],
    cxx_std=20,
)

setup(
    name="coptact",
    version="0.1.0",
    description="Center-of-pressure tactile contact toolkit",
    packages=["coptact"],
    package_dir={"coptact": "python/coptact"},
    ext_modules=[ext],
    cmdclass={"build_ext": build_ext},
    python_requires=">=3.9",
    install_requires=["numpy"],
)
