"""CMake-driven extension build for the trex python package."""

import pathlib
import subprocess
import sys

import pybind11
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

ROOT = pathlib.Path(__file__).resolve().parent


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        out = pathlib.Path(self.get_ext_fullpath(ext.name)).resolve()
        build_dir = pathlib.Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        config = "Debug" if self.debug else "Release"
        subprocess.run(
            [
                "cmake",
                "-S", str(ROOT),
                "-B", str(build_dir),
                f"-DCMAKE_BUILD_TYPE={config}",
                "-DTREX_TESTS=OFF",
                "-DTREX_PYTHON=ON",
                f"-DPython_EXECUTABLE={sys.executable}",
                f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_trex", "-j"],
            check=True,
        )
        built = next((build_dir / "python_module").glob("_trex.*"))
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(built.read_bytes())


setup(
    ext_modules=[CMakeExtension("trex._trex")],
    cmdclass={"build_ext": CMakeBuild},
)
