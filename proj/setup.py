import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        ext_path = Path.cwd() / self.get_ext_fullpath(ext.name)
        ext_dir = ext_path.parent.resolve()
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        cfg = "Debug" if self.debug else "Release"
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                f"-DCMAKE_BUILD_TYPE={cfg}",
                f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={ext_dir}{os.sep}",
                f"-DPython_EXECUTABLE={sys.executable}",
                "-DBITEXT_PYTHON_ONLY=ON",
            ],
            check=True,
        )
        subprocess.run(
            [
                "cmake",
                "--build", str(build_dir),
                "--target", "_core",
                "--parallel", str(os.cpu_count() or 2),
            ],
            check=True,
        )


setup(
    ext_modules=[CMakeExtension("bitext._core")],
    cmdclass={"build_ext": CMakeBuild},
)
