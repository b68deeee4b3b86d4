"""Build the optional Cython sweep kernel; the package works without it.

Metadata lives in pyproject.toml; the subset repeated here keeps legacy
setuptools toolchains (which ignore the [project] table) producing a working
install with console scripts.
"""

from setuptools import Extension, find_packages, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("soficlab._glauber", ["src/soficlab/_glauber.pyx"])],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"cython kernel skipped ({exc}); pure-python fallback will be used")

setup(
    name="soficlab",
    version="0.1.0",
    python_requires=">=3.10",
    install_requires=["numpy>=1.24", "jsonschema>=4.0"],
    package_dir={"": "src"},
    packages=find_packages("src"),
    entry_points={
        "console_scripts": [
            "soficlab = soficlab.cli:main",
            "sofic-stats = soficlab.cli:main_sofic_stats",
            "tssm-check = soficlab.cli:main_tssm_check",
            "pressure = soficlab.cli:main_pressure",
            "entropy = soficlab.cli:main_entropy",
            "ssm-profile = soficlab.cli:main_ssm_profile",
            "kp-estimate = soficlab.cli:main_kp_estimate",
            "saw-marginal = soficlab.cli:main_saw_marginal",
        ]
    },
    ext_modules=ext_modules,
)
