import os

from setuptools import setup

with open(os.path.join(os.path.dirname(__file__), "README.md")) as readme:
    long_description = readme.read()

classifiers = [
    "Development Status :: 3 - Alpha",
    "Intended Audience :: Science/Research",
    "License :: OSI Approved :: MIT License",
    "Operating System :: OS Independent",
    "Programming Language :: Python",
    "Programming Language :: Python :: 3.7",
    "Programming Language :: Python :: 3.8",
    "Programming Language :: Python :: 3.9",
    "Topic :: Scientific/Engineering :: Physics",
]

setup(
    name="lzsmcap",
    packages=["lzsmcap"],
    install_requires=["typedpy>=2.6,<2.16", "numpy>=1.17", "scipy>=1.7", "pandas>=1.1"],
    python_requires=">=3.7",
    entry_points={"console_scripts": ["lzsmcap=lzsmcap.cli:main"]},
    classifiers=classifiers,
    description="Parametric capacitance of a double quantum dot under double-passage "
    "Landau-Zener-Stuckelberg-Majorana driving",
    long_description_content_type="text/markdown",
    license="MIT",
    long_description=long_description,
    keywords=["quantum dot", "Landau-Zener", "interferometry", "capacitance", "reflectometry"],
    version="0.1.0",
)

# coverage run --source=lzsmcap/ -m pytest tests/
# coverage html
# load in browser from coverage_html_report

# pylint --rcfile=setup.cfg lzsmcap
