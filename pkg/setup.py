# setup.py — fallback for systems without PEP 621 support.
# Canonical metadata lives in pyproject.toml.
import os
from setuptools import setup

setup(
    name="fredholm-completion",
    version="0.1.0",
    packages=["fredholm_completion"],
    include_package_data=True,
    install_requires=[
        "numpy",
        "pyyaml",
    ],
    extras_require={
        "dev": ["pytest", "black"],
    },
    entry_points={
        'console_scripts': [
            'fredholm-completion = fredholm_completion.__main__:main',
        ],
    },
    description="Fredholm and Weyl completions of partial upper triangular operator matrices",
    long_description=open('README.md').read() if os.path.exists('README.md') else '',
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.10',
)
