from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="infermarl",
    version="0.1.0",
    description="MADDPG with a context-conditional WGAN that infers missing observations of out-of-range agents",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["infermarl", "infermarl.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    keywords=[
        "multi-agent",
        "reinforcement-learning",
        "maddpg",
        "wgan-gp",
        "partial-observability",
        "particle-environment",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.21",
        "scipy>=1.7",
        "matplotlib>=3.5",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0",
            "mkdocs-material",
            "mkdocs-autorefs",
            "mkdocstrings[python]",
        ],
    },
    entry_points={
        "console_scripts": [
            "infermarl=infermarl.harness.cli:main",
        ],
    },
)
