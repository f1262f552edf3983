from setuptools import setup, find_packages

setup(
    name="degradekit",
    version="0.1.0",
    description="Degradation synthesis, prompts, signatures and fusion metrics for infrared and visible image fusion.",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests"]),
    package_data={"degradekit": ["resources/*.json"]},
    install_requires=[
        "numpy",
        "scipy",
        "Pillow",
        "pandas",
        "tomli; python_version < '3.11'",
    ],
    extras_require={
        "test": ["pytest", "hypothesis"],
    },
    entry_points={
        "console_scripts": ["degradekit=degradekit.cli:main"],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.10',
)
