import setuptools

setuptools.setup(
    name="geo_context_classifier",
    version="0.0.1",
    packages=setuptools.find_packages(exclude=["tests", "examples*"]),
    py_modules=["constants", "exceptions"],
    install_requires=[
        "dataclasses-json==0.6.7",
        "numpy==2.1.3",
        "python-dotenv==1.1.1",
        "scipy==1.14.1",
    ],
    extras_require={"test": ["pytest==8.3.3"]},
    entry_points={"console_scripts": ["geoctx=cli.main:main"]},
    python_requires=">=3.10",
)
