import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name='rovella',
    version='0.1.0',
    author='rovella developers',
    description='Thermodynamic formalism of contracting Lorenz flows.',  # short description
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(),
    license='MIT',
    classifiers=["Development Status :: 3 - Alpha",
                 "Intended Audience :: Science/Research",
                 "License :: OSI Approved :: MIT License",
                 "Operating System :: OS Independent",
                 "Programming Language :: Python :: 3.7",
                 "Topic :: Scientific/Engineering :: Mathematics",
                 "Topic :: Scientific/Engineering :: Physics"],
    package_data={"rovella": ["config/*"]},
    # include_package_data=True, commented to include data!
    install_requires=['numpy',
                      'scipy',
                      'astropy',
                      'joblib',
                      'PyYAML',
                      'tqdm'],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["rovella=rovella.cli:main"]},
)
