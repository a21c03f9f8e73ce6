import setuptools
from fractodiff import __version__


setuptools.setup(
    name='fractodiff',
    version=__version__,
    packages=setuptools.find_packages(exclude=['examples', 'examples.*']),
    entry_points={
        "console_scripts": ["fractodiff=fractodiff:main"]
    },
    zip_safe=False,
    install_requires=['numpy', 'scipy', 'pandas', 'pyyaml', 'tqdm'],
    extras_require={'test': ['pytest', 'mpmath']},

    package_data={'': ['*.yml']}

)
