from setuptools import setup, find_packages

setup(
    name='popcache',
    version='0.1',
    packages=find_packages(exclude=['tests', 'tests.*']),
    install_requires=[
        'numpy',
        'pandas',
        'pyyaml',
    ],
    extras_require={
        'test': [
            'pytest',
            'hypothesis',
        ],
    },
    entry_points={
        'console_scripts': [
            'popcache=popcache.cli:main',
        ],
    },
    description='Popularity-aware transmitter cache segmentation for multi-transmitter coded caching',
)
