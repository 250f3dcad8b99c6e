from setuptools import setup, find_packages

setup(
    name='gwcache',
    version='0.1.0',
    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    include_package_data=True,
    package_data={
        'gwcache.schemas': ['*.json'],
    },
    install_requires=[
        'numpy',
        'scipy',
        'matplotlib',
        'python-dotenv',
    ],
    extras_require={
        'test': [
            'pytest',
            'tox',
        ],
    },
    entry_points={
        'console_scripts': [
            'gwcache=gwcache:main',
        ],
    },
    description='Rate-memory bounds and a bit-level simulator for caching correlated files with Gray-Wyner descriptions.',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    classifiers=[
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.10',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Topic :: Scientific/Engineering :: Information Analysis',
    ],
    python_requires='>=3.10',
)
