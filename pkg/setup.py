from setuptools import setup, find_packages
from rnls import __version__

README = 'README.md'

setup(
    name='rnls',
    version=__version__,
    packages=find_packages(exclude=('tests', 'tests.*', 'examples', 'examples.*')),
    include_package_data=False,
    entry_points={
        'console_scripts': ['rnls=rnls.cli:main']
    },
    install_requires=[
        'torch>=1.13',
        'numpy',
        'scipy>=1.10',
        'tomli; python_version < "3.11"'
    ],
    extras_require={
        'test': ['pytest']
    },
    python_requires='>=3.8',
    license='MIT License',
    description='Action and energy ground states of rotating nonlinear Schrodinger equations by Fourier pseudospectral gradient flows.',
    long_description=open(README, encoding='utf-8').read(),
    long_description_content_type='text/markdown'
)
