from setuptools import setup, find_packages

setup(
    name="siegel",
    version="0.1",
    packages=find_packages(exclude=['tests']),
    package_data={'siegel': ['config.json', 'templates/*.md']},
    install_requires=[
        'mpmath>=1.3.0',
        'numpy>=1.24.0',
        'scipy>=1.10.0',
        'sympy>=1.12',
        'markdown>=3.3.0'
    ],
    entry_points={
        'console_scripts': [
            'siegel=siegel.siegel_cli:main',
            'siegel-config=siegel.configure:main',
        ],
    },
)
