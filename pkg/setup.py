from setuptools import setup, find_packages

setup(name='ShatterLab',
      version='0.1.0',
      license='MIT',
      description='Sparse Bernoulli-Gaussian perturbations, spectral diagnostics and pseudospectral shattering campaigns',
      python_requires='>=3.8',
      install_requires=[
          'numpy>=1.20',
          'scipy>=1.7',
          'pandas>=1.3',
      ],
      extras_require={
          'tests': ['pytest>=7'],
      },
      packages=find_packages(exclude=['tests', 'scripts', 'campaigns']))
