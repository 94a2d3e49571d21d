#!/usr/bin/env python
# -*- encoding: utf-8 -*-



from setuptools import setup
import sys

sys.path.insert(0, '.')
from fdr_criticality import __version__


setup(name='fdr-criticality',
      version=__version__,
      description='Criticality, power and plug-in FDP experiments for the '
      'Benjamini-Hochberg procedure.',
      keywords='false discovery rate, multiple testing, simulation',
      license='LGPLv2.1',
      packages=['fdr_criticality', 'fdr_criticality.bin',
                'fdr_criticality.examples', 'fdr_criticality.tests'],
      package_data={'fdr_criticality.examples': ['*.json', '*.yaml']},
      entry_points={'console_scripts':
                    ['fdr-criticality = fdr_criticality.bin.cli:main']},
      install_requires=['arrow>=0.7.0', 'jsonschema', 'numpy', 'pandas',
                        'pyyaml', 'scipy'],
      zip_safe=False)
