# -*- coding: utf-8 -*-
#
# fdr-criticality documentation build configuration file.
import sys
import os

import sphinx_rtd_theme

sys.path.insert(0, os.path.abspath('..'))
from fdr_criticality import __version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'numpydoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'fdr-criticality'
copyright = '2026, fdr-criticality developers'
author = 'fdr-criticality developers'

release = __version__
version = '.'.join(release.split('.')[:2])

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

html_theme = 'sphinx_rtd_theme'
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
html_static_path = ['_static']
htmlhelp_basename = 'fdr-criticalitydoc'

man_pages = [
    (master_doc, 'fdr-criticality', 'fdr-criticality Documentation',
     [author], 1)
]

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable/', None),
                       'pandas': ('https://pandas.pydata.org/docs/', None)}
