# Sphinx configuration for the elctl documentation.
import configparser
import os
import sys
sys.path.insert(0, os.path.abspath('..'))

_setup = configparser.ConfigParser()
_setup.read(os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'setup.cfg'))

project = 'LibElControl'
copyright = '2024, LibElControl Project'
author = 'LibElControl Authors'
release = _setup['metadata']['version']
version = '.'.join(release.split('.')[:2])

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
    'sphinx.ext.intersphinx',
]

# Google-style docstrings only
napoleon_google_docstring = True
napoleon_numpy_docstring = False
autodoc_member_order = 'bysource'
autodoc_typehints = 'description'

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'scipy': ('https://docs.scipy.org/doc/scipy', None),
    'pandas': ('https://pandas.pydata.org/docs', None),
}

templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store', 'examples/*.py']

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
html_title = f'elctl {release}'
