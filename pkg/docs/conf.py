# This file is execfile()d with the current directory set to its
# containing dir.
#
# All configuration values have a default; only the ones that differ are set here.

import os
import re
import sys
from typing import Any

# The package itself and the local extensions are imported from here.
sys.path.insert(0, os.path.abspath('..'))
sys.path.append(os.path.abspath('extensions'))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
    'sphinx_copybutton',
    'attribute_table',
]

autodoc_member_order = 'bysource'
autodoc_typehints = 'none'

napoleon_numpy_docstring = True
napoleon_google_docstring = False

# Warn about all references to unknown targets
nitpicky = True

# Links used for cross-referencing stuff in other documentation
intersphinx_mapping = {
    'py': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
}

templates_path = []
source_suffix = '.rst'
master_doc = 'index'

# General information about the project.
project = 'qkd_efficiency'
copyright = '2025-present, The qkd-efficiency Authors'

version = ''
with open('../qkd_efficiency/__init__.py') as f:
    version = re.search(r'^__version__\s*=\s*[\'"]([^\'"]*)[\'"]', f.read(), re.MULTILINE).group(1)  # type: ignore

# The full version, including alpha/beta/rc tags.
release = version

language = 'en'
gettext_compact = False

exclude_patterns = ['_build']

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'vs'


# -- Options for HTML output ----------------------------------------------

html_experimental_html5_writer = True
html_theme = 'furo'
html_context = {}
html_theme_options: dict[str, Any] = {}

html_title = 'qkd-efficiency Documentation'
html_short_title = 'qkd-efficiency'

html_static_path = []
html_search_scorer = ''
html_js_files = []

# Output file base name for HTML help builder.
htmlhelp_basename = 'qkd_efficiency.doc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {}

latex_documents = [
    ('index', 'qkd_efficiency.tex', 'qkd-efficiency Documentation', 'The qkd-efficiency Authors', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [('index', 'qkd_efficiency', 'qkd-efficiency Documentation', ['The qkd-efficiency Authors'], 1)]
