# -*- coding: utf-8 -*-
#
# gpcollapse documentation build configuration file
import sys, os
sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

extensions = ['sphinx.ext.autodoc']
templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
project = u'gpcollapse'
copyright = u'2026'
version = '0.1'
release = '0.1'
exclude_patterns = []
pygments_style = 'sphinx'
html_theme = 'default'
html_static_path = ['_static']
htmlhelp_basename = 'gpcollapsedoc'
latex_documents = [
  ('index', 'gpcollapse.tex', u'gpcollapse Documentation',
   u'', 'manual'),
]
man_pages = [
    ('index', 'gpcollapse', u'gpcollapse Documentation',
     [u''], 1)
]
