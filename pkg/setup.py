import os
from setuptools import setup, find_packages

here = os.path.abspath(os.path.dirname(__file__))


with open(os.path.join(here, 'README.rst')) as f:
    README = f.read()

with open(os.path.join(here, 'CHANGES.txt')) as f:
    CHANGES = f.read()

requires = ['numpy', 'scipy', 'simplejson', 'zope.interface',
            'zope.dottedname', 'matplotlib']


setup(name='gpcollapse',
      version='0.1',
      description='gpcollapse',
      long_description=README + '\n\n' + CHANGES,
      classifiers=[
        "Programming Language :: Python",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        ],
      author='',
      author_email='',
      url='',
      keywords='gross-pitaevskii bose-einstein collapse townes',
      packages=find_packages(),
      include_package_data=True,
      package_data={'gpcollapse.tests': ['*.ini']},
      zip_safe=False,
      install_requires=requires,
      tests_require=requires,
      test_suite="gpcollapse",
      entry_points="""\
      [console_scripts]
      gpcollapse = gpcollapse.scripts.cli:main
      """,
      )
