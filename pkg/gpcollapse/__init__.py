"""Desk-scale laboratory for collapsing 2D attractive Gross-Pitaevskii
ground states under singular potentials.
"""
import logging


__version__ = '0.1'

logger = logging.getLogger('gpcollapse')
