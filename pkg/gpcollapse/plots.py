""" SVG figures of a sweep.
"""
import math
import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # NOQA
import numpy as np  # NOQA

from gpcollapse import logger  # NOQA


def _resolved(records):
    return [r for r in records if r.resolved and not math.isnan(r.energy)]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format='svg')
    plt.close(fig)
    logger.debug('wrote %s' % path)
    return path


def energy_plot(records, astar, path, fit=None, limit=None):
    """-E(a) against a* - a on log-log axes, with the fitted line and the
    closed-form asymptote."""
    records = [r for r in _resolved(records) if r.energy < 0]
    gap = np.array([astar - r.a for r in records])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(gap, [-r.energy for r in records], 'o', label='-E(a)')
    if len(gap):
        span = np.geomspace(gap.min(), gap.max(), 50)
        if fit is not None:
            ax.loglog(span, fit.prefactor * span ** fit.exponent, '-',
                      label='fit: %.3g (a*-a)^%.3f' % (fit.prefactor,
                                                        fit.exponent))
        if limit is not None and fit is not None:
            ax.loglog(span, abs(limit) * span ** fit.exponent, '--',
                      label='closed form prefactor %.3g' % abs(limit))
    ax.set_xlabel('a* - a')
    ax.set_ylabel('-E(a)')
    ax.grid(True, which='both', alpha=0.3)
    ax.legend()
    return _save(fig, path)


def h1_plot(records, path):
    records = _resolved(records)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot([r.fraction for r in records], [r.h1_err for r in records],
            'o-', label='H1')
    ax.plot([r.fraction for r in records], [r.l2_err for r in records],
            's--', label='L2')
    ax.set_xlabel('a / a*')
    ax.set_ylabel('distance to beta Q0(beta x)')
    ax.set_yscale('log')
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def profile_overlay(rescaled, reference, path, label=None):
    """Cut along the x axis through the centre of the rescaled state."""
    grid = rescaled.grid
    middle = grid.n // 2
    fig, ax = plt.subplots(figsize=(6, 4.5))
    # n even: average the two rows straddling the axis
    cut = 0.5 * (rescaled.data[:, middle - 1] + rescaled.data[:, middle])
    ref = 0.5 * (reference.data[:, middle - 1] + reference.data[:, middle])
    ax.plot(grid.x, cut, '-', label=label or 'rescaled minimizer')
    ax.plot(grid.x, ref, '--', label='beta Q0(beta x)')
    ax.set_xlabel('x')
    ax.set_ylabel('w(x, 0)')
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def write_plots(directory, records, astar, fit=None, limit=None,
                overlay=None):
    """Writes energy.svg, h1.svg and, given (rescaled, reference),
    profile.svg. Returns the paths written."""
    paths = [energy_plot(records, astar, os.path.join(directory,
                                                      'energy.svg'),
                         fit, limit),
             h1_plot(records, os.path.join(directory, 'h1.svg'))]
    if overlay is not None:
        paths.append(profile_overlay(overlay[0], overlay[1],
                                     os.path.join(directory, 'profile.svg')))
    return paths
