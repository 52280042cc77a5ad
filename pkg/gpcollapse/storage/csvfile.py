import os

import numpy as np
import simplejson as json
from zope.interface import implementer

from gpcollapse import logger
from gpcollapse.storage import (IFieldStorage, StorageError,
                                field_from_header, make_header)
from gpcollapse.util import dumps


_PREFIX = '# '


@implementer(IFieldStorage)
class CSVFieldStorage(object):
    """x,y,u rows with 17 significant digits under a '# {json}' line."""

    def save(self, field, path, metadata=None):
        header = make_header(field, metadata)
        xx, yy = field.grid.mesh()
        rows = np.column_stack([xx.ravel(), yy.ravel(), field.data.ravel()])
        try:
            with open(path, 'w') as f:
                f.write(_PREFIX + dumps(header, indent=None) + '\n')
                f.write('x,y,u\n')
                np.savetxt(f, rows, fmt='%.17g', delimiter=',')
        except (IOError, OSError) as e:
            raise StorageError('cannot write %r: %s' % (path, e))
        logger.debug('saved %r to %s' % (field, path))

    def load(self, path):
        if not os.path.exists(path):
            raise StorageError('no such field file: %r' % path)
        with open(path) as f:
            first = f.readline()
            if not first.startswith(_PREFIX):
                raise StorageError('%r has no header line' % path)
            try:
                header = json.loads(first[len(_PREFIX):])
            except ValueError as e:
                raise StorageError('bad header in %r: %s' % (path, e))
            try:
                rows = np.loadtxt(f, delimiter=',', skiprows=1, ndmin=2)
            except ValueError as e:
                raise StorageError('bad data in %r: %s' % (path, e))
        if rows.shape[1] != 3:
            raise StorageError('%r does not hold x,y,u rows' % path)
        field = field_from_header(header, rows[:, 2])
        return field, header.get('metadata', {})
