import os

import numpy as np
import simplejson as json
from zope.interface import implementer

from gpcollapse import logger
from gpcollapse.storage import (IFieldStorage, StorageError,
                                field_from_header, make_header)
from gpcollapse.util import dumps


_DTYPE = '<f8'


@implementer(IFieldStorage)
class BinaryFieldStorage(object):
    """One JSON header line followed by little-endian float64 values in
    row-major (x-index major) order."""

    def save(self, field, path, metadata=None):
        header = make_header(field, metadata)
        try:
            with open(path, 'wb') as f:
                f.write(dumps(header, indent=None).encode('utf-8') + b'\n')
                f.write(np.ascontiguousarray(field.data,
                                             dtype=_DTYPE).tobytes())
        except (IOError, OSError) as e:
            raise StorageError('cannot write %r: %s' % (path, e))
        logger.debug('saved %r to %s' % (field, path))

    def load(self, path):
        if not os.path.exists(path):
            raise StorageError('no such field file: %r' % path)
        with open(path, 'rb') as f:
            first = f.readline()
            payload = f.read()
        try:
            header = json.loads(first.decode('utf-8'))
        except ValueError as e:
            raise StorageError('bad header in %r: %s' % (path, e))
        if len(payload) % 8:
            raise StorageError('%r is truncated' % path)
        data = np.frombuffer(payload, dtype=_DTYPE).astype(float)
        return field_from_header(header, data), header.get('metadata', {})
