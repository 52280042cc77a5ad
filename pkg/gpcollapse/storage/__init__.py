
from zope.interface import Interface

from gpcollapse.errors import GPCollapseError, ConfigError


class StorageError(GPCollapseError):
    """Error raised when a field file cannot be written or read."""
    pass


class IFieldStorage(Interface):
    """Interface definition for field file backends.

    A field file holds one Field2D together with a JSON header giving
    the grid (half_width, n, center), the field flags and free-form
    metadata. Reloading a saved field must give back the same data bit
    for bit.
    """

    def save(field, path, metadata=None):
        """Write `field` to `path`.

        `metadata` is any JSON-serialisable mapping, stored in the header
        and handed back by load().
        """

    def load(path):
        """Read a field file.

        Returns a (field, metadata) tuple. Raises StorageError when the
        file is missing, truncated or its header is invalid.
        """


_BACKENDS = {'csv': 'gpcollapse.storage.csvfile.CSVFieldStorage',
             'binary': 'gpcollapse.storage.binary.BinaryFieldStorage'}


def make_header(field, metadata=None):
    header = field.grid.describe()
    header['dirichlet'] = field.dirichlet
    header['normalized'] = field.normalized
    header['metadata'] = metadata or {}
    return header


def field_from_header(header, data):
    from gpcollapse.field import Field2D, Grid2D
    try:
        grid = Grid2D(header['half_width'], header['n'], header['center'])
    except (KeyError, TypeError, ValueError) as e:
        raise StorageError('invalid field header: %s' % e)
    n = grid.n
    if data.size != n * n:
        raise StorageError('expected %d values, found %d' % (n * n,
                                                           data.size))
    return Field2D(grid, data.reshape(n, n),
                   normalized=header.get('normalized', False),
                   dirichlet=header.get('dirichlet', True))


def get_storage(name):
    """Returns a backend instance for 'csv', 'binary' or a dotted class
    name."""
    from gpcollapse.util import resolve_name
    klass = resolve_name(_BACKENDS.get(name, name))
    backend = klass()
    if not IFieldStorage.providedBy(backend):
        raise ConfigError('%r does not provide IFieldStorage' % name,
                          field='storage.backend')
    return backend


def guess_storage(path):
    """Backend matching the file extension (csv unless '.bin')."""
    return get_storage('binary' if path.endswith('.bin') else 'csv')
