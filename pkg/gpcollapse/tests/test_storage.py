import os
import tempfile
import unittest

import numpy as np

from gpcollapse.errors import ConfigError
from gpcollapse.field import Grid2D, gaussian
from gpcollapse.storage import StorageError, get_storage, guess_storage
from gpcollapse.storage.binary import BinaryFieldStorage
from gpcollapse.storage.csvfile import CSVFieldStorage


class TestFieldStorage(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        grid = Grid2D(3.5, 32, center=(0.25, -1.))
        self.field = gaussian(grid, (0.4, -0.9), 0.7)

    def _round_trip(self, backend, name):
        path = os.path.join(self.tmp, name)
        backend.save(self.field, path, {'a': 5.5, 'note': 'test'})
        loaded, metadata = backend.load(path)
        self.assertEqual(loaded.grid, self.field.grid)
        self.assertTrue(loaded.normalized)
        self.assertEqual(loaded.data.tobytes(), self.field.data.tobytes())
        self.assertEqual(metadata, {'a': 5.5, 'note': 'test'})
        return path

    def test_csv(self):
        path = self._round_trip(CSVFieldStorage(), 'u.csv')
        with open(path) as f:
            self.assertTrue(f.readline().startswith('# {'))
            self.assertEqual(f.readline().strip(), 'x,y,u')

    def test_binary(self):
        path = self._round_trip(BinaryFieldStorage(), 'u.bin')
        with open(path, 'rb') as f:
            header = f.readline()
            self.assertEqual(len(f.read()), 8 * 32 * 32)
        self.assertTrue(header.startswith(b'{'))

    def test_errors(self):
        for backend in (CSVFieldStorage(), BinaryFieldStorage()):
            self.assertRaises(StorageError, backend.load,
                              os.path.join(self.tmp, 'missing'))

        path = os.path.join(self.tmp, 'bad.csv')
        with open(path, 'w') as f:
            f.write('x,y,u\n1,2,3\n')
        self.assertRaises(StorageError, CSVFieldStorage().load, path)

        path = os.path.join(self.tmp, 'short.bin')
        BinaryFieldStorage().save(self.field, path)
        with open(path, 'rb') as f:
            content = f.read()
        with open(path, 'wb') as f:
            f.write(content[:-3])
        self.assertRaises(StorageError, BinaryFieldStorage().load, path)
        with open(path, 'wb') as f:
            f.write(content[:-8])
        self.assertRaises(StorageError, BinaryFieldStorage().load, path)

    def test_lookup(self):
        self.assertTrue(isinstance(get_storage('csv'), CSVFieldStorage))
        self.assertTrue(isinstance(get_storage('binary'),
                                   BinaryFieldStorage))
        dotted = 'gpcollapse.storage.binary.BinaryFieldStorage'
        self.assertTrue(isinstance(get_storage(dotted), BinaryFieldStorage))
        self.assertTrue(isinstance(guess_storage('u.bin'),
                                   BinaryFieldStorage))
        self.assertTrue(isinstance(guess_storage('u.csv'), CSVFieldStorage))
        self.assertRaises(ConfigError, get_storage,
                          'gpcollapse.background.ZeroBackground')
        self.assertRaises(ConfigError, get_storage, 'nosuch')

    def test_unnormalized(self):
        grid = Grid2D(2., 16)
        field = gaussian(grid)
        from gpcollapse.field import Field2D
        raw = Field2D(grid, 3. * field.data)
        path = os.path.join(self.tmp, 'raw.bin')
        BinaryFieldStorage().save(raw, path)
        loaded, metadata = BinaryFieldStorage().load(path)
        self.assertFalse(loaded.normalized)
        self.assertEqual(metadata, {})
        np.testing.assert_array_equal(loaded.data, raw.data)
