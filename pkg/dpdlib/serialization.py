"""
Value codecs for group communication.

Every collective moves values through a codec supplied with the operator (or
passed explicitly), so all members of a group agree on the wire encoding
without negotiating it. Numeric codecs are 64-bit little-endian.
"""

import pickle
import struct

import numpy as np


class Codec:
    """Symmetric bytes <-> value conversion"""

    name = 'abstract'

    def encode(self, value) -> bytes:
        raise NotImplementedError

    def decode(self, payload: bytes):
        raise NotImplementedError

    def __repr__(self):
        return f'<{type(self).__name__} {self.name}>'


class Float64Codec(Codec):
    name = 'float64'

    def encode(self, value):
        return struct.pack('<d', float(value))

    def decode(self, payload):
        return struct.unpack('<d', payload)[0]


class Int64Codec(Codec):
    name = 'int64'

    def encode(self, value):
        return struct.pack('<q', int(value))

    def decode(self, payload):
        return struct.unpack('<q', payload)[0]


class Utf8Codec(Codec):
    """Length-prefixed UTF-8 string"""

    name = 'utf8'

    def encode(self, value):
        data = value.encode('utf-8')
        return struct.pack('<I', len(data)) + data

    def decode(self, payload):
        (length,) = struct.unpack_from('<I', payload)
        return payload[4:4 + length].decode('utf-8')


class ArrayCodec(Codec):
    """
    N-dimensional numpy array: u32 ndim, u32 extent per dimension, then the
    elements in C order as 64-bit little-endian values.
    """

    def __init__(self, dtype):
        self.dtype = np.dtype(dtype).newbyteorder('<')
        self.name = f'{np.dtype(dtype).name}[]'

    def encode(self, value):
        array = np.ascontiguousarray(value, dtype=self.dtype)
        header = struct.pack(f'<I{array.ndim}I', array.ndim, *array.shape)
        return header + array.tobytes()

    def decode(self, payload):
        (ndim,) = struct.unpack_from('<I', payload)
        shape = struct.unpack_from(f'<{ndim}I', payload, 4)
        offset = 4 + 4 * ndim
        array = np.frombuffer(payload, dtype=self.dtype, offset=offset)
        return array.reshape(shape).astype(self.dtype.newbyteorder('='))


class PickleCodec(Codec):
    """Fallback for arbitrary Python values (tuples, dicts, Maybe, user classes)"""

    name = 'pickle'

    def encode(self, value):
        return pickle.dumps(value, protocol=pickle.HIGHEST_PROTOCOL)

    def decode(self, payload):
        return pickle.loads(payload)


FLOAT64 = Float64Codec()
INT64 = Int64Codec()
UTF8 = Utf8Codec()
FLOAT64_ARRAY = ArrayCodec(np.float64)
PICKLE = PickleCodec()
