"""
Persistence: the binary field file format and CSV / JSON-lines record tables.

Field file layout, little-endian::

    magic      8 bytes   b'RNLSF1\\0\\0'
    version    u32       1
    dim        u8
    per axis   u64 n, f64 min, f64 max
    model      f64 p, beta, Omega, omega (NaN when unset)
    potential  u8 tag, f64 coefficients (count fixed by the tag)
    samples    n_total x (f64 re, f64 im), x_1 fastest
"""
from typing import Dict, List, Sequence, Tuple
import csv
import json
import math
import struct
import threading
import numpy as np
import torch
from ..grid import Field, Grid
from ..physics import ModelParams
from ..physics.potential import coefficient_count, potential_from_tag
from ..util import InvocationDebug
from ..util.errors import FieldFileError

MAGIC = b'RNLSF1\x00\x00'
VERSION = 1
SAMPLE_DTYPE = np.dtype('<c16')

# serializes table and field writes across worker threads
_write_lock = threading.Lock()


def encode_field(f: Field, params: ModelParams) -> bytes:
    grid = f.grid
    header = [MAGIC, struct.pack('<IB', VERSION, grid.dim)]
    for n, (lo, hi) in zip(grid.points, grid.bounds):
        header.append(struct.pack('<Qdd', n, lo, hi))
    omega = math.nan if params.omega is None else params.omega
    header.append(struct.pack('<dddd', params.p, params.beta, params.Omega, omega))
    potential = params.potential
    header.append(struct.pack('<B{0}d'.format(len(potential.coefficients)), potential.tag, *potential.coefficients))
    samples = np.ascontiguousarray(f.flat().detach().cpu().numpy()).astype(SAMPLE_DTYPE, copy=False)
    return b''.join(header) + samples.tobytes()


class _Reader:

    def __init__(self, payload: bytes, path: str):
        self.payload = payload
        self.offset = 0
        self.path = path

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.offset + size > len(self.payload):
            raise FieldFileError(
                '{0} ends inside the header ({1} bytes)'.format(self.path, len(self.payload)),
                rule='size matches header'
            )
        values = struct.unpack_from(fmt, self.payload, self.offset)
        self.offset += size
        return values


def decode_field(payload: bytes, path: str = '<bytes>', device: str = 'cpu') -> Tuple[Field, ModelParams]:
    if payload[:len(MAGIC)] != MAGIC:
        raise FieldFileError('{0} is not a field file'.format(path), rule='magic RNLSF1')
    reader = _Reader(payload, path)
    reader.offset = len(MAGIC)
    version, dim = reader.take('<IB')
    if version != VERSION:
        raise FieldFileError('{0} has version {1}'.format(path, version), rule='version {0}'.format(VERSION))
    if dim not in (1, 2):
        raise FieldFileError('{0} has dim {1}'.format(path, dim), rule='dim in {1, 2}')
    points, bounds = [], []
    for _ in range(dim):
        n, lo, hi = reader.take('<Qdd')
        points.append(n)
        bounds.append((lo, hi))
    p, beta, Omega, omega = reader.take('<dddd')
    tag, = reader.take('<B')
    coefficients = reader.take('<{0}d'.format(coefficient_count(tag)))
    grid = Grid(tuple(bounds), tuple(points), device)
    expected = grid.size * SAMPLE_DTYPE.itemsize
    remaining = len(payload) - reader.offset
    if remaining != expected:
        raise FieldFileError(
            '{0} holds {1} sample bytes, the header announces {2}'.format(path, remaining, expected),
            rule='size matches header'
        )
    samples = np.frombuffer(payload, dtype=SAMPLE_DTYPE, offset=reader.offset).astype(np.complex128)
    data = torch.from_numpy(samples.reshape(grid.shape)).to(device)
    params = ModelParams(
        p=p, beta=beta, Omega=Omega, omega=None if math.isnan(omega) else omega,
        potential=potential_from_tag(tag, coefficients)
    )
    return Field(grid, data), params


@InvocationDebug('cli_io.write_field')
def write_field(f: Field, params: ModelParams, path: str):
    payload = encode_field(f, params)
    with _write_lock:
        with open(path, 'wb') as file:
            file.write(payload)


@InvocationDebug('cli_io.read_field')
def read_field(path: str, device: str = 'cpu') -> Tuple[Field, ModelParams]:
    try:
        with open(path, 'rb') as file:
            payload = file.read()
    except OSError as e:
        raise FieldFileError('cannot read {0}: {1}'.format(path, e), rule='readable file')
    return decode_field(payload, path, device)


def format_value(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return '%.17g' % value
    if value is None:
        return ''
    return str(value)


def json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


@InvocationDebug('cli_io.emit_records')
def emit_records(records: Sequence, format: str = 'csv', path: str = None, fields: Sequence[str] = None):
    """Write records (objects with ``FIELDS`` and ``to_row()``) as CSV or JSON lines, in list order."""
    if fields is None:
        if len(records) > 0:
            fields = type(records[0]).FIELDS
        else:
            from ..experiment.records import SweepRecord
            fields = SweepRecord.FIELDS
    for record in records:
        if tuple(type(record).FIELDS) != tuple(fields):
            raise FieldFileError('mixed record types in one table', rule='homogeneous record list')
    rows = [record.to_row() for record in records]
    with _write_lock:
        with open(path, 'w', newline='', encoding='utf-8') as file:
            if format == 'csv':
                writer = csv.writer(file, lineterminator='\n')
                writer.writerow(fields)
                for row in rows:
                    writer.writerow([format_value(row[key]) for key in fields])
            elif format == 'json-lines':
                for row in rows:
                    file.write(json.dumps({key: json_value(row[key]) for key in fields}) + '\n')
            else:
                raise FieldFileError('format "{0}"'.format(format), rule='format in {csv, json-lines}')


def load_records(path: str) -> List[Dict]:
    """Rows of a CSV table written by emit_records, numbers parsed back."""
    def parse(text: str):
        if text in ('true', 'false'):
            return text == 'true'
        if text == '':
            return None
        try:
            return int(text)
        except ValueError:
            pass
        try:
            return float(text)
        except ValueError:
            return text

    with open(path, newline='', encoding='utf-8') as file:
        return [{key: parse(value) for key, value in row.items()} for row in csv.DictReader(file)]
