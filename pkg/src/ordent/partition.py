"""
Symbol sequences of ordinal partitions and their empirical cell histograms.

Cells are identified by canonical byte keys: every symbol is written as a
big-endian unsigned 64-bit integer, tuples and k-grams are the concatenation
of their members. Key streams are handled as ``(n, width)`` ``uint8`` arrays
so that counting stays vectorised; plain sequences of ``bytes`` are accepted
wherever a key stream is expected.

Serialization
-------------
JSON forms carry a ``format`` tag and hex-encoded keys. The binary forms
start with the magic ``b"ORD1"`` followed by a one-byte kind tag; all
integers after that are little-endian ``u64``:

* partition, tag ``b"P"``: ``ncells`` then ``ncells`` records of
  ``keylen, key bytes, count``.
* symbol sequence, tag ``b"S"``: ``d, arity, length`` then
  ``length * arity`` symbols in time-major order.
"""
import json
import struct
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .ordinal import _check_degree, alphabet_size, encode_orders, ordinal_orders

__all__ = [
    'SymbolSequence', 'EmpiricalPartition', 'symbolize', 'symbolize_multi',
    'block_keys', 'k_blocks', 'partition_from_keys', 'join', 'refines',
    'shift_refinement_check', 'merge', 'MAGIC',
]

MAGIC = b'ORD1'
_KEY_DTYPE = np.dtype('>u8')


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """
    Per-time-step cells of the ordinal partition of ``n`` observables.

    Attributes
    ----------
    d : int
        Pattern degree.
    symbols : numpy.ndarray
        ``(length, arity)`` array of pattern indices; row ``t`` is the cell
        of the join over observables at time ``t``.
    """

    d: int
    symbols: np.ndarray

    def __post_init__(self):
        _check_degree(self.d)
        sym = np.asarray(self.symbols, dtype=np.int64)
        if sym.ndim == 1:
            sym = sym[:, None]
        if sym.ndim != 2 or sym.shape[1] < 1:
            raise InvalidInput('symbols must be a (length, arity) array')
        if sym.size and (sym.min() < 0 or sym.max() >= alphabet_size(self.d)):
            raise InvalidInput(f'symbol out of range for degree {self.d}')
        sym.setflags(write=False)
        object.__setattr__(self, 'symbols', sym)

    @property
    def arity(self):
        return self.symbols.shape[1]

    def __len__(self):
        return self.symbols.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SymbolSequence):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.symbols, other.symbols)

    def to_json(self):
        return json.dumps({
            'format': 'ordent.symbols',
            'd': self.d,
            'arity': self.arity,
            'symbols': self.symbols.tolist(),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        if obj.get('format') != 'ordent.symbols':
            raise InvalidInput('not an ordent symbol sequence document')
        sym = np.asarray(obj['symbols'], dtype=np.int64).reshape(-1, obj['arity'])
        return cls(obj['d'], sym)

    def to_bytes(self):
        head = MAGIC + b'S' + struct.pack('<3Q', self.d, self.arity, len(self))
        return head + self.symbols.astype('<u8').tobytes()

    @classmethod
    def from_bytes(cls, blob):
        if blob[:5] != MAGIC + b'S':
            raise InvalidInput('bad magic for binary symbol sequence')
        d, arity, length = struct.unpack_from('<3Q', blob, 5)
        body = np.frombuffer(blob, dtype='<u8', offset=29, count=arity * length)
        return cls(int(d), body.astype(np.int64).reshape(length, arity))


@dataclass(frozen=True)
class EmpiricalPartition:
    """Histogram of cell keys: an empirical measure on a finite partition."""

    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        counts = {}
        for key, c in self.counts.items():
            c = int(c)
            if c < 0:
                raise InvalidInput('cell counts must be nonnegative')
            if c:
                counts[bytes(key)] = c
        object.__setattr__(self, 'counts', counts)

    @property
    def total(self):
        return sum(self.counts.values())

    def __len__(self):
        return len(self.counts)

    def merge(self, other):
        """Pool the counts of two histograms (counts and totals add)."""
        return merge(self, other)

    def to_json(self):
        return json.dumps({
            'format': 'ordent.partition',
            'total': self.total,
            'counts': {k.hex(): v for k, v in sorted(self.counts.items())},
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        if obj.get('format') != 'ordent.partition':
            raise InvalidInput('not an ordent partition document')
        part = cls({bytes.fromhex(k): v for k, v in obj['counts'].items()})
        if part.total != obj['total']:
            raise InvalidInput('total does not match the sum of counts')
        return part

    def to_bytes(self):
        out = [MAGIC, b'P', struct.pack('<Q', len(self.counts))]
        for key, c in sorted(self.counts.items()):
            out.append(struct.pack('<Q', len(key)))
            out.append(key)
            out.append(struct.pack('<Q', c))
        return b''.join(out)

    @classmethod
    def from_bytes(cls, blob):
        if blob[:5] != MAGIC + b'P':
            raise InvalidInput('bad magic for binary partition')
        (ncells,), pos = struct.unpack_from('<Q', blob, 5), 13
        counts = {}
        for _ in range(ncells):
            (klen,) = struct.unpack_from('<Q', blob, pos)
            pos += 8
            key = bytes(blob[pos:pos + klen])
            pos += klen
            (c,) = struct.unpack_from('<Q', blob, pos)
            pos += 8
            counts[key] = c
        return cls(counts)


def merge(p, q):
    counts = Counter(p.counts)
    counts.update(q.counts)
    return EmpiricalPartition(dict(counts))


def symbolize(series, d):
    """Ordinal symbols of a scalar series at degree `d` (arity 1)."""
    codes = encode_orders(ordinal_orders(series, d))
    return SymbolSequence(d, codes[:, None])


def symbolize_multi(series_list, d):
    """
    Symbols of the join of the ordinal partitions of several observables.

    Parameters
    ----------
    series_list : sequence of sequences of float
        One series per observable, all of the same length.
    d : int
        Pattern degree.
    """
    series_list = [np.asarray(s, dtype=float) for s in series_list]
    if not series_list:
        raise InvalidInput('need at least one series')
    lengths = {len(s) for s in series_list}
    if len(lengths) != 1:
        raise InvalidInput(f'series lengths differ: {sorted(lengths)}')
    cols = [encode_orders(ordinal_orders(s, d)) for s in series_list]
    return SymbolSequence(d, np.column_stack(cols))


def block_keys(s, k):
    """Canonical byte keys of the contiguous k-grams of `s`.

    Returns a ``(len(s) - k + 1, 8 * k * arity)`` ``uint8`` array.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidInput(f'block length must be a positive integer, got {k!r}')
    if k > len(s):
        raise InvalidInput(f'block length {k} exceeds sequence length {len(s)}')
    raw = s.symbols.astype(_KEY_DTYPE).view(np.uint8).reshape(len(s), -1)
    if k == 1:
        return raw
    win = np.lib.stride_tricks.sliding_window_view(raw, k, axis=0)
    # win has shape (n, width, k); keys are time-major.
    return np.ascontiguousarray(win.transpose(0, 2, 1)).reshape(win.shape[0], -1)


def _as_key_array(keys):
    if isinstance(keys, np.ndarray):
        if keys.ndim == 1 and keys.dtype.kind == 'V':
            keys = keys.view(np.uint8).reshape(len(keys), -1)
        if keys.ndim != 2:
            raise InvalidInput('key arrays must be (n, width)')
        return np.ascontiguousarray(keys, dtype=np.uint8)
    keys = [bytes(k) for k in keys]
    widths = {len(k) for k in keys}
    if len(widths) > 1:
        # Length-prefix so that concatenated pair keys stay unambiguous.
        width = max(widths) + 8
        keys = [struct.pack('>Q', len(k)) + k.ljust(width - 8, b'\0') for k in keys]
    else:
        width = widths.pop() if widths else 0
    buf = np.frombuffer(b''.join(keys), dtype=np.uint8)
    return buf.reshape(len(keys), width)


def _void_view(arr):
    if arr.shape[1] == 0:
        return np.zeros(len(arr), dtype='V1')
    arr = np.ascontiguousarray(arr)
    return arr.view(np.dtype((np.void, arr.shape[1]))).ravel()


def partition_from_keys(keys):
    """Histogram of a key stream."""
    arr = _as_key_array(keys)
    if arr.shape[1] == 0:
        return EmpiricalPartition({b'': len(arr)})
    uniq, counts = np.unique(_void_view(arr), return_counts=True)
    return EmpiricalPartition({u.tobytes(): int(c) for u, c in zip(uniq, counts)})


def k_blocks(s, k):
    """Empirical partition of the k-grams of `s` (total ``len(s) - k + 1``)."""
    return partition_from_keys(block_keys(s, k))


def _paired(a, b):
    a, b = _as_key_array(a), _as_key_array(b)
    if len(a) != len(b):
        raise InvalidInput(f'key streams differ in length: {len(a)} != {len(b)}')
    return a, b


def join(a, b):
    """
    Join of two partitions observed on the same sample stream.

    Each sample is keyed by the concatenation of its two cell keys, so the
    join with the trivial one-cell partition (empty keys) reproduces `a`.
    """
    a, b = _paired(a, b)
    return partition_from_keys(np.hstack([a, b]))


def refines(fine, coarse):
    """True if every fine cell seen in the stream sits inside one coarse cell."""
    fine, coarse = _paired(fine, coarse)
    if len(fine) == 0:
        return True
    n_fine = len(np.unique(_void_view(fine)))
    n_pair = len(np.unique(_void_view(np.hstack([fine, coarse]))))
    return n_fine == n_pair


def shift_refinement_check(series, d):
    """Check that degree ``d+1`` symbols determine the degree-d symbols of the shifted series."""
    x = np.asarray(series, dtype=float)
    if len(x) < d + 2:
        raise InvalidInput(f'series of length {len(x)} is shorter than d+2={d + 2}')
    fine = block_keys(symbolize(x, d + 1), 1)
    coarse = block_keys(symbolize(x[1:], d), 1)
    return refines(fine, coarse)
