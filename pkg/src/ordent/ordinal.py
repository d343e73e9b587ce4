"""
Ordinal patterns of real windows and the combinatorics of the pattern alphabet.

A window ``(x_0, ..., x_d)`` is mapped to the permutation ``(i_0, ..., i_d)``
of ``{0, ..., d}`` that lists indices by non-increasing value, with equal
values listed by *decreasing* index. Patterns of degree ``d`` are encoded as
integers in ``[0, (d+1)!)`` with the Lehmer code of the ``order`` sequence,
most significant digit first.

>>> ordinal_pattern([3.0, 1.0, 2.0]).order
(0, 2, 1)
>>> pattern_to_index(Pattern((2, 1, 0))).value
5
"""
from dataclasses import dataclass
from itertools import permutations
from math import factorial, isfinite

import numpy as np

from .errors import InvalidInput

__all__ = [
    'D_MAX', 'Pattern', 'PatternIndex', 'ordinal_pattern', 'in_cell',
    'ordinal_orders', 'window_orders', 'encode_orders', 'decode_indices', 'pattern_to_index',
    'index_to_pattern', 'pattern_restriction', 'alpha_decomposition',
    'all_patterns', 'alphabet_size',
]

#: Largest supported degree; 13! still fits a signed 64-bit symbol.
D_MAX = 12


def alphabet_size(d):
    """Number of ordinal patterns of degree `d`, i.e. ``(d+1)!``."""
    _check_degree(d)
    return factorial(d + 1)


def _check_degree(d):
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
        raise InvalidInput(f'degree must be an integer, got {d!r}')
    if not 1 <= d <= D_MAX:
        raise InvalidInput(f'degree must satisfy 1 <= d <= {D_MAX}, got {d}')


@dataclass(frozen=True)
class Pattern:
    """Order type of a window of length ``d + 1``."""

    order: tuple

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        object.__setattr__(self, 'order', order)
        _check_degree(len(order) - 1)
        if sorted(order) != list(range(len(order))):
            raise InvalidInput(f'{order} is not a permutation of 0..{len(order) - 1}')

    @property
    def d(self):
        return len(self.order) - 1

    def __iter__(self):
        return iter(self.order)

    def __len__(self):
        return len(self.order)


@dataclass(frozen=True)
class PatternIndex:
    """Integer symbol of a pattern of degree `d`."""

    value: int
    d: int

    def __post_init__(self):
        _check_degree(self.d)
        if not 0 <= self.value < factorial(self.d + 1):
            raise InvalidInput(
                f'index {self.value} out of range [0, {factorial(self.d + 1)}) for d={self.d}')

    def __int__(self):
        return self.value


def _check_window(window):
    if len(window) < 2:
        raise InvalidInput('window must contain at least 2 values')
    if len(window) - 1 > D_MAX:
        raise InvalidInput(f'window longer than D_MAX + 1 = {D_MAX + 1}')
    for x in window:
        if not isfinite(x):
            raise InvalidInput(f'window contains a non-finite value: {x!r}')


def ordinal_pattern(window):
    """
    Return the ordinal pattern of a single window.

    Each index is placed at the position equal to the number of entries that
    must precede it: larger values, or equal values at a larger index. Ties
    are compared with exact floating-point equality.

    Parameters
    ----------
    window : sequence of float
        At least two finite values.

    Returns
    -------
    Pattern
    """
    x = [float(v) for v in window]
    _check_window(x)
    n = len(x)
    order = [0] * n
    for i in range(n):
        pos = 0
        for j in range(n):
            if x[j] > x[i] or (x[j] == x[i] and j > i):
                pos += 1
        order[pos] = i
    return Pattern(tuple(order))


def in_cell(window, pattern):
    """True if `window` lies in the cell of `pattern`.

    Checks ``x[i_0] >= x[i_1] >= ...`` and that every tie ``x[i_t] == x[i_t+1]``
    has ``i_t > i_t+1``.
    """
    order = pattern.order
    if len(window) != len(order):
        raise InvalidInput('window and pattern lengths differ')
    for a, b in zip(order, order[1:]):
        if window[a] < window[b]:
            return False
        if window[a] == window[b] and a < b:
            return False
    return True


def ordinal_orders(series, d):
    """
    Patterns of all overlapping windows of length ``d + 1``, as an array.

    Returns an ``(len(series) - d, d + 1)`` integer array whose row ``t`` is
    the ``order`` of ``series[t:t+d+1]``.
    """
    _check_degree(d)
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise InvalidInput('series must be one-dimensional')
    if len(x) < d + 1:
        raise InvalidInput(f'series of length {len(x)} is shorter than the window d+1={d + 1}')
    if not np.all(np.isfinite(x)):
        raise InvalidInput('series contains non-finite values')
    return window_orders(np.lib.stride_tricks.sliding_window_view(x, d + 1))


def window_orders(windows):
    """Orders of independent windows, one per row of a 2-D array."""
    w = np.asarray(windows, dtype=float)
    if w.ndim != 2 or w.shape[1] < 2:
        raise InvalidInput('windows must be a (n, d+1) array with d >= 1')
    # Reversing the window turns "ties by descending index" into the stable
    # order of a descending sort.
    rev = np.argsort(-w[:, ::-1], axis=1, kind='stable')
    return w.shape[1] - 1 - rev


def encode_orders(orders):
    """Lehmer codes of a stack of orders (rows are permutations)."""
    orders = np.asarray(orders)
    n = orders.shape[1]
    codes = np.zeros(orders.shape[0], dtype=np.int64)
    for k in range(n - 1):
        digit = (orders[:, k + 1:] < orders[:, k:k + 1]).sum(axis=1)
        codes += digit * factorial(n - 1 - k)
    return codes


def decode_indices(codes, d):
    """Inverse of :func:`encode_orders` for degree `d`."""
    codes = np.asarray(codes, dtype=np.int64)
    n = d + 1
    digits = np.empty((len(codes), n), dtype=np.int64)
    rem = codes.copy()
    for k in range(n):
        w = factorial(n - 1 - k)
        digits[:, k] = rem // w
        rem = rem % w
    orders = np.empty_like(digits)
    for row, dig in enumerate(digits):
        pool = list(range(n))
        orders[row] = [pool.pop(j) for j in dig]
    return orders


def pattern_to_index(p):
    """Encode a pattern as its Lehmer index."""
    order = p.order
    n = len(order)
    value = 0
    for k in range(n):
        smaller = sum(1 for j in range(k + 1, n) if order[j] < order[k])
        value = value * (n - k) + smaller
    return PatternIndex(value, p.d)


def index_to_pattern(ix):
    """Decode a :class:`PatternIndex` (or ``(value, d)`` pair) to a pattern."""
    if not isinstance(ix, PatternIndex):
        ix = PatternIndex(*ix)
    n = ix.d + 1
    rem = ix.value
    pool = list(range(n))
    order = []
    for k in range(n):
        w = factorial(n - 1 - k)
        order.append(pool.pop(rem // w))
        rem %= w
    return Pattern(tuple(order))


def pattern_restriction(p):
    """Pattern of the first ``d`` entries of any window realizing `p`.

    Dropping the last index from the order keeps the relative order of the
    remaining indices, including their tie ranks.
    """
    if p.d < 2:
        raise InvalidInput('restriction needs a pattern of degree >= 2')
    return Pattern(tuple(i for i in p.order if i != p.d))


def alpha_decomposition(p):
    """
    Degree ``d+1`` patterns whose cells cover the shifted cell of `p`.

    Element ``j`` inserts index 0 at position ``j`` of ``(i_0+1, ..., i_d+1)``,
    for ``j = 0, ..., d+1``. A window ``w`` of length ``d + 2`` whose tail
    ``w[1:]`` has pattern `p` has its own pattern among these.
    """
    if p.d + 1 > D_MAX:
        raise InvalidInput(f'decomposition of degree {p.d} exceeds D_MAX')
    shifted = [i + 1 for i in p.order]
    return [Pattern(tuple(shifted[:j] + [0] + shifted[j:])) for j in range(p.d + 2)]


def all_patterns(d):
    """Iterate over every pattern of degree `d` in lexicographic order."""
    _check_degree(d)
    for perm in permutations(range(d + 1)):
        yield Pattern(perm)
