"""
Plug-in entropies of ordinal partitions and the Kolmogorov-Sinai table.

All quantities are in nats. For a symbol sequence of degree ``d`` the table
reports, for each block length ``k``,

* the block estimate ``H_k / k``, with ``H_k`` the entropy of the k-gram
  histogram over all ``len - k + 1`` windows, and
* the conditional estimate ``H(X_1..X_k+1) - H(X_1..X_k)`` where both terms
  are computed over the same ``len - k`` windows. This is the empirical
  conditional entropy of the next symbol, so it is never negative and is
  exactly zero whenever the continuation of every observed k-block is unique.

A cell is *reliable* when both its k-gram and (k+1)-gram histograms have at
most ``SUPPORT_RATIO * total`` distinct blocks, and the first-order
undersampling bias of the conditional estimate,
``(distinct_(k+1) - distinct_k) / (2 * total)``, is at most :data:`BIAS_TOL`.
The ratio rule alone admits cells whose bias is several hundredths of a nat.
"""
import csv
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .dynamics import BURN_IN, initial_point, orbit, splitmix64
from .errors import InsufficientData, InvalidInput
from .ordinal import alphabet_size
from .partition import symbolize_multi

__all__ = [
    'shannon', 'entropy_of_counts', 'entropy_rate_table', 'ks_table',
    'permutation_entropy', 'EntropyCell', 'EntropyTable', 'SUPPORT_RATIO',
    'MONOTONE_TOL', 'BIAS_TOL', 'DEFAULT_K_MAX', 'UndersamplingWarning', 'CSV_COLUMNS',
]

SUPPORT_RATIO = 0.1
BIAS_TOL = 0.01
MONOTONE_TOL = 0.01
DEFAULT_K_MAX = 20
MIN_SAMPLES_PER_K = 10
D_MAX_TABLE = 8

CSV_COLUMNS = ('d', 'k', 'block_nats', 'cond_nats', 'distinct_blocks',
               'total_blocks', 'reliable_flag')


class UndersamplingWarning(UserWarning):
    """The orbit is short compared to the pattern alphabet."""


def entropy_of_counts(counts):
    """Shannon entropy (nats) of a vector of cell counts.

    Counts are sorted first so that equal multisets give bit-identical
    results.
    """
    c = np.sort(np.asarray(counts, dtype=np.float64))
    c = c[c > 0]
    if c.size == 0:
        raise InvalidInput('entropy of an empty histogram')
    n = c.sum()
    return float(max(math.log(n) - np.dot(c, np.log(c)) / n, 0.0))


def shannon(p):
    """Shannon entropy of an :class:`~ordent.partition.EmpiricalPartition`."""
    if not p.counts:
        raise InvalidInput('entropy of an empty partition')
    return entropy_of_counts(list(p.counts.values()))


@dataclass(frozen=True)
class EntropyCell:
    d: int
    k: int
    block_nats: float
    cond_nats: float
    distinct_blocks: int
    total_blocks: int
    distinct_next: int
    total_next: int
    bias_nats: float
    reliable: bool


def _compress(keys):
    _, inv = np.unique(keys, return_inverse=True)
    return inv.reshape(-1).astype(np.int64)


def _tuple_ids(symbols):
    ids = _compress(symbols[:, 0])
    for j in range(1, symbols.shape[1]):
        ids = _compress(ids * (int(symbols[:, j].max()) + 1) + symbols[:, j])
    return ids


def _row(symbols, segments, d, k_max):
    """Cells ``k = 1..k_max`` for one degree, counting only in-segment windows."""
    unit = _tuple_ids(symbols)
    base = int(unit.max()) + 1
    n = len(unit)
    blocks = {1: unit}
    for k in range(2, k_max + 2):
        prev = blocks[k - 1]
        blocks[k] = _compress(prev[:-1] * base + unit[k - 1:])

    def valid(k):
        m = n - k + 1
        return segments[:m] == segments[k - 1:k - 1 + m]

    cells = []
    for k in range(1, k_max + 1):
        ids_k = blocks[k][valid(k)]
        mask_next = valid(k + 1)
        ids_next = blocks[k + 1][mask_next]
        prefix = blocks[k][:n - k][mask_next]
        cnt_k = np.bincount(ids_k)
        cnt_next = np.bincount(ids_next)
        cnt_prefix = np.bincount(prefix)
        h_k = entropy_of_counts(cnt_k)
        cond = entropy_of_counts(cnt_next) - entropy_of_counts(cnt_prefix)
        distinct_k = int(np.count_nonzero(cnt_k))
        distinct_next = int(np.count_nonzero(cnt_next))
        distinct_prefix = int(np.count_nonzero(cnt_prefix))
        bias = (distinct_next - distinct_prefix) / (2.0 * len(ids_next))
        reliable = (distinct_k <= SUPPORT_RATIO * len(ids_k)
                    and distinct_next <= SUPPORT_RATIO * len(ids_next)
                    and bias <= BIAS_TOL)
        cells.append(EntropyCell(
            d=d, k=k, block_nats=h_k / k, cond_nats=max(cond, 0.0),
            distinct_blocks=distinct_k, total_blocks=int(len(ids_k)),
            distinct_next=distinct_next, total_next=int(len(ids_next)),
            bias_nats=bias, reliable=bool(reliable)))
    return cells


def _guard(length, k_max):
    if k_max < 1:
        raise InvalidInput('k_max must be at least 1')
    need = MIN_SAMPLES_PER_K * k_max
    if length < need:
        raise InsufficientData(
            f'{length} symbols are too few for k_max={k_max}; need at least {need}',
            required=need)


def entropy_rate_table(s, k_max):
    """
    One row of the entropy table for a symbol sequence.

    Parameters
    ----------
    s : SymbolSequence
    k_max : int
        Largest block length; the conditional estimate at ``k_max`` uses
        ``k_max + 1``-grams.

    Returns
    -------
    list of EntropyCell
        Cells for ``k = 1, ..., k_max``.

    Raises
    ------
    InsufficientData
        If ``len(s) < 10 * k_max``.
    """
    _guard(len(s), k_max)
    return _row(s.symbols, np.zeros(len(s), dtype=np.int64), s.d, k_max)


@dataclass
class EntropyTable:
    """Block and conditional entropy estimates over degrees and block lengths."""

    cells: list
    metadata: dict = field(default_factory=dict)

    def cell(self, d, k):
        for c in self.cells:
            if c.d == d and c.k == k:
                return c
        raise KeyError((d, k))

    @property
    def degrees(self):
        return sorted({c.d for c in self.cells})

    @property
    def block_lengths(self):
        return sorted({c.k for c in self.cells})

    def ks_cell(self):
        """The reliable cell with the largest ``(d, k)``, or None."""
        reliable = [c for c in self.cells if c.reliable]
        if not reliable:
            return None
        return max(reliable, key=lambda c: (c.d, c.k))

    @property
    def ks_estimate(self):
        c = self.ks_cell()
        return None if c is None else c.cond_nats

    def invariant_violations(self, tol=MONOTONE_TOL):
        """Human-readable list of broken table invariants (empty if none).

        Checked: nonnegative entries, block estimates nonincreasing in k and
        nondecreasing in d (both within `tol`), conditional <= block.
        """
        out = []
        for c in self.cells:
            if c.block_nats < 0 or c.cond_nats < 0:
                out.append(f'negative entry at d={c.d}, k={c.k}')
            if c.cond_nats > c.block_nats + tol:
                out.append(f'conditional exceeds block estimate at d={c.d}, k={c.k}')
        for d in self.degrees:
            row = [self.cell(d, k).block_nats for k in self.block_lengths]
            for k, (a, b) in enumerate(zip(row, row[1:]), start=1):
                if b > a + tol:
                    out.append(f'block estimate increases from k={k} to k={k + 1} at d={d}')
        for k in self.block_lengths:
            col = [self.cell(d, k).block_nats for d in self.degrees]
            for d, (a, b) in zip(self.degrees, zip(col, col[1:])):
                if b < a - tol:
                    out.append(f'block estimate decreases from d={d} to d={d + 1} at k={k}')
        return out

    def to_json(self):
        ks = self.ks_cell()
        doc = {
            'format': 'ordent.entropy_table',
            'metadata': self.metadata,
            'ks_estimate': None if ks is None else {
                'd': ks.d, 'k': ks.k, 'nats': ks.cond_nats},
            'cells': [asdict(c) for c in self.cells],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + '\n'

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get('format') != 'ordent.entropy_table':
            raise InvalidInput('not an ordent entropy table document')
        return cls([EntropyCell(**c) for c in doc['cells']], doc['metadata'])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator='\n')
        w.writerow(CSV_COLUMNS)
        for c in self.cells:
            w.writerow([c.d, c.k, repr(c.block_nats), repr(c.cond_nats),
                        c.distinct_blocks, c.total_blocks, int(c.reliable)])
        return buf.getvalue()


def ks_table(sys, obs, d_max, k_max, orbit_len, seed, n_orbits=1, threads=1):
    """
    Estimate ``lim_d lim_k (1/k) H`` of the iterated ordinal partitions.

    Each of `n_orbits` orbits starts from an invariant-sampled point (seeds
    derived from `seed` with :func:`~ordent.dynamics.splitmix64`), is burnt
    in for :data:`~ordent.dynamics.BURN_IN` steps and then observed for
    `orbit_len` steps. Histograms of all orbits are pooled with equal weight
    per window; a single orbit relies on ergodicity.

    Parameters
    ----------
    sys : SystemSpec
    obs : ObservableSpec
    d_max : int
        Largest pattern degree, at most 8.
    k_max : int
        Largest block length.
    orbit_len : int
        Observed length of each orbit.
    seed : int
    n_orbits : int, optional
        Number of independently started orbits.
    threads : int, optional
        Worker threads over degrees; the result does not depend on it.

    Returns
    -------
    EntropyTable
    """
    if not 1 <= d_max <= D_MAX_TABLE:
        raise InvalidInput(f'd_max must lie in [1, {D_MAX_TABLE}], got {d_max}')
    if n_orbits < 1:
        raise InvalidInput('n_orbits must be at least 1')
    _guard(orbit_len - d_max, k_max)
    recommended = math.factorial(d_max + 1) * 50
    if orbit_len < recommended:
        warnings.warn(
            f'orbit length {orbit_len} is below the recommended {recommended} for '
            f'd_max={d_max}; cells may be flagged unreliable', UndersamplingWarning,
            stacklevel=2)
    series = []
    for s in splitmix64(seed, n_orbits):
        x0 = initial_point(sys, s % 2**63)
        series.append(obs(orbit(sys, x0, orbit_len)))

    def row(d):
        syms = [symbolize_multi(list(comps), d).symbols for comps in series]
        segs = np.concatenate([np.full(len(a), i) for i, a in enumerate(syms)])
        return _row(np.concatenate(syms), segs, d, k_max)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(row, range(1, d_max + 1)))
    meta = {
        'system': sys.to_config(),
        'observable': obs.to_config(),
        'd_max': d_max,
        'k_max': k_max,
        'orbit_len': orbit_len,
        'n_orbits': n_orbits,
        'burn_in': BURN_IN,
        'seed': seed,
        'support_ratio': SUPPORT_RATIO,
        'bias_tol': BIAS_TOL,
        'monotone_tol': MONOTONE_TOL,
    }
    return EntropyTable([c for r in rows for c in r], meta)


def permutation_entropy(s):
    """
    Normalized permutation entropy ``H(pattern histogram) / d``.

    Raises
    ------
    InsufficientData
        If ``len(s) < 10 * sqrt((d+1)!)``.
    """
    need = math.ceil(10 * math.sqrt(alphabet_size(s.d)))
    if len(s) < need:
        raise InsufficientData(
            f'{len(s)} symbols are too few for degree {s.d}; need {need}', required=need)
    counts = np.bincount(_tuple_ids(s.symbols))
    return entropy_of_counts(counts) / s.d
