"""
Distribution functions, their level sets, and the rank statistic.

For a distribution function ``F`` and a point ``q`` the level set
``{t : F(t) = F(q)}`` is an interval ``[q-, q+)`` or ``[q-, q+]``.
:func:`q_bounds` and :func:`level_set_form` compute it exactly for
:class:`MixedCdf` (piecewise linear with jumps) and its purely discrete
special case :class:`StepCdf`.

The rank statistic ``I_d(t) = #{r = 1..d-1 : x[t+r] <= x[t]}`` satisfies
``I_d / d -> F(x[t])`` along typical orbits of an ergodic map;
:func:`rank_convergence_report` measures how fast.
"""
import enum
import functools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .dynamics import ObservableSpec, initial_point, orbit, sample_invariant, splitmix64
from .errors import InvalidInput

__all__ = [
    'ExtReal', 'LevelSetForm', 'MixedCdf', 'StepCdf', 'empirical_cdf',
    'q_bounds', 'level_set_form', 'z_set', 'interval_mass', 'rank_statistic',
    'rank_statistics', 'rank_convergence_report', 'RankReport',
    'arcsine_cdf', 'uniform_cdf', 'analytic_cdf', 'constant_observable',
]


@functools.total_ordering
@dataclass(frozen=True)
class ExtReal:
    """An element of ``[-inf, +inf]`` with explicit infinite kinds."""

    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ('finite', '-inf', '+inf'):
            raise InvalidInput(f'bad extended-real kind {self.kind!r}')
        if self.kind == 'finite' and not math.isfinite(self.value):
            raise InvalidInput('finite extended real needs a finite value')

    @classmethod
    def of(cls, x):
        return cls('finite', float(x))

    @property
    def is_finite(self):
        return self.kind == 'finite'

    def __float__(self):
        return {'finite': self.value, '-inf': -math.inf, '+inf': math.inf}[self.kind]

    def __eq__(self, other):
        if isinstance(other, ExtReal):
            return float(self) == float(other)
        if isinstance(other, (int, float)):
            return float(self) == other
        return NotImplemented

    def __lt__(self, other):
        return float(self) < float(other)

    def __hash__(self):
        return hash(float(self))

    def __repr__(self):
        return repr(self.value) if self.is_finite else self.kind


NEG_INF = ExtReal('-inf')
POS_INF = ExtReal('+inf')


class LevelSetForm(enum.Enum):
    CLOSED_OPEN = '[q-, q+)'
    CLOSED = '[q-, q+]'


class MixedCdf:
    """
    Right-continuous distribution function, linear between knots.

    Parameters
    ----------
    knots : sequence of float
        Strictly increasing points ``x_0 < ... < x_m-1``.
    left : sequence of float
        Left limits ``F(x_i-)``; ``left[0]`` must be 0.
    right : sequence of float
        Values ``F(x_i)``; ``right[-1]`` must be 1.

    ``F`` is 0 below ``x_0``, 1 from ``x_m-1`` on, and on ``[x_i, x_i+1)``
    runs linearly from ``right[i]`` to ``left[i+1]``.
    """

    def __init__(self, knots, left, right):
        x = np.asarray(knots, dtype=float)
        lo = np.asarray(left, dtype=float)
        hi = np.asarray(right, dtype=float)
        if x.ndim != 1 or len(x) == 0 or lo.shape != x.shape or hi.shape != x.shape:
            raise InvalidInput('knots, left and right must be equal-length 1-D sequences')
        if not np.all(np.isfinite(x)) or np.any(np.diff(x) <= 0):
            raise InvalidInput('knots must be finite and strictly increasing')
        if lo[0] != 0.0 or hi[-1] != 1.0:
            raise InvalidInput('need F(x_0-) = 0 and F(x_last) = 1')
        if np.any(lo > hi) or np.any(hi[:-1] > lo[1:]) or lo.min() < 0:
            raise InvalidInput('values must be nondecreasing')
        self.knots, self.left, self.right = x, lo, hi

    def _piece(self, q):
        # -1 for (-inf, x_0); i for [x_i, x_i+1); m-1 for [x_m-1, inf)
        return int(np.searchsorted(self.knots, q, side='right')) - 1

    def _is_ramp(self, i):
        return 0 <= i < len(self.knots) - 1 and self.right[i] < self.left[i + 1]

    def __call__(self, q):
        q = float(q)
        i = self._piece(q)
        if i < 0:
            return 0.0
        if i == len(self.knots) - 1 or not self._is_ramp(i):
            return float(self.right[i])
        x0, x1 = self.knots[i], self.knots[i + 1]
        return float(self.right[i] + (self.left[i + 1] - self.right[i]) * (q - x0) / (x1 - x0))

    def evaluate(self, qs):
        """Vectorised evaluation."""
        return np.array([self(q) for q in np.asarray(qs, dtype=float).ravel()])

    def left_limit(self, q):
        """``F(q-)``."""
        q = float(q)
        j = int(np.searchsorted(self.knots, q, side='left'))
        if j < len(self.knots) and self.knots[j] == q:
            return float(self.left[j])
        return self(q)


class StepCdf(MixedCdf):
    """
    Piecewise-constant distribution function with jumps at `jumps`.

    ``cum[i]`` is ``F`` on ``[jumps[i], jumps[i+1])``; it must be
    nondecreasing, positive, and end at 1.
    """

    def __init__(self, jumps, cum):
        jumps = np.asarray(jumps, dtype=float)
        cum = np.asarray(cum, dtype=float)
        if len(cum) and (cum[0] <= 0 or np.any(cum > 1)):
            raise InvalidInput('cumulative values must lie in (0, 1]')
        left = np.concatenate([[0.0], cum[:-1]]) if len(cum) else cum
        super().__init__(jumps, left, cum)

    @property
    def jumps(self):
        return self.knots

    @property
    def cum(self):
        return self.right

    def to_csv(self):
        lines = ['jump,cum']
        lines += [f'{j!r},{c!r}' for j, c in zip(self.jumps.tolist(), self.cum.tolist())]
        return '\n'.join(lines) + '\n'


def empirical_cdf(samples):
    """Empirical distribution function of a finite sample."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise InvalidInput('empirical_cdf needs at least one sample')
    if not np.all(np.isfinite(x)):
        raise InvalidInput('samples must be finite')
    jumps, counts = np.unique(x, return_counts=True)
    cum = np.cumsum(counts) / x.size
    cum[-1] = 1.0
    return StepCdf(jumps, cum)


def q_bounds(F, q):
    """
    Infimum and supremum of the level set ``{t : F(t) = F(q)}``.

    Returns
    -------
    (ExtReal, ExtReal)
    """
    q = float(q)
    p = F._piece(q)
    m = len(F.knots)

    # lower end: walk left through constant pieces joined without a jump
    if F._is_ramp(p) and q > F.knots[p]:
        lo = ExtReal.of(q)
    else:
        i = p
        while True:
            if i < 0:
                lo = NEG_INF
                break
            if F.left[i] < F.right[i] or F._is_ramp(i - 1):
                lo = ExtReal.of(F.knots[i])
                break
            i -= 1

    # upper end: walk right while F stays flat across the next knot
    if F._is_ramp(p):
        return lo, ExtReal.of(q)
    i = p
    while True:
        if i == m - 1:
            return lo, POS_INF
        nxt = i + 1
        if F.right[nxt] > F.left[nxt] or F._is_ramp(nxt):
            return lo, ExtReal.of(F.knots[nxt])
        i = nxt


def level_set_form(F, q):
    """
    Whether the level set of ``F(q)`` contains its supremum.

    An unbounded level set is reported as CLOSED (with ``q+ = +inf``).
    """
    _, hi = q_bounds(F, q)
    if not hi.is_finite:
        return LevelSetForm.CLOSED
    return LevelSetForm.CLOSED if F(hi.value) == F(q) else LevelSetForm.CLOSED_OPEN


def z_set(F, q):
    """
    ``Z = F^-1 F((-inf, q)) minus (-inf, q)`` as ``(start, end, closed)``.

    Empty (None) when ``q- = q``; otherwise ``Z`` runs from `q` to ``q+``,
    and includes ``q+`` exactly when the level set does.
    """
    lo, hi = q_bounds(F, q)
    if lo == q:
        return None
    return ExtReal.of(q), hi, level_set_form(F, q) is LevelSetForm.CLOSED


def interval_mass(F, start, end, closed):
    """Mass ``F`` gives to ``[start, end]`` or ``[start, end)``."""
    lower = F.left_limit(float(start))
    end = end if isinstance(end, ExtReal) else ExtReal.of(end)
    if not end.is_finite:
        return 1.0 - lower
    upper = F(end.value) if closed else F.left_limit(end.value)
    return upper - lower


def rank_statistic(series, t, d):
    """Number of ``r`` in ``1..d-1`` with ``series[t+r] <= series[t]``."""
    if d < 1 or t < 0:
        raise InvalidInput('need d >= 1 and t >= 0')
    if t + d > len(series):
        raise InvalidInput(f'window t+d={t + d} exceeds series length {len(series)}')
    x0 = series[t]
    return sum(1 for r in range(1, d) if series[t + r] <= x0)


def rank_statistics(values, d):
    """Rank statistic at time 0 for each row of a ``(trials, >= d)`` array."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] < d:
        raise InvalidInput('values must be (trials, length >= d)')
    return np.count_nonzero(values[:, 1:d] <= values[:, :1], axis=1)


def arcsine_cdf(x):
    """``(2/pi) arcsin(sqrt(x))`` on [0, 1]; invariant law of logistic(4)."""
    return 2.0 / np.pi * np.arcsin(np.sqrt(np.clip(x, 0.0, 1.0)))


def uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


def analytic_cdf(sys, obs):
    """Closed-form distribution function of ``obs`` under the invariant law, or None."""
    if obs.kind != 'identity':
        return None
    if sys.kind == 'logistic' and sys.params['r'] == 4.0:
        return arcsine_cdf
    if sys.kind == 'rotation' or (sys.kind == 'tent' and sys.params['slope'] == 2.0):
        return uniform_cdf
    return None


@dataclass(frozen=True)
class RankRow:
    d: int
    mean_dev: float
    max_dev: float
    trials: int


@dataclass
class RankReport:
    rows: list
    metadata: dict

    @property
    def monotone(self):
        """Mean deviations are nonincreasing in d."""
        means = [r.mean_dev for r in self.rows]
        return all(b <= a for a, b in zip(means, means[1:]))

    def to_json(self):
        return json.dumps({
            'format': 'ordent.rank_report',
            'metadata': self.metadata,
            'monotone': self.monotone,
            'rows': [asdict(r) for r in self.rows],
        }, indent=2, sort_keys=True) + '\n'


def _trial_values(sys, obs, seeds, length):
    x = np.array([float(sample_invariant(sys, 1, s % 2**63)[0]) for s in seeds])
    out = np.empty((len(seeds), length))
    for t in range(length):
        out[:, t] = obs(x)[0]
        x = sys.step(x)
    return out


def rank_convergence_report(sys, obs, d_list, trials, seed, cdf=None,
                            calib_len=10**6, threads=1):
    """
    Compare ``I_d / d`` with ``F(Xi(w))`` over invariant-sampled points.

    Parameters
    ----------
    sys : SystemSpec
    obs : ObservableSpec
        A scalar observable.
    d_list : sequence of int
        Rank horizons, reported in increasing order.
    trials : int
        Number of sampled points ``w``; seeds come from
        :func:`~ordent.dynamics.splitmix64` of `seed`.
    seed : int
    cdf : callable, optional
        Distribution function of the observable. By default the empirical
        distribution of a `calib_len` orbit started from an independent
        point.
    threads : int, optional
        Trials are split into this many chunks; results do not depend on it.

    Returns
    -------
    RankReport
    """
    if obs.arity != 1:
        raise InvalidInput('rank statistics need a scalar observable')
    d_list = sorted(int(d) for d in d_list)
    if not d_list or d_list[0] < 1:
        raise InvalidInput('d_list must contain positive integers')
    if trials < 1:
        raise InvalidInput('trials must be at least 1')
    seeds = splitmix64(seed, trials + 1)
    if cdf is None:
        x0 = initial_point(sys, seeds[-1] % 2**63)
        F = empirical_cdf(obs(orbit(sys, x0, calib_len))[0])
        cdf_fn, cdf_name = F.evaluate, f'empirical({calib_len})'
    else:
        cdf_fn, cdf_name = cdf, getattr(cdf, '__name__', 'custom')

    chunks = np.array_split(np.arange(trials), max(1, min(threads, trials)))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(
            lambda idx: _trial_values(sys, obs, [seeds[i] for i in idx], d_list[-1]), chunks))
    values = np.vstack(parts)
    target = np.asarray(cdf_fn(values[:, 0]), dtype=float)
    rows = []
    for d in d_list:
        dev = np.abs(rank_statistics(values, d) / d - target)
        rows.append(RankRow(d, float(dev.mean()), float(dev.max()), trials))
    meta = {
        'system': sys.to_config(),
        'observable': obs.to_config() if obs.kind != 'custom' else 'custom',
        'trials': trials,
        'seed': seed,
        'cdf': cdf_name,
    }
    return RankReport(rows, meta)


def constant_observable(c=1.0):
    """Observable that ignores the state."""
    return ObservableSpec('affine', {'a': 0.0, 'b': c})
