"""
Interval maps, observables and the numerical oracles used to check estimates.

Built-in systems act on the unit interval:

==========  =====================================  ======================
kind        map                                    invariant law sampled
==========  =====================================  ======================
logistic    ``r x (1 - x)``, ``0 < r <= 4``        arcsine law (r = 4)
tent        ``s min(x, 1 - x)``, ``1 < s <= 2``    uniform (s = 2), see below
rotation    ``x + alpha mod 1``, ``0 < alpha < 1``  uniform
custom      piecewise-linear table ``(xs, ys)``    none
==========  =====================================  ======================

Binary floating point makes ``tent(2)`` orbits collapse onto 0 within about
sixty steps, so symbolization defaults to slope ``1.9999``. For ``s < 2``
the invariant law has no simple closed form; samples are uniform draws pushed
through :data:`BURN_IN` iterations of the map, which converge to it
geometrically fast.
"""
import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData, InvalidInput, UnsupportedSystem

__all__ = [
    'SystemSpec', 'ObservableSpec', 'orbit', 'sample_invariant', 'lyapunov',
    'noninjectivity_fraction', 'splitmix64', 'BURN_IN', 'GOLDEN',
    'DEFAULT_TENT_SLOPE', 'initial_point',
]

BURN_IN = 1000
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_TENT_SLOPE = 1.9999

_MASK64 = (1 << 64) - 1


def splitmix64(seed, n):
    """
    Derive `n` 64-bit seeds from `seed` with the SplitMix64 generator.

    ``state`` advances by ``0x9E3779B97F4A7C15``; each output is the state
    mixed by ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
    z *= 0x94D049BB133111EB; z ^= z >> 31`` (all modulo 2**64).
    """
    state = int(seed) & _MASK64
    out = []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        out.append(z ^ (z >> 31))
    return out


@dataclass(frozen=True)
class SystemSpec:
    """A measure-preserving interval map ``T`` on ``[0, 1]``."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        p = dict(self.params)
        if self.kind == 'logistic':
            r = float(p.get('r', 4.0))
            if not 0.0 < r <= 4.0:
                raise InvalidInput(f'logistic parameter r must lie in (0, 4], got {r}')
            p = {'r': r}
        elif self.kind == 'tent':
            s = float(p.get('slope', DEFAULT_TENT_SLOPE))
            if not 1.0 < s <= 2.0:
                raise InvalidInput(f'tent slope must lie in (1, 2], got {s}')
            p = {'slope': s}
        elif self.kind == 'rotation':
            a = float(p.get('alpha', GOLDEN))
            if not 0.0 < a < 1.0:
                raise InvalidInput(f'rotation alpha must lie in (0, 1), got {a}')
            p = {'alpha': a}
        elif self.kind == 'custom':
            xs = [float(v) for v in p.get('xs', ())]
            ys = [float(v) for v in p.get('ys', ())]
            if len(xs) < 2 or len(xs) != len(ys):
                raise InvalidInput('custom map needs matching xs and ys with at least 2 knots')
            if xs[0] != 0.0 or xs[-1] != 1.0 or any(b <= a for a, b in zip(xs, xs[1:])):
                raise InvalidInput('custom knots xs must increase strictly from 0 to 1')
            if any(not 0.0 <= y <= 1.0 for y in ys):
                raise InvalidInput('custom values ys must lie in [0, 1]')
            p = {'xs': tuple(xs), 'ys': tuple(ys)}
        else:
            raise InvalidInput(f'unknown system kind {self.kind!r}')
        object.__setattr__(self, 'params', p)

    @classmethod
    def logistic(cls, r=4.0):
        return cls('logistic', {'r': r})

    @classmethod
    def tent(cls, slope=DEFAULT_TENT_SLOPE):
        return cls('tent', {'slope': slope})

    @classmethod
    def rotation(cls, alpha=GOLDEN):
        return cls('rotation', {'alpha': alpha})

    @classmethod
    def custom(cls, xs, ys):
        return cls('custom', {'xs': xs, 'ys': ys})

    @classmethod
    def parse(cls, text):
        """Parse the command-line form ``kind[:p1[,p2...]]``, e.g. ``logistic:4``."""
        kind, _, rest = text.partition(':')
        kind = kind.strip().lower()
        args = [a for a in rest.split(',') if a.strip()] if rest else []
        try:
            vals = [float(a) for a in args]
        except ValueError:
            raise InvalidInput(f'non-numeric system parameter in {text!r}') from None
        names = {'logistic': ['r'], 'tent': ['slope'], 'rotation': ['alpha']}
        if kind not in names:
            raise InvalidInput(f'unknown or non-parsable system {text!r}')
        if len(vals) > len(names[kind]):
            raise InvalidInput(f'too many parameters for {kind}')
        return cls(kind, dict(zip(names[kind], vals)))

    @classmethod
    def from_config(cls, block):
        block = dict(block)
        kind = block.pop('kind', None)
        if kind is None:
            raise InvalidInput('system block needs a "kind"')
        return cls(kind, block)

    def to_config(self):
        return {'kind': self.kind, **{k: list(v) if isinstance(v, tuple) else v
                                      for k, v in self.params.items()}}

    def __str__(self):
        if self.kind == 'custom':
            return f'custom({len(self.params["xs"])} knots)'
        (v,) = self.params.values()
        return f'{self.kind}:{v!r}'

    @property
    def ergodic(self):
        """Whether the default invariant measure is known to be ergodic."""
        if self.kind == 'logistic':
            return self.params['r'] == 4.0
        return self.kind in ('tent', 'rotation')

    def step(self, x):
        """Apply the map to a float or an array."""
        p = self.params
        if self.kind == 'logistic':
            return p['r'] * x * (1.0 - x)
        if self.kind == 'tent':
            return p['slope'] * np.minimum(x, 1.0 - x)
        if self.kind == 'rotation':
            return np.mod(x + p['alpha'], 1.0)
        return np.interp(x, p['xs'], p['ys'])

    def log_derivative(self, x):
        """``ln|T'(x)|``, NaN where the map is not differentiable or ``T' = 0``."""
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == 'logistic':
            deriv = np.abs(p['r'] * (1.0 - 2.0 * x))
        elif self.kind == 'tent':
            deriv = np.full(x.shape, p['slope'])
            deriv[x == 0.5] = np.nan
        elif self.kind == 'rotation':
            deriv = np.ones(x.shape)
        else:
            xs = np.asarray(p['xs'])
            slopes = np.abs(np.diff(p['ys']) / np.diff(xs))
            seg = np.clip(np.searchsorted(xs, x, side='right') - 1, 0, len(slopes) - 1)
            deriv = slopes[seg]
            deriv[np.isin(x, xs[1:-1])] = np.nan
        with np.errstate(divide='ignore'):
            out = np.log(deriv)
        out[~np.isfinite(out)] = np.nan
        return out


def _check_x0(x0):
    if not 0.0 <= x0 <= 1.0 or not math.isfinite(x0):
        raise InvalidInput(f'initial condition {x0!r} outside the unit interval')


def orbit(sys, x0, length):
    """
    Orbit ``(x0, T x0, ..., T^(length-1) x0)`` in double precision.

    The recurrence runs in plain Python floats, which is the fastest scalar
    path without a compiled extension.
    """
    x0 = float(x0)
    _check_x0(x0)
    if length < 1:
        raise InvalidInput('orbit length must be at least 1')
    out = [0.0] * length
    x = x0
    p = sys.params
    if sys.kind == 'logistic':
        r = p['r']
        for t in range(length):
            out[t] = x
            x = r * x * (1.0 - x)
    elif sys.kind == 'tent':
        s = p['slope']
        for t in range(length):
            out[t] = x
            x = s * x if x < 0.5 else s * (1.0 - x)
    elif sys.kind == 'rotation':
        a = p['alpha']
        for t in range(length):
            out[t] = x
            x += a
            if x >= 1.0:
                x -= 1.0
    else:
        xs, ys = p['xs'], p['ys']
        slopes = [(ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]
        last = len(slopes) - 1
        for t in range(length):
            out[t] = x
            i = min(bisect_right(xs, x) - 1, last)
            x = ys[i] + slopes[i] * (x - xs[i])
    return np.array(out)


def sample_invariant(sys, count, seed):
    """
    Draw `count` points from the invariant law of `sys`.

    Raises
    ------
    UnsupportedSystem
        When no sampler is known; callers must fall back to a long orbit
        with burn-in.
    """
    if count < 1:
        raise InvalidInput('count must be at least 1')
    rng = np.random.default_rng(seed)
    if sys.kind == 'logistic':
        if sys.params['r'] != 4.0:
            raise UnsupportedSystem(
                f'no closed-form invariant density for logistic r={sys.params["r"]}')
        return np.sin(0.5 * np.pi * rng.random(count)) ** 2
    if sys.kind == 'rotation':
        return rng.random(count)
    if sys.kind == 'tent':
        x = rng.random(count)
        if sys.params['slope'] != 2.0:
            for _ in range(BURN_IN):
                x = sys.step(x)
        return x
    raise UnsupportedSystem(f'no invariant sampler for {sys.kind} maps')


def initial_point(sys, seed, burn_in=BURN_IN):
    """An invariant-sampled starting point advanced by `burn_in` steps."""
    x0 = float(sample_invariant(sys, 1, seed)[0])
    if burn_in:
        x0 = float(orbit(sys, x0, burn_in + 1)[-1])
    return x0


def lyapunov(sys, x0, n):
    """
    Birkhoff average of ``ln|T'|`` along the orbit of `x0`.

    The first :data:`BURN_IN` points are discarded. Points where the map is
    not differentiable are skipped; more than 0.1 % skipped is an error.
    """
    if n < 1000:
        raise InsufficientData('lyapunov needs at least 1000 orbit points', required=1000)
    xs = orbit(sys, x0, BURN_IN + n)[BURN_IN:]
    terms = sys.log_derivative(xs)
    bad = np.isnan(terms)
    if bad.sum() > 1e-3 * n:
        raise InvalidInput(
            f'orbit hit non-differentiable points {int(bad.sum())} times out of {n}')
    return float(np.mean(terms[~bad]))


@dataclass(frozen=True)
class ObservableSpec:
    """
    A vector observable ``Theta = (Xi_1, ..., Xi_n)`` on the unit interval.

    Kinds: ``identity``; ``affine`` (``a x + b``, constant when ``a = 0``);
    ``sincos`` (``sin 2 pi x, cos 2 pi x``); ``fold`` (``(x - c)^2``, not
    injective); ``custom`` with a tuple of vectorised callables.
    """

    kind: str = 'identity'
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        p = dict(self.params)
        if self.kind == 'identity':
            p = {}
        elif self.kind == 'affine':
            p = {'a': float(p.get('a', 1.0)), 'b': float(p.get('b', 0.0))}
        elif self.kind == 'sincos':
            p = {}
        elif self.kind == 'fold':
            p = {'c': float(p.get('c', 0.5))}
        elif self.kind == 'custom':
            funcs = tuple(p.get('funcs', ()))
            if not funcs or not all(callable(f) for f in funcs):
                raise InvalidInput('custom observable needs at least one callable')
            p = {'funcs': funcs}
        else:
            raise InvalidInput(f'unknown observable kind {self.kind!r}')
        object.__setattr__(self, 'params', p)

    @classmethod
    def parse(cls, text):
        """Parse ``identity``, ``affine:a,b``, ``sincos`` or ``fold:c``."""
        kind, _, rest = text.partition(':')
        kind = kind.strip().lower()
        try:
            vals = [float(a) for a in rest.split(',') if a.strip()]
        except ValueError:
            raise InvalidInput(f'non-numeric observable parameter in {text!r}') from None
        names = {'identity': [], 'affine': ['a', 'b'], 'sincos': [], 'fold': ['c']}
        if kind not in names:
            raise InvalidInput(f'unknown or non-parsable observable {text!r}')
        if len(vals) > len(names[kind]):
            raise InvalidInput(f'too many parameters for {kind}')
        return cls(kind, dict(zip(names[kind], vals)))

    @classmethod
    def from_config(cls, block):
        block = dict(block)
        return cls(block.pop('kind', 'identity'), block)

    def to_config(self):
        if self.kind == 'custom':
            raise InvalidInput('custom observables cannot be serialized')
        return {'kind': self.kind, **self.params}

    def __str__(self):
        if not self.params or self.kind == 'custom':
            return self.kind
        return self.kind + ':' + ','.join(repr(v) for v in self.params.values())

    @property
    def arity(self):
        if self.kind == 'sincos':
            return 2
        if self.kind == 'custom':
            return len(self.params['funcs'])
        return 1

    def __call__(self, x):
        """Evaluate on an array of states; returns an ``(arity, len(x))`` array."""
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == 'identity':
            comps = [x]
        elif self.kind == 'affine':
            comps = [p['a'] * x + p['b']]
        elif self.kind == 'sincos':
            comps = [np.sin(2 * np.pi * x), np.cos(2 * np.pi * x)]
        elif self.kind == 'fold':
            comps = [(x - p['c']) ** 2]
        else:
            comps = [np.broadcast_to(np.asarray(f(x), dtype=float), x.shape) for f in p['funcs']]
        return np.vstack(comps)


def noninjectivity_fraction(obs, sys, pairs, tol, seed, sep=None):
    """
    Monte-Carlo estimate of the mass of the non-injectivity set of `obs`.

    Draws `pairs` independent pairs ``(w, w')`` from the invariant law and
    returns the fraction for which ``|Theta(w) - Theta(w')|_inf <= tol``
    although ``|w - w'| > sep``. Near-coincident pairs (``|w - w'| <= sep``)
    do not witness a second point in the fibre and are not counted.

    Parameters
    ----------
    obs : ObservableSpec
    sys : SystemSpec
    pairs : int
        Number of pairs, at least 1000.
    tol : float
        Collision tolerance in observable space.
    seed : int
    sep : float, optional
        Minimum state separation for a collision; defaults to `tol`.
    """
    if pairs < 1000:
        raise InvalidInput('need at least 1000 pairs')
    if not tol > 0:
        raise InvalidInput('tol must be positive')
    sep = tol if sep is None else sep
    w = sample_invariant(sys, 2 * pairs, seed)
    a, b = w[:pairs], w[pairs:]
    dist = np.max(np.abs(obs(a) - obs(b)), axis=0)
    hits = (dist <= tol) & (np.abs(a - b) > sep)
    return float(hits.mean())
