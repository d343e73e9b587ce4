"""
Property suites behind ``ordent verify``.

Every suite runs with fixed seeds and returns a :class:`SuiteResult`; a suite
passes only if all of its checks pass.
"""
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .cdf import (
    LevelSetForm, MixedCdf, StepCdf, empirical_cdf, interval_mass, level_set_form,
    q_bounds, rank_convergence_report, rank_statistic, arcsine_cdf, z_set,
)
from .dynamics import ObservableSpec, SystemSpec, initial_point, orbit
from .entropy import entropy_of_counts, entropy_rate_table, shannon
from .ordinal import (
    alpha_decomposition, all_patterns, encode_orders, in_cell, index_to_pattern,
    ordinal_pattern, window_orders, pattern_restriction, pattern_to_index,
)
from .partition import (
    SymbolSequence, block_keys, join, partition_from_keys, refines,
    shift_refinement_check, symbolize,
)

__all__ = ['SUITES', 'run_suite', 'SuiteResult', 'Check']


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ''


@dataclass
class SuiteResult:
    suite: str
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail=''):
        self.checks.append(Check(name, bool(passed), detail))

    def to_json(self):
        return json.dumps({
            'suite': self.suite,
            'passed': self.passed,
            'checks': [asdict(c) for c in self.checks],
        }, indent=2, sort_keys=True) + '\n'


def _dynamical_orbits(length, seed=7):
    systems = [SystemSpec.logistic(4.0), SystemSpec.tent(), SystemSpec.rotation()]
    return {str(s): orbit(s, initial_point(s, seed), length) for s in systems}


def suite_patterns(res):
    rng = np.random.default_rng(101)
    for d in range(1, 4):
        bad = 0
        for _ in range(500):
            w = rng.integers(0, 3, size=d + 1).astype(float)
            p = ordinal_pattern(w)
            others = [q for q in all_patterns(d) if q != p and in_cell(w, q)]
            bad += (not in_cell(w, p)) or bool(others)
        res.add(f'unique pattern per window, d={d}', bad == 0, f'{bad} failures')
    for d in range(1, 7):
        ok = all(index_to_pattern(pattern_to_index(p)) == p for p in all_patterns(d))
        codes = encode_orders(np.array([p.order for p in all_patterns(d)]))
        ok = ok and sorted(codes.tolist()) == list(range(math.factorial(d + 1)))
        res.add(f'Lehmer encoding bijective, d={d}', ok)
    for d in range(2, 7):
        w = rng.normal(size=(2000, d + 1))
        w[::3] = np.round(w[::3])
        ok = all(pattern_restriction(ordinal_pattern(x)) == ordinal_pattern(x[:-1]) for x in w)
        res.add(f'restriction drops the last entry, d={d}', ok)


def suite_alpha(res):
    for d in range(1, 4):
        owners = {q: 0 for q in all_patterns(d + 1)}
        distinct = True
        for p in all_patterns(d):
            alphas = alpha_decomposition(p)
            distinct &= len(set(alphas)) == d + 2
            for a in alphas:
                owners[a] += 1
        res.add(f'alpha sets partition degree {d + 1}, d={d}',
                distinct and all(v == 1 for v in owners.values()))
    rng = np.random.default_rng(202)
    for d in range(1, 6):
        allowed = {(pattern_to_index(p).value, pattern_to_index(a).value)
                   for p in all_patterns(d) for a in alpha_decomposition(p)}
        w = rng.normal(size=(10**4, d + 2))
        w[::4] = np.round(w[::4] * 2)
        full = encode_orders(window_orders(w))
        tail = encode_orders(window_orders(w[:, 1:]))
        miss = sum((int(t), int(f)) not in allowed for t, f in zip(tail, full))
        res.add(f'window pattern lies in alpha set of its tail, d={d}', miss == 0,
                f'{miss} of {len(w)} windows outside')


def suite_refinement(res):
    rng = np.random.default_rng(303)
    fails = 0
    for i in range(1000):
        x = rng.normal(size=60)
        if i % 2:
            x = np.round(x)
        for d in range(1, 5):
            fails += not shift_refinement_check(x, d)
            fine = block_keys(symbolize(x, d + 1), 1)
            coarse = block_keys(symbolize(x, d), 1)[:len(fine)]
            fails += not refines(fine, coarse)
    res.add('random series: shift and degree refinement', fails == 0, f'{fails} failures')
    for name, x in _dynamical_orbits(10**4).items():
        ok = True
        for d in range(1, 6):
            ok &= shift_refinement_check(x, d)
            fine = block_keys(symbolize(x, d + 1), 1)
            ok &= refines(fine, block_keys(symbolize(x, d), 1)[:len(fine)])
        res.add(f'{name} orbit: refinement chain d<=5', ok)


def _random_cdf(rng, discrete):
    """Random CDF with knots on a 1/8 lattice and values on a 1/16 lattice."""
    m = int(rng.integers(1, 8))
    knots = np.sort(rng.choice(np.arange(-40, 41), size=m, replace=False)) / 8.0
    if discrete:
        cum = np.sort(rng.integers(1, 17, size=m)) / 16.0
        cum[-1] = 1.0
        return StepCdf(knots, cum)
    v = np.sort(rng.integers(0, 17, size=2 * m)) / 16.0
    v[0], v[-1] = 0.0, 1.0
    for j in range(1, 2 * m - 1):
        if rng.random() < 0.3:
            v[j] = v[j - 1]
    return MixedCdf(knots, v[0::2], v[1::2])


def _grid_level_set(F, q, grid):
    v = F(q)
    vals = F.evaluate(grid)
    inside = grid[vals == v]
    return inside.min(), inside.max()


def suite_cdf(res):
    rng = np.random.default_rng(404)
    h = 1.0 / 64
    grid = np.arange(-8.0, 8.0 + h, h)
    bad = []
    for n in range(1000):
        F = _random_cdf(rng, discrete=n % 2 == 0)
        for q in rng.choice(grid[64:-64], size=5):
            lo, hi = q_bounds(F, q)
            gmin, gmax = _grid_level_set(F, q, grid)
            form = level_set_form(F, q)
            ok = (lo.is_finite and lo.value == gmin) or (not lo.is_finite and gmin == grid[0])
            if hi.is_finite:
                expect = hi.value if form is LevelSetForm.CLOSED else hi.value - h
                ok &= gmax == expect
                ok &= (F(hi.value) == F(q)) == (form is LevelSetForm.CLOSED)
            else:
                ok &= gmax == grid[-1]
            ok &= lo <= q <= hi
            if lo.is_finite:
                ok &= F(lo.value) == F(q)
                below = F.evaluate(grid[grid < lo.value])
                above = F.evaluate(grid[grid >= lo.value])
                ok &= not np.isin(above, below).any()
            z = z_set(F, q)
            if z is not None:
                ok &= interval_mass(F, *z) == 0.0
            if not ok:
                bad.append((n, float(q)))
    res.add('q-/q+ and level-set form match grid scan (1000 CDFs)', not bad,
            f'first failures: {bad[:3]}')

    samples = np.round(rng.normal(size=500), 1)
    F = empirical_cdf(samples)
    zero = True
    for q in rng.uniform(-3, 3, size=200):
        z = z_set(F, q)
        if z is not None:
            start, end, closed = z
            inside = (samples >= float(start)) & (
                samples <= float(end) if closed else samples < float(end))
            zero &= not inside.any()
    res.add('empirical Z-set holds no samples', zero)


def suite_rank(res):
    rng = np.random.default_rng(505)
    ok = rank_statistic([0.5, 0.3, 0.9, 0.1], 0, 4) == 2
    res.add('rank statistic worked example', ok)
    mono = True
    for _ in range(300):
        x = rng.normal(size=30)
        d = int(rng.integers(1, 30))
        r = rank_statistic(x, 0, d)
        mono &= 0 <= r <= max(d - 1, 0)
        y = x.copy()
        y[0] += abs(rng.normal())
        mono &= rank_statistic(y, 0, d) >= r
    res.add('rank statistic bounded and monotone in x[t]', mono)

    sys = SystemSpec.logistic(4.0)
    rep = rank_convergence_report(sys, ObservableSpec(), [100, 1000, 10**4], 50, 11,
                                  cdf=arcsine_cdf)
    res.add('logistic(4) rank convergence monotone', rep.monotone,
            ', '.join(f'd={r.d}: {r.mean_dev:.4f}' for r in rep.rows))
    res.add('logistic(4) mean deviation < 0.02 at d=1e4', rep.rows[-1].mean_dev < 0.02)

    x = orbit(sys, initial_point(sys, 5), 5000)
    F = empirical_cdf(x)
    same = symbolize(F.evaluate(x), 4) == symbolize(x, 4)
    res.add('F o Xi symbolizes like Xi when F is injective on samples', same)
    xq = np.round(x, 2)
    same_tied = symbolize(empirical_cdf(xq).evaluate(xq), 4) == symbolize(xq, 4)
    res.add('F o Xi symbolizes like Xi on samples with ties', same_tied)


def suite_entropy(res):
    for n in (2, 7, 1000):
        h = entropy_of_counts([5] * n)
        res.add(f'uniform histogram of {n} cells', abs(h - math.log(n)) < 1e-12)
    rng = np.random.default_rng(606)
    mono = joins = True
    data = [rng.normal(size=3000)] + list(_dynamical_orbits(3000).values())
    for x in data:
        for d in range(1, 5):
            fine = block_keys(symbolize(x, d + 1), 1)
            coarse = block_keys(symbolize(x, d), 1)[:len(fine)]
            hf = shannon(partition_from_keys(fine))
            hc = shannon(partition_from_keys(coarse))
            mono &= refines(fine, coarse) and hf >= hc - 1e-12
            a = block_keys(symbolize(x[:-1], d), 1)
            b = block_keys(symbolize(x[1:], d), 1)
            ha, hb = shannon(partition_from_keys(a)), shannon(partition_from_keys(b))
            hab = shannon(join(a, b))
            joins &= max(ha, hb) - 1e-12 <= hab <= ha + hb + 1e-12
    res.add('refinement never lowers entropy', mono)
    res.add('join entropy between max and sum', joins)
    cond_ok = True
    for x in data:
        for c in entropy_rate_table(symbolize(x, 3), 6):
            cond_ok &= c.cond_nats <= c.block_nats + 1e-9 and c.cond_nats >= 0
    res.add('conditional estimate <= block estimate', cond_ok)
    per = SymbolSequence(2, np.tile([0, 3, 5], 400))
    zero = all(c.cond_nats == 0.0 for c in entropy_rate_table(per, 8)[2:])
    res.add('periodic symbols have zero conditional entropy', zero)


SUITES = {
    'patterns': suite_patterns,
    'alpha': suite_alpha,
    'refinement': suite_refinement,
    'cdf': suite_cdf,
    'rank': suite_rank,
    'entropy': suite_entropy,
}


def run_suite(name):
    if name not in SUITES:
        raise KeyError(name)
    res = SuiteResult(name)
    SUITES[name](res)
    return res
