"""
Acceptance criteria 1-10. Each test prints one ``CRITERION n: PASS|FAIL`` line.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from ordent.cdf import (
    LevelSetForm, StepCdf, arcsine_cdf, level_set_form, q_bounds, rank_convergence_report,
)
from ordent.dynamics import (
    ObservableSpec, SystemSpec, initial_point, lyapunov, noninjectivity_fraction, orbit,
)
from ordent.entropy import (
    DEFAULT_K_MAX, entropy_of_counts, entropy_rate_table, ks_table, shannon,
)
from ordent.ordinal import (
    alpha_decomposition, all_patterns, ordinal_orders, ordinal_pattern, window_orders,
)
from ordent.partition import (
    SymbolSequence, block_keys, partition_from_keys, refines, shift_refinement_check, symbolize,
)
from ordent.verify import run_suite


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f'\nCRITERION {n}: {"PASS" if ok else "FAIL"} - {detail}')
    assert ok, detail


def lexsort_oracle(w):
    """Rows sorted by value descending, then index descending."""
    idx = np.broadcast_to(np.arange(w.shape[1]), w.shape)
    return np.lexsort((-idx, -w), axis=-1)


def engineered_windows(d):
    out = [np.zeros(d + 1), np.full(d + 1, -2.5)]
    rng = np.random.default_rng(d)
    for _ in range(200):
        w = rng.integers(0, 2, size=d + 1).astype(float)
        w[rng.integers(0, d + 1)] = rng.normal()
        out.append(w)
    return np.array(out)


def test_criterion_1_patterns(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    bad = 0
    total = 0
    for d in range(1, 7):
        w = rng.normal(size=(10**5, d + 1))
        w[::2] = np.round(w[::2] * 1.5)  # half the windows carry ties
        w = np.vstack([w, engineered_windows(d)])
        oracle = lexsort_oracle(w)
        bad += int((window_orders(w) != oracle).any(axis=1).sum())
        scalar = np.array([ordinal_pattern(row).order for row in w.tolist()])
        bad += int((scalar != oracle).any(axis=1).sum())
        total += len(w)
    series = np.round(rng.normal(size=10**4))
    for d in range(1, 7):
        view = np.lib.stride_tricks.sliding_window_view(series, d + 1)
        bad += int((ordinal_orders(series, d) != lexsort_oracle(view)).any(axis=1).sum())
    dt = time.perf_counter() - t0
    report(capsys, 1, bad == 0 and dt < 10,
           f'{bad} mismatches over {total} windows (d=1..6, ties included), {dt:.1f}s')


def test_criterion_2_alpha(capsys):
    t0 = time.perf_counter()
    ok = True
    for d in range(1, 4):
        owners = {}
        for p in all_patterns(d):
            for a in alpha_decomposition(p):
                owners[a] = owners.get(a, 0) + 1
        ok &= set(owners) == set(all_patterns(d + 1)) and set(owners.values()) == {1}
    rng = np.random.default_rng(2)
    miss = 0
    for d in range(1, 6):
        w = rng.normal(size=(10**4, d + 2))
        w[::3] = np.round(w[::3])
        for row in w.tolist():
            miss += ordinal_pattern(row) not in alpha_decomposition(ordinal_pattern(row[1:]))
    dt = time.perf_counter() - t0
    report(capsys, 2, ok and miss == 0 and dt < 10,
           f'exhaustive d<=3 {"ok" if ok else "broken"}, {miss} membership misses in 5e4, {dt:.1f}s')


def _degree_refines(x, d):
    fine = block_keys(symbolize(x, d + 1), 1)
    return refines(fine, block_keys(symbolize(x, d), 1)[:len(fine)])


def test_criterion_3_refinement(capsys):
    rng = np.random.default_rng(3)
    fails = 0
    for i in range(1000):
        x = rng.normal(size=80)
        if i % 2:
            x = np.round(x)
        for d in range(1, 6):
            fails += not shift_refinement_check(x, d)
            fails += not _degree_refines(x, d)
    for sys_ in (SystemSpec.logistic(4.0), SystemSpec.tent(), SystemSpec.rotation()):
        x = orbit(sys_, initial_point(sys_, 3), 10**4)
        for d in range(1, 6):
            fails += not shift_refinement_check(x, d)
            fails += not _degree_refines(x, d)
    report(capsys, 3, fails == 0, f'{fails} failures over 1000 random series + 3 orbits, d<=5')


@pytest.mark.parametrize('sys_, target', [
    (SystemSpec.tent(1.9999), math.log(1.9999)),
    (SystemSpec.logistic(4.0), math.log(2.0)),
], ids=['tent', 'logistic'])
def test_criterion_4_ks_vs_lyapunov(capsys, sys_, target):
    t0 = time.perf_counter()
    table = ks_table(sys_, ObservableSpec(), 6, DEFAULT_K_MAX, 10**6, 1)
    dt = time.perf_counter() - t0
    cell = table.ks_cell()
    oracle = lyapunov(sys_, initial_point(sys_, 1), 10**6)
    rel = abs(cell.cond_nats - target) / target
    ok = cell.d == 6 and rel < 0.10 and abs(oracle - target) < 1e-2 and dt < 60
    report(capsys, 4, ok,
           f'{sys_}: estimate {cell.cond_nats:.4f} at (d={cell.d}, k={cell.k}), '
           f'target {target:.4f}, rel err {rel:.1%}, lyapunov {oracle:.4f}, {dt:.1f}s')


def test_criterion_5_rotation(capsys):
    table = ks_table(SystemSpec.rotation(), ObservableSpec(), 6, DEFAULT_K_MAX, 10**6, 1)
    est = table.ks_estimate
    distinct = table.cell(6, 1).distinct_blocks
    report(capsys, 5, est < 0.05 and distinct < 200,
           f'estimate {est:.4f} nats at k={table.ks_cell().k}, {distinct} distinct d=6 patterns')


def test_criterion_6_rank(capsys):
    t0 = time.perf_counter()
    rep = rank_convergence_report(SystemSpec.logistic(4.0), ObservableSpec(),
                                  [10**3, 10**4, 10**5], 100, 6, cdf=arcsine_cdf)
    dt = time.perf_counter() - t0
    last = rep.rows[-1].mean_dev
    means = ', '.join(f'{r.mean_dev:.4f}' for r in rep.rows)
    report(capsys, 6, last < 0.01 and rep.monotone and dt < 30,
           f'mean deviations {means} (d=1e3,1e4,1e5), {dt:.1f}s')


def _random_step_cdf(rng):
    m = int(rng.integers(1, 9))
    jumps = np.sort(rng.choice(np.arange(-32, 33), size=m, replace=False)) / 8.0
    cum = np.sort(rng.integers(1, 17, size=m)) / 16.0
    cum[-1] = 1.0
    return StepCdf(jumps, cum)


def test_criterion_7_cdf(capsys):
    rng = np.random.default_rng(7)
    h = 1.0 / 32
    grid = np.arange(-6.0, 6.0 + h, h)
    bad = 0
    for _ in range(1000):
        F = _random_step_cdf(rng)
        pos = np.searchsorted(F.jumps, grid, side='right') - 1
        vals = np.where(pos >= 0, F.cum[np.maximum(pos, 0)], 0.0)
        for qi in rng.integers(32, len(grid) - 32, size=5):
            q = grid[qi]
            inside = grid[vals == vals[qi]]
            lo, hi = q_bounds(F, q)
            form = level_set_form(F, q)
            ok = (lo.value == inside.min()) if lo.is_finite else inside.min() == grid[0]
            if hi.is_finite:
                # a step CDF plateau stops just before the next jump
                ok &= form is LevelSetForm.CLOSED_OPEN and inside.max() == hi.value - h
            else:
                ok &= form is LevelSetForm.CLOSED and inside.max() == grid[-1]
            if lo.is_finite:
                ok &= F(lo.value) == F(q)
            bad += not ok
    report(capsys, 7, bad == 0, f'{bad} mismatches over 1000 step CDFs x 5 points')


def test_criterion_8_entropy(capsys):
    uniform = max(abs(entropy_of_counts([9] * n) - math.log(n)) for n in (2, 3, 10, 1000, 10**5))
    coin = np.random.default_rng(8).integers(0, 2, size=10**6)
    cells = entropy_rate_table(SymbolSequence(1, coin), 12)
    best = max((c for c in cells if c.reliable), key=lambda c: c.k)
    coin_err = max(abs(best.cond_nats - math.log(2)), abs(best.block_nats - math.log(2)))
    mono = True
    rng = np.random.default_rng(88)
    data = [rng.normal(size=5000), np.round(rng.normal(size=5000))]
    data += [orbit(s, initial_point(s, 8), 10**4) for s in
             (SystemSpec.logistic(4.0), SystemSpec.tent(), SystemSpec.rotation())]
    for x in data:
        for d in range(1, 6):
            fine = block_keys(symbolize(x, d + 1), 1)
            coarse = block_keys(symbolize(x, d), 1)[:len(fine)]
            mono &= shannon(partition_from_keys(fine)) >= shannon(partition_from_keys(coarse))
            sfine = block_keys(symbolize(x, d + 1), 1)
            scoarse = block_keys(symbolize(x[1:], d), 1)
            mono &= shannon(partition_from_keys(sfine)) >= shannon(partition_from_keys(scoarse))
    suite = run_suite('entropy').passed
    ok = uniform < 1e-12 and coin_err < 0.01 and mono and suite
    report(capsys, 8, ok, f'uniform err {uniform:.1e}, coin rate err {coin_err:.4f} (k={best.k}), '
                          f'refinement monotone {mono}, entropy suite {suite}')


def test_criterion_9_noninjectivity(capsys):
    tent = SystemSpec.tent(2.0)
    m = 10**5
    ident = noninjectivity_fraction(ObservableSpec(), tent, m, 1e-6, 9)
    sincos = noninjectivity_fraction(ObservableSpec('sincos'), tent, m, 1e-6, 9)
    fold = ObservableSpec('fold', {'c': 0.5})
    p4 = noninjectivity_fraction(fold, tent, m, 1e-4, 9)
    p5 = noninjectivity_fraction(fold, tent, m, 1e-5, 9)
    ratio = p4 / p5 if p5 > 0 else math.inf
    ok = ident == 0.0 and sincos == 0.0 and p4 > 0 and p5 > 0 and 5 <= ratio <= 20
    report(capsys, 9, ok, f'identity {ident}, sincos {sincos}, fold {p4:.2e} -> {p5:.2e} '
                          f'(ratio {ratio:.1f})')


def test_criterion_10_determinism(capsys, tmp_path):
    commands = [
        ['simulate', '--system', 'logistic:4', '--len', '2000', '--seed', '1'],
        ['simulate', '--system', 'rotation', '--observable', 'sincos', '--len', '500',
         '--format', 'json'],
        ['entropy-table', '--system', 'tent', '--d-max', '4', '--k-max', '6', '--len', '50000',
         '--seed', '2'],
        ['entropy-table', '--system', 'logistic:4', '--d-max', '3', '--len', '20000',
         '--format', 'csv', '--threads', '2'],
        ['rank', '--d-list', '100,1000', '--trials', '20', '--seed', '3'],
        ['noninj', '--observable', 'fold:0.5', '--system', 'tent:2', '--tol', '1e-4'],
        ['verify', 'patterns'],
    ]
    same = 0
    for i, cmd in enumerate(commands):
        outs = []
        for rep in range(2):
            dest = tmp_path / f'{i}_{rep}.out'
            res = subprocess.run([sys.executable, '-m', 'ordent.cli', *cmd, '--out', str(dest)],
                                 capture_output=True)
            outs.append((res.returncode, dest.read_bytes(), res.stderr))
        same += outs[0] == outs[1] and outs[0][0] == 0 and len(outs[0][1]) > 0
    report(capsys, 10, same == len(commands),
           f'{same}/{len(commands)} commands byte-identical across re-runs')
