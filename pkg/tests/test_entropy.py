import json
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ordent import InsufficientData, InvalidInput
from ordent.dynamics import ObservableSpec, SystemSpec, initial_point, orbit, splitmix64
from ordent.entropy import (
    BIAS_TOL, CSV_COLUMNS, SUPPORT_RATIO, EntropyTable, UndersamplingWarning,
    entropy_of_counts, entropy_rate_table, ks_table, permutation_entropy, shannon,
)
from ordent.partition import EmpiricalPartition, SymbolSequence, symbolize, symbolize_multi


def naive_h(counter):
    n = sum(counter.values())
    return -sum(c / n * math.log(c / n) for c in counter.values())


def naive_row(segments, k_max):
    """Pure-Python reference for one table row over independent segments."""
    out = []
    for k in range(1, k_max + 1):
        blocks, nxt, pre = Counter(), Counter(), Counter()
        for seq in segments:
            seq = [tuple(r) for r in seq]
            for t in range(len(seq) - k + 1):
                blocks[tuple(seq[t:t + k])] += 1
            for t in range(len(seq) - k):
                nxt[tuple(seq[t:t + k + 1])] += 1
                pre[tuple(seq[t:t + k])] += 1
        out.append((naive_h(blocks) / k, naive_h(nxt) - naive_h(pre),
                    len(blocks), sum(blocks.values()), len(nxt), sum(nxt.values())))
    return out


def test_shannon_examples():
    assert shannon(EmpiricalPartition({b'a': 4, b'b': 4, b'c': 4, b'd': 4})) == pytest.approx(
        math.log(4), abs=1e-15)
    assert shannon(EmpiricalPartition({b'a': 7})) == 0.0
    assert abs(entropy_of_counts([1, 3]) - 0.5623) < 1e-4
    assert entropy_of_counts([1, 3]) == pytest.approx(-(0.25 * math.log(0.25) + 0.75 * math.log(0.75)))
    with pytest.raises(InvalidInput):
        shannon(EmpiricalPartition())
    with pytest.raises(InvalidInput):
        entropy_of_counts([0, 0])


@pytest.mark.parametrize('n', [1, 2, 5, 100, 12345])
def test_uniform_histogram_exact(n):
    assert abs(entropy_of_counts([3] * n) - math.log(n)) < 1e-12


@given(st.lists(st.integers(0, 50), min_size=1, max_size=40).filter(any))
def test_entropy_of_counts_matches_naive(counts):
    ref = naive_h(Counter({i: c for i, c in enumerate(counts) if c}))
    assert entropy_of_counts(counts) == pytest.approx(ref, abs=1e-12)
    assert entropy_of_counts(counts) == entropy_of_counts(counts[::-1])


def test_row_matches_naive_reference(rng):
    s = SymbolSequence(2, rng.integers(0, 6, size=(400, 2)))
    ref = naive_row([s.symbols.tolist()], 4)
    for cell, (blk, cond, dk, tk, dn, tn) in zip(entropy_rate_table(s, 4), ref):
        assert cell.block_nats == pytest.approx(blk, abs=1e-12)
        assert cell.cond_nats == pytest.approx(max(cond, 0.0), abs=1e-12)
        assert (cell.distinct_blocks, cell.total_blocks) == (dk, tk)
        assert (cell.distinct_next, cell.total_next) == (dn, tn)

    rows = [tuple(r) for r in s.symbols.tolist()]
    for cell in entropy_rate_table(s, 4):
        k = cell.k
        prefixes = {tuple(rows[t:t + k]) for t in range(len(rows) - k)}
        expect = (cell.distinct_next - len(prefixes)) / (2 * cell.total_next)
        assert cell.bias_nats == pytest.approx(expect, abs=1e-15)


def test_reliability_rule(rng):
    s = SymbolSequence(3, rng.integers(0, 24, size=10**5))
    for c in entropy_rate_table(s, 3):
        expect = (c.distinct_blocks <= SUPPORT_RATIO * c.total_blocks
                  and c.distinct_next <= SUPPORT_RATIO * c.total_next
                  and c.bias_nats <= BIAS_TOL)
        assert c.reliable == expect
    cells = entropy_rate_table(s, 3)
    assert cells[0].reliable and not cells[1].reliable


def test_constant_symbols():
    for c in entropy_rate_table(SymbolSequence(2, np.full(500, 3)), 10):
        assert c.block_nats == 0.0 and c.cond_nats == 0.0


def test_periodic_symbols_zero_conditional():
    s = SymbolSequence(1, np.tile([0, 1], 500))
    assert all(c.cond_nats == 0.0 for c in entropy_rate_table(s, 10))
    s3 = SymbolSequence(2, np.tile([0, 3, 5], 400))
    assert all(c.cond_nats == 0.0 for c in entropy_rate_table(s3, 10)[1:])


def test_fair_coin_rate():
    coin = np.random.default_rng(7).integers(0, 2, size=10**6)
    cells = entropy_rate_table(SymbolSequence(1, coin), 12)
    best = max((c for c in cells if c.reliable), key=lambda c: c.k)
    assert abs(best.block_nats - math.log(2)) < 0.01
    assert abs(best.cond_nats - math.log(2)) < 0.01


def test_guard():
    with pytest.raises(InsufficientData) as e:
        entropy_rate_table(SymbolSequence(1, [0, 1] * 10), 5)
    assert e.value.required == 50


def test_permutation_entropy(rng):
    assert permutation_entropy(symbolize(np.ones(100), 3)) == 0.0
    assert permutation_entropy(symbolize(np.arange(100.0), 3)) == 0.0
    pe = permutation_entropy(symbolize(rng.random(10**5), 2))
    assert abs(pe - math.log(6) / 2) < 0.01
    with pytest.raises(InsufficientData):
        permutation_entropy(symbolize(rng.random(30), 3))


def test_ks_table_pools_orbits_without_crossing():
    sys, obs = SystemSpec.tent(), ObservableSpec()
    table = ks_table(sys, obs, 2, 3, 300, 5, n_orbits=3)
    segs = []
    for s in splitmix64(5, 3):
        x = orbit(sys, initial_point(sys, s % 2**63), 300)
        segs.append(symbolize(x, 2).symbols.tolist())
    for (blk, cond, dk, tk, dn, tn), k in zip(naive_row(segs, 3), (1, 2, 3)):
        c = table.cell(2, k)
        assert c.block_nats == pytest.approx(blk, abs=1e-12)
        assert c.cond_nats == pytest.approx(max(cond, 0.0), abs=1e-12)
        assert (c.total_blocks, c.total_next) == (tk, tn)


def test_ks_table_multi_observable_is_joint():
    sys, obs = SystemSpec.logistic(4.0), ObservableSpec('sincos')
    table = ks_table(sys, obs, 2, 2, 2000, 3)
    x = orbit(sys, initial_point(sys, splitmix64(3, 1)[0] % 2**63), 2000)
    s = symbolize_multi(list(obs(x)), 2)
    assert table.cell(2, 1).block_nats == entropy_rate_table(s, 2)[0].block_nats


def test_ks_table_threads_and_serialization():
    sys, obs = SystemSpec.tent(), ObservableSpec()
    a = ks_table(sys, obs, 4, 5, 20000, 11)
    b = ks_table(sys, obs, 4, 5, 20000, 11, threads=4)
    assert a.to_json() == b.to_json()
    assert EntropyTable.from_json(a.to_json()).cells == a.cells
    rows = a.to_csv().splitlines()
    assert rows[0] == ','.join(CSV_COLUMNS)
    assert len(rows) == 1 + 4 * 5
    d, k, blk, cond, dist, tot, rel = rows[1].split(',')
    c = a.cell(1, 1)
    assert float(blk) == c.block_nats and int(rel) == int(c.reliable)
    assert json.loads(a.to_json())['metadata']['seed'] == 11
    assert a.invariant_violations() == []


def test_ks_table_errors_and_warning():
    sys, obs = SystemSpec.tent(), ObservableSpec()
    with pytest.raises(InvalidInput):
        ks_table(sys, obs, 9, 3, 10**4, 1)
    with pytest.raises(InsufficientData):
        ks_table(sys, obs, 2, 50, 100, 1)
    with pytest.warns(UndersamplingWarning):
        t = ks_table(sys, obs, 7, 3, 1000, 1)
    assert not any(c.reliable for c in t.cells if c.d == 7)


def test_cond_not_above_block_on_dynamics():
    for sys in (SystemSpec.tent(), SystemSpec.logistic(4.0), SystemSpec.rotation()):
        t = ks_table(sys, ObservableSpec(), 4, 6, 6000, 2)
        assert all(c.cond_nats <= c.block_nats + 1e-9 for c in t.cells)
