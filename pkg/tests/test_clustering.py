import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weaksource.clustering import (
    ClusteringError,
    assign,
    cluster_atypical,
    cluster_blocks,
    compute_b_prime,
    hamming_distance,
    largest_cluster_probability,
    zone_homogeneity,
)
from weaksource.source_model import SymbolBlock, block_log2_probabilities, new_source, sequence_probability
from weaksource.typicality import Zone, classify_zone, partition_sequences, set_probability

blocks8 = st.lists(st.integers(0, 2), min_size=8, max_size=8).map(SymbolBlock)


def test_hamming_examples():
    x = SymbolBlock.from_string("0110")
    assert hamming_distance(x, x) == 0
    assert hamming_distance(SymbolBlock.from_string("0000"), SymbolBlock.from_string("1111")) == 4
    assert hamming_distance(SymbolBlock.from_string("0101"), SymbolBlock.from_string("0011")) == 2
    with pytest.raises(ClusteringError):
        hamming_distance(SymbolBlock((0,)), SymbolBlock((0, 1)))


@given(blocks8, blocks8, blocks8)
def test_hamming_metric(a, b, c):
    assert hamming_distance(a, b) == hamming_distance(b, a)
    assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)


def ball(center, flips=None):
    out = [tuple(center)]
    for i in flips if flips is not None else range(len(center)):
        b = list(center)
        b[i] ^= 1
        out.append(tuple(b))
    return out


def planted(bern02):
    a = ball((0,) * 8)  # 9 blocks around all-zeros
    b = ball((1, 1, 1, 1, 1, 0, 0, 0), flips=[0, 1, 2, 3])  # 5 blocks, centers at distance 5
    rows = np.array(sorted(a + b), dtype=np.uint8)
    return rows, block_log2_probabilities(bern02, rows), set(a), set(b)


def brute_best_two_clustering(rows):
    best = None
    for i, j in itertools.combinations(range(len(rows)), 2):
        d = np.stack([(rows != rows[i]).sum(1), (rows != rows[j]).sum(1)], axis=1)
        cost = d.min(1).sum()
        if best is None or cost < best[0]:
            lab = d.argmin(1)
            best = (cost, frozenset(frozenset(tuple(r) for r in rows[lab == c].tolist()) for c in (0, 1)))
    return best


def test_planted_balls_recovered(bern02):
    rows, lp, a, b = planted(bern02)
    cost, groups = brute_best_two_clustering(rows)
    assert groups == {frozenset(a), frozenset(b)}
    cm = cluster_blocks(rows, lp, 2, seed=5)
    found = {frozenset(m.symbols for m in cm.members(j)) for j in (1, 2)}
    assert found == groups
    assert cm.total_cost == cost


def test_planted_plc_direct_sum(bern02):
    rows, lp, a, _ = planted(bern02)
    cm = cluster_blocks(rows, lp, 2)
    assert {m.symbols for m in cm.members(cm.largest_index)} == a
    direct = 0.2**8 + 8 * 0.2**7 * 0.8
    assert largest_cluster_probability(cm) == pytest.approx(direct, rel=1e-12)


def test_n10_k2_sizes(bern02, part10):
    cm = cluster_atypical(part10, bern02, 2, seed=0)
    assert sum(cm.sizes) == 849
    assert math.fsum(cm.cluster_prob) == pytest.approx(part10.prob_atypical, abs=1e-9)
    assert len(compute_b_prime(cm)) == 848


def test_medoid_belongs_and_minimises(bern02, part10):
    cm = cluster_atypical(part10, bern02, 4, seed=1)
    for j in range(1, 5):
        members = cm.members(j)
        mu = cm.medoids[j - 1]
        assert mu in members
        cost = {x: sum(hamming_distance(x, y) for y in members) for x in members}
        best = min(cost.values())
        assert mu == min(x for x in members if cost[x] == best)


@pytest.mark.parametrize("pmf,n,eps", [([0.2, 0.8], 10, 0.2), ([0.2, 0.8], 12, 0.1), ([0.2, 0.3, 0.5], 6, 0.2)])
@pytest.mark.parametrize("k", [2, 3, 7])
def test_assignment_optimal_exhaustive(pmf, n, eps, k):
    m = new_source(pmf)
    part = partition_sequences(m, n, eps)
    cm = cluster_atypical(part, m, k, seed=11)
    medoids = cm.medoids
    for x, j in cm.assignment.items():
        scan = [hamming_distance(x, mu) for mu in medoids]
        assert j == scan.index(min(scan)) + 1
        assert assign(x, cm) == j


def test_assign_examples(bern02, part10):
    cm = cluster_atypical(part10, bern02, 4, seed=0)
    assert assign(cm.medoids[2], cm) == 3
    # a block equidistant from mu_1 and mu_2 goes to 1
    rows = np.array([(0, 0, 0, 0), (0, 0, 1, 1), (1, 1, 0, 0), (1, 1, 1, 1)], dtype=np.uint8)
    uni = new_source([0.5, 0.5])
    small = cluster_blocks(rows, block_log2_probabilities(uni, rows), 2)
    probe = SymbolBlock((0, 1, 0, 1))
    d = [hamming_distance(probe, mu) for mu in small.medoids]
    assert d[0] == d[1]
    assert assign(probe, small) == 1


def test_determinism(bern02, part10):
    a = cluster_atypical(part10, bern02, 5, seed=99)
    b = cluster_atypical(part10, bern02, 5, seed=99)
    assert a.medoid_rows == b.medoid_rows
    assert np.array_equal(a.labels, b.labels)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("k", [2, 3, 5, 8, 16])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cost_never_increases(bern02, k, seed):
    part = partition_sequences(bern02, 11, 0.15)
    cm = cluster_atypical(part, bern02, k, seed=seed)
    assert cm.converged
    assert all(b <= a for a, b in zip(cm.cost_history, cm.cost_history[1:]))
    d = np.stack([(cm.blocks != mu).sum(1) for mu in cm.medoid_array], axis=1)
    assert cm.total_cost == d.min(1).sum()


def test_cluster_probabilities_consistent(bern02, part10):
    cm = cluster_atypical(part10, bern02, 6, seed=3)
    for j in range(1, 7):
        assert cm.cluster_prob[j - 1] == pytest.approx(set_probability(bern02, cm.members(j)), abs=1e-12)


def test_plc_strictly_below_prob_atypical(bern02):
    for n, eps, k in [(10, 0.2, 2), (10, 0.2, 9), (12, 0.3, 4), (8, 0.1, 3)]:
        part = partition_sequences(bern02, n, eps)
        cm = cluster_atypical(part, bern02, k)
        assert sum(s > 0 for s in cm.sizes) >= 2
        assert cm.plc < part.prob_atypical


def extreme_instance():
    """pmf [0.4, 0.6], n=6, eps=0.25: seven atypical blocks, all VLPZ."""
    m = new_source([0.4, 0.6])
    part = partition_sequences(m, 6, 0.25)
    assert part.atypical_count == 7
    return m, part


def test_singletons_when_k_equals_B():
    m, part = extreme_instance()
    cm = cluster_atypical(part, m, 7)
    assert cm.sizes == [1] * 7
    for j in range(1, 8):
        assert cm.members(j) == [cm.medoids[j - 1]]
    bp = compute_b_prime(cm)
    assert len(bp) == 1
    assert bp == [cm.medoids[cm.largest_index - 1]]
    # size tie: the winner has the most probability
    assert cm.plc == max(cm.cluster_prob)


def test_largest_medoid_in_b_prime(bern02, part10):
    for k in (2, 5, 10):
        cm = cluster_atypical(part10, bern02, k)
        bp = compute_b_prime(cm)
        assert len(bp) == 849 - k + 1
        assert cm.medoids[cm.largest_index - 1] in bp


def test_cluster_errors(bern02, part10):
    with pytest.raises(ClusteringError):
        cluster_atypical(part10, bern02, 1)
    with pytest.raises(ClusteringError):
        cluster_atypical(part10, bern02, 850)
    uni = new_source([0.5, 0.5])
    with pytest.raises(ClusteringError):
        cluster_atypical(partition_sequences(uni, 6, 0.1), uni, 2)


def test_zone_homogeneity_labels(bern02):
    part = partition_sequences(bern02, 8, 0.2)
    # two VLPZ-only blocks and a VLPZ + VHPZ pair
    vl = [b for b in part.atypical_list if part.zone_of(b) is Zone.VLPZ][:2]
    vh = [b for b in part.atypical_list if part.zone_of(b) is Zone.VHPZ][0]
    rows = np.array(sorted(b.symbols for b in vl), dtype=np.uint8)
    cm = cluster_blocks(rows, block_log2_probabilities(bern02, rows), 2)
    assert zone_homogeneity(cm, part, bern02).labels == ["VLPZ", "VLPZ"]
    mixed_rows = np.array(sorted([vl[0].symbols, vh.symbols, vl[1].symbols]), dtype=np.uint8)
    mixed = cluster_blocks(mixed_rows, block_log2_probabilities(bern02, mixed_rows), 2)
    report = zone_homogeneity(mixed, part, bern02)
    zones_by_cluster = [{part.zone_of(b) for b in mixed.members(j)} for j in (1, 2)]
    expected = [z.pop().value if len(z) == 1 else "MIXED" for z in zones_by_cluster]
    assert report.labels == expected


def test_zone_homogeneity_measured(bern02, part10):
    cm = cluster_atypical(part10, bern02, 2)
    report = zone_homogeneity(cm, part10, bern02)
    oracle = []
    for j in (1, 2):
        zones = {classify_zone(bern02, b, 10, 0.2) for b in cm.members(j)}
        oracle.append(zones.pop().value if len(zones) == 1 else "MIXED")
    assert report.labels == oracle
    assert report.fraction == sum(l != "MIXED" for l in oracle) / 2
