import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weaksource.source_model import (
    SourceError,
    SymbolBlock,
    block_log2_probabilities,
    new_source,
    sample_block,
    sample_blocks,
    sequence_log2_probability,
    sequence_probability,
)


def test_entropy_uniform_and_degenerate():
    assert new_source([0.5, 0.5]).entropy_bits == 1.0
    assert new_source([1.0]).entropy_bits == 0.0


def test_entropy_bernoulli_02():
    # mpmath at 40 digits: -(0.2 log2 0.2 + 0.8 log2 0.8)
    assert new_source([0.2, 0.8]).entropy_bits == pytest.approx(0.72192809488736234787, abs=1e-12)
    assert new_source([0.2, 0.8]).entropy_bits == pytest.approx(0.721928, abs=1e-6)


def test_zero_probability_symbol_contributes_nothing():
    assert new_source([0.5, 0.0, 0.5]).entropy_bits == 1.0


@pytest.mark.parametrize("pmf", [[], [-0.1, 1.1], [0.5, 0.4], [0.5, 0.6], [float("nan"), 1.0]])
def test_rejects_bad_pmf(pmf):
    with pytest.raises(SourceError):
        new_source(pmf)


def test_accepts_small_normalisation_slack():
    new_source([0.5, 0.5 + 5e-10])


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6).filter(lambda xs: sum(xs) > 1e-3))
def test_entropy_range(raw):
    total = sum(raw)
    m = new_source([x / total for x in raw])
    assert -1e-12 <= m.entropy_bits <= math.log2(len(raw)) + 1e-12


@given(st.floats(0.0, 1.0))
def test_binary_entropy_symmetric(p):
    assert new_source([p, 1 - p]).entropy_bits == pytest.approx(
        new_source([1 - p, p]).entropy_bits, abs=1e-12
    )


def test_sequence_probability_examples(bern02):
    uni = new_source([0.5, 0.5])
    assert sequence_probability(uni, SymbolBlock.from_string("0110")) == 0.0625
    assert sequence_probability(bern02, SymbolBlock((0,) * 10)) == pytest.approx(1.024e-7, rel=1e-12)
    assert sequence_probability(bern02, SymbolBlock((1,) * 10)) == pytest.approx(0.1073741824, rel=1e-12)


def test_sequence_probability_rejects_bad_symbol(bern02):
    with pytest.raises(SourceError):
        sequence_probability(bern02, SymbolBlock((0, 2)))


@pytest.mark.parametrize(
    "pmf,n", [([0.2, 0.8], 12), ([0.5, 0.5], 10), ([0.2, 0.3, 0.5], 7), ([0.1, 0.0, 0.9], 6)]
)
def test_total_probability(pmf, n):
    m = new_source(pmf)
    total = math.fsum(
        sequence_probability(m, SymbolBlock(b)) for b in itertools.product(range(len(pmf)), repeat=n)
    )
    assert total == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=50)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=12), st.randoms())
def test_permutation_invariance(symbols, rnd):
    m = new_source([0.2, 0.3, 0.5])
    shuffled = list(symbols)
    rnd.shuffle(shuffled)
    a = sequence_probability(m, SymbolBlock(symbols))
    b = sequence_probability(m, SymbolBlock(shuffled))
    assert a == pytest.approx(b, rel=1e-12)
    assert sequence_log2_probability(m, SymbolBlock(symbols)) == sequence_log2_probability(
        m, SymbolBlock(shuffled)
    )


def test_log2_path_survives_underflow():
    m = new_source([0.2, 0.8])
    block = SymbolBlock((0,) * 600)
    assert sequence_probability(m, block) == 0.0
    assert sequence_log2_probability(m, block) == pytest.approx(600 * math.log2(0.2))


def test_log2_path_matches_product(bern02):
    rows = np.array(list(itertools.product((0, 1), repeat=8)))
    lp = block_log2_probabilities(bern02, rows)
    direct = [math.log2(sequence_probability(bern02, SymbolBlock(r))) for r in rows.tolist()]
    np.testing.assert_allclose(lp, direct, atol=1e-12)


def test_sampling_deterministic(bern02):
    assert sample_block(bern02, 20, 123) == sample_block(bern02, 20, 123)
    assert sample_block(bern02, 20, 123) != sample_block(bern02, 20, 124)
    assert tuple(sample_blocks(bern02, 20, 5, 123)[0]) == sample_block(bern02, 20, 123).symbols


def test_sampling_degenerate():
    assert sample_block(new_source([1.0]), 5, 9) == SymbolBlock.from_string("00000")
    assert set(sample_blocks(new_source([0.0, 1.0, 0.0]), 50, 20, 3).ravel()) == {1}


def test_sampling_frequency(bern02):
    block = sample_block(bern02, 10_000, 2024)
    frac = sum(block.symbols) / 10_000
    # 3 sigma of Binomial(10^4, 0.8) / 10^4
    assert abs(frac - 0.8) <= 3 * math.sqrt(0.16 / 10_000)


def test_sampling_rejects_zero_length(bern02):
    with pytest.raises(SourceError):
        sample_block(bern02, 0, 1)


def test_block_string_forms():
    assert SymbolBlock.from_string("0,1,2") == SymbolBlock((0, 1, 2))
    assert str(SymbolBlock((1, 0))) == "10"
    assert SymbolBlock((0, 1)) < SymbolBlock((1, 0))
