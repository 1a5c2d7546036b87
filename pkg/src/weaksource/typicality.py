"""Exhaustive typical / atypical partition of all length-n blocks, and probability zones."""
from __future__ import annotations

import csv
import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from .source_model import (
    SourceError,
    SourceModel,
    SymbolBlock,
    block_log2_probabilities,
    sequence_log2_probability,
    sequence_probability,
)

DEFAULT_ENUMERATION_CAP = 2**24
# log2-domain slack at the band edges; blocks this close to a threshold are typical
BAND_TOL = 1e-12


class PartitionError(ValueError):
    pass


class Zone(str, enum.Enum):
    VLPZ = "VLPZ"  # p < 2^{-n(H+eps)}
    MPZ = "MPZ"  # the typical band
    VHPZ = "VHPZ"  # p > 2^{-n(H-eps)}


def band_edges(n: int, entropy_bits: float, epsilon: float) -> tuple[float, float]:
    """Return ``(low, high)`` in log2 probability: typical iff low <= log2 p <= high."""
    return -n * (entropy_bits + epsilon), -n * (entropy_bits - epsilon)


def _zone_codes(log2p: np.ndarray, low: float, high: float) -> np.ndarray:
    # 0 = VLPZ, 1 = MPZ, 2 = VHPZ
    codes = np.ones(log2p.shape, dtype=np.int8)
    codes[log2p < low - BAND_TOL] = 0
    codes[log2p > high + BAND_TOL] = 2
    return codes


_ZONES = (Zone.VLPZ, Zone.MPZ, Zone.VHPZ)


def enumerate_blocks(alphabet_size: int, n: int) -> np.ndarray:
    """All ``alphabet_size**n`` blocks as rows, in lexicographic order."""
    idx = np.arange(alphabet_size**n, dtype=np.int64)
    powers = alphabet_size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] // powers[None, :]) % alphabet_size).astype(np.uint8)


def _to_blocks(rows: np.ndarray) -> list[SymbolBlock]:
    return [SymbolBlock(tuple(r)) for r in rows.tolist()]


@dataclass(frozen=True, eq=False)
class TypicalPartition:
    """The typical set A and atypical set B for one (source, n, epsilon).

    Block rows are stored as arrays (``typical_array``/``atypical_array``) in
    lexicographic order; ``typical_list`` and ``atypical_list`` are the same
    rows as :class:`SymbolBlock` objects.
    """

    n: int
    epsilon: float
    entropy_bits: float
    alphabet_size: int
    typical_array: np.ndarray = field(repr=False)
    atypical_array: np.ndarray = field(repr=False)
    typical_log2p: np.ndarray = field(repr=False)
    atypical_log2p: np.ndarray = field(repr=False)
    atypical_zone_codes: np.ndarray = field(repr=False)
    prob_typical: float
    prob_atypical: float

    @property
    def typical_count(self) -> int:
        return int(self.typical_array.shape[0])

    @property
    def atypical_count(self) -> int:
        return int(self.atypical_array.shape[0])

    @cached_property
    def typical_list(self) -> list[SymbolBlock]:
        return _to_blocks(self.typical_array)

    @cached_property
    def atypical_list(self) -> list[SymbolBlock]:
        return _to_blocks(self.atypical_array)

    @cached_property
    def _typical_rank(self) -> dict[SymbolBlock, int]:
        return {b: i for i, b in enumerate(self.typical_list)}

    @cached_property
    def _atypical_rank(self) -> dict[SymbolBlock, int]:
        return {b: i for i, b in enumerate(self.atypical_list)}

    def typical_rank(self, block: SymbolBlock) -> int | None:
        """Position of ``block`` in ``typical_list``, or None if atypical."""
        return self._typical_rank.get(block)

    def atypical_rank(self, block: SymbolBlock) -> int | None:
        return self._atypical_rank.get(block)

    def is_typical(self, block: SymbolBlock) -> bool:
        return block in self._typical_rank

    def zone_of(self, block: SymbolBlock) -> Zone:
        if block.n != self.n:
            raise PartitionError(f"block length {block.n} != n={self.n}")
        if block in self._typical_rank:
            return Zone.MPZ
        j = self._atypical_rank.get(block)
        if j is None:
            raise PartitionError(f"block {block} is not in the enumerated space")
        return _ZONES[int(self.atypical_zone_codes[j])]

    def atypical_zones(self) -> list[Zone]:
        return [_ZONES[c] for c in self.atypical_zone_codes.tolist()]

    def summary(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "entropy": self.entropy_bits,
            "typical_count": self.typical_count,
            "atypical_count": self.atypical_count,
            "prob_typical": self.prob_typical,
            "prob_atypical": self.prob_atypical,
        }

    def write_sequences_csv(self, path) -> None:
        """One block per row: ``set,zone,s1,...,sn``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["set", "zone"] + [f"s{i + 1}" for i in range(self.n)])
            for row in self.typical_array.tolist():
                w.writerow(["A", Zone.MPZ.value] + row)
            for row, code in zip(self.atypical_array.tolist(), self.atypical_zone_codes.tolist()):
                w.writerow(["B", _ZONES[code].value] + row)


def _check_epsilon(epsilon: float) -> None:
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise PartitionError(f"epsilon must be positive, got {epsilon!r}")


def partition_sequences(
    model: SourceModel,
    n: int,
    epsilon: float,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> TypicalPartition:
    if n < 1:
        raise PartitionError("n must be >= 1")
    _check_epsilon(epsilon)
    space = model.alphabet_size**n
    if space > cap:
        raise PartitionError(f"{model.alphabet_size}^{n} = {space} blocks exceeds enumeration cap {cap}")

    blocks = enumerate_blocks(model.alphabet_size, n)
    log2p = block_log2_probabilities(model, blocks)
    low, high = band_edges(n, model.entropy_bits, epsilon)
    codes = _zone_codes(log2p, low, high)
    typical = codes == 1

    probs = np.exp2(log2p)
    prob_typical = math.fsum(probs[typical].tolist())
    prob_atypical = math.fsum(probs[~typical].tolist())

    return TypicalPartition(
        n=n,
        epsilon=float(epsilon),
        entropy_bits=model.entropy_bits,
        alphabet_size=model.alphabet_size,
        typical_array=blocks[typical],
        atypical_array=blocks[~typical],
        typical_log2p=log2p[typical],
        atypical_log2p=log2p[~typical],
        atypical_zone_codes=codes[~typical],
        prob_typical=prob_typical,
        prob_atypical=prob_atypical,
    )


def classify_zone(model: SourceModel, block: SymbolBlock, n: int, epsilon: float) -> Zone:
    _check_epsilon(epsilon)
    model.validate(block, n)
    low, high = band_edges(n, model.entropy_bits, epsilon)
    lp = sequence_log2_probability(model, block)
    return _ZONES[int(_zone_codes(np.array([lp]), low, high)[0])]


def set_probability(model: SourceModel, blocks: Iterable[SymbolBlock]) -> float:
    blocks = list(blocks)
    if len(set(blocks)) != len(blocks):
        raise PartitionError("duplicate blocks in set")
    return math.fsum(sequence_probability(model, b) for b in blocks)


@dataclass(frozen=True)
class TypeClassSummary:
    n: int
    epsilon: float
    typical_count: int
    prob_typical: float
    prob_atypical: float


def _compositions(n: int, parts: int):
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def type_class_summary(model: SourceModel, n: int, epsilon: float) -> TypeClassSummary:
    """Typical-set size and probability by aggregating over type classes.

    Every block with the same symbol counts has the same probability, so this
    visits ``C(n+a-1, a-1)`` classes instead of ``a**n`` blocks.
    """
    if n < 1:
        raise PartitionError("n must be >= 1")
    _check_epsilon(epsilon)
    low, high = band_edges(n, model.entropy_bits, epsilon)
    count = 0
    typical_terms, atypical_terms = [], []
    for comp in _compositions(n, model.alphabet_size):
        if any(c > 0 and p == 0.0 for c, p in zip(comp, model.pmf)):
            continue
        lp = 0.0
        for c, l2 in zip(comp, model.log2_pmf):
            if c:
                lp = lp + c * l2
        size = math.factorial(n)
        for c in comp:
            size //= math.factorial(c)
        mass = size * 2.0**lp
        if low - BAND_TOL <= lp <= high + BAND_TOL:
            count += size
            typical_terms.append(mass)
        else:
            atypical_terms.append(mass)
    # zero-probability classes are atypical with no mass
    return TypeClassSummary(
        n=n,
        epsilon=float(epsilon),
        typical_count=count,
        prob_typical=math.fsum(typical_terms),
        prob_atypical=math.fsum(atypical_terms),
    )


def first_n_below(model: SourceModel, epsilon: float, n_max: int) -> int | None:
    """Smallest n <= n_max with P(B) < epsilon, via type-class aggregation."""
    for n in range(1, n_max + 1):
        if type_class_summary(model, n, epsilon).prob_atypical < epsilon:
            return n
    return None


__all__ = [
    "DEFAULT_ENUMERATION_CAP",
    "PartitionError",
    "TypicalPartition",
    "TypeClassSummary",
    "Zone",
    "band_edges",
    "classify_zone",
    "enumerate_blocks",
    "first_n_below",
    "partition_sequences",
    "set_probability",
    "type_class_summary",
]
