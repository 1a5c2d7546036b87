"""Discrete memoryless sources: per-symbol law, entropy, block probabilities, sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PMF_SUM_TOL = 1e-9


class SourceError(ValueError):
    """Invalid source parameters or a block that does not fit the source."""


@dataclass(frozen=True, order=True)
class SymbolBlock:
    """A length-n block of symbol indices. Ordering is lexicographic."""

    symbols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))

    @property
    def n(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __str__(self):
        if all(s < 10 for s in self.symbols):
            return "".join(str(s) for s in self.symbols)
        return ",".join(str(s) for s in self.symbols)

    @classmethod
    def from_string(cls, text: str) -> "SymbolBlock":
        """Parse ``"0101"`` or ``"0,1,0,1"``."""
        text = text.strip()
        parts = text.split(",") if "," in text else list(text)
        return cls(tuple(int(p) for p in parts))


def _entropy_bits(pmf: Sequence[float]) -> float:
    # 0 log 0 := 0
    return float(-sum(p * math.log2(p) for p in pmf if p > 0.0))


@dataclass(frozen=True)
class SourceModel:
    """i.i.d. source over symbols ``0..alphabet_size-1``."""

    pmf: tuple[float, ...]
    entropy_bits: float = field(init=False)
    log2_pmf: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self):
        pmf = tuple(float(p) for p in self.pmf)
        if not pmf:
            raise SourceError("pmf must be non-empty")
        if any(not math.isfinite(p) for p in pmf):
            raise SourceError("pmf entries must be finite")
        if any(p < 0.0 for p in pmf):
            raise SourceError(f"pmf has negative entries: {pmf}")
        total = math.fsum(pmf)
        if abs(total - 1.0) > PMF_SUM_TOL:
            raise SourceError(f"pmf sums to {total!r}, not 1")
        object.__setattr__(self, "pmf", pmf)
        object.__setattr__(self, "entropy_bits", _entropy_bits(pmf))
        object.__setattr__(
            self, "log2_pmf", tuple(math.log2(p) if p > 0 else -math.inf for p in pmf)
        )

    @property
    def alphabet_size(self) -> int:
        return len(self.pmf)

    def validate(self, block: SymbolBlock, n: int | None = None) -> None:
        if n is not None and block.n != n:
            raise SourceError(f"block length {block.n} != n={n}")
        for s in block.symbols:
            if not 0 <= s < self.alphabet_size:
                raise SourceError(
                    f"symbol {s} out of range for alphabet of size {self.alphabet_size}"
                )


def new_source(pmf: Iterable[float]) -> SourceModel:
    return SourceModel(tuple(pmf))


def sequence_probability(model: SourceModel, block: SymbolBlock) -> float:
    """Product of per-symbol probabilities."""
    model.validate(block)
    prob = 1.0
    for s in block.symbols:
        prob *= model.pmf[s]
    return prob


def sequence_log2_probability(model: SourceModel, block: SymbolBlock) -> float:
    """log2 of :func:`sequence_probability`; usable where the product underflows."""
    model.validate(block)
    return float(block_log2_probabilities(model, np.array([block.symbols]))[0])


def block_log2_probabilities(model: SourceModel, blocks: np.ndarray) -> np.ndarray:
    """Vectorised log2 p over the rows of an ``(m, n)`` integer array.

    Summed per symbol count so that blocks of the same type get bit-identical
    values regardless of symbol order.
    """
    blocks = np.asarray(blocks)
    if blocks.size and (blocks.min() < 0 or blocks.max() >= model.alphabet_size):
        raise SourceError("symbol index out of range")
    out = np.zeros(blocks.shape[0], dtype=np.float64)
    with np.errstate(invalid="ignore"):
        for sym, lp in enumerate(model.log2_pmf):
            counts = (blocks == sym).sum(axis=1)
            if math.isinf(lp):
                out = np.where(counts > 0, -np.inf, out)
            else:
                out = out + counts * lp
    return out


def sample_block(model: SourceModel, n: int, seed: int) -> SymbolBlock:
    """Draw one block by inverse CDF from a Philox stream keyed by ``seed``."""
    return SymbolBlock(tuple(sample_blocks(model, n, 1, seed)[0]))


def sample_blocks(model: SourceModel, n: int, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` blocks as a ``(count, n)`` array; row 0 equals :func:`sample_block`."""
    if n < 1:
        raise SourceError("block length must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=int(seed) & 0xFFFFFFFFFFFFFFFF))
    u = rng.random((count, n))
    cdf = np.cumsum(model.pmf)
    last = max(i for i, p in enumerate(model.pmf) if p > 0)
    cdf[last:] = 1.0
    return np.searchsorted(cdf, u, side="right").astype(np.int64)
