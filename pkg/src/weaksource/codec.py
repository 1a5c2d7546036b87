"""Fixed-length block code: flag bit, typical-set index, atypical cluster index.

Every codeword is ``1 + index_width + cluster_width`` bits, MSB first:

    [flag][typical index, index_width bits][cluster j-1, cluster_width bits]

flag 0 carries the lexicographic rank of a typical block and a zero cluster
field; flag 1 carries the nearest-medoid cluster of an atypical block and a
zero index field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import ClusterModel, assign
from .source_model import SourceModel, SymbolBlock, sample_blocks, sequence_probability
from .typicality import TypicalPartition, enumerate_blocks

# guards ceil() against n*(H+eps) landing a hair above an integer
_CEIL_SLACK = 1e-9


class CodecError(ValueError):
    pass


@dataclass(frozen=True)
class CodewordLayout:
    index_width: int
    cluster_width: int
    flag_bits: int = 1

    @property
    def total_bits(self) -> int:
        return self.flag_bits + self.index_width + self.cluster_width

    def to_dict(self) -> dict:
        return {
            "flag_bits": self.flag_bits,
            "index_width": self.index_width,
            "cluster_width": self.cluster_width,
            "total_bits": self.total_bits,
        }


@dataclass(frozen=True)
class Codeword:
    bits: tuple[int, ...]

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))

    def to_bytes(self) -> bytes:
        """Pack MSB-first; the last byte is zero-padded on the right."""
        padded = self.bits + (0,) * (-len(self.bits) % 8)
        return bytes(
            int("".join(map(str, padded[i : i + 8])), 2) for i in range(0, len(padded), 8)
        )

    def hex(self) -> str:
        return self.to_bytes().hex()

    @classmethod
    def from_bytes(cls, data: bytes, total_bits: int) -> "Codeword":
        bits = tuple(int(b) for byte in data for b in f"{byte:08b}")
        if len(bits) < total_bits:
            raise CodecError(f"{len(data)} bytes cannot hold {total_bits} bits")
        return cls(bits[:total_bits])

    @classmethod
    def from_hex(cls, text: str, total_bits: int) -> "Codeword":
        return cls.from_bytes(bytes.fromhex(text), total_bits)


@dataclass(frozen=True)
class Exact:
    block: SymbolBlock


@dataclass(frozen=True)
class TypedError:
    j: int
    representative: SymbolBlock


DecodeOutcome = Exact | TypedError


def _uint_bits(value: int, width: int) -> tuple[int, ...]:
    if not 0 <= value < (1 << width):
        raise CodecError(f"{value} does not fit in {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def _bits_uint(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | b
    return out


def make_layout(partition: TypicalPartition, k: int) -> CodewordLayout:
    if k < 1:
        raise CodecError(f"k must be positive, got {k}")
    index_width = math.ceil(partition.n * (partition.entropy_bits + partition.epsilon) - _CEIL_SLACK)
    cluster_width = (k - 1).bit_length()
    if partition.typical_count > 1 << index_width:
        raise CodecError(
            f"{partition.typical_count} typical blocks do not fit {index_width} index bits"
        )
    return CodewordLayout(index_width=index_width, cluster_width=cluster_width)


def encode(
    block: SymbolBlock,
    partition: TypicalPartition,
    clusters: ClusterModel | None,
    layout: CodewordLayout,
) -> Codeword:
    rank = partition.typical_rank(block)
    if rank is not None:
        return Codeword((0,) + _uint_bits(rank, layout.index_width) + (0,) * layout.cluster_width)
    if block.n != partition.n:
        raise CodecError(f"block length {block.n} != n={partition.n}")
    if clusters is None:
        raise CodecError("atypical block but no clustering available")
    j = assign(block, clusters)
    return Codeword((1,) + (0,) * layout.index_width + _uint_bits(j - 1, layout.cluster_width))


def decode(
    word: Codeword,
    partition: TypicalPartition,
    clusters: ClusterModel | None,
    layout: CodewordLayout,
) -> DecodeOutcome:
    bits = word.bits
    if len(bits) != layout.total_bits or any(b not in (0, 1) for b in bits):
        raise CodecError(f"expected {layout.total_bits} bits, got {len(bits)}")
    flag = bits[0]
    index_field = bits[1 : 1 + layout.index_width]
    cluster_field = bits[1 + layout.index_width :]
    if flag == 0:
        if any(cluster_field):
            raise CodecError("flag 0 with non-zero cluster field")
        rank = _bits_uint(index_field)
        if rank >= partition.typical_count:
            raise CodecError(f"index {rank} >= {partition.typical_count} typical blocks")
        return Exact(partition.typical_list[rank])
    if any(index_field):
        raise CodecError("flag 1 with non-zero index field")
    if clusters is None:
        raise CodecError("atypical codeword but no clustering available")
    j = _bits_uint(cluster_field) + 1
    if j > clusters.k:
        raise CodecError(f"cluster {j} > k={clusters.k}")
    return TypedError(j, clusters.medoids[j - 1])


def is_error(outcome: DecodeOutcome, source: SymbolBlock) -> bool:
    """A trial errs when the reconstruction differs from the source block."""
    if isinstance(outcome, Exact):
        return outcome.block != source
    return outcome.representative != source


@dataclass(frozen=True)
class ErrorEstimate:
    estimate: float  # P(reconstruction != source)
    stderr: float
    trials: int
    errors: int
    typed_errors: int  # every atypical draw, medoid hits included
    exact_reference: float  # P(B) - sum_j p(mu_j)

    @property
    def typed_error_rate(self) -> float:
        return self.typed_errors / self.trials


def error_reference(partition: TypicalPartition, clusters: ClusterModel | None) -> float:
    """Closed form of the codec's error probability: P(B) minus the medoid mass."""
    if clusters is None:
        return partition.prob_atypical
    medoid_mass = math.fsum(np.exp2(clusters.log2p[list(clusters.medoid_rows)]).tolist())
    return partition.prob_atypical - medoid_mass


def exhaustive_error(
    model: SourceModel,
    partition: TypicalPartition,
    clusters: ClusterModel | None,
    layout: CodewordLayout,
) -> float:
    """Exact error probability by running every block of the space through the codec."""
    rows = enumerate_blocks(model.alphabet_size, partition.n)
    terms = []
    for row in rows.tolist():
        x = SymbolBlock(tuple(row))
        if is_error(decode(encode(x, partition, clusters, layout), partition, clusters, layout), x):
            terms.append(sequence_probability(model, x))
    return math.fsum(terms)


def empirical_error(
    model: SourceModel,
    partition: TypicalPartition,
    clusters: ClusterModel | None,
    layout: CodewordLayout,
    trials: int,
    seed: int,
) -> ErrorEstimate:
    """Monte Carlo error rate of encode -> decode on blocks drawn from the source."""
    if trials < 1:
        raise CodecError("trials must be >= 1")
    draws = sample_blocks(model, partition.n, trials, seed)
    # each distinct block goes through the codec once
    uniq, counts = np.unique(draws, axis=0, return_counts=True)
    errors = typed = 0
    for row, c in zip(uniq.tolist(), counts.tolist()):
        x = SymbolBlock(tuple(row))
        outcome = decode(encode(x, partition, clusters, layout), partition, clusters, layout)
        if isinstance(outcome, TypedError):
            typed += c
        if is_error(outcome, x):
            errors += c
    p = errors / trials
    return ErrorEstimate(
        estimate=p,
        stderr=math.sqrt(p * (1.0 - p) / trials),
        trials=trials,
        errors=errors,
        typed_errors=typed,
        exact_reference=error_reference(partition, clusters),
    )
