"""Error exponents of the plain and cluster-extended typical-set codes.

Conventions: bit lengths and ``chi`` use log2; exponents use natural log, so
``e = -ln(PoE) / N`` is in nats per codeword bit. Real-valued lengths
``N1 = n(H+eps)`` and ``N2 = 1 + N1 + log2 k`` are used throughout; the
codec's integer widths are carried alongside for reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterModel, compute_b_prime
from .codec import make_layout
from .source_model import SourceModel, sequence_probability
from .typicality import TypicalPartition, Zone, classify_zone

CASE1 = "CASE1"
CASE2_EXTREME = "CASE2_EXTREME"


_PROB_SLACK = 1e-12


class ExponentError(ValueError):
    pass


def error_exponent(poe: float, n_bits: float) -> float:
    """``-ln(poe) / n_bits``; ``inf`` when ``poe == 0``."""
    if 1.0 < poe <= 1.0 + _PROB_SLACK:
        poe = 1.0  # summation round-off on an all-atypical space
    if not 0.0 <= poe <= 1.0:
        raise ExponentError(f"probability out of range: {poe!r}")
    if not n_bits > 0:
        raise ExponentError(f"length must be positive: {n_bits!r}")
    if poe == 0.0:
        return math.inf
    return -math.log(poe) / n_bits


def typical_length(n: int, entropy_bits: float, epsilon: float) -> float:
    """N1 = n(H + eps), the index length of the plain typical-set code."""
    return n * (entropy_bits + epsilon)


def extended_length(n: int, entropy_bits: float, epsilon: float, k: int) -> float:
    """N2 = 1 + n(H + eps) + log2 k."""
    return 1.0 + typical_length(n, entropy_bits, epsilon) + math.log2(k)


def chi(k: int, n: int, entropy_bits: float, epsilon: float) -> float:
    """Cluster-field overhead relative to the index field, ``log2(k) / (n(H+eps))``."""
    if k < 2:
        raise ExponentError(f"k must be >= 2, got {k}")
    if n < 1:
        raise ExponentError(f"n must be >= 1, got {n}")
    return math.log2(k) / typical_length(n, entropy_bits, epsilon)


def chi_threshold(n: int, entropy_bits: float, epsilon: float) -> float:
    """``log_eps(2^{-n(H+eps)})``, evaluated by change of base without forming the power."""
    if not 0.0 < epsilon < 1.0:
        raise ExponentError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    return -typical_length(n, entropy_bits, epsilon) * math.log(2.0) / math.log(epsilon)


def plc_bound_finite(epsilon: float, n1: float, k: int) -> float:
    """Right-hand side ``ln(eps) * (1 + 1/N1 + log2(k)/N1)`` before dropping 1/N1."""
    return math.log(epsilon) * (1.0 + 1.0 / n1 + math.log2(k) / n1)


def plc_bound_asymptotic(epsilon: float, chi_value: float) -> float:
    """Right-hand side ``ln(eps) * (1 + chi)`` once the 1/N1 term is dropped."""
    return math.log(epsilon) * (1.0 + chi_value)


def _ln(p: float) -> float:
    return math.log(p) if p > 0 else -math.inf


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    lhs: float
    rhs: float
    holds: bool
    premises: list["InequalityCheck"] = field(default_factory=list)

    @classmethod
    def less(cls, name, lhs, rhs, premises=()):
        return cls(name, float(lhs), float(rhs), bool(lhs < rhs), list(premises))

    @classmethod
    def greater(cls, name, lhs, rhs, premises=()):
        return cls(name, float(lhs), float(rhs), bool(lhs > rhs), list(premises))

    @classmethod
    def flag(cls, name, holds):
        return cls(name, float(bool(holds)), 1.0, bool(holds))

    @property
    def premises_hold(self) -> bool:
        return all(p.holds for p in self.premises)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "holds": self.holds,
            "premises": [p.to_dict() for p in self.premises],
        }


def _num(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass(frozen=True)
class ExponentReport:
    case_tag: str
    n: int
    epsilon: float
    k: int
    poe1: float
    poe2: float
    n1: float
    n2: float
    e1: float
    e2: float
    chi: float
    chi_threshold: float
    verdict: bool  # e2 > e1
    inequality_checks: list[InequalityCheck]
    index_width: int
    total_bits: int

    def check(self, name: str) -> InequalityCheck:
        for c in self.inequality_checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "case_tag": self.case_tag,
            "n": self.n,
            "epsilon": self.epsilon,
            "k": self.k,
            "poe1": self.poe1,
            "poe2": self.poe2,
            "n1": self.n1,
            "n2": self.n2,
            "e1": _num(self.e1),
            "e2": _num(self.e2),
            "chi": self.chi,
            "chi_threshold": _num(self.chi_threshold),
            "verdict": self.verdict,
            "index_width": self.index_width,
            "total_bits": self.total_bits,
            "inequality_checks": [c.to_dict() for c in self.inequality_checks],
        }


def _threshold_or_nan(n, h, eps):
    try:
        return chi_threshold(n, h, eps)
    except ExponentError:
        return math.nan


def _common(partition: TypicalPartition, clusters: ClusterModel, k: int):
    if k != clusters.k:
        raise ExponentError(f"k={k} does not match clustering with k={clusters.k}")
    n, h, eps = partition.n, partition.entropy_bits, partition.epsilon
    n1 = typical_length(n, h, eps)
    n2 = extended_length(n, h, eps, k)
    layout = make_layout(partition, k)
    return n, h, eps, n1, n2, layout


def case1_report(
    partition: TypicalPartition, clusters: ClusterModel, model: SourceModel, k: int
) -> ExponentReport:
    """Plain code (PoE1 = P(B)) against the clustered code with PoE2 = PLC."""
    n, h, eps, n1, n2, layout = _common(partition, clusters, k)
    poe1 = partition.prob_atypical
    poe2 = clusters.plc
    if poe2 <= 0.0:
        raise ExponentError("largest cluster has zero probability; exponent is infinite")
    e1 = error_exponent(poe1, n1)
    e2 = error_exponent(poe2, n2)
    x = chi(k, n, h, eps)
    ln_eps = _ln(eps)

    below_eps = InequalityCheck.less("prob_atypical_below_epsilon", poe1, eps)
    plc_below = InequalityCheck.less("plc_below_prob_atypical", poe2, poe1)
    checks = [
        plc_below,
        below_eps,
        InequalityCheck.flag("plc_chain", plc_below.holds and below_eps.holds),
        # e2 > e1 restated as ln(PoE2)/N2 < ln(PoE1)/N1 with the measured PoE1
        InequalityCheck.less("exponent_ratio_measured", _ln(poe2) / n2, _ln(poe1) / n1),
        # PoE1 replaced by its bound eps
        InequalityCheck.less("exponent_ratio_eps", _ln(poe2) / n2, ln_eps / n1, [below_eps]),
        InequalityCheck.less(
            "ln_plc_finite_bound", _ln(poe2), plc_bound_finite(eps, n1, k), [below_eps]
        ),
        InequalityCheck.less(
            "ln_plc_asymptotic_bound", _ln(poe2), plc_bound_asymptotic(eps, x), [below_eps]
        ),
    ]
    return ExponentReport(
        case_tag=CASE1,
        n=n,
        epsilon=eps,
        k=k,
        poe1=poe1,
        poe2=poe2,
        n1=n1,
        n2=n2,
        e1=e1,
        e2=e2,
        chi=x,
        chi_threshold=_threshold_or_nan(n, h, eps),
        verdict=e2 > e1,
        inequality_checks=checks,
        index_width=layout.index_width,
        total_bits=layout.total_bits,
    )


def is_extreme(clusters: ClusterModel) -> bool:
    """Every cluster holds exactly one block (|B| == k)."""
    return all(s == 1 for s in clusters.sizes)


def case2_poe2(clusters: ClusterModel) -> float:
    """``sum_j P(mean_j) * P(cluster_j)``; with singletons this is ``sum_j p(mu_j)^2``."""
    if not is_extreme(clusters):
        big = [j + 1 for j, s in enumerate(clusters.sizes) if s != 1]
        raise ExponentError(f"clusters {big} are not singletons")
    medoid_p = np.exp2(clusters.log2p[list(clusters.medoid_rows)])
    return math.fsum((medoid_p * np.asarray(clusters.cluster_prob)).tolist())


def case2_report(
    partition: TypicalPartition, clusters: ClusterModel, model: SourceModel, k: int
) -> ExponentReport:
    """Extreme case with one block per cluster and PoE2 from the product sum."""
    n, h, eps, n1, n2, layout = _common(partition, clusters, k)
    poe1 = partition.prob_atypical
    poe2 = case2_poe2(clusters)
    e1 = error_exponent(poe1, n1)
    e2 = error_exponent(poe2, n2)
    x = chi(k, n, h, eps)
    threshold = _threshold_or_nan(n, h, eps)
    ln_eps = _ln(eps)

    zones = [classify_zone(model, m, n, eps) for m in clusters.medoids]
    all_vlpz = InequalityCheck.flag("medoids_all_vlpz", all(z is Zone.VLPZ for z in zones))
    below_eps = InequalityCheck.less("prob_atypical_below_epsilon", poe1, eps)
    checks = [
        all_vlpz,
        below_eps,
        InequalityCheck.greater("poe2_exceeds_prob_atypical", poe2, poe1),
        InequalityCheck.less("poe2_bound", poe2, eps * 2.0 ** (-n1), [all_vlpz, below_eps]),
        InequalityCheck.less(
            "ln_poe2_bound", _ln(poe2), ln_eps - n1 * math.log(2.0), [all_vlpz, below_eps]
        ),
        InequalityCheck.less("exponent_ratio_measured", _ln(poe2) / n2, _ln(poe1) / n1),
        InequalityCheck.less(
            "ln_poe2_finite_bound", _ln(poe2), plc_bound_finite(eps, n1, k), [below_eps]
        ),
        InequalityCheck.less(
            "ln_poe2_asymptotic_bound", _ln(poe2), plc_bound_asymptotic(eps, x), [below_eps]
        ),
        InequalityCheck.greater("chi_above_threshold", x, threshold),
    ]
    return ExponentReport(
        case_tag=CASE2_EXTREME,
        n=n,
        epsilon=eps,
        k=k,
        poe1=poe1,
        poe2=poe2,
        n1=n1,
        n2=n2,
        e1=e1,
        e2=e2,
        chi=x,
        chi_threshold=threshold,
        verdict=e2 > e1,
        inequality_checks=checks,
        index_width=layout.index_width,
        total_bits=layout.total_bits,
    )


@dataclass(frozen=True)
class BPrimeBounds:
    prob_b_prime: float
    zone: Zone  # zone of the largest (singleton) cluster
    bound: float
    holds: bool | None  # None when the largest cluster is in neither extreme zone

    def to_dict(self) -> dict:
        return {
            "prob_b_prime": self.prob_b_prime,
            "zone": self.zone.value,
            "bound": self.bound,
            "holds": self.holds,
        }


def bprime_extreme_bounds(
    clusters: ClusterModel, partition: TypicalPartition, model: SourceModel
) -> BPrimeBounds:
    """P(B') against ``2^{-n(H+eps)}`` (VLPZ) or ``2^{-n(H-eps)}`` (VHPZ)."""
    if not is_extreme(clusters):
        raise ExponentError("B' bounds are defined only when every cluster is a singleton")
    n, h, eps = partition.n, partition.entropy_bits, partition.epsilon
    b_prime = compute_b_prime(clusters)
    prob = math.fsum(sequence_probability(model, b) for b in b_prime)
    zone = classify_zone(model, clusters.medoids[clusters.largest_index - 1], n, eps)
    if zone is Zone.VLPZ:
        bound = 2.0 ** (-n * (h + eps))
        holds = prob < bound
    elif zone is Zone.VHPZ:
        bound = 2.0 ** (-n * (h - eps))
        holds = prob > bound
    else:
        bound, holds = math.nan, None
    return BPrimeBounds(prob_b_prime=prob, zone=zone, bound=bound, holds=holds)
