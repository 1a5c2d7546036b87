"""Parameter sweeps over (n, epsilon, k) with CSV / JSON result files."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .clustering import ClusteringError, cluster_atypical, zone_homogeneity
from .codec import empirical_error, make_layout
from .exponents import (
    ExponentError,
    case1_report,
    case2_report,
    chi,
    chi_threshold,
    error_exponent,
    is_extreme,
    typical_length,
)
from .source_model import SourceError, SourceModel, new_source
from .typicality import DEFAULT_ENUMERATION_CAP, PartitionError, partition_sequences

log = logging.getLogger(__name__)

SKIPPED = "skipped"
U64 = (1 << 64) - 1


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    pmf: list[float]
    n_values: list[int]
    epsilon_values: list[str]  # decimal text, echoed verbatim in outputs
    k_values: list[int]
    trials: int = 0
    base_seed: int = 0
    output_path: str | None = None
    emit_sequences: bool = False
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    record_runtime: bool = False

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepConfig":
        try:
            cfg = cls(
                pmf=[float(p) for p in raw["pmf"]],
                n_values=[int(n) for n in raw["n_values"]],
                epsilon_values=[_eps_text(e) for e in raw["epsilon_values"]],
                k_values=[int(k) for k in raw["k_values"]],
                trials=int(raw.get("trials", 0)),
                base_seed=int(raw.get("base_seed", 0)),
                output_path=raw.get("output_path"),
                emit_sequences=bool(raw.get("emit_sequences", False)),
                enumeration_cap=int(raw.get("enumeration_cap", DEFAULT_ENUMERATION_CAP)),
                record_runtime=bool(raw.get("record_runtime", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad sweep config: {exc!r}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "SweepConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(raw)

    def validate(self) -> None:
        try:
            new_source(self.pmf)
        except SourceError as exc:
            raise ConfigError(str(exc)) from exc
        if not (self.n_values and self.epsilon_values and self.k_values):
            raise ConfigError("n_values, epsilon_values and k_values must be non-empty")
        if self.trials < 0:
            raise ConfigError("trials must be >= 0")
        if not 0 <= self.base_seed <= U64:
            raise ConfigError("base_seed must be an unsigned 64-bit integer")


def _eps_text(value) -> str:
    text = value if isinstance(value, str) else repr(float(value))
    float(text)  # must parse
    return text.strip()


@dataclass
class ResultRow:
    n: int
    epsilon: str
    k: int
    entropy: float | str = SKIPPED
    prob_typical: float | str = SKIPPED
    prob_atypical: float | str = SKIPPED
    plc: float | str = SKIPPED
    poe2_case: float | str = SKIPPED
    chi: float | str = SKIPPED
    chi_threshold: float | str = SKIPPED
    e1: float | str = SKIPPED
    e2: float | str = SKIPPED
    verdict: bool | str = SKIPPED
    homogeneity_fraction: float | str = SKIPPED
    empirical_error: float | str = SKIPPED
    empirical_stderr: float | str = SKIPPED
    case_tag: str = SKIPPED
    runtime_ms: float | str = SKIPPED
    reason: str = ""


FIELDNAMES = [f.name for f in fields(ResultRow)]


def _num(x):
    """Round to 12 significant digits; non-finite values become text."""
    if isinstance(x, bool) or isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return SKIPPED
    return float(f"{x:.12g}")


def cell_seed(base_seed: int, n: int, eps_text: str, k: int) -> int:
    """``base_seed`` xor a stable 64-bit hash of the cell parameters."""
    digest = hashlib.blake2b(f"{n}|{eps_text}|{k}".encode(), digest_size=8).digest()
    return (base_seed ^ int.from_bytes(digest, "big")) & U64


def _run_cell(model: SourceModel, partition, n: int, eps_text: str, k: int, cfg: SweepConfig):
    row = ResultRow(n=n, epsilon=eps_text, k=k)
    eps = float(eps_text)
    row.entropy = _num(model.entropy_bits)
    row.chi = _num(chi(k, n, model.entropy_bits, eps)) if k >= 2 else SKIPPED
    try:
        row.chi_threshold = _num(chi_threshold(n, model.entropy_bits, eps))
    except ExponentError:
        pass
    if isinstance(partition, str):
        row.reason = partition
        return row
    row.prob_typical = _num(partition.prob_typical)
    row.prob_atypical = _num(partition.prob_atypical)
    row.e1 = _num(error_exponent(partition.prob_atypical, typical_length(n, model.entropy_bits, eps)))

    if partition.atypical_count == 0:
        row.reason = "atypical set is empty; clustering skipped"
        return row
    seed = cell_seed(cfg.base_seed, n, eps_text, k)
    try:
        clusters = cluster_atypical(partition, model, k, seed)
    except ClusteringError as exc:
        row.reason = str(exc)
        return row

    row.plc = _num(clusters.plc)
    row.homogeneity_fraction = _num(zone_homogeneity(clusters, partition, model).fraction)
    try:
        if is_extreme(clusters):
            report = case2_report(partition, clusters, model, k)
        else:
            report = case1_report(partition, clusters, model, k)
    except ExponentError as exc:
        row.reason = str(exc)
        return row
    row.poe2_case = _num(report.poe2)
    row.e2 = _num(report.e2)
    row.verdict = report.verdict
    row.case_tag = report.case_tag
    if not clusters.converged:
        row.reason = f"clustering did not converge in {clusters.rounds} rounds"

    if cfg.trials > 0:
        layout = make_layout(partition, k)
        est = empirical_error(model, partition, clusters, layout, cfg.trials, (seed + 1) & U64)
        row.empirical_error = _num(est.estimate)
        row.empirical_stderr = _num(est.stderr)
    return row


def run_sweep(config: SweepConfig, sequences_dir: Path | None = None) -> list[ResultRow]:
    """One row per (n, epsilon, k), ordered by n, then epsilon value, then k.

    Cells that fail a precondition are kept with ``case_tag == "skipped"``
    and a ``reason``.
    """
    model = new_source(config.pmf)
    rows = []
    eps_sorted = sorted(dict.fromkeys(config.epsilon_values), key=float)
    for n in sorted(set(config.n_values)):
        for eps_text in eps_sorted:
            try:
                partition = partition_sequences(model, n, float(eps_text), cap=config.enumeration_cap)
            except PartitionError as exc:
                log.warning("n=%d eps=%s skipped: %s", n, eps_text, exc)
                partition = str(exc)
            if config.emit_sequences and sequences_dir is not None and not isinstance(partition, str):
                sequences_dir.mkdir(parents=True, exist_ok=True)
                partition.write_sequences_csv(sequences_dir / f"sequences_n{n}_eps{eps_text}.csv")
            for k in sorted(set(config.k_values)):
                t0 = time.perf_counter()
                row = _run_cell(model, partition, n, eps_text, k, config)
                if config.record_runtime:
                    row.runtime_ms = _num((time.perf_counter() - t0) * 1000.0)
                if row.case_tag == SKIPPED:
                    log.info("n=%d eps=%s k=%d skipped: %s", n, eps_text, k, row.reason)
                rows.append(row)
    return rows


def analyze(config: SweepConfig) -> list[dict]:
    """Full exponent report, layout and cluster summary for every feasible cell."""
    model = new_source(config.pmf)
    out = []
    for n in sorted(set(config.n_values)):
        for eps_text in sorted(dict.fromkeys(config.epsilon_values), key=float):
            cell = {"n": n, "epsilon": eps_text}
            try:
                partition = partition_sequences(model, n, float(eps_text), cap=config.enumeration_cap)
            except PartitionError as exc:
                out.append({**cell, "skipped": str(exc)})
                continue
            for k in sorted(set(config.k_values)):
                entry = {**cell, "k": k, "partition": partition.summary()}
                try:
                    clusters = cluster_atypical(
                        partition, model, k, cell_seed(config.base_seed, n, eps_text, k)
                    )
                    if is_extreme(clusters):
                        report = case2_report(partition, clusters, model, k)
                    else:
                        report = case1_report(partition, clusters, model, k)
                except (ClusteringError, ExponentError) as exc:
                    out.append({**entry, "skipped": str(exc)})
                    continue
                homogeneity = zone_homogeneity(clusters, partition, model)
                entry["layout"] = make_layout(partition, k).to_dict()
                entry["clusters"] = clusters.to_dict(homogeneity)
                entry["report"] = report.to_dict()
                out.append(entry)
    return out


def _csv_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def emit_csv(rows: list[ResultRow], path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELDNAMES)
        for r in rows:
            w.writerow([_csv_value(getattr(r, f)) for f in FIELDNAMES])


def emit_json(rows: list[ResultRow], path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w") as fh:
        json.dump([asdict(r) for r in rows], fh, indent=1)
        fh.write("\n")


def load_json(path) -> list[ResultRow]:
    with open(path) as fh:
        return [ResultRow(**obj) for obj in json.load(fh)]
