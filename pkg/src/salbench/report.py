"""Evaluation runs end to end: score files, aggregate, serialize.

The pipeline reads a mosaic manifest plus a directory of attribution
maps, produces one scored record per (mosaic, method) pair, and derives
distribution summaries and agreement statistics. A corrupt or
inconsistent file fails its pair, not the run; every failure becomes a
structured error entry and the caller decides the exit code. All
outputs are deterministic: rows are canonically sorted and floats are
written with round-trip precision, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .confusion import ConfusionTally, tally_confusion, target_mask
from .errors import SaliencyFormatError, TooFewMethodsError
from .metrics import METRIC_NAMES, MetricVector, compute_metrics
from .mosaics import MosaicManifest
from .reliability import (
    AlphaResult,
    RatingMatrix,
    RhoMatrix,
    inter_method_matrix,
    krippendorff_alpha,
)
from .saliency_io import MethodDescriptor, read_saliency, sidecar_path

log = logging.getLogger(__name__)

RECORD_FIELDS = ("mosaic_id", "method_id", "target_class", "tp", "fp", "fn", "tn") + METRIC_NAMES

SUMMARY_FIELDS = (
    "method_id",
    "metric_name",
    "count_defined",
    "mean",
    "median",
    "quartile_1",
    "quartile_3",
    "minimum",
    "maximum",
)


def thread_cap() -> int:
    """Worker count for the evaluation fan-out, capped by SALBENCH_THREADS."""
    env = os.environ.get("SALBENCH_THREADS")
    if env:
        return max(1, int(env))
    return min(32, os.cpu_count() or 1)


@dataclass(frozen=True)
class EvaluationRecord:
    """Scores for one (mosaic, method) pair."""

    mosaic_id: str
    method_id: str
    target_class: str
    tally: ConfusionTally
    metrics: MetricVector
    sign_capability: str = "signed"

    def sort_key(self) -> tuple[str, str]:
        return self.mosaic_id, self.method_id


@dataclass(frozen=True)
class PairError:
    """Why one file could not be scored."""

    path: str
    reason: str
    message: str
    mosaic_id: str | None = None
    method_id: str | None = None


@dataclass(frozen=True)
class EvaluationResult:
    records: tuple[EvaluationRecord, ...]
    errors: tuple[PairError, ...]
    absent_pairs: tuple[tuple[str, str], ...]

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class SummaryRow:
    """Distribution statistics for one (method, metric) group."""

    method_id: str
    metric_name: str
    count_defined: int
    mean: float
    median: float
    quartile_1: float
    quartile_3: float
    minimum: float
    maximum: float


@dataclass(frozen=True)
class AlphaRow:
    """Agreement over rankings of one metric, with its method scope."""

    metric_name: str
    method_ids: tuple[str, ...]
    n_raters: int
    result: AlphaResult


@dataclass(frozen=True)
class ReliabilityReport:
    level: str
    alphas: tuple[AlphaRow, ...]
    rhos: tuple[tuple[str, RhoMatrix], ...]  # (metric_name, matrix)


def discover_map_files(saliency_dir: str | Path) -> list[Path]:
    """Map files in a directory, sorted by name.

    A .csv without a sidecar is assumed unrelated and skipped; a .salm
    without a sidecar is kept so it surfaces as a missing-metadata
    error instead of vanishing silently.
    """
    files = sorted(
        p
        for p in Path(saliency_dir).iterdir()
        if p.is_file() and p.suffix.lower() in (".salm", ".csv")
    )
    return [
        p
        for p in files
        if p.suffix.lower() == ".salm" or sidecar_path(p).exists()
    ]


def _score_file(
    path: Path,
    manifest: MosaicManifest,
    specs_by_id: dict,
    registry_by_id: dict[str, MethodDescriptor] | None,
):
    """Read, cross-check, and tally one file. Returns a record or an error."""
    try:
        smap = read_saliency(path)
    except SaliencyFormatError as exc:
        return PairError(path=str(path), reason=exc.reason, message=str(exc))
    except OSError as exc:
        return PairError(path=str(path), reason="io-error", message=str(exc))

    ids = {"mosaic_id": smap.mosaic_id, "method_id": smap.method_id}
    spec = specs_by_id.get(smap.mosaic_id)
    if spec is None:
        return PairError(
            path=str(path), reason="unknown-mosaic",
            message=f"mosaic_id {smap.mosaic_id!r} not in manifest", **ids,
        )
    if smap.target_class != spec.target_class:
        return PairError(
            path=str(path), reason="target-mismatch",
            message=f"sidecar target {smap.target_class!r} != manifest {spec.target_class!r}",
            **ids,
        )
    expected = (manifest.mosaic_pixels, manifest.mosaic_pixels)
    if smap.values.shape != expected:
        return PairError(
            path=str(path), reason="dimension-mismatch",
            message=f"grid {smap.values.shape} != manifest {expected}", **ids,
        )
    if registry_by_id is not None:
        desc = registry_by_id.get(smap.method_id)
        if desc is None:
            return PairError(
                path=str(path), reason="unknown-method",
                message=f"method_id {smap.method_id!r} not registered", **ids,
            )
        if desc.sign_capability != smap.sign_capability:
            return PairError(
                path=str(path), reason="capability-mismatch",
                message=(
                    f"sidecar says {smap.sign_capability!r}, "
                    f"registry says {desc.sign_capability!r}"
                ),
                **ids,
            )

    tally = tally_confusion(smap.values, target_mask(spec, manifest.cell_pixels))
    metrics = compute_metrics(tally, positive_only=smap.positive_only)
    return EvaluationRecord(
        mosaic_id=smap.mosaic_id,
        method_id=smap.method_id,
        target_class=smap.target_class,
        tally=tally,
        metrics=metrics,
        sign_capability=smap.sign_capability,
    )


def evaluate(
    manifest: MosaicManifest,
    saliency_dir: str | Path,
    method_registry: list[MethodDescriptor] | None = None,
) -> EvaluationResult:
    """Score every map file in a directory against the manifest.

    Files are discovered by their sidecars, so nothing is inferred from
    file names. With two files claiming the same pair, the first in
    sorted order wins and the rest are reported as duplicates. Without a
    registry the first file seen for a method fixes its sign capability.
    Pairs with no file at all are returned as absent and logged.
    """
    files = discover_map_files(saliency_dir)
    specs_by_id = manifest.spec_by_id()
    registry_by_id = (
        {d.method_id: d for d in method_registry} if method_registry is not None else None
    )
    if registry_by_id is not None and method_registry and len(registry_by_id) != len(
        method_registry
    ):
        raise ValueError("method_registry contains duplicate method_ids")

    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        outcomes = list(
            pool.map(
                lambda p: _score_file(p, manifest, specs_by_id, registry_by_id), files
            )
        )

    records: list[EvaluationRecord] = []
    errors: list[PairError] = []
    seen_pairs: dict[tuple[str, str], str] = {}
    capability_seen: dict[str, str] = {}
    for path, outcome in zip(files, outcomes):
        if isinstance(outcome, PairError):
            errors.append(outcome)
            continue
        key = (outcome.mosaic_id, outcome.method_id)
        if key in seen_pairs:
            errors.append(
                PairError(
                    path=str(path), reason="duplicate-pair",
                    message=f"pair already scored from {seen_pairs[key]}",
                    mosaic_id=outcome.mosaic_id, method_id=outcome.method_id,
                )
            )
            continue
        fixed = capability_seen.setdefault(outcome.method_id, outcome.sign_capability)
        if fixed != outcome.sign_capability:
            errors.append(
                PairError(
                    path=str(path), reason="capability-mismatch",
                    message=(
                        f"method {outcome.method_id!r} seen as {fixed!r} earlier, "
                        f"{outcome.sign_capability!r} here"
                    ),
                    mosaic_id=outcome.mosaic_id, method_id=outcome.method_id,
                )
            )
            continue
        seen_pairs[key] = str(path)
        records.append(outcome)

    methods = set(capability_seen)
    if registry_by_id is not None:
        methods |= set(registry_by_id)
    methods |= {e.method_id for e in errors if e.method_id is not None}
    covered = set(seen_pairs) | {
        (e.mosaic_id, e.method_id)
        for e in errors
        if e.mosaic_id is not None and e.method_id is not None
    }
    absent = tuple(
        (m.mosaic_id, meth)
        for m in sorted(manifest.mosaics, key=lambda s: s.mosaic_id)
        for meth in sorted(methods)
        if (m.mosaic_id, meth) not in covered
    )
    for mosaic_id, method_id in absent:
        log.warning("no map for mosaic %s, method %s", mosaic_id, method_id)

    records.sort(key=EvaluationRecord.sort_key)
    errors.sort(key=lambda e: (e.path, e.reason))
    return EvaluationResult(
        records=tuple(records), errors=tuple(errors), absent_pairs=absent
    )


def summarize(records: list[EvaluationRecord]) -> list[SummaryRow]:
    """Per (method, metric) distribution statistics over defined values.

    Quartiles interpolate linearly, so an even count's median is the
    mean of the middle two. Groups with no defined values are omitted.
    """
    groups: dict[tuple[str, str], list[float]] = {}
    for rec in records:
        for name in METRIC_NAMES:
            value = getattr(rec.metrics, name)
            if value is not None:
                groups.setdefault((rec.method_id, name), []).append(value)

    order = {name: i for i, name in enumerate(METRIC_NAMES)}
    rows: list[SummaryRow] = []
    for method_id, name in sorted(groups, key=lambda k: (k[0], order[k[1]])):
        vals = np.asarray(groups[(method_id, name)], dtype=np.float64)
        rows.append(
            SummaryRow(
                method_id=method_id,
                metric_name=name,
                count_defined=int(vals.size),
                mean=float(vals.mean()),
                median=float(np.median(vals)),
                quartile_1=float(np.quantile(vals, 0.25)),
                quartile_3=float(np.quantile(vals, 0.75)),
                minimum=float(vals.min()),
                maximum=float(vals.max()),
            )
        )
    return rows


def rating_matrix(
    records: list[EvaluationRecord],
    metric_name: str,
    method_ids: tuple[str, ...],
) -> RatingMatrix:
    """Mosaic-by-method score grid for one metric; gaps stay None."""
    cells: dict[tuple[str, str], float | None] = {}
    raters = sorted({r.mosaic_id for r in records})
    for rec in records:
        if rec.method_id in method_ids:
            cells[(rec.mosaic_id, rec.method_id)] = getattr(rec.metrics, metric_name)
    scores = tuple(
        tuple(cells.get((rater, meth)) for meth in method_ids) for rater in raters
    )
    return RatingMatrix(
        raters=tuple(raters), units=method_ids, scores=scores, metric_name=metric_name
    )


def reliability_report(
    records: list[EvaluationRecord],
    metrics: tuple[str, ...] = METRIC_NAMES,
    level: str = "ordinal",
) -> ReliabilityReport:
    """Alpha per metric plus a pairwise rho matrix per metric.

    A metric's scope is every method with at least one defined value for
    it, so a positive-only method participates in precision and nothing
    else. Metrics applicable to fewer than two methods, or rated by
    fewer than two mosaics, get no row.
    """
    all_methods = sorted({r.method_id for r in records})
    if len(all_methods) < 2:
        raise TooFewMethodsError(f"reliability needs >=2 methods, got {len(all_methods)}")
    bad = [m for m in metrics if m not in METRIC_NAMES]
    if bad:
        raise ValueError(f"unknown metric names: {bad}")

    defined_by_method: dict[str, set[str]] = {m: set() for m in all_methods}
    for rec in records:
        defined_by_method[rec.method_id].update(rec.metrics.defined_names())

    alphas: list[AlphaRow] = []
    rhos: list[tuple[str, RhoMatrix]] = []
    for name in metrics:
        scope = tuple(m for m in all_methods if name in defined_by_method[m])
        if len(scope) < 2:
            continue
        matrix = rating_matrix(records, name, scope)
        rankable = sum(
            1 for row in matrix.scores if sum(1 for s in row if s is not None) >= 2
        )
        if rankable < 2:
            continue
        alphas.append(
            AlphaRow(
                metric_name=name,
                method_ids=scope,
                n_raters=rankable,
                result=krippendorff_alpha(matrix, level=level),
            )
        )
        rhos.append((name, inter_method_matrix(matrix)))
    return ReliabilityReport(level=level, alphas=tuple(alphas), rhos=tuple(rhos))


def _fmt(value: float | None) -> str:
    return "NA" if value is None else repr(float(value))


def write_records_csv(records: list[EvaluationRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
        for rec in records:
            row = [rec.mosaic_id, rec.method_id, rec.target_class]
            row += [_fmt(v) for v in (rec.tally.tp, rec.tally.fp, rec.tally.fn, rec.tally.tn)]
            row += [_fmt(getattr(rec.metrics, name)) for name in METRIC_NAMES]
            writer.writerow(row)


def read_records_csv(path: str | Path) -> list[EvaluationRecord]:
    records: list[EvaluationRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(RECORD_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"records file lacks columns: {sorted(missing)}")
        for row in reader:
            tally = ConfusionTally(
                tp=float(row["tp"]), fp=float(row["fp"]),
                fn=float(row["fn"]), tn=float(row["tn"]),
            )
            values = {
                name: (None if row[name] == "NA" else float(row[name]))
                for name in METRIC_NAMES
            }
            records.append(
                EvaluationRecord(
                    mosaic_id=row["mosaic_id"],
                    method_id=row["method_id"],
                    target_class=row["target_class"],
                    tally=tally,
                    metrics=MetricVector(**values),
                )
            )
    return records


def write_summary_csv(rows: list[SummaryRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_FIELDS)
        for r in rows:
            writer.writerow(
                [r.method_id, r.metric_name, str(r.count_defined)]
                + [
                    _fmt(v)
                    for v in (
                        r.mean, r.median, r.quartile_1, r.quartile_3,
                        r.minimum, r.maximum,
                    )
                ]
            )


def _json_value(value: float | None):
    return "undefined" if value is None else value


def alpha_json_doc(report: ReliabilityReport) -> dict:
    return {
        "level": report.level,
        "metrics": [
            {
                "metric": row.metric_name,
                "method_ids": list(row.method_ids),
                "n_raters": row.n_raters,
                "alpha": _json_value(row.result.alpha),
                "observed_disagreement": row.result.observed_disagreement,
                "expected_disagreement": row.result.expected_disagreement,
            }
            for row in report.alphas
        ],
    }


def rho_json_doc(report: ReliabilityReport) -> dict:
    return {
        "metrics": [
            {
                "metric": name,
                "method_ids": list(matrix.method_ids),
                "rho": [[_json_value(v) for v in row] for row in matrix.rho],
            }
            for name, matrix in report.rhos
        ],
    }


def write_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def write_errors_json(errors: tuple[PairError, ...], path: str | Path) -> None:
    doc = {
        "errors": [
            {
                "path": e.path,
                "reason": e.reason,
                "message": e.message,
                "mosaic_id": e.mosaic_id,
                "method_id": e.method_id,
            }
            for e in errors
        ]
    }
    write_json(doc, path)
