"""R-R interval records, manifests, event windows and the learning/evaluation split.

Records are plain CSV files (one interval in milliseconds per line, optional
``rri_ms`` header). A manifest is a JSON file listing labelled records with
their patient identities; see `load_manifest` for the layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataError, InsufficientDataError, SplitInfeasibleError


class Label(Enum):
    VT = "VT"
    VF = "VF"
    CON = "CON"
    PAF_PRE = "PAF_PRE"
    NORMAL = "NORMAL"

    @property
    def is_event(self) -> bool:
        """True for the abnormal (positive) classes."""
        return self in (Label.VT, Label.VF, Label.PAF_PRE)


EVENT_LABELS = (Label.VT, Label.VF, Label.PAF_PRE)


@dataclass(frozen=True)
class RriSeries:
    """A sequence of R-R intervals in milliseconds.

    Timestamps are implied: interval i ends at the prefix sum of the first
    i+1 values. ``resolution_ms`` records the quantisation of the source
    device (10 ms for Medtronic records) and is informational only.
    """

    values: np.ndarray
    resolution_ms: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 1:
            raise DataError("RriSeries needs a one-dimensional, non-empty value array")
        if np.any(values <= 0) or not np.all(np.isfinite(values)):
            raise DataError("R-R intervals must be positive and finite")

    def __len__(self) -> int:
        return self.values.size

    @property
    def end_times_ms(self) -> np.ndarray:
        """End timestamp of each interval (ms from the start of the record)."""
        return np.cumsum(self.values)

    @property
    def duration_s(self) -> float:
        return float(self.values.sum() / 1000.0)


@dataclass(frozen=True)
class EventRecord:
    """One labelled recording belonging to a patient."""

    patient_id: str
    record_id: str
    label: Label
    path: str | None = None
    resolution_ms: float = 1.0
    series: RriSeries | None = None

    def __post_init__(self):
        if not self.patient_id:
            raise DataError(f"record {self.record_id!r}: empty patient_id")

    def load_series(self, base_dir: str | Path | None = None) -> RriSeries:
        if self.series is not None:
            return self.series
        if self.path is None:
            raise DataError(f"record {self.record_id!r} has neither series nor path")
        path = Path(self.path)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        return parse_rri_csv(path, self.resolution_ms)


@dataclass
class DatasetManifest:
    """A collection of event records with per-label bookkeeping."""

    records: list[EventRecord]
    base_dir: Path | None = None
    label_counts: dict[Label, int] = field(init=False)

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.record_id in seen:
                raise DataError(f"duplicate record_id {rec.record_id!r} in manifest")
            seen.add(rec.record_id)
        self.label_counts = self.recount()

    def recount(self) -> dict[Label, int]:
        counts = {label: 0 for label in Label}
        for rec in self.records:
            counts[rec.label] += 1
        return counts

    @property
    def patients(self) -> set[str]:
        return {rec.patient_id for rec in self.records}

    def records_for(self, patients: set[str]) -> list[EventRecord]:
        return [rec for rec in self.records if rec.patient_id in patients]

    def events_per_patient(self, label: Label) -> dict[str, int]:
        out: dict[str, int] = {}
        for rec in self.records:
            if rec.label is label:
                out[rec.patient_id] = out.get(rec.patient_id, 0) + 1
        return out


@dataclass(frozen=True)
class Split:
    """Patient-exclusive learning/evaluation partition."""

    learning_patients: frozenset[str]
    evaluation_patients: frozenset[str]
    seed: int

    def __post_init__(self):
        if self.learning_patients & self.evaluation_patients:
            raise DataError("learning and evaluation patient sets overlap")


def parse_rri_csv(path: str | Path, resolution_ms: float = 1.0) -> RriSeries:
    """Read one R-R interval record: one value (ms) per line, optional header.

    Rejects non-positive values with the offending line number. The optional
    single header line must read ``rri_ms``.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if lineno == 1 and line.lower() == "rri_ms":
            continue
        try:
            value = float(line)
        except ValueError as exc:
            raise DataError(f"{path}: parse failure at line {lineno}: {raw!r}") from exc
        if value <= 0:
            raise DataError(f"{path}: non-positive interval at line {lineno}: {raw!r}")
        values.append(value)
    if not values:
        raise DataError(f"{path}: empty record")
    return RriSeries(np.asarray(values, dtype=float), resolution_ms=resolution_ms)


def extract_event_window(series: RriSeries, window_s: float, guard_s: float = 10.0) -> RriSeries:
    """Return the intervals covering [T_end - guard - window, T_end - guard).

    An interval belongs to the window iff its end timestamp lies in the
    half-open range. Raises when the record is shorter than window + guard.
    """
    if window_s <= 0 or guard_s < 0:
        raise ValueError("window_s must be positive and guard_s non-negative")
    ends = series.end_times_ms
    total_ms = ends[-1]
    need_ms = (window_s + guard_s) * 1000.0
    if total_ms < need_ms:
        raise InsufficientDataError(
            f"record has {total_ms / 1000.0:.1f} s, "
            f"needs {need_ms / 1000.0:.1f} s (window {window_s} s + guard {guard_s} s)"
        )
    lo = total_ms - need_ms
    hi = total_ms - guard_s * 1000.0
    mask = (ends >= lo) & (ends < hi)
    return RriSeries(series.values[mask], resolution_ms=series.resolution_ms)


def load_manifest(path: str | Path, *, base_dir: str | Path | None = None,
                  verify_files: bool = False) -> DatasetManifest:
    """Load a manifest JSON file.

    Layout::

        {"records": [{"patient_id": str, "record_id": str,
                      "label": "VT|VF|CON|PAF_PRE|NORMAL",
                      "path": str, "resolution_ms": number}]}

    Record paths are resolved relative to ``base_dir`` (default: the
    manifest's directory; the CLI lets HRVKIT_DATA_DIR override it).
    With ``verify_files`` every referenced file is checked eagerly.
    """
    path = Path(path)
    if base_dir is None:
        base_dir = path.parent
    base_dir = Path(base_dir)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {path} is not valid JSON: {exc}") from exc

    if not isinstance(payload, dict) or "records" not in payload:
        raise DataError(f"manifest {path} lacks a 'records' array")

    records = []
    for entry in payload["records"]:
        label_str = entry.get("label")
        try:
            label = Label(label_str)
        except ValueError:
            raise DataError(f"manifest {path}: unknown label {label_str!r} "
                            f"for record {entry.get('record_id')!r}") from None
        records.append(EventRecord(
            patient_id=str(entry["patient_id"]),
            record_id=str(entry["record_id"]),
            label=label,
            path=entry.get("path"),
            resolution_ms=float(entry.get("resolution_ms", 1.0)),
        ))

    manifest = DatasetManifest(records, base_dir=base_dir)
    if verify_files:
        for rec in manifest.records:
            if rec.series is not None:
                continue
            p = Path(rec.path) if rec.path else None
            if p is not None and not p.is_absolute():
                p = base_dir / p
            if p is None or not p.exists():
                raise DataError(f"record {rec.record_id!r}: file not found: {p}")
    return manifest


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split_learning_evaluation(manifest: DatasetManifest, seed: int, *,
                              fraction: float = 0.67,
                              attempt_cap: int = 10 ** 6,
                              targets: dict[Label, int] | None = None) -> Split:
    """Draw a patient-exclusive split with exact per-label event counts.

    Repeatedly samples round(fraction * P) patients with a seeded RNG until
    their records contain exactly the target number of VT and VF events
    (targets default to round(fraction * per-label total); 71 and 19 for the
    Medtronic dataset). Deterministic for a fixed seed. Raises
    SplitInfeasibleError with the best-found counts after ``attempt_cap``
    draws.
    """
    patients = sorted(manifest.patients)
    n_learning = _round_half_up(fraction * len(patients))
    if not 0 < n_learning <= len(patients):
        raise DataError(f"cannot draw {n_learning} of {len(patients)} patients")

    if targets is None:
        targets = {
            label: _round_half_up(fraction * manifest.label_counts[label])
            for label in (Label.VT, Label.VF)
        }

    counts = {}
    for label in targets:
        per_patient = manifest.events_per_patient(label)
        counts[label] = np.array([per_patient.get(p, 0) for p in patients])

    rng = np.random.default_rng(seed)
    best = None
    best_gap = None
    for attempt in range(attempt_cap):
        chosen = rng.choice(len(patients), size=n_learning, replace=False)
        drawn = {label: int(counts[label][chosen].sum()) for label in targets}
        gap = sum(abs(drawn[label] - targets[label]) for label in targets)
        if gap == 0:
            learning = frozenset(patients[i] for i in chosen)
            return Split(learning, frozenset(patients) - learning, seed)
        if best_gap is None or gap < best_gap:
            best_gap, best = gap, drawn
    raise SplitInfeasibleError(
        f"no split with counts {targets} found in {attempt_cap} attempts; "
        f"closest draw had {best}",
        best_counts=best, attempts=attempt_cap,
    )
