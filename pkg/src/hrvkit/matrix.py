"""Feature matrix over labelled records, with CSV round-tripping.

Rows are records; columns are named features. Labels are binary in-memory
(1 for the abnormal classes VT/VF/PAF_PRE) but the CSV keeps the original
label strings.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Label
from .errors import DataError

CONFIG_COMMENT_PREFIX = "# hrvkit-config "
ID_COLUMNS = ("record_id", "patient_id", "label")


@dataclass
class FeatureMatrix:
    feature_names: list[str]
    values: np.ndarray          # (n_records, n_features)
    labels: np.ndarray          # (n_records,) int, 1 = event
    patient_ids: np.ndarray     # (n_records,) str
    record_ids: np.ndarray      # (n_records,) str
    label_names: np.ndarray = field(default=None)  # original enum names

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        self.patient_ids = np.asarray(self.patient_ids, dtype=object)
        self.record_ids = np.asarray(self.record_ids, dtype=object)
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DataError("duplicate feature names in matrix")
        n = self.values.shape[0]
        if not (self.labels.size == n and self.patient_ids.size == n
                and self.record_ids.size == n):
            raise DataError("row metadata length mismatch")
        if self.values.shape[1] != len(self.feature_names):
            raise DataError("feature name count does not match matrix width")
        if self.label_names is None:
            self.label_names = np.asarray(
                [Label.VT.value if lab else Label.CON.value for lab in self.labels],
                dtype=object)
        bad = ~np.isfinite(self.values)
        if bad.any():
            warnings.warn(f"sanitising {int(bad.sum())} non-finite feature values to 0",
                          stacklevel=2)
            self.values = np.where(bad, 0.0, self.values)

    @property
    def n_records(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.feature_names.index(name)]

    def select_features(self, names: list[str]) -> "FeatureMatrix":
        idx = [self.feature_names.index(n) for n in names]
        return FeatureMatrix(list(names), self.values[:, idx], self.labels,
                             self.patient_ids, self.record_ids, self.label_names)

    def select_rows(self, mask: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(self.feature_names, self.values[mask],
                             self.labels[mask], self.patient_ids[mask],
                             self.record_ids[mask], self.label_names[mask])

    def rows_for_patients(self, patients) -> "FeatureMatrix":
        patients = set(patients)
        mask = np.array([p in patients for p in self.patient_ids])
        return self.select_rows(mask)

    def to_csv(self, path: str | Path, config: dict | None = None) -> None:
        """Write the matrix; floats use shortest round-trip representation."""
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            if config is not None:
                fh.write(CONFIG_COMMENT_PREFIX
                         + json.dumps(config, sort_keys=True) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(list(ID_COLUMNS) + self.feature_names)
            for i in range(self.n_records):
                row = [self.record_ids[i], self.patient_ids[i], self.label_names[i]]
                row += [repr(float(v)) for v in self.values[i]]
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureMatrix":
        path = Path(path)
        with path.open("r", newline="", encoding="utf-8") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
        reader = csv.reader(lines)
        header = next(reader, None)
        if header is None or header[:3] != list(ID_COLUMNS):
            raise DataError(f"{path}: expected columns {ID_COLUMNS} first")
        names = header[3:]
        record_ids, patient_ids, label_names, rows = [], [], [], []
        for row in reader:
            record_ids.append(row[0])
            patient_ids.append(row[1])
            label_names.append(row[2])
            rows.append([float(v) for v in row[3:]])
        try:
            labels = np.array([1 if Label(s).is_event else 0 for s in label_names])
        except ValueError as exc:
            raise DataError(f"{path}: unknown label in CSV: {exc}") from None
        return cls(names, np.asarray(rows, dtype=float), labels,
                   np.asarray(patient_ids, dtype=object),
                   np.asarray(record_ids, dtype=object),
                   np.asarray(label_names, dtype=object))
