"""Shared fixtures: synthetic R-R records and on-disk toy manifests."""

import json
from pathlib import Path

import numpy as np
import pytest

from hrvkit.dataset import DatasetManifest, EventRecord, Label, RriSeries


def synth_rri(rng, n=560, mean=800.0, slow=60.0, fast=25.0, noise=12.0):
    """Plausible R-R trace: slow + fast modulation plus noise, all positive."""
    t = np.arange(n)
    rri = (mean + slow * np.sin(2 * np.pi * t / 97)
           + fast * np.sin(2 * np.pi * t / 13)
           + rng.normal(0, noise, n))
    return np.maximum(rri, 120.0)


def event_like_rri(rng, n=560):
    """Faster, wilder rhythm standing in for a pre-arrhythmia trace."""
    return synth_rri(rng, n=n, mean=560.0, slow=120.0, fast=60.0, noise=35.0)


def control_like_rri(rng, n=560):
    return synth_rri(rng, n=n, mean=860.0, slow=35.0, fast=12.0, noise=8.0)


def write_record(path: Path, values) -> None:
    path.write_text("\n".join(f"{v:.3f}" for v in values) + "\n", encoding="utf-8")


def build_manifest_dir(root: Path, patients: dict[str, list[tuple[str, Label]]],
                       seed: int = 0, n_intervals: int = 140) -> Path:
    """Write record CSVs + manifest JSON; one entry per (record_id, label).

    Event labels get fast/wild traces, the rest calm ones, so the classes
    separate cleanly.
    """
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    records = []
    for patient_id, recs in patients.items():
        for record_id, label in recs:
            if label.is_event:
                values = event_like_rri(rng, n=n_intervals)
            else:
                values = control_like_rri(rng, n=n_intervals)
            rel = f"{record_id}.csv"
            write_record(root / rel, values)
            records.append({"patient_id": patient_id, "record_id": record_id,
                            "label": label.value, "path": rel, "resolution_ms": 1.0})
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps({"records": records}, indent=2),
                             encoding="utf-8")
    return manifest_path


@pytest.fixture(scope="session")
def vtvf_manifest(tmp_path_factory):
    """10 patients, each one VT + one VF + two CON records (~115 s each)."""
    root = tmp_path_factory.mktemp("vtvf_data")
    patients = {
        f"p{i:02d}": [(f"p{i:02d}_vt", Label.VT), (f"p{i:02d}_vf", Label.VF),
                      (f"p{i:02d}_con", Label.CON), (f"p{i:02d}_con2", Label.CON)]
        for i in range(10)
    }
    return build_manifest_dir(root, patients, seed=7)


@pytest.fixture(scope="session")
def paf_manifest(tmp_path_factory):
    """10 patients, each one PAF_PRE + one NORMAL record."""
    root = tmp_path_factory.mktemp("paf_data")
    patients = {
        f"q{i:02d}": [(f"q{i:02d}_paf", Label.PAF_PRE), (f"q{i:02d}_nor", Label.NORMAL)]
        for i in range(10)
    }
    return build_manifest_dir(root, patients, seed=11)


def medtronic_shaped_manifest(seed: int = 5) -> DatasetManifest:
    """78 synthetic patients carrying 106 VT, 29 VF and 126 CON records.

    Event counts per patient are drawn at random, mirroring the mix of
    single- and multi-event patients in the real dataset. No series files:
    split logic only needs the bookkeeping.
    """
    rng = np.random.default_rng(seed)
    patients = [f"m{i:03d}" for i in range(78)]
    records = []
    counter = 0

    def add(patient, label):
        nonlocal counter
        records.append(EventRecord(patient_id=patient, record_id=f"r{counter:04d}",
                                   label=label, path=None, resolution_ms=10.0,
                                   series=RriSeries(np.full(8, 800.0))))
        counter += 1

    # every patient owns at least one CON record; the rest spread randomly
    for patient in patients:
        add(patient, Label.CON)
    for label, total in ((Label.VT, 106), (Label.VF, 29), (Label.CON, 126 - 78)):
        owners = rng.choice(len(patients), size=total, replace=True)
        for idx in owners:
            add(patients[idx], label)
    return DatasetManifest(records)


@pytest.fixture(scope="session")
def medtronic_manifest():
    return medtronic_shaped_manifest()
