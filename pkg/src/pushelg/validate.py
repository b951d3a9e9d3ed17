"""Dataset validation and dataset-directory access."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .ingest import (
    find_violations,
    load_judgments,
    open_text,
    parse_cluster_document,
    parse_creation_times,
    parse_gains,
    read_run,
)
from .model import EvaluationWindow, JudgmentSet


def validate_dataset(gains_path, clusters_path, creation_times_path=None) -> list:
    """Every invariant the dataset violates; an empty list means it can be scored.

    Unreadable or unparseable files raise instead.
    """
    with open_text(gains_path) as f:
        gains = parse_gains(f)
    with open_text(clusters_path) as f:
        raw = parse_cluster_document(f)
    overrides = {}
    if creation_times_path is not None:
        with open_text(creation_times_path) as f:
            overrides = parse_creation_times(f)
    return find_violations(gains, raw, overrides)


@dataclass(frozen=True)
class Dataset:
    """A dataset directory as written by ``pushelg generate`` or shipped as a fixture."""

    root: Path
    manifest: dict

    @classmethod
    def open(cls, root) -> "Dataset":
        root = Path(root)
        with open_text(root / "manifest.json") as f:
            return cls(root, json.load(f))

    def path(self, key: str) -> Optional[Path]:
        name = self.manifest.get("files", {}).get(key)
        return None if name is None else self.root / name

    @property
    def run_paths(self) -> list:
        return [self.root / name for name in self.manifest.get("files", {}).get("runs", [])]

    @property
    def window(self) -> EvaluationWindow:
        w = self.manifest["window"]
        return EvaluationWindow(w["start"], w["num_days"])

    def judgments(self) -> JudgmentSet:
        return load_judgments(self.path("gains"), self.path("clusters"), self.path("creation_times"))

    def runs(self) -> list:
        return [read_run(p) for p in self.run_paths]
