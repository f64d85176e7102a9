"""Run manifest: an audit trail of every pipeline stage with config hashes
and artifact digests, letting each stage verify that what it consumes is
exactly what an earlier stage produced."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

from .errors import ValidationError

MANIFEST_NAME = "manifest.json"
TIMING_KEYS = ("started_at", "elapsed_ms")


def file_digest(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_hash(settings: dict) -> str:
    canonical = json.dumps(settings, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class RunManifest:
    """Per-run-directory manifest of executed stages."""

    def __init__(self, run_dir: Path):
        self.run_dir = Path(run_dir)
        self.path = self.run_dir / MANIFEST_NAME
        if self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))
        else:
            from . import __version__

            self.data = {"tool_version": __version__, "stages": []}

    def record_stage(
        self,
        stage: str,
        *,
        settings: dict,
        inputs: dict[str, Path],
        outputs: dict[str, Path],
        counts: dict[str, int],
        started_at: str,
        elapsed_ms: int,
    ):
        self.data["stages"].append(
            {
                "stage": stage,
                "config_hash": config_hash(settings),
                "settings": settings,
                "inputs": {name: file_digest(p) for name, p in sorted(inputs.items())},
                "outputs": {name: file_digest(p) for name, p in sorted(outputs.items())},
                "counts": dict(sorted(counts.items())),
                "started_at": started_at,
                "elapsed_ms": elapsed_ms,
            }
        )
        self.save()

    def save(self):
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.path.write_text(
            json.dumps(self.data, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def expected_digest(self, name: str) -> str | None:
        for stage in reversed(self.data["stages"]):
            if name in stage["outputs"]:
                return stage["outputs"][name]
        return None

    def verify_artifact(self, name: str) -> Path:
        """Check a run-dir artifact against the digest recorded when it was
        produced; returns its path."""
        expected = self.expected_digest(name)
        if expected is None:
            raise ValidationError(
                f"{name} is not recorded in the run manifest; run the producing stage first"
            )
        path = self.run_dir / name
        if not path.exists():
            raise ValidationError(f"{name} is recorded in the manifest but missing on disk")
        actual = file_digest(path)
        if actual != expected:
            raise ValidationError(
                f"{name} does not match the manifest digest (expected {expected[:12]}…, "
                f"got {actual[:12]}…); the file was modified after it was produced"
            )
        return path


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")
