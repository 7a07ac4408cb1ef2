"""
Run Manifest Module

Records what a run produced: config hash, versions, UTC timestamps and a
SHA-256 digest for every emitted file.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from typing import Dict, List

import sys
sys.path.append('..')
from config.settings import ARTIFACT_VERSION, FORMAT_VERSION


def file_digest(path: str, chunk_size: int = 1 << 16) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """Provenance record written next to the outputs."""
    subcommand: str
    config_hash: str
    artifact_version: str = ARTIFACT_VERSION
    format_version: int = FORMAT_VERSION
    started: str = field(default_factory=utc_now)
    finished: str = None
    exit_code: int = None
    files: Dict[str, str] = field(default_factory=dict)

    def add_file(self, path: str, out_dir: str):
        self.files[os.path.relpath(path, out_dir)] = file_digest(path)

    def finish(self, exit_code: int):
        self.finished = utc_now()
        self.exit_code = exit_code

    def verify(self, out_dir: str) -> List[str]:
        """Names of files whose digest no longer matches (or that are missing)."""
        bad = []
        for name, digest in self.files.items():
            path = os.path.join(out_dir, name)
            if not os.path.exists(path) or file_digest(path) != digest:
                bad.append(name)
        return bad

    def to_dict(self) -> Dict:
        return asdict(self)

    def write(self, path: str):
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_dict(), handle, sort_keys=True, indent=2)
            handle.write("\n")

    @classmethod
    def read(cls, path: str) -> 'RunManifest':
        with open(path, "r", encoding="utf-8") as handle:
            return cls(**json.load(handle))
