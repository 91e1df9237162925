"""Run manifests written after every CLI run."""

from __future__ import annotations

import hashlib
import json
import os
import platform
from dataclasses import asdict, dataclass, field

from ozlab import __version__


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    params: dict
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    wall_time: float = 0.0
    exit_code: int = 0
    version: str = __version__
    python: str = field(default_factory=platform.python_version)

    def add_input(self, path: str) -> None:
        self.inputs[path] = file_digest(path)

    def add_output(self, path: str) -> None:
        self.outputs.append({"path": path, "sha256": file_digest(path)})

    def write(self, path: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(asdict(self), fh, indent=1, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)

    @classmethod
    def read(cls, path: str) -> "RunManifest":
        with open(path) as fh:
            return cls(**json.load(fh))
