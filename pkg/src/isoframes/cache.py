"""Enumeration cache: one .npz per (poset key, degree), content-hash named.

Entries are invalidated by construction: the file name is the hash of the
format version plus the full enumeration key, so a version bump or any
parameter change misses cleanly.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np

CACHE_FORMAT_VERSION = 1


class EnumerationCache:
    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def _path(self, key: dict, degree: int) -> str:
        payload = json.dumps(
            {"version": CACHE_FORMAT_VERSION, "key": key, "degree": degree},
            sort_keys=True,
        )
        digest = hashlib.sha256(payload.encode()).hexdigest()[:24]
        return os.path.join(self.directory, f"enum-{digest}.npz")

    def load(self, key: dict, degree: int):
        path = self._path(key, degree)
        if not os.path.exists(path):
            self.misses += 1
            return None
        with np.load(path, allow_pickle=False) as z:
            stored = json.loads(str(z["header"]))
            if stored["version"] != CACHE_FORMAT_VERSION or stored["key"] != key:
                self.misses += 1
                return None
            self.hits += 1
            return z["simplices"]

    def store(self, key: dict, degree: int, simplices: np.ndarray) -> None:
        path = self._path(key, degree)
        header = json.dumps(
            {"version": CACHE_FORMAT_VERSION, "key": key, "degree": degree},
            sort_keys=True,
        )
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        os.close(fd)
        try:
            np.savez_compressed(tmp, header=np.array(header), simplices=simplices)
            # numpy appends .npz
            os.replace(tmp + ".npz", path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def stats(self) -> dict:
        return {"dir": self.directory, "hits": self.hits, "misses": self.misses}
