"""On-disk memo of built action tables, keyed by (p, N, definition hash).

Each entry is an ``.npz`` file with a ``.sha256`` sidecar holding the digest
of its bytes. Entries whose digest does not match or that fail to load are
treated as absent and rewritten.
"""

from __future__ import annotations

import hashlib
import io
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


class ActionCache:
    def __init__(self, root: str | Path | None):
        self.root = Path(root) if root is not None else None
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def _paths(self, p: int, N: int, digest: str) -> tuple[Path, Path]:
        stem = f"p{p}-N{N}-{digest[:32]}"
        return self.root / f"{stem}.npz", self.root / f"{stem}.sha256"

    def load(self, p: int, N: int, digest: str) -> dict[str, np.ndarray] | None:
        if self.root is None:
            return None
        data_path, sum_path = self._paths(p, N, digest)
        try:
            blob = data_path.read_bytes()
            expected = sum_path.read_text().strip()
        except OSError:
            return None
        if hashlib.sha256(blob).hexdigest() != expected:
            log.debug("checksum mismatch for %s; rebuilding", data_path.name)
            return None
        try:
            with np.load(io.BytesIO(blob), allow_pickle=False) as z:
                return {k: z[k] for k in z.files}
        except Exception:  # any decode failure means a rebuild
            log.debug("unreadable cache entry %s; rebuilding", data_path.name)
            return None

    def store(self, p: int, N: int, digest: str, arrays: dict[str, np.ndarray]) -> None:
        if self.root is None:
            return
        data_path, sum_path = self._paths(p, N, digest)
        buf = io.BytesIO()
        np.savez(buf, **arrays)
        blob = buf.getvalue()
        for path, payload in ((data_path, blob), (sum_path, (hashlib.sha256(blob).hexdigest() + "\n").encode())):
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            os.replace(tmp, path)
