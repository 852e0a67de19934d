"""Deterministic seed derivation for labelled random streams.

Every source of randomness in a run is derived from one 64-bit master seed
plus a path of string labels.  Two runs with the same master seed and the
same labels draw identical streams, regardless of the order in which the
streams are first touched.  This is what makes run transcripts replayable.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

__all__ = ["SeedSource"]


def _digest(master: int, path: tuple[str, ...]) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    h.update(struct.pack("<Q", master & 0xFFFFFFFFFFFFFFFF))
    for label in path:
        h.update(b"/")
        h.update(label.encode("utf-8"))
    return h.digest()


class SeedSource:
    """A point in the seed-derivation tree.

    ``child(label)`` descends one level; ``rng(label)`` returns a fresh
    numpy Generator whose state depends only on (master, path, label).
    """

    __slots__ = ("master", "path")

    def __init__(self, master: int, path: tuple[str, ...] = ()):
        if not isinstance(master, int) or master < 0:
            raise ValueError("master seed must be a non-negative integer")
        self.master = master
        self.path = path

    def child(self, label: str) -> "SeedSource":
        return SeedSource(self.master, self.path + (label,))

    def rng(self, label: str) -> np.random.Generator:
        material = _digest(self.master, self.path + (label,))
        return np.random.Generator(np.random.PCG64(int.from_bytes(material, "little")))

    def key_bytes(self, label: str) -> bytes:
        """Stable 16-byte key for hash-based rank assignment."""
        return _digest(self.master, self.path + (label,))

    def __repr__(self) -> str:  # pragma: no cover
        return f"SeedSource(master={self.master}, path={'/'.join(self.path)!r})"
