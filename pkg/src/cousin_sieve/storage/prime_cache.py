"""Binary prime cache: a header followed by a packed odd-number bitmap."""

from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import structlog

from ..config.settings import get_settings
from ..core.errors import CacheFormatError

logger = structlog.get_logger(__name__)

MAGIC = b"CSVP1"

# Magic followed by the inclusive limit as a little-endian u64, no padding.
HEADER_DTYPE = np.dtype([("magic", "S5"), ("limit", "<u8")])


class PrimeCache:
    """Read/write access to one prime-cache file."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.limit: Optional[int] = None
        self._flags: Optional[np.ndarray] = None

    def write(self, limit: int, odd_flags: np.ndarray) -> int:
        """
        Write the bitmap for ``limit`` and keep it loaded.

        Args:
            limit: Inclusive bound the bitmap covers
            odd_flags: Odd-only primality flags of length ``(limit + 1) // 2``

        Returns:
            Number of bytes written
        """
        expected = (limit + 1) // 2
        if odd_flags.size != expected:
            raise CacheFormatError(
                f"bitmap has {odd_flags.size} entries, expected {expected}"
            )

        header = np.array([(MAGIC, limit)], dtype=HEADER_DTYPE)
        body = np.packbits(odd_flags, bitorder="little")

        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "wb") as fh:
            fh.write(header.tobytes())
            fh.write(body.tobytes())

        self.limit = limit
        self._flags = self._freeze(odd_flags.copy())
        size = HEADER_DTYPE.itemsize + body.size
        logger.info("Wrote prime cache", path=str(self.path), limit=limit, bytes=size)
        return size

    def load(self) -> np.ndarray:
        """
        Load the bitmap from disk.

        Raises:
            CacheFormatError: If the magic is wrong or the body is truncated
        """
        try:
            raw = self.path.read_bytes()
        except OSError as e:
            raise CacheFormatError(f"cannot read prime cache {self.path}: {e}") from e

        if len(raw) < HEADER_DTYPE.itemsize:
            raise CacheFormatError("prime cache header is truncated")
        header = np.frombuffer(raw, dtype=HEADER_DTYPE, count=1)[0]
        if bytes(header["magic"]) != MAGIC:
            raise CacheFormatError(f"bad prime cache magic in {self.path}")

        limit = int(header["limit"])
        entries = (limit + 1) // 2
        body = np.frombuffer(raw, dtype=np.uint8, offset=HEADER_DTYPE.itemsize)
        if body.size * 8 < entries:
            raise CacheFormatError(
                f"prime cache body holds {body.size * 8} bits, need {entries}"
            )

        flags = np.unpackbits(body, count=entries, bitorder="little").astype(bool)
        self.limit = limit
        self._flags = self._freeze(flags)
        logger.info("Loaded prime cache", path=str(self.path), limit=limit)
        return self._flags

    def bitmap(self, limit: int) -> Optional[np.ndarray]:
        """Odd-only flags up to ``limit``, or None if the cache is too small."""
        if self._flags is None:
            self.load()
        if self.limit is None or limit > self.limit:
            return None
        return self._flags[: (limit + 1) // 2]

    def info(self) -> Dict[str, Any]:
        """Summary of the cache file."""
        if self._flags is None:
            self.load()
        return {
            "path": str(self.path),
            "limit": self.limit,
            "bytes": self.path.stat().st_size,
            "odd_primes": int(np.count_nonzero(self._flags)),
        }

    @staticmethod
    def _freeze(flags: np.ndarray) -> np.ndarray:
        flags.setflags(write=False)
        return flags


# Global cache instance
_prime_cache: Optional[PrimeCache] = None


def get_prime_cache() -> Optional[PrimeCache]:
    """Get the configured prime cache, or None when no cache file is in use."""
    global _prime_cache
    path = get_settings().cache_path
    if path is None or not Path(path).exists():
        return None
    if _prime_cache is None or _prime_cache.path != Path(path):
        _prime_cache = PrimeCache(path)
    return _prime_cache


def reset_prime_cache() -> None:
    """Drop the loaded cache so the next access rereads the file."""
    global _prime_cache
    _prime_cache = None
