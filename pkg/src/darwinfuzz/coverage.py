"""Edge-coverage feedback: hit-count bucketing, path identity, global state.

Per-execution coverage is handled as a sparse {edge: count} mapping; the
dense 65536-byte raw map only appears at the external-target file boundary.
"""

from dataclasses import dataclass

MAP_SIZE = 65536

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

# Hit count -> bucket code: 0, 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128-255.
_BUCKET_BOUNDS = ((0, 0), (1, 1), (2, 2), (3, 3), (4, 7), (8, 15),
                  (16, 31), (32, 127), (128, 255))

BUCKET_FOR_COUNT = bytes(
    next(code for code, (lo, hi) in enumerate(_BUCKET_BOUNDS) if lo <= c <= hi)
    for c in range(256)
)


def classify(count: int) -> int:
    """Bucket code (0-8) for a saturating 8-bit hit count."""
    return BUCKET_FOR_COUNT[count]


def classify_counts(counts: dict) -> dict:
    """Sparse classified map for a sparse raw map (zero entries dropped)."""
    lut = BUCKET_FOR_COUNT
    return {edge: lut[c] for edge, c in counts.items() if c}


def raw_map_to_counts(data: bytes) -> dict:
    """Sparse counts from a dense 65536-byte raw map file."""
    if len(data) != MAP_SIZE:
        raise ValueError(f"raw map must be {MAP_SIZE} bytes, got {len(data)}")
    return {i: b for i, b in enumerate(data) if b}


def counts_to_raw_map(counts: dict) -> bytes:
    """Dense 65536-byte raw map from sparse counts (saturating at 255)."""
    out = bytearray(MAP_SIZE)
    for edge, c in counts.items():
        out[edge] = min(c, 255)
    return bytes(out)


def path_id(classified: dict) -> int:
    """FNV-1a 64 over (edge as 4 LE bytes, bucket byte) in ascending edge order.

    The empty map hashes to the offset basis.
    """
    h = FNV_OFFSET_BASIS
    for edge in sorted(classified):
        b = classified[edge]
        h = ((h ^ (edge & 0xFF)) * FNV_PRIME) & _MASK64
        h = ((h ^ ((edge >> 8) & 0xFF)) * FNV_PRIME) & _MASK64
        h = ((h ^ ((edge >> 16) & 0xFF)) * FNV_PRIME) & _MASK64
        h = ((h ^ ((edge >> 24) & 0xFF)) * FNV_PRIME) & _MASK64
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class Feedback:
    new_path: bool
    new_edges: int
    new_buckets: int


class GlobalCoverage:
    """Campaign-wide coverage state. Single writer; only ever grows."""

    def __init__(self):
        self.seen_buckets: dict = {}  # edge -> 9-bit set of buckets seen
        self.path_hashes: set = set()

    @property
    def edges_covered(self) -> int:
        return len(self.seen_buckets)

    @property
    def unique_paths(self) -> int:
        return len(self.path_hashes)

    def absorb(self, classified: dict) -> Feedback:
        """Fold one execution's classified map into the global state."""
        seen = self.seen_buckets
        new_edges = 0
        new_buckets = 0
        for edge, bucket in classified.items():
            bit = 1 << bucket
            mask = seen.get(edge, 0)
            if mask == 0:
                new_edges += 1
            if not mask & bit:
                new_buckets += 1
                seen[edge] = mask | bit
        pid = path_id(classified)
        new_path = pid not in self.path_hashes
        if new_path:
            self.path_hashes.add(pid)
        return Feedback(new_path, new_edges, new_buckets)
