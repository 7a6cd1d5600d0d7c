"""Seed loading and the cyclic fuzzing queue.

Entries are append-only; anything that produced a new path is admitted and
revisited on later cycles.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

DEFAULT_MAX_INPUT = 1 << 20  # 1 MiB


class CorpusError(Exception):
    """Startup problem with the seed directory or a seed file."""


@dataclass
class TestCase:
    __test__ = False  # keep pytest from collecting this as a test class

    data: bytes
    id: int
    parent_id: Optional[int] = None
    found_at_exec: int = 0
    via_splice: bool = False


@dataclass
class Queue:
    entries: list = field(default_factory=list)
    cursor: int = 0
    cycle_count: int = 0
    finds_this_cycle: int = 0
    max_len: int = DEFAULT_MAX_INPUT
    # Finds count of the most recently completed cycle; consumed by the
    # fuzz loop to decide whether the splice stage triggers.
    _wrap_finds: Optional[int] = None
    _oversize_rejects: int = 0

    def __len__(self):
        return len(self.entries)

    def next_entry(self) -> TestCase:
        """Return the entry at the cursor and advance, wrapping cyclically."""
        if not self.entries:
            raise CorpusError("queue is empty")
        if self.cursor >= len(self.entries):
            self.cursor = 0
            self.cycle_count += 1
            self._wrap_finds = self.finds_this_cycle
            self.finds_this_cycle = 0
        entry = self.entries[self.cursor]
        self.cursor += 1
        return entry

    def pop_wrap_finds(self) -> Optional[int]:
        """Finds of the last completed cycle, or None if no wrap since last call."""
        finds = self._wrap_finds
        self._wrap_finds = None
        return finds

    def admit(self, candidate: bytes, feedback, parent_id=None,
              found_at_exec=0, via_splice=False) -> Optional[TestCase]:
        """Append the candidate iff its feedback reported a new path."""
        if not feedback.new_path:
            return None
        if len(candidate) > self.max_len:
            self._oversize_rejects += 1
            return None
        entry = TestCase(bytes(candidate), len(self.entries), parent_id,
                         found_at_exec, via_splice)
        self.entries.append(entry)
        self.finds_this_cycle += 1
        return entry


def load_seeds(directory, max_len: int = DEFAULT_MAX_INPUT) -> Queue:
    """One TestCase per regular file, ordered bytewise by filename."""
    path = Path(directory)
    if not path.is_dir():
        raise CorpusError(f"seed directory does not exist: {path}")
    names = sorted(
        (n for n in os.listdir(path) if (path / n).is_file()),
        key=lambda n: n.encode("utf-8", "surrogateescape"),
    )
    if not names:
        raise CorpusError(f"seed directory is empty: {path}")
    queue = Queue(max_len=max_len)
    for name in names:
        file = path / name
        try:
            data = file.read_bytes()
        except OSError as exc:
            raise CorpusError(f"unreadable seed file {file}: {exc}") from exc
        if len(data) > max_len:
            raise CorpusError(
                f"seed file {file} exceeds max input length ({len(data)} > {max_len})")
        queue.entries.append(TestCase(data, len(queue.entries)))
    return queue
