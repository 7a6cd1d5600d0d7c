"""Target execution: built-in synthetic targets and the external-command protocol.

Built-ins are pure functions from input bytes to a sparse edge-count map and
make desk-scale campaigns deterministic and fast.  External commands receive
the input via a temp file (`@@` placeholder) and report coverage by writing a
65536-byte raw map to the path given in the COVERAGE_OUT environment variable.
"""

import logging
import os
import subprocess
import tempfile
import time
from dataclasses import dataclass, field

from .coverage import MAP_SIZE, raw_map_to_counts

log = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_CRASH = "crash"
STATUS_HANG = "hang"

INPUT_PLACEHOLDER = "@@"
DEFAULT_TIMEOUT_MS = 1000

# Bit pattern the main bitmaze ladder rewards matching, lowest bits first.
BITMAZE_PATTERN = 0x5A2E91D7
BITMAZE_EDGES = 32
# Secondary byte-wide ladders: (input offset, 8-bit pattern, base edge id).
# Each contributes edges base..base+7 by the same prefix rule, so paths are
# combinations of per-ladder depths rather than a single 33-value scalar.
BITMAZE_BYTE_LADDERS = (
    (4, 0xA7, 32),
    (5, 0x3C, 40),
    (6, 0xE5, 48),
)


class TargetError(Exception):
    """Bad target specification or unlaunchable external command."""


@dataclass
class ExecResult:
    counts: dict
    status: str
    duration_us: int = 0


def run_magicparse(data: bytes) -> ExecResult:
    """Layered header/length/checksum parser with a crash predicate.

    Edges: 0 always; 1 len>=4; 2 magic "DRWN"; 3 len>=6; 4 big-endian length
    field at [4:6] equals payload length; 5 once per payload byte; 6 payload
    XOR is zero; 7 payload contains 0xAA.  Crashes when the checksum holds
    and the payload begins with "BOOM".
    """
    counts = {0: 1}
    n = len(data)
    if n < 4:
        return ExecResult(counts, STATUS_OK)
    counts[1] = 1
    if data[:4] != b"DRWN":
        return ExecResult(counts, STATUS_OK)
    counts[2] = 1
    if n < 6:
        return ExecResult(counts, STATUS_OK)
    counts[3] = 1
    if int.from_bytes(data[4:6], "big") != n - 6:
        return ExecResult(counts, STATUS_OK)
    counts[4] = 1
    payload = data[6:]
    if not payload:
        return ExecResult(counts, STATUS_OK)
    counts[5] = min(len(payload), 255)  # loop edge: one hit per payload byte
    xor = 0
    for b in payload:
        xor ^= b
    if xor != 0:
        return ExecResult(counts, STATUS_OK)
    counts[6] = 1
    if 0xAA in payload:
        counts[7] = 1
    status = STATUS_CRASH if payload.startswith(b"BOOM") else STATUS_OK
    return ExecResult(counts, status)


def run_bitmaze(data: bytes) -> ExecResult:
    """Prefix-matching ladders rewarding single-bit progress.

    Main ladder: edge k (k in 0..31) is hit iff the input is at least 4
    bytes long and the low 32-bit little-endian word's k lowest bits equal
    the pattern's k lowest bits.  Each byte ladder (offset, pattern, base)
    applies the same rule to one input byte, hitting edges base..base+k.
    An execution's path identity is therefore the vector of ladder depths.
    """
    n = len(data)
    if n < 4:
        return ExecResult({}, STATUS_OK)
    diff = int.from_bytes(data[:4], "little") ^ BITMAZE_PATTERN
    matched = (diff & -diff).bit_length() - 1 if diff else 32
    counts = dict.fromkeys(range(min(matched, BITMAZE_EDGES - 1) + 1), 1)
    for offset, pattern, base in BITMAZE_BYTE_LADDERS:
        if n <= offset:
            break
        diff = data[offset] ^ pattern
        matched = (diff & -diff).bit_length() - 1 if diff else 8
        for k in range(min(matched, 7) + 1):
            counts[base + k] = 1
    return ExecResult(counts, STATUS_OK)


def run_null(data: bytes) -> ExecResult:
    """Throughput-measurement target: one fixed edge, no other behavior."""
    return ExecResult({0: 1}, STATUS_OK)


BUILTIN_TARGETS = {
    "magicparse": run_magicparse,
    "bitmaze": run_bitmaze,
    "null": run_null,
}


@dataclass
class TargetSpec:
    """Either a builtin name or an external command template with `@@`."""
    builtin: str = ""
    command: list = field(default_factory=list)
    timeout_ms: int = DEFAULT_TIMEOUT_MS

    def __post_init__(self):
        if bool(self.builtin) == bool(self.command):
            raise TargetError("target must be exactly one of builtin or command")
        if self.builtin and self.builtin not in BUILTIN_TARGETS:
            raise TargetError(f"unknown builtin target: {self.builtin!r} "
                              f"(have: {', '.join(sorted(BUILTIN_TARGETS))})")
        if self.command and self.command.count(INPUT_PLACEHOLDER) != 1:
            raise TargetError(
                f"external command must contain {INPUT_PLACEHOLDER} exactly once")


def run(target: TargetSpec, data: bytes) -> ExecResult:
    if target.builtin:
        return BUILTIN_TARGETS[target.builtin](data)
    return _run_external(target, data)


def _run_external(target: TargetSpec, data: bytes) -> ExecResult:
    with tempfile.TemporaryDirectory(prefix="darwinfuzz-") as tmp:
        input_path = os.path.join(tmp, "input")
        map_path = os.path.join(tmp, "coverage")
        with open(input_path, "wb") as f:
            f.write(data)
        cmd = [input_path if a == INPUT_PLACEHOLDER else a for a in target.command]
        env = dict(os.environ, COVERAGE_OUT=map_path)
        start = time.perf_counter()
        try:
            proc = subprocess.run(cmd, env=env, stdout=subprocess.DEVNULL,
                                  stderr=subprocess.DEVNULL,
                                  timeout=target.timeout_ms / 1000.0)
            status = STATUS_CRASH if proc.returncode < 0 else STATUS_OK
        except subprocess.TimeoutExpired:
            status = STATUS_HANG
        except OSError as exc:
            raise TargetError(f"cannot launch target {cmd[0]!r}: {exc}") from exc
        duration_us = int((time.perf_counter() - start) * 1e6)
        counts = {}
        if status != STATUS_HANG:
            try:
                with open(map_path, "rb") as f:
                    raw = f.read()
                if len(raw) == MAP_SIZE:
                    counts = raw_map_to_counts(raw)
                else:
                    log.warning("target wrote a %d-byte map, expected %d; "
                                "treating as empty", len(raw), MAP_SIZE)
            except OSError:
                log.warning("target did not write COVERAGE_OUT; map treated as empty")
        return ExecResult(counts, status, duration_us)
