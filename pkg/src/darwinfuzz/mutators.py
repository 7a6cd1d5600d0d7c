"""The 17 havoc-stage mutation operators, stacked havoc, and splice.

All operators are pure functions of (input, rng state, extras).  Draw
discipline: every operator consumes a fixed, documented number of rng draws
for its chosen branch, and the same number when its length precondition
fails (signalled via applied=False, never an exception).  This keeps the
rng stream aligned with the scheduler's selection sequence regardless of
which operators happen to be applicable.  The per-operator draw sequences
are listed in docs/mutators.md.
"""

from pathlib import Path

from .corpus import DEFAULT_MAX_INPUT

OPERATOR_COUNT = 17

# Canonical interesting-value tables (signed).
INTERESTING_8 = (-128, -1, 0, 1, 16, 32, 64, 100, 127)
INTERESTING_16 = INTERESTING_8 + (
    -32768, -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767)
INTERESTING_32 = INTERESTING_16 + (
    -2147483648, -100663046, -32769, 32768, 65535, 65536, 100663045, 2147483647)

ARITH_MAX = 35          # deltas drawn from [1, 35]
MAX_BLOCK = 64          # block ops use lengths in [1, min(len, 64)]
MAX_EXTRA_LEN = 32

# Endianness coin: 0 = little, 1 = big.
_ENDIAN = ("little", "big")


class DictionaryError(Exception):
    """Malformed --dict file."""


def _discard(rng, n):
    for _ in range(n):
        rng.next_u64()


def _block_len(rng, n):
    return 1 + rng.below(min(n, MAX_BLOCK))


def flip_bit(data, rng, extras, max_len):
    n = len(data)
    if n == 0:
        _discard(rng, 1)
        return data, False
    b = rng.below(n * 8)
    i = b >> 3
    return data[:i] + bytes((data[i] ^ (0x80 >> (b & 7)),)) + data[i + 1:], True


def set_interesting_8(data, rng, extras, max_len):
    n = len(data)
    if n == 0:
        _discard(rng, 2)
        return data, False
    pos = rng.below(n)
    val = INTERESTING_8[rng.below(len(INTERESTING_8))] & 0xFF
    return data[:pos] + bytes((val,)) + data[pos + 1:], True


def _set_interesting_wide(data, rng, max_len, table, width):
    n = len(data)
    if n < width:
        _discard(rng, 3)
        return data, False
    pos = rng.below(n - width + 1)
    val = table[rng.below(len(table))] & ((1 << (8 * width)) - 1)
    endian = _ENDIAN[rng.coin()]
    return data[:pos] + val.to_bytes(width, endian) + data[pos + width:], True


def set_interesting_16(data, rng, extras, max_len):
    return _set_interesting_wide(data, rng, max_len, INTERESTING_16, 2)


def set_interesting_32(data, rng, extras, max_len):
    return _set_interesting_wide(data, rng, max_len, INTERESTING_32, 4)


def _arith_8(data, rng, sign):
    n = len(data)
    if n == 0:
        _discard(rng, 2)
        return data, False
    pos = rng.below(n)
    delta = 1 + rng.below(ARITH_MAX)
    return data[:pos] + bytes(((data[pos] + sign * delta) & 0xFF,)) + data[pos + 1:], True


def _arith_wide(data, rng, sign, width):
    n = len(data)
    if n < width:
        _discard(rng, 3)
        return data, False
    pos = rng.below(n - width + 1)
    delta = 1 + rng.below(ARITH_MAX)
    endian = _ENDIAN[rng.coin()]
    mask = (1 << (8 * width)) - 1
    val = (int.from_bytes(data[pos:pos + width], endian) + sign * delta) & mask
    return data[:pos] + val.to_bytes(width, endian) + data[pos + width:], True


def sub_byte(data, rng, extras, max_len):
    return _arith_8(data, rng, -1)


def add_byte(data, rng, extras, max_len):
    return _arith_8(data, rng, 1)


def sub_word(data, rng, extras, max_len):
    return _arith_wide(data, rng, -1, 2)


def add_word(data, rng, extras, max_len):
    return _arith_wide(data, rng, 1, 2)


def sub_dword(data, rng, extras, max_len):
    return _arith_wide(data, rng, -1, 4)


def add_dword(data, rng, extras, max_len):
    return _arith_wide(data, rng, 1, 4)


def xor_byte(data, rng, extras, max_len):
    n = len(data)
    if n == 0:
        _discard(rng, 2)
        return data, False
    pos = rng.below(n)
    val = 1 + rng.below(255)
    return data[:pos] + bytes((data[pos] ^ val,)) + data[pos + 1:], True


def delete_block(data, rng, extras, max_len):
    n = len(data)
    if n == 0:
        _discard(rng, 2)
        return data, False
    blen = _block_len(rng, n)
    pos = rng.below(n - blen + 1)
    return data[:pos] + data[pos + blen:], True


def clone_or_insert(data, rng, extras, max_len):
    n = len(data)
    if rng.below(4) < 3:
        # Clone a block from the input to a random insertion point.
        if n == 0:
            _discard(rng, 3)
            return data, False
        blen = _block_len(rng, n)
        src = rng.below(n - blen + 1)
        at = rng.below(n + 1)
        if n + blen > max_len:
            return data, False
        return data[:at] + data[src:src + blen] + data[at:], True
    # Insert a block of one repeated byte.
    blen = 1 + rng.below(MAX_BLOCK)
    at = rng.below(n + 1)
    from_input = rng.coin()
    if from_input and n > 0:
        byte = data[rng.below(n)]
    else:
        byte = rng.below(256)
    if n + blen > max_len:
        return data, False
    return data[:at] + bytes((byte,)) * blen + data[at:], True


def overwrite_block(data, rng, extras, max_len):
    n = len(data)
    if n == 0:
        _discard(rng, 4)
        return data, False
    if rng.below(4) < 3:
        # Overwrite with another block from the input.
        blen = _block_len(rng, n)
        src = rng.below(n - blen + 1)
        dst = rng.below(n - blen + 1)
        return data[:dst] + data[src:src + blen] + data[dst + blen:], True
    # Overwrite with a repeated byte.
    blen = _block_len(rng, n)
    dst = rng.below(n - blen + 1)
    from_input = rng.coin()
    byte = data[rng.below(n)] if from_input else rng.below(256)
    return data[:dst] + bytes((byte,)) * blen + data[dst + blen:], True


def overwrite_extra(data, rng, extras, max_len):
    n = len(data)
    if not extras or n == 0:
        _discard(rng, 2)
        return data, False
    extra = extras[rng.below(len(extras))]
    if len(extra) > n:
        _discard(rng, 1)
        return data, False
    pos = rng.below(n - len(extra) + 1)
    return data[:pos] + extra + data[pos + len(extra):], True


def insert_extra(data, rng, extras, max_len):
    n = len(data)
    if not extras:
        _discard(rng, 2)
        return data, False
    extra = extras[rng.below(len(extras))]
    pos = rng.below(n + 1)
    if n + len(extra) > max_len:
        return data, False
    return data[:pos] + extra + data[pos:], True


# Ids 11 and 12 intentionally share delete_block, doubling its selection
# weight under a uniform scheduler while remaining independently gateable.
MUTATORS = (
    flip_bit,            # 0
    set_interesting_8,   # 1
    set_interesting_16,  # 2
    set_interesting_32,  # 3
    sub_byte,            # 4
    add_byte,            # 5
    sub_word,            # 6
    add_word,            # 7
    sub_dword,           # 8
    add_dword,           # 9
    xor_byte,            # 10
    delete_block,        # 11
    delete_block,        # 12
    clone_or_insert,     # 13
    overwrite_block,     # 14
    overwrite_extra,     # 15
    insert_extra,        # 16
)


def apply(mutator_id, data, rng, extras=(), max_len=DEFAULT_MAX_INPUT):
    """Apply one operator; returns (output, applied)."""
    return MUTATORS[mutator_id](data, rng, extras, max_len)


def havoc(data, rng, scheduler, extras=(), max_len=DEFAULT_MAX_INPUT):
    """One havoc candidate: a stack of 2^(1+u), u~U[0,6], scheduled operators.

    Returns (output, list of selected operator ids).  Every selected id is
    recorded, including ones that turned out inapplicable.
    """
    stack = 2 << rng.below(7)
    used = []
    table = MUTATORS
    for _ in range(stack):
        mid = scheduler.select(rng)
        used.append(mid)
        data, _ = table[mid](data, rng, extras, max_len)
    return data, used


def splice(a, b, rng):
    """Crossover at a random point strictly between first and last difference.

    Returns None when the inputs are too short or too similar to splice.
    """
    if len(a) < 2 or len(b) < 2:
        return None
    min_len = min(len(a), len(b))
    first = last = -1
    for i in range(min_len):
        if a[i] != b[i]:
            first = i
            break
    if first == -1:
        if len(a) == len(b):
            return None
        first = min_len
    if len(a) != len(b):
        last = min_len
    else:
        for i in range(min_len - 1, -1, -1):
            if a[i] != b[i]:
                last = i
                break
    if last - first <= 1:
        return None
    split = first + 1 + rng.below(last - first - 1)
    return a[:split] + b[split:]


def parse_dictionary(path) -> list:
    """Load extras from an AFL-style dictionary file.

    Supported subset: blank lines, '#' comments, and entries of the form
    [name=]"token" where the quoted token may contain \\\\, \\" and \\xNN
    escapes.  Token lengths must be in [1, 32].
    """
    extras = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        start = line.find('"')
        end = line.rfind('"')
        if start == -1 or end <= start:
            raise DictionaryError(f"{path}:{lineno}: expected a quoted token")
        token = _unescape(line[start + 1:end], path, lineno)
        if not 1 <= len(token) <= MAX_EXTRA_LEN:
            raise DictionaryError(
                f"{path}:{lineno}: token length {len(token)} outside [1, {MAX_EXTRA_LEN}]")
        extras.append(token)
    return extras


def _unescape(text, path, lineno):
    out = bytearray()
    i = 0
    while i < len(text):
        c = text[i]
        if c != "\\":
            out.extend(c.encode("latin-1"))
            i += 1
            continue
        if i + 1 >= len(text):
            raise DictionaryError(f"{path}:{lineno}: dangling escape")
        nxt = text[i + 1]
        if nxt in ('\\', '"'):
            out.append(ord(nxt))
            i += 2
        elif nxt == "x" and i + 4 <= len(text):
            try:
                out.append(int(text[i + 2:i + 4], 16))
            except ValueError as exc:
                raise DictionaryError(f"{path}:{lineno}: bad \\x escape") from exc
            i += 4
        else:
            raise DictionaryError(f"{path}:{lineno}: unsupported escape \\{nxt}")
    return bytes(out)
