"""EChaCha20 core: 6x6 state, extended quarter round, block function, keystream.

The extended quarter round mixes four 32-bit words through six add/xor/rotate
lines with rotation amounts (16, 12, 8, 7, 4, 2).  Two line orderings are
supported:

* ``"native"`` (default): the six lines exactly as printed in the cipher's
  description, where the 8-bit line rotates into ``b`` and the 7-bit line
  rotates into ``c``.
* ``"rfc"``: the RFC-style ChaCha target pattern (d/b alternation) extended
  with two extra 4-bit and 2-bit lines.

A reference 4x4 ChaCha20 block function is included for comparative runs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

MASK32 = 0xFFFFFFFF
ROTATIONS = (16, 12, 8, 7, 4, 2)
CONSTANTS = (0x61707865, 0x3320646E, 0x79622D32, 0x6B206574)

STATE_WORDS = 36
BLOCK_BYTES = STATE_WORDS * 4

#: Named round-schedule presets accepted in config files.
SCHEDULE_PRESETS = {
    "echacha-colrow-v1": "native",
    "rfc-style-qrf": "rfc",
}


class CounterOverflowError(ValueError):
    """Raised when the 128-bit block counter would wrap."""


def rotl32(x: int, r: int) -> int:
    r %= 32
    if r == 0:
        return x & MASK32
    return ((x << r) | (x >> (32 - r))) & MASK32


def _rot_width(x: int, r: int, bits: int) -> int:
    mask = (1 << bits) - 1
    r %= bits
    if r == 0:
        return x & mask
    return ((x << r) | (x >> (bits - r))) & mask


def qrf(
    quad: tuple[int, int, int, int],
    rotations: tuple[int, ...] = ROTATIONS,
    variant: str = "native",
    word_bits: int = 32,
) -> tuple[int, int, int, int]:
    """Apply one extended quarter round to ``(a, b, c, d)``.

    ``word_bits`` narrows the words (rotations reduced mod width); widths
    other than 32 exist only as verification scaffolding for exhaustive
    cross-checks at small scale.
    """
    a, b, c, d = quad
    mask = (1 << word_bits) - 1
    r0, r1, r2, r3, r4, r5 = rotations
    if variant == "native":
        a = (a + b) & mask; d = _rot_width(d ^ a, r0, word_bits)
        b = (b + c) & mask; c = _rot_width(c ^ b, r1, word_bits)
        c = (c + d) & mask; b = _rot_width(b ^ c, r2, word_bits)
        d = (d + a) & mask; c = _rot_width(c ^ d, r3, word_bits)
        a = (a + b) & mask; d = _rot_width(d ^ a, r4, word_bits)
        b = (b + c) & mask; c = _rot_width(c ^ b, r5, word_bits)
    elif variant == "rfc":
        a = (a + b) & mask; d = _rot_width(d ^ a, r0, word_bits)
        c = (c + d) & mask; b = _rot_width(b ^ c, r1, word_bits)
        a = (a + b) & mask; d = _rot_width(d ^ a, r2, word_bits)
        c = (c + d) & mask; b = _rot_width(b ^ c, r3, word_bits)
        a = (a + b) & mask; d = _rot_width(d ^ a, r4, word_bits)
        c = (c + d) & mask; b = _rot_width(b ^ c, r5, word_bits)
    else:
        raise ValueError(f"unknown qrf variant: {variant!r}")
    return a, b, c, d


def qrf_vec(a, b, c, d, rotations=ROTATIONS, variant="native", word_bits=32):
    """Vectorised quarter round over numpy uint32 arrays (in-place semantics).

    Returns new arrays; for word_bits < 32 the values are masked to width.
    """
    mask = np.uint32((1 << word_bits) - 1)

    def rot(x, r):
        r %= word_bits
        if r == 0:
            return x & mask
        return ((x << np.uint32(r)) | ((x & mask) >> np.uint32(word_bits - r))) & mask

    r0, r1, r2, r3, r4, r5 = rotations
    if variant == "native":
        a = (a + b) & mask; d = rot(d ^ a, r0)
        b = (b + c) & mask; c = rot(c ^ b, r1)
        c = (c + d) & mask; b = rot(b ^ c, r2)
        d = (d + a) & mask; c = rot(c ^ d, r3)
        a = (a + b) & mask; d = rot(d ^ a, r4)
        b = (b + c) & mask; c = rot(c ^ b, r5)
    elif variant == "rfc":
        a = (a + b) & mask; d = rot(d ^ a, r0)
        c = (c + d) & mask; b = rot(b ^ c, r1)
        a = (a + b) & mask; d = rot(d ^ a, r2)
        c = (c + d) & mask; b = rot(b ^ c, r3)
        a = (a + b) & mask; d = rot(d ^ a, r4)
        c = (c + d) & mask; b = rot(b ^ c, r5)
    else:
        raise ValueError(f"unknown qrf variant: {variant!r}")
    return a, b, c, d


def _check_words(name: str, words, expected: int) -> tuple[int, ...]:
    words = tuple(int(w) for w in words)
    if len(words) != expected:
        raise ValueError(f"{name} must be exactly {expected} words, got {len(words)}")
    for w in words:
        if not 0 <= w <= MASK32:
            raise ValueError(f"{name} word {w:#x} outside 32-bit range")
    return words


@dataclass(frozen=True)
class KeyMaterial:
    """256-bit key, 128-bit nonce and 128-bit block counter as 32-bit words."""

    key: tuple[int, ...]
    nonce: tuple[int, ...] = (0, 0, 0, 0)
    counter: tuple[int, ...] = (0, 0, 0, 0)

    def __post_init__(self):
        object.__setattr__(self, "key", _check_words("key", self.key, 8))
        object.__setattr__(self, "nonce", _check_words("nonce", self.nonce, 4))
        object.__setattr__(self, "counter", _check_words("counter", self.counter, 4))

    @classmethod
    def from_bytes(cls, key: bytes, nonce: bytes = b"", counter: int = 0) -> "KeyMaterial":
        if len(key) != 32:
            raise ValueError("key must be 32 bytes")
        if len(nonce) not in (0, 8, 16):
            raise ValueError("nonce must be 8 or 16 bytes")
        nonce = nonce.ljust(16, b"\x00")
        kw = struct.unpack("<8I", key)
        nw = struct.unpack("<4I", nonce)
        cw = tuple((counter >> (32 * i)) & MASK32 for i in range(4))
        return cls(kw, nw, cw)


@dataclass(frozen=True)
class CipherConfig:
    """Cipher variant and round configuration.

    ``rounds`` must be a positive even integer (default 20); zero rounds is
    allowed only when ``allow_degenerate_rounds`` is set (debug use: the block
    output is then the serialised doubled initial state, via feed-forward).
    """

    variant: str = "echacha20"
    rounds: int = 20
    schedule: str = "echacha-colrow-v1"
    qrf_variant: str = ""
    padding: str = "zero"
    nonce_bits: int = 128
    allow_degenerate_rounds: bool = False

    def __post_init__(self):
        if self.variant not in ("echacha20", "chacha20"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.schedule not in SCHEDULE_PRESETS:
            raise ValueError(f"unknown schedule preset {self.schedule!r}")
        if not self.qrf_variant:
            object.__setattr__(self, "qrf_variant", SCHEDULE_PRESETS[self.schedule])
        if self.qrf_variant not in ("native", "rfc"):
            raise ValueError(f"unknown qrf variant {self.qrf_variant!r}")
        if self.padding not in ("zero", "constant"):
            raise ValueError(f"unknown padding rule {self.padding!r}")
        if self.nonce_bits not in (64, 128):
            raise ValueError("nonce_bits must be 64 or 128")
        if self.rounds == 0:
            if not self.allow_degenerate_rounds:
                raise ValueError("rounds=0 requires allow_degenerate_rounds")
        elif self.rounds < 2 or self.rounds % 2 != 0:
            raise ValueError("rounds must be a positive even integer")


def _column_quads() -> list[tuple[int, int, int, int]]:
    quads = []
    for i in range(6):
        quads.append((i, 6 + i, 12 + i, 18 + i))
        quads.append((12 + i, 18 + i, 24 + i, 30 + i))
    return quads


def _diagonal_quads() -> list[tuple[int, int, int, int]]:
    quads = []
    for j in range(6):
        quads.append((j, 6 + (j + 1) % 6, 12 + (j + 2) % 6, 18 + (j + 3) % 6))
        quads.append((12 + j, 18 + (j + 1) % 6, 24 + (j + 2) % 6, 30 + (j + 3) % 6))
    return quads


COLUMN_QUADS = _column_quads()
DIAGONAL_QUADS = _diagonal_quads()


def init_state(km: KeyMaterial, config: CipherConfig) -> list[int]:
    """Build the 36-word initial state.

    Rows 0-3 hold constants, key, nonce, counter and four zero words; rows
    4-5 follow the configured padding rule (all-zero by default, or the four
    constants repeated cyclically with ``padding="constant"``).
    """
    nonce = km.nonce
    if config.nonce_bits == 64:
        if nonce[2] or nonce[3]:
            raise ValueError("64-bit nonce mode requires nonce words n2, n3 = 0")
    state = list(CONSTANTS)
    state += list(km.key)
    state += list(nonce)
    state += list(km.counter)
    state += [0, 0, 0, 0]
    if config.padding == "zero":
        state += [0] * 12
    else:
        state += [CONSTANTS[i % 4] for i in range(12)]
    assert len(state) == STATE_WORDS
    return state


COUNTER_BASE = 16  # index of counter word c0 in the flattened state


def block(state: list[int], config: CipherConfig) -> bytes:
    """Run the configured rounds over a copy of ``state`` and serialise.

    Even rounds mix column quads, odd rounds mix wrapped diagonals; the
    initial state is added back word-wise (feed-forward) before little-endian
    serialisation to 144 bytes.
    """
    if len(state) != STATE_WORDS:
        raise ValueError("state must have 36 words")
    w = list(state)
    for r in range(config.rounds):
        quads = COLUMN_QUADS if r % 2 == 0 else DIAGONAL_QUADS
        for ai, bi, ci, di in quads:
            w[ai], w[bi], w[ci], w[di] = qrf(
                (w[ai], w[bi], w[ci], w[di]), variant=config.qrf_variant
            )
    out = [(x + y) & MASK32 for x, y in zip(w, state)]
    return struct.pack("<36I", *out)


def block_words_batch(states: np.ndarray, config: CipherConfig) -> np.ndarray:
    """Vectorised block function over a (36, B) uint32 state array.

    Bit-identical to mapping :func:`block` over the columns; used by the
    dataset pipeline for batch generation.
    """
    if states.shape[0] != STATE_WORDS:
        raise ValueError("states must have shape (36, B)")
    w = states.astype(np.uint32, copy=True)
    with np.errstate(over="ignore"):
        for r in range(config.rounds):
            quads = COLUMN_QUADS if r % 2 == 0 else DIAGONAL_QUADS
            for ai, bi, ci, di in quads:
                w[ai], w[bi], w[ci], w[di] = qrf_vec(
                    w[ai], w[bi], w[ci], w[di], variant=config.qrf_variant
                )
        out = w + states.astype(np.uint32)
    return out


def _increment_counter(counter: tuple[int, ...]) -> tuple[int, ...]:
    words = list(counter)
    for i in range(4):
        words[i] = (words[i] + 1) & MASK32
        if words[i] != 0:
            return tuple(words)
    raise CounterOverflowError("128-bit block counter overflow")


def keystream(km: KeyMaterial, n_blocks: int, config: CipherConfig) -> bytes:
    """Concatenated blocks with the counter incremented per block."""
    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    out = bytearray()
    counter = km.counter
    for i in range(n_blocks):
        state = init_state(
            KeyMaterial(km.key, km.nonce, counter), config
        )
        out += block(state, config)
        if i + 1 < n_blocks:
            counter = _increment_counter(counter)
    return bytes(out)


def xor_encrypt(plaintext: bytes, km: KeyMaterial, config: CipherConfig) -> bytes:
    """XOR ``plaintext`` with the keystream (involution)."""
    if not plaintext:
        return b""
    n_blocks = (len(plaintext) + BLOCK_BYTES - 1) // BLOCK_BYTES
    ks = keystream(km, n_blocks, config)
    return bytes(p ^ k for p, k in zip(plaintext, ks))


# --- reference 4x4 ChaCha20 ------------------------------------------------

def _chacha_qr(s: list[int], a: int, b: int, c: int, d: int) -> None:
    s[a] = (s[a] + s[b]) & MASK32; s[d] = rotl32(s[d] ^ s[a], 16)
    s[c] = (s[c] + s[d]) & MASK32; s[b] = rotl32(s[b] ^ s[c], 12)
    s[a] = (s[a] + s[b]) & MASK32; s[d] = rotl32(s[d] ^ s[a], 8)
    s[c] = (s[c] + s[d]) & MASK32; s[b] = rotl32(s[b] ^ s[c], 7)


def chacha20_block(km: KeyMaterial) -> bytes:
    """Standard 20-round ChaCha20 block (64 bytes).

    Uses counter word c0 and nonce words n0..n2; the remaining counter and
    nonce words must be zero to fit the 4x4 layout.
    """
    if any(km.counter[1:]) or km.nonce[3]:
        raise ValueError("chacha20 uses a 32-bit counter and 96-bit nonce")
    state = list(CONSTANTS) + list(km.key) + [km.counter[0]] + list(km.nonce[:3])
    w = list(state)
    for _ in range(10):
        _chacha_qr(w, 0, 4, 8, 12)
        _chacha_qr(w, 1, 5, 9, 13)
        _chacha_qr(w, 2, 6, 10, 14)
        _chacha_qr(w, 3, 7, 11, 15)
        _chacha_qr(w, 0, 5, 10, 15)
        _chacha_qr(w, 1, 6, 11, 12)
        _chacha_qr(w, 2, 7, 8, 13)
        _chacha_qr(w, 3, 4, 9, 14)
    out = [(x + y) & MASK32 for x, y in zip(w, state)]
    return struct.pack("<16I", *out)
