"""Keystream dataset generation, dual encoding, and file persistence.

Datasets are deterministic functions of their config: key and nonce material
comes from a seeded BLAKE2b counter-mode generator (switchable to the OS
entropy source for non-reproducible runs).  Fixed-key mode keeps one key and
increments the base nonce per block; variable-key mode draws fresh key and
nonce material for every block.

File format: a JSON header line with the config, then one 288-character hex
record per block.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass, asdict

import numpy as np

from .cipher import (
    BLOCK_BYTES,
    CipherConfig,
    KeyMaterial,
    MASK32,
    STATE_WORDS,
    block_words_batch,
    init_state,
)

FORMAT_VERSION = 1


class DatasetFormatError(ValueError):
    """Malformed dataset file; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SeededGenerator:
    """Deterministic byte generator: BLAKE2b over (seed, counter)."""

    def __init__(self, seed: int):
        self._seed = seed.to_bytes(8, "little", signed=False)
        self._counter = 0
        self._buffer = b""

    def bytes(self, n: int) -> bytes:
        out = bytearray()
        while len(out) < n:
            if not self._buffer:
                self._buffer = hashlib.blake2b(
                    self._seed + self._counter.to_bytes(8, "little"), digest_size=64
                ).digest()
                self._counter += 1
            take = min(n - len(out), len(self._buffer))
            out += self._buffer[:take]
            self._buffer = self._buffer[take:]
        return bytes(out)

    def words(self, k: int) -> tuple[int, ...]:
        return struct.unpack(f"<{k}I", self.bytes(4 * k))


class OsEntropyGenerator:
    """Non-reproducible alternative backed by os.urandom."""

    def bytes(self, n: int) -> bytes:
        return os.urandom(n)

    def words(self, k: int) -> tuple[int, ...]:
        return struct.unpack(f"<{k}I", self.bytes(4 * k))


@dataclass(frozen=True)
class DatasetConfig:
    mode: str = "fixed"  # "fixed" or "variable"
    n_blocks: int = 10_000
    rng_seed: int = 0
    cipher: CipherConfig = CipherConfig()

    def __post_init__(self):
        if self.mode not in ("fixed", "variable"):
            raise ValueError("mode must be 'fixed' or 'variable'")
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be >= 1")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["format_version"] = FORMAT_VERSION
        return d


@dataclass(frozen=True)
class EncodedBlock:
    words: tuple[int, ...]

    def __post_init__(self):
        if len(self.words) != STATE_WORDS:
            raise ValueError("block must hold exactly 36 words")
        object.__setattr__(self, "words", tuple(int(w) & MASK32 for w in self.words))

    @property
    def hex_repr(self) -> str:
        return "".join(f"{w:08x}" for w in self.words)

    @property
    def binary_repr(self) -> str:
        return "".join(f"{w:032b}" for w in self.words)

    @property
    def raw(self) -> bytes:
        return struct.pack("<36I", *self.words)

    @classmethod
    def from_hex(cls, text: str) -> "EncodedBlock":
        if len(text) != STATE_WORDS * 8:
            raise ValueError(f"hex record must be {STATE_WORDS * 8} chars")
        return cls(tuple(int(text[i: i + 8], 16) for i in range(0, len(text), 8)))

    @classmethod
    def from_binary(cls, text: str) -> "EncodedBlock":
        if len(text) != STATE_WORDS * 32:
            raise ValueError(f"binary record must be {STATE_WORDS * 32} chars")
        return cls(tuple(int(text[i: i + 32], 2) for i in range(0, len(text), 32)))


def encode_block(words) -> EncodedBlock:
    return EncodedBlock(tuple(words))


def _nonce_add(nonce: tuple[int, ...], i: int, nonce_bits: int) -> tuple[int, ...]:
    width = nonce_bits // 32
    value = 0
    for w in range(width):
        value |= nonce[w] << (32 * w)
    value = (value + i) % (1 << nonce_bits)
    out = [0, 0, 0, 0]
    for w in range(width):
        out[w] = (value >> (32 * w)) & MASK32
    return tuple(out)


def generate_dataset(
    cfg: DatasetConfig, entropy: str = "seeded", batch: int = 4096
) -> list[EncodedBlock]:
    """Generate ``cfg.n_blocks`` keystream blocks.

    Fixed mode: one key, nonces incremented from a drawn base value, counter
    zero for every block.  Variable mode: fresh key and nonce per block.
    """
    if entropy == "seeded":
        gen = SeededGenerator(cfg.rng_seed)
    elif entropy == "os":
        gen = OsEntropyGenerator()
    else:
        raise ValueError("entropy must be 'seeded' or 'os'")
    ccfg = cfg.cipher
    nonce_words = ccfg.nonce_bits // 32

    def draw_nonce() -> tuple[int, ...]:
        n = list(gen.words(nonce_words)) + [0] * (4 - nonce_words)
        return tuple(n)

    blocks: list[EncodedBlock] = []
    if cfg.mode == "fixed":
        key = gen.words(8)
        base = draw_nonce()
        nonces = [_nonce_add(base, i, ccfg.nonce_bits) for i in range(cfg.n_blocks)]
        keys = [key] * cfg.n_blocks
    else:
        keys, nonces = [], []
        for _ in range(cfg.n_blocks):
            keys.append(gen.words(8))
            nonces.append(draw_nonce())

    for start in range(0, cfg.n_blocks, batch):
        stop = min(start + batch, cfg.n_blocks)
        states = np.empty((STATE_WORDS, stop - start), dtype=np.uint32)
        for j in range(start, stop):
            km = KeyMaterial(keys[j], nonces[j])
            states[:, j - start] = init_state(km, ccfg)
        out = block_words_batch(states, ccfg)
        for j in range(stop - start):
            blocks.append(EncodedBlock(tuple(int(w) for w in out[:, j])))
    return blocks


def dataset_bytes(blocks: list[EncodedBlock]) -> bytes:
    return b"".join(b.raw for b in blocks)


def persist(blocks: list[EncodedBlock], cfg: DatasetConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(cfg.as_dict(), sort_keys=True) + "\n")
        for b in blocks:
            fh.write(b.hex_repr + "\n")


def load(path) -> tuple[list[EncodedBlock], dict]:
    """Read a dataset file back; malformed lines are reported by number."""
    blocks: list[EncodedBlock] = []
    header: dict = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        return blocks, header
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"bad JSON header: {exc}", 1) from exc
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            blocks.append(EncodedBlock.from_hex(line.strip()))
        except ValueError as exc:
            raise DatasetFormatError(str(exc), lineno) from exc
    return blocks, header
