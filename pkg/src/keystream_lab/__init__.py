"""Cryptanalysis workbench for the EChaCha20 stream cipher.

Subpackages cover the cipher core, word-aligned pattern search engines,
m-gram frequency statistics, a rotational-differential harness, and the
dataset pipeline feeding them.
"""

from . import cipher, dataset, diff, freq, report, search

__all__ = ["cipher", "dataset", "diff", "freq", "report", "search"]
__version__ = "0.1.0"
