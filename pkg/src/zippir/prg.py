"""Deterministic expansion of short seeds into randomness streams.

Built on the ChaCha20 stream cipher. A stream is identified by
(seed, domain, index): the key is SHA-256(seed) and the 16-byte nonce packs
a one-byte domain tag with a 120-bit little-endian index, so independent
uses of one seed never collide.
"""

import hashlib

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

# domain tags
DOM_CIPHERTEXT_SAMPLE = 1   # uniform Paillier ciphertext sampling
DOM_LWE_A = 2               # per-ciphertext a-vector expansion
DOM_PUBLIC_MATRIX = 3       # the shared query matrix A
DOM_GENERIC = 4

SEED_BYTES = 16


class Stream:
    def __init__(self, seed: bytes, domain: int, index: int = 0):
        key = hashlib.sha256(seed).digest()
        nonce = bytes([domain]) + index.to_bytes(15, "little")
        self._enc = Cipher(algorithms.ChaCha20(key, nonce), mode=None).encryptor()

    def read(self, nbytes: int) -> bytes:
        return self._enc.update(bytes(nbytes))

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        bits = (bound - 1).bit_length()
        if bits == 0:
            return 0
        nbytes = (bits + 7) // 8
        mask = (1 << bits) - 1
        while True:
            x = int.from_bytes(self.read(nbytes), "little") & mask
            if x < bound:
                return x

    def integers(self, bound: int, count: int) -> np.ndarray:
        """Vector of uniform integers in [0, bound), bound ≤ 2^64."""
        if bound > 1 << 64:
            raise ValueError("use below() for bounds above 2^64")
        if bound & (bound - 1) == 0:
            # power of two: mask raw 64-bit words
            raw = np.frombuffer(self.read(8 * count), dtype="<u8")
            return raw & np.uint64(bound - 1)
        out = np.empty(count, dtype=np.uint64)
        for i in range(count):
            out[i] = self.below(bound)
        return out
