"""Secret-key LWE encryption with seeded ciphertexts and modulus rescaling.

All Z_q elements live in [0, q); subtraction is (q - x) mod q. Rounding is
half away from zero everywhere a division rounds.
"""

from dataclasses import dataclass
import secrets

import numpy as np

from .gaussian import DiscreteGaussian
from .prg import Stream, DOM_LWE_A, SEED_BYTES
from . import serial

BINARY = "binary"
UNIFORM = "uniform"


def round_div(x: int, d: int) -> int:
    """round(x/d) with ties away from zero, for nonnegative x."""
    return (2 * x + d) // (2 * d)


@dataclass(frozen=True)
class LweParams:
    n: int
    q: int
    p: int
    noise_sigma: float = 0.0
    key_dist: str = BINARY

    def __post_init__(self):
        if not (self.n >= 1 and 2 <= self.p < self.q <= 1 << 64):
            raise ValueError("need n >= 1 and p < q <= 2^64")
        if self.delta < 2:
            raise ValueError("scaling factor q/p must be at least 2")
        if self.key_dist not in (BINARY, UNIFORM):
            raise ValueError("unknown key distribution")

    @property
    def delta(self) -> int:
        return round_div(self.q, self.p)


@dataclass
class LweCiphertext:
    a: np.ndarray  # uint64, reduced mod q
    b: int

    def serialize(self, params: LweParams) -> bytes:
        return serial.encode_lwe_ciphertext(params.n, params.q, self.a, self.b)


@dataclass
class SeededLweCiphertext:
    seed: bytes
    b: int


def lwe_keygen(params: LweParams, rng=None) -> np.ndarray:
    rng = rng or secrets.SystemRandom()
    bound = 2 if params.key_dist == BINARY else params.q
    return np.array([rng.randrange(bound) for _ in range(params.n)], dtype=np.uint64)


def _dot_mod(a, s, q: int) -> int:
    return sum(int(x) * int(y) for x, y in zip(a, s)) % q


def lwe_encrypt_traced(params, sk, mu: int, rng=None, a=None, e=None):
    """Encrypt and also return the sampled noise (for instrumented tests)."""
    if not 0 <= mu < params.p:
        raise ValueError("plaintext out of range")
    rng = rng or secrets.SystemRandom()
    if a is None:
        a = np.array([rng.randrange(params.q) for _ in range(params.n)], dtype=np.uint64)
    else:
        a = np.asarray(a, dtype=np.uint64)
    if e is None:
        e = DiscreteGaussian(params.noise_sigma).sample(rng)
    b = (_dot_mod(a, sk, params.q) + params.delta * mu + e) % params.q
    return LweCiphertext(a, b), e


def lwe_encrypt(params, sk, mu: int, rng=None, a=None, e=None) -> LweCiphertext:
    ct, _ = lwe_encrypt_traced(params, sk, mu, rng=rng, a=a, e=e)
    return ct


def lwe_phase(params, sk, ct: LweCiphertext) -> int:
    return (ct.b - _dot_mod(ct.a, sk, params.q)) % params.q


def lwe_decrypt(params, sk, ct: LweCiphertext) -> int:
    return round_div(lwe_phase(params, sk, ct), params.delta) % params.p


def phase_to_plaintext(params, phase: int) -> int:
    return round_div(phase % params.q, params.delta) % params.p


def seeded_encrypt(params, sk, mu: int, rng=None) -> SeededLweCiphertext:
    seed = secrets.token_bytes(SEED_BYTES) if rng is None else bytes(
        rng.randrange(256) for _ in range(SEED_BYTES))
    a = expand_seed(params, seed)
    ct = lwe_encrypt(params, sk, mu, rng=rng, a=a)
    return SeededLweCiphertext(seed, ct.b)


def expand_seed(params, seed: bytes) -> np.ndarray:
    return Stream(seed, DOM_LWE_A).integers(params.q, params.n)


def expand_seeded(params, sct: SeededLweCiphertext) -> LweCiphertext:
    return LweCiphertext(expand_seed(params, sct.seed), sct.b)


def rescale(params_from: LweParams, params_to: LweParams, ct: LweCiphertext) -> LweCiphertext:
    """Map components x -> round(x*r/q) mod r for a smaller modulus r.

    Preserves the plaintext when the ciphertext noise is below delta/4.
    """
    if params_from.n != params_to.n:
        raise ValueError("dimension mismatch")
    q, r = params_from.q, params_to.q
    if r > q:
        raise ValueError("target modulus must not exceed source modulus")
    if r == q:
        return LweCiphertext(ct.a.copy(), ct.b)
    a = np.array([round_div(int(x) * r, q) % r for x in ct.a], dtype=np.uint64)
    b = round_div(int(ct.b) * r, q) % r
    return LweCiphertext(a, b)
