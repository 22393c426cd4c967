"""RLWE encryption over Z_q[X]/(X^N+1) and per-coefficient compression.

Polynomial multiplication is schoolbook negacyclic convolution; this module
exists for correctness coverage, not throughput. Coefficient k of the
decryption is B[k] - sum_{i<=k} A[k-i]S[i] + sum_{i>k} A[N+k-i]S[i], which
compresses into one Paillier ciphertext exactly like an LWE phase.
"""

from dataclasses import dataclass
import secrets

import numpy as np

from . import paillier
from .paillier import trivial_encrypt, multiexp
from .gaussian import DiscreteGaussian
from .lwe import round_div, BINARY, UNIFORM
from .compress import CompressedCiphertext, ModulusTooSmall
from .lwe import LweParams


@dataclass(frozen=True)
class RlweParams:
    N: int
    q: int
    p: int
    noise_sigma: float = 0.0
    key_dist: str = UNIFORM

    def __post_init__(self):
        if self.N < 1 or self.N & (self.N - 1):
            raise ValueError("ring degree must be a power of two")
        if not 2 <= self.p < self.q:
            raise ValueError("need p < q")

    @property
    def delta(self) -> int:
        return round_div(self.q, self.p)

    def phase_params(self) -> LweParams:
        """LWE-shaped view used by the shared modified decryption."""
        return LweParams(self.N, self.q, self.p, self.noise_sigma,
                         BINARY if self.key_dist == BINARY else UNIFORM)


@dataclass
class RlweCiphertext:
    A: np.ndarray
    B: np.ndarray


@dataclass
class RlweCompressionKey:
    pk: paillier.PaillierPublicKey
    params: RlweParams
    ck: list  # N ciphertexts, ck[i] = Enc(S[i])


def negacyclic_mul(a, b, q: int) -> np.ndarray:
    """(a*b mod X^N+1) mod q, exact, via linear convolution then folding."""
    N = len(a)
    if q <= 1 << 27 and N * (q - 1) * ((1 << 14) - 1) < 1 << 53:
        # exact float64 path: split one operand at 14 bits so every partial
        # sum stays below 2^53
        af = np.array([int(x) % q for x in a], dtype=np.float64)
        bi_ = np.array([int(x) % q for x in b], dtype=np.int64)
        blo = (bi_ & ((1 << 14) - 1)).astype(np.float64)
        bhi = (bi_ >> 14).astype(np.float64)
        flo = np.rint(np.convolve(af, blo)).astype(np.int64)
        fhi = np.rint(np.convolve(af, bhi)).astype(np.int64)
        flo = np.concatenate([flo, [0]])
        fhi = np.concatenate([fhi, [0]])
        rlo = (flo[:N] - flo[N:]) % q
        rhi = (fhi[:N] - fhi[N:]) % q
        out = (rlo + (rhi << 14)) % q
        return out.astype(object)
    ai = [int(x) for x in a]
    bi = [int(x) for x in b]
    full = [0] * (2 * N - 1)
    for i, x in enumerate(ai):
        if x:
            for j, y in enumerate(bi):
                full[i + j] += x * y
    out = [0] * N
    for k in range(N):
        v = full[k]
        if k + N < len(full):
            v -= full[k + N]  # X^N = -1
        out[k] = v % q
    return np.array(out, dtype=object)


def rlwe_keygen(params: RlweParams, rng=None) -> np.ndarray:
    rng = rng or secrets.SystemRandom()
    bound = 2 if params.key_dist == BINARY else params.q
    return np.array([rng.randrange(bound) for _ in range(params.N)], dtype=object)


def rlwe_encrypt(params, S, mu, rng=None, A=None, E=None) -> RlweCiphertext:
    rng = rng or secrets.SystemRandom()
    N, q = params.N, params.q
    mu = [int(x) for x in mu]
    if len(mu) > N or any(not 0 <= x < params.p for x in mu):
        raise ValueError("plaintext polynomial out of range")
    mu = mu + [0] * (N - len(mu))
    if A is None:
        A = np.array([rng.randrange(q) for _ in range(N)], dtype=object)
    if E is None:
        g = DiscreteGaussian(params.noise_sigma)
        E = [g.sample(rng) for _ in range(N)]
    AS = negacyclic_mul(A, S, q)
    B = np.array([(int(AS[k]) + params.delta * mu[k] + int(E[k])) % q
                  for k in range(N)], dtype=object)
    return RlweCiphertext(np.array([int(x) for x in A], dtype=object), B)


def rlwe_phase(params, S, C: RlweCiphertext) -> np.ndarray:
    AS = negacyclic_mul(C.A, S, params.q)
    return np.array([(int(C.B[k]) - int(AS[k])) % params.q
                     for k in range(params.N)], dtype=object)


def rlwe_decrypt(params, S, C: RlweCiphertext):
    return [round_div(int(ph), params.delta) % params.p for ph in rlwe_phase(params, S, C)]


def _check_modulus(pk, params):
    q, N = params.q, params.N
    bound = q + N * q if params.key_dist == BINARY else q + N * q * q
    if pk.m <= bound:
        raise ModulusTooSmall("plaintext modulus %d must exceed %d" % (pk.m, bound))


def make_rlwe_compression_key(pk, params, S, rng=None) -> RlweCompressionKey:
    _check_modulus(pk, params)
    return RlweCompressionKey(pk, params, [paillier.encrypt(pk, int(s), rng) for s in S])


def rlwe_compress_coefficient(rck: RlweCompressionKey, C: RlweCiphertext,
                              k: int) -> CompressedCiphertext:
    """Compress coefficient k of the decryption into one Paillier ciphertext."""
    params, pk = rck.params, rck.pk
    N, q = params.N, params.q
    if not 0 <= k < N:
        raise IndexError("coefficient index out of range")
    _check_modulus(pk, params)
    # indices i <= k subtract A[k-i]*S[i]; i > k add the negacyclic wrap A[N+k-i]*S[i]
    exps = [(q - int(C.A[k - i])) % q if i <= k else int(C.A[N + k - i]) % q
            for i in range(N)]
    acc = multiexp(pk, rck.ck, exps)
    x = paillier.add(pk, trivial_encrypt(pk, int(C.B[k]) % pk.m), acc)
    return CompressedCiphertext(x, params.phase_params())


def modified_rlwe_decrypt(sk_paillier, cc: CompressedCiphertext) -> int:
    from .compress import modified_lwe_decrypt
    return modified_lwe_decrypt(sk_paillier, cc)
