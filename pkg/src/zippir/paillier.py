"""Additively homomorphic encryption over Z_m with ciphertexts in Z_{m^2}.

Generator fixed to g = m+1, so a deterministic "trivial" encryption of v is
the closed form 1 + v*m mod m^2 (no exponentiation). Decryption uses the
Carmichael-function method with CRT over p^2 and q^2. Ciphertexts can also
be sampled uniformly from [0, m^2) out of a seeded stream; such ciphertexts
are invalid with probability about 2/sqrt(m), surfaced at decryption time.
"""

from dataclasses import dataclass
import secrets

import gmpy2

from . import counters
from .prg import Stream, DOM_CIPHERTEXT_SAMPLE
from .serial import encode_bigint, decode_bigint


class InvalidCiphertext(Exception):
    """Ciphertext not invertible modulo m^2 (gcd with m is nontrivial)."""


@dataclass(frozen=True)
class PaillierPublicKey:
    m: int
    bit_length: int

    @property
    def m2(self):
        return self.m * self.m

    def serialize(self) -> bytes:
        return encode_bigint(self.m)

    @staticmethod
    def deserialize(buf, off=0):
        m, off = decode_bigint(buf, off)
        return PaillierPublicKey(m, m.bit_length()), off


class PaillierSecretKey:
    def __init__(self, p: int, q: int):
        if p == q:
            raise ValueError("primes must differ")
        self.p, self.q = int(p), int(q)
        m = self.p * self.q
        self.pk = PaillierPublicKey(m, m.bit_length())
        self.p2 = self.p * self.p
        self.q2 = self.q * self.q
        g = m + 1
        self.hp = int(gmpy2.invert(self._lfun(gmpy2.powmod(g, self.p - 1, self.p2), self.p), self.p))
        self.hq = int(gmpy2.invert(self._lfun(gmpy2.powmod(g, self.q - 1, self.q2), self.q), self.q))
        self.p_inv_q = int(gmpy2.invert(self.p, self.q))

    @staticmethod
    def _lfun(x, n):
        return (int(x) - 1) // n


@dataclass
class PaillierCiphertext:
    c: int

    def serialize(self) -> bytes:
        return encode_bigint(self.c)


def keygen(bit_length: int, rng=None):
    """Key pair with m of exactly bit_length bits (two equal-size primes)."""
    if bit_length < 16 or bit_length % 2:
        raise ValueError("bit_length must be even and at least 16")
    rng = rng or secrets.SystemRandom()
    half = bit_length // 2
    while True:
        p = int(gmpy2.next_prime(rng.randrange(1 << (half - 1), 1 << half)))
        q = int(gmpy2.next_prime(rng.randrange(1 << (half - 1), 1 << half)))
        if p == q or p.bit_length() != half or q.bit_length() != half:
            continue
        m = p * q
        if m.bit_length() != bit_length:
            continue
        if gmpy2.gcd(m, (p - 1) * (q - 1)) != 1:
            continue
        sk = PaillierSecretKey(p, q)
        return sk.pk, sk


def encrypt(pk: PaillierPublicKey, mu: int, rng=None) -> PaillierCiphertext:
    if not 0 <= mu < pk.m:
        raise ValueError("plaintext out of range")
    rng = rng or secrets.SystemRandom()
    m, m2 = pk.m, pk.m2
    while True:
        r = rng.randrange(1, m)
        if gmpy2.gcd(r, m) == 1:
            break
    c = (1 + mu * m) * gmpy2.powmod(r, m, m2) % m2
    counters.bump("encrypt")
    counters.bump("modexp")
    return PaillierCiphertext(int(c))


def trivial_encrypt(pk: PaillierPublicKey, v: int) -> PaillierCiphertext:
    """Deterministic encryption of v with unit randomness: (m+1)^v mod m^2."""
    return PaillierCiphertext((1 + (v % pk.m) * pk.m) % pk.m2)


def decrypt(sk: PaillierSecretKey, ct: PaillierCiphertext) -> int:
    c = ct.c % sk.pk.m2
    if gmpy2.gcd(c, sk.pk.m) != 1:
        raise InvalidCiphertext("ciphertext shares a factor with the modulus")
    mp = PaillierSecretKey._lfun(gmpy2.powmod(c, sk.p - 1, sk.p2), sk.p) * sk.hp % sk.p
    mq = PaillierSecretKey._lfun(gmpy2.powmod(c, sk.q - 1, sk.q2), sk.q) * sk.hq % sk.q
    counters.bump("decrypt")
    counters.bump("modexp", 2)
    return int(mp + sk.p * ((mq - mp) * sk.p_inv_q % sk.q))


def add(pk, a: PaillierCiphertext, b: PaillierCiphertext) -> PaillierCiphertext:
    counters.bump("add")
    counters.bump("group_mult")
    return PaillierCiphertext(a.c * b.c % pk.m2)


def scalar_mul(pk, k: int, ct: PaillierCiphertext) -> PaillierCiphertext:
    if k < 0:
        raise ValueError("scalar must be nonnegative")
    counters.bump("scalar_mul")
    counters.bump("modexp")
    return PaillierCiphertext(int(gmpy2.powmod(ct.c, k, pk.m2)))


def multiexp(pk, cts, exps) -> PaillierCiphertext:
    """prod ct_i^{e_i} mod m^2 by windowed bucket accumulation.

    Performs only group multiplications (no general powmod); this is what
    makes batch phase evaluation affordable with bignum arithmetic.
    """
    m2 = gmpy2.mpz(pk.m2)
    exps = [int(e) for e in exps]
    if len(exps) != len(cts):
        raise ValueError("dimension mismatch")
    maxbits = max((e.bit_length() for e in exps), default=0)
    if maxbits == 0:
        return PaillierCiphertext(1)
    w = 6 if maxbits > 6 else maxbits
    nwin = (maxbits + w - 1) // w
    mask = (1 << w) - 1
    bases = [gmpy2.mpz(ct.c) for ct in cts]
    one = gmpy2.mpz(1)
    acc = one
    nmul = 0
    for win in range(nwin - 1, -1, -1):
        shift = win * w
        if acc is not one:
            for _ in range(w):
                acc = acc * acc % m2
            nmul += w
        buckets = [None] * (mask + 1)
        for base, e in zip(bases, exps):
            d = (e >> shift) & mask
            if d:
                prev = buckets[d]
                if prev is None:
                    buckets[d] = base
                else:
                    buckets[d] = prev * base % m2
                    nmul += 1
        running = None
        total = None
        for d in range(mask, 0, -1):
            b = buckets[d]
            if b is not None:
                if running is None:
                    running = b
                else:
                    running = running * b % m2
                    nmul += 1
            if running is not None:
                if total is None:
                    total = running
                else:
                    total = total * running % m2
                    nmul += 1
        if total is not None:
            if acc is one:
                acc = total
            else:
                acc = acc * total % m2
                nmul += 1
    counters.bump("group_mult", nmul)
    return PaillierCiphertext(int(acc % m2))


def paillier_matmul(pk, H, v):
    """Homomorphic H · v: entry i decrypts to sum_j H[i][j]*Dec(v[j]) mod m."""
    out = []
    for row in H:
        if len(row) != len(v):
            raise ValueError("dimension mismatch")
        out.append(multiexp(pk, v, row))
    return out


def sample_ciphertext(pk, seed: bytes, index: int) -> PaillierCiphertext:
    """Uniform element of [0, m^2), a pure function of (pk, seed, index)."""
    return PaillierCiphertext(Stream(seed, DOM_CIPHERTEXT_SAMPLE, index).below(pk.m2))
