"""Compression of LWE ciphertexts into additive Paillier ciphertexts.

The server evaluates the LWE phase b + sum_i ((q - a[i]) mod q) * sk[i]
inside the additive scheme, using encryptions of the secret key. Variants:
plain per-entry keys, radix-packed keys (smaller upload), expanded
power-of-two keys (addition-only compression), and batching of several
phases into one plaintext at scale gamma.
"""

from dataclasses import dataclass

from . import paillier
from .paillier import (PaillierCiphertext, PaillierPublicKey, PaillierSecretKey,
                       trivial_encrypt, multiexp)
from .lwe import LweParams, LweCiphertext, phase_to_plaintext, BINARY


class ModulusTooSmall(Exception):
    pass


class CapacityExceeded(Exception):
    pass


STANDARD = "standard"
QUARTER_DELTA = "quarter_delta"


def phase_bound(params: LweParams) -> int:
    """Upper bound on b + sum (q-a[i])*sk[i] (exclusive of the modulus)."""
    q, n = params.q, params.n
    return q + n * q if params.key_dist == BINARY else q + n * q * q


def select_scale(params: LweParams, noise_regime: str = STANDARD) -> int:
    q, n = params.q, params.n
    if noise_regime == STANDARD:
        return q + n * q if params.key_dist == BINARY else q + n * q * q
    if noise_regime == QUARTER_DELTA:
        # valid only when ciphertext noise stays below delta/4
        return q if params.key_dist == BINARY else q * q
    raise ValueError("unknown noise regime")


@dataclass
class CompressionKey:
    pk: PaillierPublicKey
    lwe_params: LweParams
    ck: list  # n PaillierCiphertexts
    key_scaling: int = 1  # delta^(t-1) when unpacked from a packed key


@dataclass
class PackedCompressionKey:
    pk: PaillierPublicKey
    lwe_params: LweParams
    pck: list  # ceil(n/t) PaillierCiphertexts
    t: int
    delta: int


@dataclass
class ExpandedCompressionKey:
    pk: PaillierPublicKey
    lwe_params: LweParams
    eck: list  # rows x n; row j decrypts to 2^j * sk[i]
    key_scaling: int = 1


@dataclass
class CompressedCiphertext:
    x: PaillierCiphertext
    lwe_params: LweParams
    gamma: int = 1
    ell: int = 1
    key_scaling: int = 1

    def serialize(self) -> bytes:
        from .serial import encode_bigint
        return (encode_bigint(self.gamma) + encode_bigint(self.ell)
                + encode_bigint(self.key_scaling) + self.x.serialize())


def _check_modulus(pk, params):
    bound = phase_bound(params)
    if pk.m <= bound:
        raise ModulusTooSmall(
            "plaintext modulus %d must exceed q + n*q%s = %d"
            % (pk.m, "" if params.key_dist == BINARY else "^2", bound))


def make_compression_key(pk, lwe_params, sk, rng=None) -> CompressionKey:
    _check_modulus(pk, lwe_params)
    return CompressionKey(pk, lwe_params,
                          [paillier.encrypt(pk, int(s), rng) for s in sk])


def lwe_compress(ck: CompressionKey, ct: LweCiphertext) -> CompressedCiphertext:
    _check_modulus(ck.pk, ck.lwe_params)
    q = ck.lwe_params.q
    exps = [(q - int(x)) % q for x in ct.a]
    acc = multiexp(ck.pk, ck.ck, exps)
    x = paillier.add(ck.pk, trivial_encrypt(ck.pk, int(ct.b) % ck.pk.m), acc)
    return CompressedCiphertext(x, ck.lwe_params, key_scaling=ck.key_scaling)


def modified_lwe_decrypt(sk_paillier: PaillierSecretKey, cc: CompressedCiphertext) -> int:
    y = paillier.decrypt(sk_paillier, cc.x)
    ks = cc.key_scaling
    if ks > 1:
        y = y * (ks % sk_paillier.pk.m) % sk_paillier.pk.m
        y //= ks
    return phase_to_plaintext(cc.lwe_params, y % cc.lwe_params.q)


def default_packing_radix(pk, lwe_params) -> int:
    """Smallest power of two above the phase bound (coprime to odd m)."""
    return 1 << phase_bound(lwe_params).bit_length()


def packing_digits(pk, delta: int) -> int:
    """Largest t with delta^(2t) <= 2^bit_length(m) (half the plaintext)."""
    limit = 1 << pk.bit_length
    t, power = 0, 1
    while True:
        power *= delta * delta
        if power > limit:
            return t
        t += 1


def generate_packed_key(pk, lwe_params, sk, rng=None, delta=None) -> PackedCompressionKey:
    import gmpy2
    _check_modulus(pk, lwe_params)
    if delta is None:
        delta = default_packing_radix(pk, lwe_params)
    if delta <= phase_bound(lwe_params):
        raise ValueError("packing radix below the phase bound")
    if gmpy2.gcd(delta, pk.m) != 1:
        raise ValueError("packing radix must be invertible mod m")
    if delta % lwe_params.q != 0:
        raise ValueError("packing radix must be a multiple of q")
    t = packing_digits(pk, delta)
    if t < 1:
        raise ModulusTooSmall("plaintext modulus too small to pack any digit")
    n = lwe_params.n
    inv_scale = int(gmpy2.invert(pow(delta, t - 1, pk.m), pk.m))
    pck = []
    for i in range((n + t - 1) // t):
        digits = sk[i * t:(i + 1) * t]
        packed = sum(int(s) * delta ** j for j, s in enumerate(digits))
        pck.append(paillier.encrypt(pk, packed * inv_scale % pk.m, rng))
    return PackedCompressionKey(pk, lwe_params, pck, t, delta)


def unpack_compression_key(pck: PackedCompressionKey) -> CompressionKey:
    pk, t, delta = pck.pk, pck.t, pck.delta
    n = pck.lwe_params.n
    ck = []
    for i, packed in enumerate(pck.pck):
        for j in range(t):
            if i * t + j >= n:
                break
            ck.append(paillier.scalar_mul(pk, delta ** (t - 1 - j), packed))
    return CompressionKey(pk, pck.lwe_params, ck, key_scaling=delta ** (t - 1))


def expand_compression_key(ck: CompressionKey, rows=None) -> ExpandedCompressionKey:
    """Precompute Enc(2^j * sk[i]) by repeated doubling: (rows-1)*n additions."""
    q = ck.lwe_params.q
    if rows is None:
        rows = max((q - 1).bit_length(), 1)
    eck = [list(ck.ck)]
    for _ in range(rows - 1):
        prev = eck[-1]
        eck.append([paillier.add(ck.pk, c, c) for c in prev])
    return ExpandedCompressionKey(ck.pk, ck.lwe_params, eck, ck.key_scaling)


def fast_lwe_compress(eck: ExpandedCompressionKey, ct: LweCiphertext) -> CompressedCiphertext:
    """Addition-only compression: add eck[j][i] for every set bit j of (q-a[i])."""
    pk, params = eck.pk, eck.lwe_params
    q = params.q
    x = trivial_encrypt(pk, int(ct.b) % pk.m)
    for i, ai in enumerate(ct.a):
        scalar = (q - int(ai)) % q
        j = 0
        while scalar:
            if scalar & 1:
                x = paillier.add(pk, x, eck.eck[j][i])
            scalar >>= 1
            j += 1
    return CompressedCiphertext(x, params, key_scaling=eck.key_scaling)


def batch_capacity(pk, gamma: int) -> int:
    """Largest ell with gamma^ell < m (exact big-integer comparison)."""
    ell, power = 0, 1
    while power * gamma < pk.m:
        power *= gamma
        ell += 1
    return ell


def _check_capacity(pk, gamma, ell):
    lmax = batch_capacity(pk, gamma)
    if ell > lmax:
        raise CapacityExceeded("batch of %d exceeds capacity %d at this scale"
                               % (ell, lmax))


def batched_lwe_compress(ck: CompressionKey, cts, gamma: int) -> CompressedCiphertext:
    if ck.key_scaling != 1:
        raise ValueError("batching requires an unscaled compression key")
    _check_capacity(ck.pk, gamma, len(cts))
    x = trivial_encrypt(ck.pk, 0)
    for j, ct in enumerate(cts):
        xj = lwe_compress(ck, ct)
        x = paillier.add(ck.pk, x, paillier.scalar_mul(ck.pk, gamma ** j, xj.x))
    return CompressedCiphertext(x, ck.lwe_params, gamma=gamma, ell=len(cts))


def fast_batched_lwe_compress(ck, cts, gamma: int) -> CompressedCiphertext:
    """Batched compression with zero scalar multiplications.

    The combined per-entry scalar gamma^j * ((q - a[i]) mod q) is bit
    decomposed against an expanded key with enough doubling rows, and the
    gamma^j * b_j terms fold into a single deterministic encryption.
    """
    if isinstance(ck, ExpandedCompressionKey):
        base = CompressionKey(ck.pk, ck.lwe_params, ck.eck[0], ck.key_scaling)
    else:
        base = ck
    if base.key_scaling != 1:
        raise ValueError("batching requires an unscaled compression key")
    pk, params = base.pk, base.lwe_params
    ell = len(cts)
    _check_capacity(pk, gamma, ell)
    q = params.q
    rows = max((gamma ** (ell - 1) * (q - 1)).bit_length(), 1) if ell else 1
    if isinstance(ck, ExpandedCompressionKey) and len(ck.eck) >= rows:
        eck = ck
    else:
        eck = expand_compression_key(base, rows=rows)
    btotal = sum(gamma ** j * int(ct.b) for j, ct in enumerate(cts))
    x = trivial_encrypt(pk, btotal % pk.m)
    for j, ct in enumerate(cts):
        scale = gamma ** j
        for i, ai in enumerate(ct.a):
            scalar = scale * ((q - int(ai)) % q)
            r = 0
            while scalar:
                if scalar & 1:
                    x = paillier.add(pk, x, eck.eck[r][i])
                scalar >>= 1
                r += 1
    return CompressedCiphertext(x, params, gamma=gamma, ell=ell)


def modified_batched_lwe_decrypt(sk_paillier: PaillierSecretKey, cc: CompressedCiphertext):
    y = paillier.decrypt(sk_paillier, cc.x)
    out = []
    for j in range(cc.ell):
        slot = (y // cc.gamma ** j) % cc.gamma
        out.append(phase_to_plaintext(cc.lwe_params, slot % cc.lwe_params.q))
    return out
