import random

import numpy as np
import pytest

from zippir import counters, paillier
from zippir.compress import (STANDARD, QUARTER_DELTA, CapacityExceeded,
                             ModulusTooSmall, batch_capacity,
                             batched_lwe_compress, default_packing_radix,
                             expand_compression_key, fast_batched_lwe_compress,
                             fast_lwe_compress, generate_packed_key,
                             lwe_compress, make_compression_key,
                             modified_batched_lwe_decrypt,
                             modified_lwe_decrypt, phase_bound, select_scale,
                             unpack_compression_key)
from zippir.lwe import (LweCiphertext, LweParams, lwe_decrypt, lwe_encrypt,
                        lwe_encrypt_traced, lwe_keygen)

TOY = LweParams(n=2, q=16, p=4, noise_sigma=0.0, key_dist="binary")


def _toy_key(sk_paillier, sk=(1, 0), rng=None):
    skv = np.array(sk, dtype=np.uint64)
    ck = make_compression_key(sk_paillier.pk, TOY, skv,
                              rng or random.Random(0))
    return skv, ck


def test_hand_compression_oracle(sk77, rng):
    # sk=(1,0), ct=(a=(3,5), b=12): the raw decryption is
    # 12 + (16-3)*1 + (16-5)*0 = 25; 25 mod 16 = 9; round(9/4) = 2
    skv, ck = _toy_key(sk77, rng=rng)
    ct = LweCiphertext(np.array([3, 5], dtype=np.uint64), 12)
    cc = lwe_compress(ck, ct)
    assert paillier.decrypt(sk77, cc.x) == 25
    assert modified_lwe_decrypt(sk77, cc) == 2


def test_zero_a_decrypts_to_b(sk77, rng):
    skv, ck = _toy_key(sk77, rng=rng)
    ct = LweCiphertext(np.array([0, 0], dtype=np.uint64), 9)
    assert paillier.decrypt(sk77, lwe_compress(ck, ct).x) == 9


def test_compression_of_zero_message(sk77, rng):
    skv, ck = _toy_key(sk77, rng=rng)
    ct, _ = lwe_encrypt_traced(TOY, skv, 0, a=[7, 9], e=0)
    assert modified_lwe_decrypt(sk77, lwe_compress(ck, ct)) == 0


def test_roundtrip_random_toy(sk77, rng):
    for _ in range(300):
        sk = np.array([rng.randrange(2), rng.randrange(2)], dtype=np.uint64)
        ck = make_compression_key(sk77.pk, TOY, sk, rng)
        mu, e = rng.randrange(4), rng.choice([-1, 0, 1])
        ct, _ = lwe_encrypt_traced(TOY, sk, mu, rng, e=e)
        assert modified_lwe_decrypt(sk77, lwe_compress(ck, ct)) == mu


def test_no_overflow_invariant(sk77, rng):
    # instrumented plaintext-side oracle: raw sum stays below m
    bound = phase_bound(TOY)
    assert bound < 77
    for _ in range(200):
        sk = np.array([rng.randrange(2), rng.randrange(2)], dtype=np.uint64)
        ct, _ = lwe_encrypt_traced(TOY, sk, rng.randrange(4), rng)
        raw = int(ct.b) + sum(((16 - int(a)) % 16) * int(s)
                              for a, s in zip(ct.a, sk))
        assert raw < 77


def test_modulus_too_small_rejected(rng):
    sk_small = paillier.PaillierSecretKey(5, 7)  # m = 35 < 48 = 16 + 2*16
    with pytest.raises(ModulusTooSmall):
        make_compression_key(sk_small.pk, TOY,
                             np.array([1, 0], dtype=np.uint64), rng)


def test_select_scale_table():
    binary = TOY
    uniform = LweParams(n=2, q=16, p=4, noise_sigma=0.0, key_dist="uniform")
    assert select_scale(binary, STANDARD) == 16 + 2 * 16
    assert select_scale(uniform, STANDARD) == 16 + 2 * 256
    assert select_scale(binary, QUARTER_DELTA) == 16
    assert select_scale(uniform, QUARTER_DELTA) == 256


# -- packed keys -------------------------------------------------------------

def test_packed_key_roundtrip_and_sizes(sk768, rng):
    pk = sk768.pk
    sk = np.array([1, 0], dtype=np.uint64)
    pck = generate_packed_key(pk, TOY, sk, rng)
    assert pck.delta == 64  # smallest power of two above 48, multiple of 16
    assert pck.t > 1
    assert len(pck.pck) == 1  # n=2 digits fit one ciphertext when t >= 2
    ck = unpack_compression_key(pck)
    assert ck.key_scaling == pck.delta ** (pck.t - 1)
    # each unpacked entry is delta^(t-1-j) times the packed value; the
    # neighboring digits it still carries are multiples of q = delta^0 * q
    # and vanish during modified decryption
    packed_value = paillier.decrypt(sk768, pck.pck[0])
    for j, c in enumerate(ck.ck[:2]):
        expect = pck.delta ** (pck.t - 1 - j) * packed_value % pk.m
        assert paillier.decrypt(sk768, c) == expect


def test_packed_pipeline_equals_plain(sk768, rng):
    pk = sk768.pk
    for _ in range(20):
        sk = np.array([rng.randrange(2), rng.randrange(2)], dtype=np.uint64)
        plain = make_compression_key(pk, TOY, sk, rng)
        packed = unpack_compression_key(generate_packed_key(pk, TOY, sk, rng))
        ct, _ = lwe_encrypt_traced(TOY, sk, rng.randrange(4), rng)
        assert (modified_lwe_decrypt(sk768, lwe_compress(packed, ct))
                == modified_lwe_decrypt(sk768, lwe_compress(plain, ct))
                == lwe_decrypt(TOY, sk, ct))


def test_identity_packing_t1(sk2491, rng):
    # m = 2491 fits exactly one radix-64 digit: the identity packing
    sk = np.array([1, 1], dtype=np.uint64)
    pck = generate_packed_key(sk2491.pk, TOY, sk, rng, delta=64)
    assert pck.t == 1
    ck = unpack_compression_key(pck)
    assert ck.key_scaling == 1
    assert [paillier.decrypt(sk2491, c) for c in ck.ck] == [1, 1]


def test_packed_key_rejects_bad_radix(sk2491, rng):
    sk = np.array([1, 0], dtype=np.uint64)
    with pytest.raises(ValueError):
        generate_packed_key(sk2491.pk, TOY, sk, rng, delta=32)  # below bound
    with pytest.raises(ValueError):
        generate_packed_key(sk2491.pk, TOY, sk, rng, delta=100)  # not mult of q


# -- fast (expanded-key) path -------------------------------------------------

def test_fast_path_equals_slow_path(sk77, rng):
    skv, ck = _toy_key(sk77, rng=rng)
    eck = expand_compression_key(ck)
    for _ in range(100):
        ct, _ = lwe_encrypt_traced(TOY, skv, rng.randrange(4), rng)
        assert (modified_lwe_decrypt(sk77, fast_lwe_compress(eck, ct))
                == modified_lwe_decrypt(sk77, lwe_compress(ck, ct)))


def test_fast_path_zero_scalar_mults(sk77, rng):
    skv, ck = _toy_key(sk77, rng=rng)
    eck = expand_compression_key(ck)
    ct, _ = lwe_encrypt_traced(TOY, skv, 2, rng)
    with counters.measure() as m:
        fast_lwe_compress(eck, ct)
    assert m.delta.scalar_mul == 0
    assert m.delta.modexp == 0


# -- batched -------------------------------------------------------------------

def test_batched_roundtrip(sk2491, rng):
    skv, _ = _toy_key(sk2491)
    ck = make_compression_key(sk2491.pk, TOY, skv, rng)
    gamma = select_scale(TOY, STANDARD)
    cap = batch_capacity(sk2491.pk, gamma)
    assert cap == 2  # 48^2 = 2304 < 2491 <= 48^3
    for _ in range(50):
        mus = [rng.randrange(4) for _ in range(cap)]
        cts = [lwe_encrypt(TOY, skv, mu, rng) for mu in mus]
        cc = batched_lwe_compress(ck, cts, gamma)
        assert modified_batched_lwe_decrypt(sk2491, cc) == mus


def test_capacity_boundary(sk2491, rng):
    skv, _ = _toy_key(sk2491)
    ck = make_compression_key(sk2491.pk, TOY, skv, rng)
    gamma = select_scale(TOY, STANDARD)
    cap = batch_capacity(sk2491.pk, gamma)
    cts = [lwe_encrypt(TOY, skv, 1, rng) for _ in range(cap + 1)]
    batched_lwe_compress(ck, cts[:cap], gamma)  # at capacity: fine
    with pytest.raises(CapacityExceeded):
        batched_lwe_compress(ck, cts, gamma)


def test_fast_batched_equals_slow_batched(sk2491, rng):
    skv, _ = _toy_key(sk2491)
    ck = make_compression_key(sk2491.pk, TOY, skv, rng)
    gamma = select_scale(TOY, STANDARD)
    cap = batch_capacity(sk2491.pk, gamma)
    for _ in range(50):
        cts = [lwe_encrypt(TOY, skv, rng.randrange(4), rng)
               for _ in range(cap)]
        slow = batched_lwe_compress(ck, cts, gamma)
        fast = fast_batched_lwe_compress(ck, cts, gamma)
        assert (modified_batched_lwe_decrypt(sk2491, fast)
                == modified_batched_lwe_decrypt(sk2491, slow))


def test_fast_batched_zero_scalar_mults(sk2491, rng):
    skv, _ = _toy_key(sk2491)
    ck = make_compression_key(sk2491.pk, TOY, skv, rng)
    gamma = select_scale(TOY, STANDARD)
    cts = [lwe_encrypt(TOY, skv, 1, rng) for _ in range(2)]
    with counters.measure() as m:
        fast_batched_lwe_compress(ck, cts, gamma)
    assert m.delta.scalar_mul == 0
    assert m.delta.modexp == 0


def test_quarter_delta_regime_with_small_noise(sk2491, rng):
    # gamma = q is only sound for |e| < delta/4; with e = 0 it must round trip
    skv, _ = _toy_key(sk2491)
    ck = make_compression_key(sk2491.pk, TOY, skv, rng)
    gamma = select_scale(TOY, QUARTER_DELTA)
    cap = batch_capacity(sk2491.pk, gamma)
    assert cap >= 2
    for _ in range(30):
        mus = [rng.randrange(4) for _ in range(2)]
        cts = [lwe_encrypt_traced(TOY, skv, mu, rng, e=0)[0] for mu in mus]
        cc = batched_lwe_compress(ck, cts[:2], gamma)
        assert modified_batched_lwe_decrypt(sk2491, cc) == mus


def test_batched_rejects_scaled_key(sk768, rng):
    sk = np.array([1, 0], dtype=np.uint64)
    packed = unpack_compression_key(
        generate_packed_key(sk768.pk, TOY, sk, rng))
    assert packed.key_scaling > 1
    with pytest.raises(ValueError):
        batched_lwe_compress(packed, [], 48)


def test_default_radix_properties(sk2491):
    d = default_packing_radix(sk2491.pk, TOY)
    assert d > phase_bound(TOY)
    assert d & (d - 1) == 0
    assert d % TOY.q == 0


def test_compressed_serialization_size(sk77, rng):
    skv, ck = _toy_key(sk77, rng=rng)
    ct, _ = lwe_encrypt_traced(TOY, skv, 1, rng)
    cc = lwe_compress(ck, ct)
    blob = cc.serialize()
    assert blob  # header plus ciphertext bytes
    assert cc.x.c < sk77.pk.m2
