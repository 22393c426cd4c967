import random

import pytest
from hypothesis import given, settings, strategies as st

from zippir import counters, paillier
from zippir.paillier import (InvalidCiphertext, add, decrypt, encrypt, keygen,
                             multiexp, paillier_matmul, sample_ciphertext,
                             scalar_mul, trivial_encrypt)


def test_roundtrip_exhaustive_small(sk77, rng):
    for mu in range(77):
        assert decrypt(sk77, encrypt(sk77.pk, mu, rng)) == mu


def test_additive_homomorphism(sk77, rng):
    for _ in range(200):
        a, b = rng.randrange(77), rng.randrange(77)
        ca, cb = encrypt(sk77.pk, a, rng), encrypt(sk77.pk, b, rng)
        assert decrypt(sk77, add(sk77.pk, ca, cb)) == (a + b) % 77


def test_scalar_homomorphism(sk77, rng):
    for _ in range(200):
        mu, k = rng.randrange(77), rng.randrange(1, 500)
        ct = encrypt(sk77.pk, mu, rng)
        assert decrypt(sk77, scalar_mul(sk77.pk, k, ct)) == (k * mu) % 77


def test_trivial_encrypt_closed_form(sk77):
    for v in range(77):
        ct = trivial_encrypt(sk77.pk, v)
        assert ct.c == (1 + v * 77) % (77 * 77)
        assert decrypt(sk77, ct) == v


def test_invalid_ciphertext_detected(sk77):
    # any ciphertext sharing a factor with m must be rejected
    with pytest.raises(InvalidCiphertext):
        decrypt(sk77, paillier.PaillierCiphertext(7 * 33))
    with pytest.raises(InvalidCiphertext):
        decrypt(sk77, paillier.PaillierCiphertext(0))


def test_keygen_exact_bit_length_and_gcd():
    rng = random.Random(5)
    for bits in (16, 32, 64):
        pk, sk = keygen(bits, rng)
        assert pk.m.bit_length() == bits
        import math
        assert math.gcd(pk.m, (sk.p - 1) * (sk.q - 1)) == 1


def test_keygen_rejects_bad_size():
    with pytest.raises(ValueError):
        keygen(15)


def test_multiexp_matches_scalar_muls(sk2491, rng):
    pk = sk2491.pk
    for _ in range(20):
        n = rng.randrange(1, 8)
        cts = [encrypt(pk, rng.randrange(pk.m), rng) for _ in range(n)]
        exps = [rng.randrange(1 << 40) for _ in range(n)]
        ref = None
        for ct, e in zip(cts, exps):
            term = scalar_mul(pk, e, ct)
            ref = term if ref is None else add(pk, ref, term)
        assert decrypt(sk2491, multiexp(pk, cts, exps)) == decrypt(sk2491, ref)


def test_multiexp_uses_only_group_mults(sk2491, rng):
    pk = sk2491.pk
    cts = [encrypt(pk, rng.randrange(pk.m), rng) for _ in range(5)]
    exps = [rng.randrange(1 << 30) for _ in range(5)]
    with counters.measure() as m:
        multiexp(pk, cts, exps)
    assert m.delta.modexp == 0
    assert m.delta.group_mult > 0


def test_matmul_identity(sk77, rng):
    pk = sk77.pk
    mus = [rng.randrange(77) for _ in range(3)]
    v = [encrypt(pk, mu, rng) for mu in mus]
    ident = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    out = paillier_matmul(pk, ident, v)
    assert [decrypt(sk77, c) for c in out] == mus


def test_matmul_dimension_mismatch(sk77, rng):
    with pytest.raises(ValueError):
        paillier_matmul(sk77.pk, [[1, 2]], [encrypt(sk77.pk, 1, rng)])


def test_sample_ciphertext_deterministic_and_in_range(sk2491):
    pk = sk2491.pk
    seed = b"\x01" * 16
    a = sample_ciphertext(pk, seed, 3)
    assert a.c == sample_ciphertext(pk, seed, 3).c
    assert a.c != sample_ciphertext(pk, seed, 4).c
    assert a.c != sample_ciphertext(pk, b"\x02" * 16, 3).c
    assert 0 <= a.c < pk.m2


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 76), st.integers(0, 76))
def test_homomorphism_property(mu1, mu2):
    sk = paillier.PaillierSecretKey(7, 11)
    rng = random.Random(mu1 * 77 + mu2)
    c = add(sk.pk, encrypt(sk.pk, mu1, rng), encrypt(sk.pk, mu2, rng))
    assert decrypt(sk, c) == (mu1 + mu2) % 77
