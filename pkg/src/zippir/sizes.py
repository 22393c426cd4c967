"""Closed-form communication and storage accounting.

Every function here is a pure function of parameters; the benchmark report
and the wire-format tests check measured byte counts against these.

Conventions: a Paillier ciphertext occupies 2*log2(m) bits; a plaintext
log2(m) bits. The historical table accounting (packed-key sizes) counts
log2(m) bits per key ciphertext and displays floor(bytes/1000) KB.
"""

import math

LAMBDA_BITS = 128


# -- single/batched compression ------------------------------------------

def compressed_ciphertext_bytes(paillier_bits: int) -> int:
    return 2 * paillier_bits // 8


def uncompressed_lwe_bits(n: int, log2q: int) -> int:
    return (n + 1) * log2q


def lwe_reduction_percent(n: int, log2q: int, paillier_bits: int) -> float:
    return 100.0 * (1 - 2 * paillier_bits / uncompressed_lwe_bits(n, log2q))


def uncompressed_rlwe_bits(N: int, log2q: int) -> int:
    return (N + 1) * log2q


def rlwe_reduction_percent(N: int, log2q: int, paillier_bits: int) -> float:
    return 100.0 * (1 - 2 * paillier_bits / uncompressed_rlwe_bits(N, log2q))


def seeded_lwe_bits(log2q: int, lambda_bits: int = LAMBDA_BITS) -> int:
    return lambda_bits + log2q


def full_lwe_a_bits(n: int, log2q: int) -> int:
    return n * log2q


# -- packed compression keys ----------------------------------------------

def packed_key_layout(n: int, log2q: int, binary: bool, paillier_bits: int = 3072):
    """(radix delta, digits per ciphertext t, ciphertext count)."""
    q = 1 << log2q
    bound = q + n * q if binary else q + n * q * q
    delta = 1 << bound.bit_length()
    t = (paillier_bits // 2) // bound.bit_length()
    entries = -(-n // t)
    return delta, t, entries


def packed_key_bytes(n, log2q, binary, paillier_bits=3072) -> int:
    _, _, entries = packed_key_layout(n, log2q, binary, paillier_bits)
    return entries * paillier_bits // 8


def unpacked_key_bytes(n, paillier_bits=3072) -> int:
    return n * paillier_bits // 8


def display_kb(nbytes: int) -> int:
    return nbytes // 1000


# -- batch capacity formulas ----------------------------------------------

def batch_capacity_formula(paillier_bits: int, n: int, log2q: int) -> int:
    """The published capacity ceil((log2 m - log2 n)/log2 q).

    Optimistic by one slot in the worst case (see the exact capacity on
    ProtocolParams); kept for reproducing published storage tables.
    """
    return math.ceil((paillier_bits - math.log2(n)) / log2q)


def d1_prime_formula(d1: int, capacity: int) -> int:
    return d1 // capacity


def batched_capacity_curve(paillier_bits: int, n: int, width_bits: int) -> int:
    """Capacity used by the published size curves: slots of width_bits plus
    a carry/sign allowance of 1 + ceil(log2 n) bits."""
    return paillier_bits // (1 + math.ceil(math.log2(n)) + width_bits)


def batched_size_kib(num_cts: int, capacity: int, paillier_bits: int) -> float:
    return 2 * paillier_bits * math.ceil(num_cts / capacity) / 8192


# -- protocol message payloads (bits) --------------------------------------

def hint_request_bits(paillier_bits: int, lambda_bits: int = LAMBDA_BITS) -> int:
    return 2 * paillier_bits + lambda_bits


def query_bits(n: int, paillier_bits: int, d0: int, log2q: int) -> int:
    return n * paillier_bits + d0 * log2q


def response_separate_bits(d1_prime: int, paillier_bits: int) -> int:
    return 3 * d1_prime * paillier_bits


def response_combined_bits(d1_prime: int, paillier_bits: int) -> int:
    return 2 * d1_prime * paillier_bits


def client_state_bits(paillier_bits: int, lambda_bits: int = LAMBDA_BITS) -> int:
    return paillier_bits + lambda_bits


def per_query_hint_storage_bits(d1_prime: int, paillier_bits: int) -> int:
    return 2 * d1_prime * paillier_bits
