from zippir import sizes


def test_single_ciphertext_columns():
    assert sizes.compressed_ciphertext_bytes(3072) == 768
    assert sizes.uncompressed_lwe_bits(630, 64) // 8 == 5048
    assert abs(sizes.lwe_reduction_percent(630, 64, 3072) - 84.78) < 0.01
    assert abs(sizes.lwe_reduction_percent(1024, 27, 3072) - 77.80) < 0.01
    assert abs(sizes.rlwe_reduction_percent(8192, 43, 3072) - 98.26) < 0.01


def test_packed_key_table_values():
    assert sizes.display_kb(sizes.packed_key_bytes(630, 64, binary=True)) == 12
    # unpacked: 630 ciphertexts of 384 B; the historical table prints 240
    assert abs(sizes.display_kb(sizes.unpacked_key_bytes(630)) - 240) <= 2
    assert sizes.display_kb(sizes.unpacked_key_bytes(1024)) == 393


def test_packed_layout_structure():
    delta, t, entries = sizes.packed_key_layout(630, 64, binary=True)
    assert delta > (1 << 64) + 630 * (1 << 64)
    assert delta & (delta - 1) == 0
    assert t == 1536 // (delta.bit_length() - 1)
    assert entries == -(-630 // t)


def test_capacity_curves():
    assert sizes.batched_capacity_curve(3072, 630, 128) == 22
    assert sizes.batched_capacity_curve(3072, 630, 64) == 40
    assert sizes.batched_capacity_curve(3072, 630, 20) == 99


def test_message_payload_formulas():
    assert sizes.hint_request_bits(3072) // 8 == 784
    # compression-key offsets portion of a (n=1400, 3072-bit) query
    assert sizes.query_bits(1400, 3072, 0, 32) // 8 == 537600
    assert sizes.response_separate_bits(22, 3072) // 8 == 3 * 22 * 384
    assert sizes.response_combined_bits(22, 3072) // 8 == 2 * 22 * 384
    assert sizes.client_state_bits(3072) // 8 == 400


def test_client_storage_exemplars():
    # hint storage per query: 2 * d1' * log2(m) bits -> 6/12/24 KiB
    for d1p, kib in [(8, 6), (16, 12), (32, 24)]:
        assert sizes.per_query_hint_storage_bits(d1p, 3072) // 8 // 1024 == kib


def test_formula_capacity_vs_operational():
    # the ceil formula is optimistic by construction; it never exceeds the
    # exact capacity by more than one slot
    import math
    from zippir.lwe import LweParams
    from zippir.protocol import ProtocolParams
    lwe = LweParams(n=1400, q=1 << 32, p=256, noise_sigma=6.4,
                    key_dist="binary")
    params = ProtocolParams(lwe=lwe, d0=256, d1=256)
    formula = sizes.batch_capacity_formula(3072, 1400, 32)
    assert params.capacity <= formula <= params.capacity + 1


def test_seeded_lwe_sizes():
    assert sizes.seeded_lwe_bits(32) == 128 + 32
    assert sizes.full_lwe_a_bits(1400, 32) == 1400 * 32
