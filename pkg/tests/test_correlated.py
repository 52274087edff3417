import hashlib

import numpy as np
import pytest

from hybrid2pc import correlated as cr
from hybrid2pc.ring import RingParams

SEED0 = hashlib.sha256(b"party-0").digest()
SEED1 = hashlib.sha256(b"party-1").digest()

L32 = RingParams(32)


def manifest(**kw):
    return cr.ResourceManifest(bytes(16), kw.pop("ring", L32), **kw)


def test_amt_correction_formula():
    # a0=1,a1=1,b0=3,b1=1,c0=5 -> c1 = 2*4-5 = 3
    p = RingParams(8)
    c1 = ((1 + 1) * (3 + 1) - 5) % p.modulus
    assert c1 == 3


def test_amt_relation_holds():
    n = 10**5
    (a0, b0, c0), (a1, b1), c1 = cr.gen_amt_batch(SEED0, SEED1, n, L32)
    mask = np.uint64(L32.mask)
    lhs = ((a0 + a1) & mask) * ((b0 + b1) & mask) & mask
    rhs = (c0 + c1) & mask
    assert np.array_equal(lhs, rhs)


def test_bmt_relation_exhaustive():
    # correction formula over all 2^5 share combinations
    for v in range(32):
        a0, a1, b0, b1, c0 = [(v >> i) & 1 for i in range(5)]
        c1 = ((a0 ^ a1) & (b0 ^ b1)) ^ c0
        assert (c0 ^ c1) == ((a0 ^ a1) & (b0 ^ b1))


def test_bmt_batch_relation():
    n = 10**5
    (a0, b0, c0), (a1, b1), c1 = cr.gen_bmt_batch(SEED0, SEED1, n)
    assert np.array_equal((a0 ^ a1) & (b0 ^ b1), c0 ^ c1)


def test_bmt_example_truth_table():
    # a0=1,a1=0,b0=1,b1=1,c0=1 -> c1 = (1&0)^1 = 1, so c = 0 = a&b
    a0, a1, b0, b1, c0 = 1, 0, 1, 1, 1
    c1 = ((a0 ^ a1) & (b0 ^ b1)) ^ c0
    assert c1 == 1
    assert (c0 ^ c1) == 0 == ((a0 ^ a1) & (b0 ^ b1))


def test_ot_masks_select_qr():
    q, r, qr = cr.gen_ot_masks(SEED0, SEED1, 1000)
    expect = np.where(r[:, None].astype(bool), q[:, 1], q[:, 0])
    assert np.array_equal(qr, expect)


def test_ot_empty_batch():
    q, r, qr = cr.gen_ot_masks(SEED0, SEED1, 0)
    assert q.shape == (0, 2, 16) and r.size == 0 and qr.shape == (0, 16)


def test_vdps_formula_example():
    # n=2, a0=[1,2], a1=[3,4], a2=5 -> a3 = 11-5 = 6
    assert (1 * 3 + 2 * 4) - 5 == 6


def test_vdps_relation():
    lengths = [1, 2, 100, 7]
    v0, v1, a3 = cr.gen_vdps(SEED0, SEED1, lengths, L32)
    mask = np.uint64(L32.mask)
    for i in range(len(lengths)):
        dot = int(((v0.vec_for(i) * v1.vec_for(i)) & mask).sum() & mask)
        assert (int(v0.scalar[i]) + int(a3[i])) % L32.modulus == dot


def test_vdps_length_one_is_single_mult_shift():
    v0, v1, a3 = cr.gen_vdps(SEED0, SEED1, [1], L32)
    a0, a1 = int(v0.vec[0]), int(v1.vec[0])
    assert (a0 * a1 - int(v0.scalar[0])) % L32.modulus == int(a3[0])


def test_seed_symmetry_dealer_vs_party():
    # the dealer's locally expanded views and a party's own expansion are
    # byte-identical; hash both sides over 10^5 items of each kind
    m = manifest(num_amt=10**5, num_bmt=10**5, num_ot=10**5,
                 vdp_lengths=(1,) * 10**5)

    def digest(mat):
        h = hashlib.sha256()
        for arr in (mat.amt_a, mat.amt_b, mat.amt_c, mat.bmt_a, mat.bmt_b, mat.bmt_c):
            h.update(np.ascontiguousarray(arr).tobytes())
        for arr in (mat.ot_q, mat.ot_r, mat.ot_qr):
            if arr is not None:
                h.update(np.ascontiguousarray(arr).tobytes())
        h.update(mat.vdp.vec.tobytes() + mat.vdp.scalar.tobytes())
        return h.digest()

    assert digest(cr.expand_role0(SEED0, m)) == digest(cr.expand_role0(SEED0, m))
    dealer_view = cr.expand_role1(SEED1, m)
    party_view = cr.expand_role1(SEED1, m)
    assert digest(dealer_view) == digest(party_view)
    corr = cr.compute_corrections(SEED0, SEED1, m)
    completed = cr.apply_corrections(party_view, corr)
    mask = np.uint64(L32.mask)
    m0 = cr.expand_role0(SEED0, m)
    lhs = ((m0.amt_a + completed.amt_a) & mask) * ((m0.amt_b + completed.amt_b) & mask)
    assert np.array_equal(lhs & mask, (m0.amt_c + completed.amt_c) & mask)
    assert np.array_equal(
        (m0.bmt_a ^ completed.bmt_a) & (m0.bmt_b ^ completed.bmt_b),
        m0.bmt_c ^ completed.bmt_c,
    )


def test_stream_independence_across_resource_types():
    # adding B-MTs to the manifest must not shift A-MT values
    small = cr.expand_role0(SEED0, manifest(num_amt=100))
    big = cr.expand_role0(SEED0, manifest(num_amt=100, num_bmt=5000, num_ot=17))
    assert np.array_equal(small.amt_a, big.amt_a)
    assert np.array_equal(small.amt_c, big.amt_c)


def test_correction_payload_sizes():
    # amortized offline payload: l bits per A-MT, 1 bit per B-MT, 128 per OT
    m = manifest(num_amt=1000, num_bmt=1000, num_ot=1000, vdp_lengths=(3, 9))
    corr = cr.compute_corrections(SEED0, SEED1, m)
    payload = corr.encode(L32)
    assert len(payload) == 1000 * 4 + 125 + 1000 * 16 + 2 * 4
    back = cr.Corrections.decode(payload, m)
    assert np.array_equal(back.c1_amt, corr.c1_amt)
    assert np.array_equal(back.c1_bmt, corr.c1_bmt)
    assert np.array_equal(back.qr, corr.qr)
    assert np.array_equal(back.a3, corr.a3)


def test_manifest_roundtrip():
    m = manifest(num_amt=5, num_bmt=6, num_ot=7, vdp_lengths=(1, 2, 3))
    assert cr.ResourceManifest.decode(m.session_id, m.encode()) == m


def test_manifest_validation():
    with pytest.raises(ValueError):
        cr.ResourceManifest(bytes(3), L32)
    with pytest.raises(ValueError):
        manifest(vdp_lengths=(0,))
