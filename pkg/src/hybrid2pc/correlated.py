"""Correlated randomness: triples, OT masks, and dot-product shares.

The dealer and the two parties all run the same seed expansion, so every
layout here is normative: role 0 expands seed0 into its full view, role 1
expands seed1 into everything except the correction values, and the dealer
expands both seeds to compute the corrections that complete role 1's view:

    A-MT   c1 = (a0+a1)*(b0+b1) - c0   (mod 2^l)
    B-MT   c1 = (a0^a1)&(b0^b1) ^ c0
    OT     qr = q_r, r drawn by the receiver side
    VDP    a3 = sum_j a0_j*a1_j - a2   (mod 2^l), one (a2, a3) per product

Each resource type reads from its own personalised DRBG substream, so
adding items of one kind never shifts the values of another. Within a
stream, elements are drawn in the documented order below; every ring
element consumes 8 stream bytes, bits are LSB-first within bytes.

Stream layouts:
    AMT  role 0: a[0..n) b[0..n) c[0..n)     role 1: a[0..n) b[0..n)
    BMT  role 0: a-bits, b-bits, c-bits      role 1: a-bits, b-bits
    OT   sender: q0,q1 interleaved per item  receiver: r bits
    VDP  role 0: per product: n_d elems, a2  role 1: per product: n_d elems
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .drbg import Drbg, personalization
from .ring import RingParams

MASK_BYTES = 16  # k = 128-bit OT masks

# Personalization tags, one substream per resource type.
TAG_AMT = 0x01
TAG_BMT = 0x02
TAG_OT_SEND = 0x03
TAG_OT_RECV = 0x04
TAG_VDP = 0x05


def _stream(seed: bytes, tag: int, index: int = 0) -> Drbg:
    return Drbg(seed, personalization(tag, index))


@dataclass(frozen=True)
class ResourceManifest:
    """What a session needs dealt; must match byte-for-byte across parties."""

    session_id: bytes
    ring: RingParams
    num_amt: int = 0
    num_bmt: int = 0
    num_ot: int = 0
    vdp_lengths: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.session_id) != 16:
            raise ValueError("session id must be 16 bytes")
        if min((self.num_amt, self.num_bmt, self.num_ot), default=0) < 0:
            raise ValueError("negative resource count")
        if any(n < 1 for n in self.vdp_lengths):
            raise ValueError("dot product lengths must be >= 1")

    def encode(self) -> bytes:
        """Manifest payload; the session id travels in the frame header."""
        p = self.ring
        out = bytearray([p.l, p.alpha, p.beta])
        for n in (self.num_amt, self.num_bmt, self.num_ot):
            out += n.to_bytes(8, "little")
        out += len(self.vdp_lengths).to_bytes(4, "little")
        for n in self.vdp_lengths:
            out += n.to_bytes(4, "little")
        return bytes(out)

    @classmethod
    def decode(cls, session_id: bytes, payload: bytes) -> "ResourceManifest":
        if len(payload) < 3 + 24 + 4:
            raise ValueError("manifest payload too short")
        l, alpha, beta = payload[0], payload[1], payload[2]
        pos = 3
        counts = []
        for _ in range(3):
            counts.append(int.from_bytes(payload[pos : pos + 8], "little"))
            pos += 8
        k = int.from_bytes(payload[pos : pos + 4], "little")
        pos += 4
        if len(payload) != pos + 4 * k:
            raise ValueError("manifest payload length mismatch")
        lengths = tuple(
            int.from_bytes(payload[pos + 4 * i : pos + 4 * i + 4], "little")
            for i in range(k)
        )
        return cls(session_id, RingParams(l, alpha, beta), *counts, lengths)


def _elem_dtype(p: RingParams) -> np.dtype:
    return np.dtype(f"<u{p.nbytes}")


@dataclass
class VdpShare:
    """One party's view of the dot-product randomness, ragged over products."""

    lengths: tuple[int, ...]
    vec: np.ndarray  # concatenated per-product mask vectors
    scalar: np.ndarray  # a2 (role 0) or a3 (role 1), one per product
    offsets: np.ndarray = field(init=False)

    def __post_init__(self):
        self.offsets = np.concatenate(([0], np.cumsum(self.lengths))).astype(np.int64)

    def vec_for(self, i: int) -> np.ndarray:
        return self.vec[self.offsets[i] : self.offsets[i + 1]]


@dataclass
class PartyMaterial:
    """Everything one role holds after the offline phase."""

    role: int
    ring: RingParams
    amt_a: np.ndarray
    amt_b: np.ndarray
    amt_c: np.ndarray  # c0 seed-derived (role 0) / c1 dealt (role 1)
    bmt_a: np.ndarray
    bmt_b: np.ndarray
    bmt_c: np.ndarray
    ot_q: np.ndarray | None = None  # sender: (n, 2, 16) mask pairs
    ot_r: np.ndarray | None = None  # receiver: choice-mask bits
    ot_qr: np.ndarray | None = None  # receiver: (n, 16) selected masks
    vdp: VdpShare | None = None


@dataclass
class Corrections:
    """Dealer output completing role 1's view; the only non-seed payload."""

    c1_amt: np.ndarray
    c1_bmt: np.ndarray  # unpacked 0/1 bits
    qr: np.ndarray  # (n, 16)
    a3: np.ndarray

    def encode(self, p: RingParams) -> bytes:
        dt = _elem_dtype(p)
        parts = [
            self.c1_amt.astype(dt).tobytes(),
            np.packbits(self.c1_bmt, bitorder="little").tobytes(),
            self.qr.tobytes(),
            self.a3.astype(dt).tobytes(),
        ]
        return b"".join(parts)

    @classmethod
    def decode(cls, payload: bytes, m: ResourceManifest) -> "Corrections":
        p = m.ring
        dt = _elem_dtype(p)
        sizes = [
            m.num_amt * p.nbytes,
            (m.num_bmt + 7) // 8,
            m.num_ot * MASK_BYTES,
            len(m.vdp_lengths) * p.nbytes,
        ]
        if len(payload) != sum(sizes):
            raise ValueError("correction payload length mismatch")
        pos = 0
        chunks = []
        for s in sizes:
            chunks.append(payload[pos : pos + s])
            pos += s
        c1_amt = np.frombuffer(chunks[0], dtype=dt).astype(np.uint64)
        c1_bmt = np.unpackbits(
            np.frombuffer(chunks[1], dtype=np.uint8), bitorder="little"
        )[: m.num_bmt]
        qr = np.frombuffer(chunks[2], dtype=np.uint8).reshape(m.num_ot, MASK_BYTES)
        a3 = np.frombuffer(chunks[3], dtype=dt).astype(np.uint64)
        return cls(c1_amt, c1_bmt, qr, a3)


def _draw_vdp(d: Drbg, lengths, mask: int, with_scalar: bool):
    total = int(sum(lengths))
    if with_scalar:
        # per-product layout: n elems then the a2 scalar
        raw = d.ring_elems(total + len(lengths), mask)
        vec = np.empty(total, dtype=np.uint64)
        scalar = np.empty(len(lengths), dtype=np.uint64)
        pos = 0
        off = 0
        for i, n in enumerate(lengths):
            vec[off : off + n] = raw[pos : pos + n]
            scalar[i] = raw[pos + n]
            pos += n + 1
            off += n
        return VdpShare(tuple(lengths), vec, scalar)
    raw = d.ring_elems(total, mask)
    return VdpShare(tuple(lengths), raw, np.zeros(len(lengths), dtype=np.uint64))


def expand_role0(seed0: bytes, m: ResourceManifest) -> PartyMaterial:
    p = m.ring
    amt = _stream(seed0, TAG_AMT)
    a = amt.ring_elems(m.num_amt, p.mask)
    b = amt.ring_elems(m.num_amt, p.mask)
    c = amt.ring_elems(m.num_amt, p.mask)
    bmt = _stream(seed0, TAG_BMT)
    ba, bb, bc = (bmt.bits(m.num_bmt) for _ in range(3))
    q = _stream(seed0, TAG_OT_SEND).blocks(2 * m.num_ot).reshape(m.num_ot, 2, 16)
    vdp = _draw_vdp(_stream(seed0, TAG_VDP), m.vdp_lengths, p.mask, with_scalar=True)
    return PartyMaterial(0, p, a, b, c, ba, bb, bc, ot_q=q, vdp=vdp)


def expand_role1(seed1: bytes, m: ResourceManifest) -> PartyMaterial:
    """Role 1's seed-derived half; corrections still missing."""
    p = m.ring
    amt = _stream(seed1, TAG_AMT)
    a = amt.ring_elems(m.num_amt, p.mask)
    b = amt.ring_elems(m.num_amt, p.mask)
    bmt = _stream(seed1, TAG_BMT)
    ba, bb = bmt.bits(m.num_bmt), bmt.bits(m.num_bmt)
    r = _stream(seed1, TAG_OT_RECV).bits(m.num_ot)
    vdp = _draw_vdp(_stream(seed1, TAG_VDP), m.vdp_lengths, p.mask, with_scalar=False)
    empty = np.zeros(m.num_amt, dtype=np.uint64)
    return PartyMaterial(
        1, p, a, b, empty, ba, bb, np.zeros(m.num_bmt, dtype=np.uint8), ot_r=r, vdp=vdp
    )


def compute_corrections(seed0: bytes, seed1: bytes, m: ResourceManifest) -> Corrections:
    """The dealer's pass: expand both seeds, emit role 1's explicit values."""
    p = m.ring
    mask = np.uint64(p.mask)
    m0 = expand_role0(seed0, m)
    m1 = expand_role1(seed1, m)
    c1_amt = ((m0.amt_a + m1.amt_a) * (m0.amt_b + m1.amt_b) - m0.amt_c) & mask
    c1_bmt = ((m0.bmt_a ^ m1.bmt_a) & (m0.bmt_b ^ m1.bmt_b)) ^ m0.bmt_c
    qr = np.where(m1.ot_r[:, None].astype(bool), m0.ot_q[:, 1], m0.ot_q[:, 0])
    if m.vdp_lengths:
        prod = (m0.vdp.vec * m1.vdp.vec) & mask
        sums = np.add.reduceat(prod, m0.vdp.offsets[:-1]) & mask
        a3 = (sums - m0.vdp.scalar) & mask
    else:
        a3 = np.zeros(0, dtype=np.uint64)
    return Corrections(c1_amt, c1_bmt, qr, a3)


def apply_corrections(mat: PartyMaterial, corr: Corrections) -> PartyMaterial:
    if mat.role != 1:
        raise ValueError("corrections complete role 1's view only")
    mat.amt_c = corr.c1_amt
    mat.bmt_c = corr.c1_bmt
    mat.ot_qr = corr.qr
    mat.vdp.scalar = corr.a3
    return mat


# Single-resource conveniences used by tests and the benchmark driver.


def _mini_manifest(p: RingParams, **kw) -> ResourceManifest:
    return ResourceManifest(bytes(16), p, **kw)


def gen_amt_batch(seed0: bytes, seed1: bytes, n: int, p: RingParams):
    """Returns ((a0,b0,c0), (a1,b1), c1) as uint64 arrays."""
    m = _mini_manifest(p, num_amt=n)
    m0, m1 = expand_role0(seed0, m), expand_role1(seed1, m)
    corr = compute_corrections(seed0, seed1, m)
    return (
        (m0.amt_a, m0.amt_b, m0.amt_c),
        (m1.amt_a, m1.amt_b),
        corr.c1_amt,
    )


def gen_bmt_batch(seed0: bytes, seed1: bytes, n: int):
    m = _mini_manifest(RingParams(8), num_bmt=n)
    m0, m1 = expand_role0(seed0, m), expand_role1(seed1, m)
    corr = compute_corrections(seed0, seed1, m)
    return ((m0.bmt_a, m0.bmt_b, m0.bmt_c), (m1.bmt_a, m1.bmt_b), corr.c1_bmt)


def gen_ot_masks(seed_s: bytes, seed_r: bytes, n: int):
    """Returns (sender (n,2,16) pairs, receiver r bits, qr (n,16))."""
    m = _mini_manifest(RingParams(8), num_ot=n)
    ms, mr = expand_role0(seed_s, m), expand_role1(seed_r, m)
    corr = compute_corrections(seed_s, seed_r, m)
    return ms.ot_q, mr.ot_r, corr.qr


def gen_vdps(seed0: bytes, seed1: bytes, lengths, p: RingParams):
    """Returns (role0 VdpShare with a2, role1 VdpShare, a3 corrections)."""
    m = _mini_manifest(p, vdp_lengths=tuple(lengths))
    m0, m1 = expand_role0(seed0, m), expand_role1(seed1, m)
    corr = compute_corrections(seed0, seed1, m)
    return m0.vdp, m1.vdp, corr.a3
