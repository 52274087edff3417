"""Additive secret sharing over Z_2^l and its multiplication protocols.

Linear algebra on shares is local. Three interactive primitives exist:

  mul_mt   shared x shared, one triple per product, both parties exchange
           masked operands (2l bits each way per product, one round)
  mul_da   cleartext-at-role-0 x shared, the offline-shifted three-party
           multiplication (l bits each way per product, one round)
  vdp      whole dot products of a cleartext vector against a shared one,
           consuming a single correction scalar per product

mul_da is the length-1 special case of vdp and shares its randomness.
All primitives are batched: any number of independent instances ride one
round.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import transport
from .correlated import PartyMaterial
from .ring import RingParams
from .transport import Channel


class AssError(RuntimeError):
    pass


class TripleExhausted(AssError):
    pass


@dataclass
class ArithShare:
    """One party's additive share vector."""

    value: np.ndarray  # uint64, canonical residues
    role: int

    def __post_init__(self):
        self.value = np.atleast_1d(np.asarray(self.value, dtype=np.uint64))

    def __len__(self):
        return len(self.value)


def share(x, p: RingParams, rng: np.random.Generator) -> tuple[ArithShare, ArithShare]:
    """Split x into (role 0, role 1) shares; each alone is uniform."""
    x = np.atleast_1d(np.asarray(x, dtype=np.uint64)) & np.uint64(p.mask)
    r = rng.integers(0, p.modulus, size=x.shape, dtype=np.uint64)
    return ArithShare(r, 0), ArithShare((x - r) & np.uint64(p.mask), 1)


def reconstruct(s0: ArithShare, s1: ArithShare, p: RingParams) -> np.ndarray:
    if s0.role == s1.role:
        raise AssError("reconstruct needs one share from each role")
    return (s0.value + s1.value) & np.uint64(p.mask)


def linear(terms, p: RingParams, const=0) -> ArithShare:
    """sum_j eta_j * x_j (+ const, role 0 only); zero communication.

    terms: iterable of (eta, ArithShare) with a common role.
    """
    terms = list(terms)
    roles = {s.role for _, s in terms}
    if len(roles) != 1:
        raise AssError("linear combination mixes roles")
    role = roles.pop()
    mask = np.uint64(p.mask)
    acc = np.zeros_like(terms[0][1].value)
    for eta, s in terms:
        acc = (acc + (np.uint64(int(eta) & p.mask) * s.value)) & mask
    if role == 0 and const:
        acc = (acc + np.uint64(int(const) & p.mask)) & mask
    return ArithShare(acc, role)


class AssEngine:
    """Per-session engine; owns this role's triple/VDP supplies."""

    def __init__(self, role: int, p: RingParams, channel: Channel,
                 material: PartyMaterial | None = None):
        self.role = role
        self.p = p
        self.channel = channel
        self.material = material
        self._amt_cursor = 0
        self._vdp_cursor = 0
        self.rounds = 0

    # supply accounting

    def _take_triples(self, n: int):
        m = self.material
        if m is None or self._amt_cursor + n > len(m.amt_a):
            raise TripleExhausted(f"need {n} arithmetic triples")
        s = slice(self._amt_cursor, self._amt_cursor + n)
        self._amt_cursor += n
        return m.amt_a[s], m.amt_b[s], m.amt_c[s]

    def _take_vdp(self, lengths):
        m = self.material
        if m is None:
            raise TripleExhausted("no dot-product randomness dealt")
        i = self._vdp_cursor
        if i + len(lengths) > len(m.vdp.lengths):
            raise TripleExhausted(f"need {len(lengths)} dot-product masks")
        got = m.vdp.lengths[i : i + len(lengths)]
        if tuple(got) != tuple(lengths):
            raise AssError(
                f"dot-product lengths {tuple(lengths)} do not match the "
                f"manifest entries {tuple(got)}"
            )
        self._vdp_cursor += len(lengths)
        lo, hi = m.vdp.offsets[i], m.vdp.offsets[i + len(lengths)]
        return m.vdp.vec[lo:hi], m.vdp.scalar[i : i + len(lengths)]

    def amt_left(self) -> int:
        return 0 if self.material is None else len(self.material.amt_a) - self._amt_cursor

    def vdp_left(self) -> int:
        return 0 if self.material is None else len(self.material.vdp.lengths) - self._vdp_cursor

    # wire helpers

    def _elems_to_bytes(self, v: np.ndarray) -> bytes:
        dt = np.dtype(f"<u{self.p.nbytes}")
        return np.ascontiguousarray(v.astype(dt)).tobytes()

    def _bytes_to_elems(self, raw: bytes) -> np.ndarray:
        dt = np.dtype(f"<u{self.p.nbytes}")
        return np.frombuffer(raw, dtype=dt).astype(np.uint64)

    # protocols

    def mul_mt(self, x: ArithShare, y: ArithShare) -> ArithShare:
        """Triple-based multiplication, elementwise over the batch."""
        mask = np.uint64(self.p.mask)
        n = len(x)
        a, b, c = self._take_triples(n)
        e_share = (x.value - a) & mask
        f_share = (y.value - b) & mask
        theirs = self.channel.exchange(
            transport.ASS_EF, self._elems_to_bytes(np.concatenate([e_share, f_share]))
        )
        self.rounds += 1
        other = self._bytes_to_elems(theirs)
        e = (e_share + other[:n]) & mask
        f = (f_share + other[n:]) & mask
        z = (f * a + e * b + c) & mask
        if self.role == 1:
            z = (z + e * f) & mask
        return ArithShare(z, self.role)

    def mul_da(self, x_clear, y: ArithShare) -> ArithShare:
        """Du-Atallah multiplication: role 0 holds x in the clear."""
        n = len(y)
        return self.vdp(x_clear, y, [1] * n)

    def vdp(self, x_clear, y: ArithShare, lengths) -> ArithShare:
        """Batched dot products of cleartext x (role 0) against shared y.

        lengths partitions the flat vectors into products; the output has
        one share per product. Consumes one VDPS entry per product; the
        lengths must match the manifest order exactly.
        """
        mask = np.uint64(self.p.mask)
        lengths = list(lengths)
        offsets = np.concatenate(([0], np.cumsum(lengths))).astype(np.int64)
        total = int(offsets[-1])
        if len(y) != total:
            raise AssError("shared vector length does not match lengths")
        a_vec, scalar = self._take_vdp(lengths)
        if self.role == 0:
            x = np.atleast_1d(np.asarray(x_clear, dtype=np.uint64)) & mask
            if len(x) != total:
                raise AssError("cleartext vector length does not match lengths")
            u = (x + a_vec) & mask
            v = self._bytes_to_elems(
                self.channel.exchange(transport.DA_MASKED, self._elems_to_bytes(u))
            )
            self.rounds += 1
            # z0 = sum x*<y>0 - sum a0*(y1+a1) + a2, per product
            term = (x * y.value - a_vec * v) & mask
            z = (np.add.reduceat(term, offsets[:-1]) & mask) + scalar
            return ArithShare(z & mask, 0)
        v = (y.value + a_vec) & mask
        u = self._bytes_to_elems(
            self.channel.exchange(transport.DA_MASKED, self._elems_to_bytes(v))
        )
        self.rounds += 1
        # z1 = sum <y>1*(x+a0) + a3, per product
        term = (y.value * u) & mask
        z = (np.add.reduceat(term, offsets[:-1]) & mask) + scalar
        return ArithShare(z & mask, 1)

    def reveal(self, s: ArithShare, to: str = "both") -> np.ndarray | None:
        """Open a share vector to one or both parties."""
        mask = np.uint64(self.p.mask)
        if to == "both":
            other = self.channel.exchange(
                transport.APP_REVEAL, self._elems_to_bytes(s.value)
            )
            self.rounds += 1
            return (s.value + self._bytes_to_elems(other)) & mask
        target = 0 if to == "role0" else 1
        if self.role == target:
            other = self._bytes_to_elems(
                self.channel.recv_expect(transport.APP_REVEAL)
            )
            return (s.value + other) & mask
        self.channel.send(transport.APP_REVEAL, self._elems_to_bytes(s.value))
        return None

    def share_input(self, x, owner: int, rng: np.random.Generator) -> ArithShare:
        """Owner splits x and ships the peer's share; one message."""
        if self.role == owner:
            mine, theirs = share(x, self.p, rng)
            if owner == 1:
                mine, theirs = theirs, mine
            self.channel.send(transport.APP_SHARE, self._elems_to_bytes(theirs.value))
            return ArithShare(mine.value, self.role)
        raw = self._bytes_to_elems(self.channel.recv_expect(transport.APP_SHARE))
        return ArithShare(raw, self.role)
