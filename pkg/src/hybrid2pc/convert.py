"""Share-type conversions between additive, Boolean, and garbled sharings.

Routes follow the cheapest-composition rule: the garbled<->Boolean hop is
free (label LSBs), so a2b goes through the garbled domain (a2y then y2b)
and y2a through the Boolean one (y2b then b2a). The two OT-based
conversions are:

  b2y  one 128-bit OT per bit, messages (Y0 ^ s0*R, Y0 ^ (1-s0)*R)
  b2a  one l-bit OT per bit j, messages ((s0_j ^ b) * 2^j - r_j) mod 2^l

Validation of all routes is purely by reconstruction oracles.
"""

from __future__ import annotations

import numpy as np

from . import circuits, ring
from .ass import ArithShare
from .gc import GcSession, YaoShare
from .gmw import BoolShare
from .ot import OtReceiver, OtSender
from .ring import RingParams


def _share_bits(s: ArithShare, p: RingParams) -> np.ndarray:
    return ring.bits_of(s.value, p)


_adder_cache: dict[tuple, circuits.Circuit] = {}


def adder_circuit(w: int, shift: int = 0) -> circuits.Circuit:
    """Size-optimised adder with an optional free arithmetic-shift rewiring
    of the sum (discharges pending fixed-point scale)."""
    key = (w, shift)
    if key not in _adder_cache:
        b = circuits.Builder(f"a2y_add{w}_shr{shift}")
        x = b.inputs(0, w)
        y = b.inputs(1, w)
        s = b.adder_word(x, y, circuits.CONST0, circuits.SIZE)
        if shift:
            s = [s[i + shift] if i + shift < w else s[-1] for i in range(w)]
        b.outputs = s
        _adder_cache[key] = b.build()
    return _adder_cache[key]


def a2y(gc: GcSession, x: ArithShare, p: RingParams, shift: int = 0) -> YaoShare:
    """Garbled sharing of x0 + x1 mod 2^l via a garbled adder.

    Both parties feed their additive shares; shift > 0 additionally
    discharges that many fixed-point scale bits for free on the way out.
    """
    c = adder_circuit(p.l, shift)
    ninst = len(x)
    bits = _share_bits(x, p)
    if gc.role == 0:
        return gc.run(c, ("bits", bits), ("bits", None), ninst=ninst, decode="none")
    return gc.run(c, ("bits", None), ("bits", bits), ninst=ninst, decode="none")


def y2b(gc: GcSession, ys: YaoShare) -> BoolShare:
    """Free: both sides keep their label LSBs (LSB(R) = 1)."""
    return BoolShare(gc.y2b(ys), gc.role)


def b2y(gc: GcSession, bs: BoolShare) -> YaoShare:
    return gc.b2y(bs.bits)


def b2a(role: int, p: RingParams, ot: OtSender | OtReceiver, bs: BoolShare,
        rng: np.random.Generator | None = None) -> ArithShare:
    """Boolean -> additive via one l-bit OT per bit."""
    bits = bs.bits
    ninst, w = bits.shape
    mask = np.uint64(p.mask)
    weights = (np.uint64(1) << np.arange(w, dtype=np.uint64)) & mask
    if role == 0:
        rng = rng if rng is not None else np.random.default_rng()
        r = rng.integers(0, p.modulus, size=(ninst, w), dtype=np.uint64)
        contrib0 = (bits * weights) & mask  # share0_j * 2^j  (b = 0 case)
        contrib1 = ((bits ^ 1) * weights) & mask
        m0 = (contrib0 - r) & mask
        m1 = (contrib1 - r) & mask
        ot.send_ring(m0.reshape(-1), m1.reshape(-1), p)
        return ArithShare(r.sum(axis=1, dtype=np.uint64) & mask, 0)
    got = ot.recv_ring(bits.reshape(-1), p).reshape(ninst, w)
    return ArithShare(got.sum(axis=1, dtype=np.uint64) & mask, 1)


def a2b(gc: GcSession, x: ArithShare, p: RingParams, shift: int = 0) -> BoolShare:
    return y2b(gc, a2y(gc, x, p, shift))


def y2a(gc: GcSession, p: RingParams, ot, ys: YaoShare,
        rng: np.random.Generator | None = None) -> ArithShare:
    return b2a(gc.role, p, ot, y2b(gc, ys), rng)
