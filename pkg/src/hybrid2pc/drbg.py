"""Deterministic random bit generation: AES-128 CTR-DRBG (SP 800-90A shape).

The dealer and both parties expand the same 256-bit seeds, so the stream
must be a pure function of (seed, personalization) independent of how
consumers chunk their reads. Internally the generator follows the
standard's no-derivation-function construction -- 256-bit seed material
XORed into the initial key/V state, a key/V update after every generate
request -- and the public fill() buffers over fixed-size internal
requests so read boundaries never shift the stream.

Domain separation between resource types (triples, OT masks, dot-product
shares) is done through the personalization string: one tag byte plus a
little-endian u32 stream index, zero-padded to the 32-byte seed length.
"""

from __future__ import annotations

import numpy as np

from .aesutil import ecb_encryptor

SEED_BYTES = 32
_BLOCK = 16
_SEEDLEN = 32  # AES-128: keylen + blocklen
# One internal generate request; SP 800-90A caps requests at 2^19 bits.
_REQUEST_BYTES = 1 << 16

MAX_STREAM_BITS = 1 << 63


class ReseedRequired(RuntimeError):
    """Raised when a stream would exceed its 2^63-bit budget."""


def personalization(tag: int, index: int = 0) -> bytes:
    return bytes([tag]) + index.to_bytes(4, "little")


class Drbg:
    """One deterministic stream; single-owner, not thread-safe."""

    def __init__(self, seed: bytes, pers: bytes = b"", max_bits: int = MAX_STREAM_BITS):
        if len(seed) != SEED_BYTES:
            raise ValueError(f"seed must be {SEED_BYTES} bytes, got {len(seed)}")
        if len(pers) > _SEEDLEN:
            raise ValueError("personalization longer than seed length")
        seed_material = bytes(a ^ b for a, b in zip(seed, pers.ljust(_SEEDLEN, b"\x00")))
        self._key = bytes(16)
        self._v = 0
        self._update(seed_material)
        self._bits_out = 0
        self._max_bits = max_bits
        self._buf = b""

    def _raw_blocks(self, n: int) -> bytes:
        """AES_K(V+1 .. V+n) as one ECB call; advances V."""
        base = self._v + 1
        self._v = (self._v + n) % (1 << 128)
        idx = np.arange(n, dtype=np.uint64)
        lo = np.uint64(base & 0xFFFFFFFFFFFFFFFF) + idx
        carry = lo < idx if base & 0xFFFFFFFFFFFFFFFF else np.zeros(n, dtype=bool)
        hi = np.uint64((base >> 64) & 0xFFFFFFFFFFFFFFFF) + carry.astype(np.uint64)
        ctr = np.empty((n, 2), dtype=np.uint64)
        ctr[:, 0] = hi.byteswap()
        ctr[:, 1] = lo.byteswap()
        return ecb_encryptor(self._key)(ctr)

    def _update(self, provided: bytes):
        temp = self._raw_blocks(_SEEDLEN // _BLOCK)
        temp = bytes(a ^ b for a, b in zip(temp, provided))
        self._key = temp[:16]
        self._v = int.from_bytes(temp[16:], "big")

    def _generate(self, nbytes: int) -> bytes:
        out = self._raw_blocks((nbytes + _BLOCK - 1) // _BLOCK)[:nbytes]
        self._update(bytes(_SEEDLEN))
        return out

    def fill_bytes(self, n: int) -> bytes:
        """Next n bytes of the canonical stream."""
        if n < 0:
            raise ValueError("negative byte count")
        if self._bits_out + 8 * n > self._max_bits:
            raise ReseedRequired(
                f"stream budget of {self._max_bits} bits exhausted; reseed required"
            )
        self._bits_out += 8 * n
        chunks = [self._buf]
        have = len(self._buf)
        while have < n:
            c = self._generate(_REQUEST_BYTES)
            chunks.append(c)
            have += len(c)
        buf = b"".join(chunks)
        out, self._buf = buf[:n], buf[n:]
        return out

    def fill(self, nbits: int) -> bytes:
        """Next nbits as ceil(nbits/8) bytes, unused top bits zeroed."""
        if nbits == 0:
            return b""
        raw = bytearray(self.fill_bytes((nbits + 7) // 8))
        if nbits % 8:
            raw[-1] &= (1 << (nbits % 8)) - 1
        return bytes(raw)

    # Typed draws used by the correlated-randomness layer. Every ring
    # element consumes a full 8 stream bytes regardless of l, keeping
    # layouts width-independent.

    def ring_elems(self, n: int, mask: int) -> np.ndarray:
        raw = self.fill_bytes(8 * n)
        return np.frombuffer(raw, dtype="<u8").astype(np.uint64) & np.uint64(mask)

    def bits(self, n: int) -> np.ndarray:
        """n bits LSB-first within bytes, as a uint8 0/1 array."""
        raw = np.frombuffer(self.fill_bytes((n + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:n]

    def blocks(self, n: int) -> np.ndarray:
        """n 16-byte blocks as an (n, 16) uint8 array."""
        raw = self.fill_bytes(16 * n)
        return np.frombuffer(raw, dtype=np.uint8).reshape(n, 16).copy()
