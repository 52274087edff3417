"""Thin AES-ECB helpers shared by the DRBG and the garbling engine.

ECB over a caller-built block sequence is used as (a) the block cipher
inside CTR-DRBG and (b) the fixed-key permutation inside the garbling
hash. Both call sites batch many blocks into one update() so the OpenSSL
backend amortises across AES-NI.
"""

from __future__ import annotations

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes


def ecb_encryptor(key: bytes):
    """Returns fn(buf: bytes|ndarray) -> bytes encrypting 16-byte blocks."""
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()

    def encrypt(buf) -> bytes:
        if isinstance(buf, np.ndarray):
            buf = buf.tobytes()
        return enc.update(buf)

    return encrypt


def ecb_encrypt_blocks(key: bytes, blocks: np.ndarray) -> np.ndarray:
    """Encrypt an (n, 16) uint8 array of blocks, returning the same shape."""
    out = ecb_encryptor(key)(blocks)
    return np.frombuffer(out, dtype=np.uint8).reshape(blocks.shape)
