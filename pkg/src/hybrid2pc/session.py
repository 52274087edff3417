"""One party's bundle of engines over a single channel and material set.

Created either from a dealer bundle fetched over the wire (offline()) or
directly from expanded material (tests, in-process benches). All engines
draw from the same dealt supplies; exhaustion accounting spans them.
"""

from __future__ import annotations

import numpy as np

from . import stp, transport
from .ass import AssEngine
from .correlated import PartyMaterial, ResourceManifest
from .gc import GcSession
from .gmw import GmwEngine
from .ot import OtReceiver, OtSender
from .transport import Channel


class PartySession:
    def __init__(self, role: int, manifest: ResourceManifest,
                 material: PartyMaterial, channel: Channel,
                 rng: np.random.Generator | None = None):
        self.role = role
        self.manifest = manifest
        self.ring = manifest.ring
        self.material = material
        self.channel = channel
        self.rng = rng if rng is not None else np.random.default_rng()
        if role == 0:
            self.ot = OtSender(material.ot_q, channel)
        else:
            self.ot = OtReceiver(material.ot_r, material.ot_qr, channel)
        self.ass = AssEngine(role, self.ring, channel, material)
        self.gmw = GmwEngine(role, channel, material)
        self.gc = GcSession(role, channel, ot=self.ot, rng=self.rng)

    @classmethod
    def offline(cls, role: int, manifest: ResourceManifest, stp_addr,
                channel: Channel, rng=None,
                stp_cipher_key: bytes | None = None) -> "PartySession":
        """Fetch this role's bundle from the dealer, then go online."""
        bundle = stp.request_bundle(stp_addr, manifest, role,
                                    ledger=channel.ledger,
                                    cipher_key=stp_cipher_key)
        material = bundle.materialize(manifest)
        channel.phase_mark(transport.ONLINE)
        return cls(role, manifest, material, channel, rng)

    def leftovers(self) -> dict:
        """Undealt-but-unconsumed resources; empty when the manifest was
        planned exactly."""
        out = {
            "amt": self.ass.amt_left(),
            "bmt": self.gmw.bmt_left(),
            "ot": self.ot.available(),
            "vdp": self.ass.vdp_left(),
        }
        return {k: v for k, v in out.items() if v}

    def assert_exhausted(self):
        left = self.leftovers()
        if left:
            raise AssertionError(f"manifest not fully consumed: {left}")
