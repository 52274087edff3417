"""Shared two-party test harness: run both roles in threads over a
socketpair, with correlated material dealt directly from seeds (the STP
wire path has its own tests)."""

import hashlib
import threading

import pytest

from hybrid2pc import correlated
from hybrid2pc.transport import channel_pair

SEED0 = hashlib.sha256(b"conftest-seed-0").digest()
SEED1 = hashlib.sha256(b"conftest-seed-1").digest()


def deal(manifest):
    """Expand both party views as the dealer would."""
    m0 = correlated.expand_role0(SEED0, manifest)
    corr = correlated.compute_corrections(SEED0, SEED1, manifest)
    m1 = correlated.apply_corrections(correlated.expand_role1(SEED1, manifest), corr)
    return m0, m1


def run_parties(f0, f1):
    """Run two party closures concurrently; re-raise the first failure."""
    results = [None, None]
    errors = []

    def wrap(i, f):
        try:
            results[i] = f()
        except BaseException as e:  # noqa: BLE001 - surfaced below
            errors.append(e)

    t0 = threading.Thread(target=wrap, args=(0, f0))
    t1 = threading.Thread(target=wrap, args=(1, f1))
    t0.start()
    t1.start()
    t0.join(120)
    t1.join(120)
    if errors:
        raise errors[0]
    if t0.is_alive() or t1.is_alive():
        raise TimeoutError("party thread did not finish")
    return results


@pytest.fixture
def channels():
    c0, c1 = channel_pair()
    yield c0, c1
    c0.close()
    c1.close()
