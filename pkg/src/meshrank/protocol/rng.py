"""Named random substreams for reproducible sessions.

All session randomness comes from one 64-bit seed expanded through
numpy's SeedSequence into independent PCG64 streams with fixed roles:

    0  order       - the initial shuffle of the round-1/2 schedule
    1  sides       - left/right assignment, one draw per presentation
    2  insertions  - slot index for each inserted third presentation
    3  choices     - reserved for simulated observers
    4  responses   - reserved for simulated response times

PCG64 output is platform-independent, so replays are stable anywhere.
"""

from __future__ import annotations

import numpy as np

ORDER, SIDES, INSERTIONS, OBSERVER_CHOICES, OBSERVER_RESPONSES = range(5)


def substream(seed: int, role: int) -> np.random.Generator:
    child = np.random.SeedSequence(seed).spawn(role + 1)[role]
    return np.random.Generator(np.random.PCG64(child))


class SessionStreams:
    """The three protocol streams of one session."""

    def __init__(self, seed: int):
        self.seed = seed
        self.order = substream(seed, ORDER)
        self.sides = substream(seed, SIDES)
        self.insertions = substream(seed, INSERTIONS)

    def state_snapshot(self) -> dict:
        return {
            "order": self.order.bit_generator.state,
            "sides": self.sides.bit_generator.state,
            "insertions": self.insertions.bit_generator.state,
        }
