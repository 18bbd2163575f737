"""Vectorized ring executor.

Runs the same lockstep schedule as :func:`rrl.ring_sim.run_ring`, but every
quantity is a numpy array over ``rows`` independent runs (universe points,
or universe points times scripts).  Only compliant nodes (honest nodes and
input cheaters) and script-driven forgers are supported; that is all the
exact and Monte Carlo analyses need.  Agreement with the scalar simulator is
checked in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .adversary import FROM_LAST, INPUT_FLIP, INPUT_LAST, Pinned, ScriptBatch
from .ring_sim import RingConfig

DETECTED = -1
DTYPE = np.int64


@dataclass
class Msgs:
    id: np.ndarray
    input: np.ndarray
    random: np.ndarray
    present: np.ndarray


def _full(rows, value):
    return np.full(rows, value, dtype=DTYPE)


class _Compliant:
    def __init__(self, n, rows, node_id, inp, rnd, keep_receipts):
        self.n = n
        inp = np.broadcast_to(np.asarray(inp, dtype=DTYPE), (rows,))
        rnd = np.broadcast_to(np.asarray(rnd, dtype=DTYPE), (rows,))
        self.own = Msgs(_full(rows, node_id), inp, rnd, np.ones(rows, dtype=bool))
        self.alive = np.ones(rows, dtype=bool)
        self.ids = [self.own.id]
        self.inputs = [inp]
        self.rand_sum = rnd.copy()
        self.input_sum = inp.copy()
        self.last: Optional[Msgs] = None
        self.keep = keep_receipts
        self.receipts: list[Msgs] = []
        self.decision = None
        self.leader_index = None

    def send(self, rnd):
        m = self.own if rnd == 1 else self.last
        return Msgs(m.id, m.input, m.random, m.present & self.alive)

    def receive(self, rnd, msg: Msgs):
        if self.keep:
            self.receipts.append(msg)
        if rnd < self.n:
            bad = ~msg.present | ((msg.input != 0) & (msg.input != 1))
            self.alive &= ~bad
            self.ids.append(msg.id)
            self.inputs.append(msg.input)
            self.rand_sum += msg.random
            self.input_sum += msg.input
            self.last = msg
            return
        own = self.own
        bad = ~msg.present | (msg.input != own.input) | (msg.id != own.id) | (msg.random != own.random)
        self.alive &= ~bad
        self._finalize()

    def _finalize(self):
        # The leader is the entry whose rank among the ids equals rand_sum mod n.
        # Ranks are counted pairwise, which beats sorting for small n.
        ids, inputs = self.ids, self.inputs
        k = len(ids)
        rank = [np.zeros_like(ids[0]) for _ in range(k)]
        dup = np.zeros(ids[0].shape, dtype=bool)
        for a in range(k):
            for b in range(a + 1, k):
                lt = ids[a] < ids[b]
                dup |= ids[a] == ids[b]
                rank[b] += lt
                rank[a] += ids[b] < ids[a]
        self.alive &= ~dup
        idx = self.rand_sum % self.n
        leader_input = np.zeros_like(idx)
        leader_id = np.zeros_like(idx)
        for a in range(k):
            hit = rank[a] == idx
            leader_input += np.where(hit, inputs[a], 0)
            leader_id += np.where(hit, ids[a], 0)
        self.decision = np.where(self.alive, (self.input_sum + leader_input) % 2, DETECTED)
        self.leader_index = np.where(self.alive, idx, DETECTED)
        self.leader_id = np.where(self.alive, leader_id, DETECTED)


class _Forger:
    def __init__(self, config: RingConfig, pos, rows, slots, own_input, own_rand, memory):
        self.config = config
        self.pos = pos
        self.rows = rows
        self.target = config.succ(pos)
        self.slots = slots
        self.memory = memory
        self.own = Msgs(
            _full(rows, config.node_ids[pos]), _full(rows, own_input), _full(rows, own_rand),
            np.ones(rows, dtype=bool),
        )
        self.last: Optional[Msgs] = None

    def _pinned(self, origin, rnd):
        c, d = self.config.downstream_coalition(origin)
        if d >= rnd:
            raise ValueError(f"triplet of {origin} unavailable in round {rnd}")
        return self.memory[(c, d)]

    def send(self, rnd):
        n = self.config.n
        if not self.config.is_honest(self.target):
            return self.own if rnd == 1 else self.last
        if rnd == n:
            return self._pinned(self.target, rnd)
        slot = self.slots[rnd - 1]
        if isinstance(slot, Pinned):
            return self._pinned(slot.origin, rnd)
        sid, code, srand = slot
        last = self.last
        if last is None:
            # round 1: only literal content is meaningful
            return Msgs(sid, code, srand, np.ones(self.rows, dtype=bool))
        id_last = sid == FROM_LAST
        rand_last = srand == FROM_LAST
        in_last = code == INPUT_LAST
        in_flip = code == INPUT_FLIP
        flipped = np.where((last.input == 0) | (last.input == 1), 1 - last.input, last.input)
        inp = np.where(in_last, last.input, np.where(in_flip, flipped, code))
        needs = id_last | rand_last | in_last | in_flip
        return Msgs(
            np.where(id_last, last.id, sid),
            inp,
            np.where(rand_last, last.random, srand),
            np.where(needs, last.present, True),
        )

    def receive(self, rnd, msg):
        self.last = msg
        self.memory[(self.pos, rnd)] = msg


@dataclass
class BatchResult:
    decision: dict          # position -> int array (DETECTED, 0, 1)
    leader_index: dict
    leader_id: dict
    receipts: dict          # position -> list of Msgs, rounds 1..n (only when requested)


def run_ring_batch(
    config: RingConfig,
    rows: int,
    compliant: Mapping[int, tuple],
    script: Optional[ScriptBatch] = None,
    coalition_inputs: Optional[Mapping[int, int]] = None,
    keep_receipts: bool = False,
) -> BatchResult:
    """Execute ``rows`` runs at once.

    ``compliant`` maps positions to ``(input, random)`` arrays (or scalars);
    every other position is a forger driven by ``script`` (already expanded
    to ``rows``).  Forgers' own triplets use ``coalition_inputs`` and random 0.
    """
    n = config.n
    coalition_inputs = coalition_inputs or {}
    memory: dict = {}
    procs = []
    for p in range(n):
        if p in compliant:
            inp, rnd = compliant[p]
            procs.append(_Compliant(n, rows, config.node_ids[p], inp, rnd, keep_receipts))
        else:
            if script is None:
                raise ValueError(f"position {p} needs a script")
            succ = config.succ(p)
            slots = script.slots.get(succ) if config.is_honest(succ) else None
            if config.is_honest(succ) and slots is None:
                raise ValueError(f"script has no entry for target {succ}")
            procs.append(_Forger(config, p, rows, slots, coalition_inputs.get(p, 0), 0, memory))
    for rnd in range(1, n + 1):
        out = [proc.send(rnd) for proc in procs]
        for p, proc in enumerate(procs):
            proc.receive(rnd, out[(p - 1) % n])
    result = BatchResult({}, {}, {}, {})
    for p, proc in enumerate(procs):
        if isinstance(proc, _Compliant):
            result.decision[p] = proc.decision
            result.leader_index[p] = proc.leader_index
            result.leader_id[p] = proc.leader_id
            if keep_receipts:
                result.receipts[p] = proc.receipts
    return result
