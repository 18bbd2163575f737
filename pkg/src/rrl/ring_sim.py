"""Synchronous lockstep scheduler for a unidirectional ring.

Position ``p`` sends to position ``p + 1 (mod n)``.  A run has exactly ``n``
rounds; in each round every node first emits its message, then every node
receives its predecessor's message.  Behaviors are immutable descriptions;
:func:`run_ring` spawns a fresh process from each one, so runs are pure
functions of ``(config, behaviors)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .protocol import (
    CheaterDetected,
    ConfigError,
    Decision,
    Triplet,
    finalize,
    init_node,
    relay_step,
    verify_own_return,
)

HONEST = "honest"
COALITION = "coalition"


@dataclass(frozen=True)
class RingConfig:
    n: int
    node_ids: tuple[int, ...]
    roles: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "node_ids", tuple(self.node_ids))
        object.__setattr__(self, "roles", tuple(self.roles))
        if self.n < 2:
            raise ConfigError(f"ring size must be at least 2, got {self.n}")
        if len(self.node_ids) != self.n or len(self.roles) != self.n:
            raise ConfigError("node_ids and roles must both have length n")
        if len(set(self.node_ids)) != self.n:
            raise ConfigError(f"node ids must be pairwise distinct: {self.node_ids}")
        if any(i < 0 for i in self.node_ids):
            raise ConfigError("node ids must be non-negative")
        bad = [r for r in self.roles if r not in (HONEST, COALITION)]
        if bad:
            raise ConfigError(f"unknown roles: {bad}")

    @classmethod
    def build(cls, n: int, honest=None, node_ids=None) -> "RingConfig":
        """Ring with ids ``1..n`` by default; ``honest`` lists honest positions
        (all positions when omitted)."""
        honest = set(range(n)) if honest is None else set(honest)
        if any(not 0 <= p < n for p in honest):
            raise ConfigError(f"honest positions out of range for n={n}: {sorted(honest)}")
        ids = tuple(range(1, n + 1)) if node_ids is None else tuple(node_ids)
        roles = tuple(HONEST if p in honest else COALITION for p in range(n))
        return cls(n, ids, roles)

    @property
    def honest_positions(self) -> list[int]:
        return [p for p, r in enumerate(self.roles) if r == HONEST]

    @property
    def coalition_positions(self) -> list[int]:
        return [p for p, r in enumerate(self.roles) if r == COALITION]

    def is_honest(self, p: int) -> bool:
        return self.roles[p % self.n] == HONEST

    def pred(self, p: int) -> int:
        return (p - 1) % self.n

    def succ(self, p: int) -> int:
        return (p + 1) % self.n

    def upstream_coalition(self, u: int) -> tuple[int, int]:
        """Closest coalition member upstream of ``u`` and the arc length ``m``
        (nodes strictly after it up to and including ``u``)."""
        for m in range(1, self.n):
            v = (u - m) % self.n
            if not self.is_honest(v):
                return v, m
        raise ConfigError("no coalition member on the ring")

    def downstream_coalition(self, w: int) -> tuple[int, int]:
        """First coalition member after ``w`` and its distance from ``w``."""
        for d in range(1, self.n):
            c = (w + d) % self.n
            if not self.is_honest(c):
                return c, d
        raise ConfigError("no coalition member on the ring")

    @property
    def heads(self) -> list[int]:
        """Honest positions whose direct predecessor is a coalition member."""
        return [
            p for p in self.honest_positions if not self.is_honest(self.pred(p))
        ]

    def to_dict(self) -> dict:
        return {"n": self.n, "node_ids": list(self.node_ids), "roles": list(self.roles)}


@dataclass
class NodeContext:
    position: int
    node_id: int
    config: RingConfig
    # Shared by coalition members only; keys are (position, round).
    coalition_memory: Optional[dict] = None

    @property
    def n(self) -> int:
        return self.config.n


class Process:
    """Running instance of a behavior for one position and one run."""

    def send(self, rnd: int) -> Optional[Triplet]:
        raise NotImplementedError

    def receive(self, rnd: int, msg: Optional[Triplet]) -> None:
        raise NotImplementedError

    @property
    def decision(self) -> Optional[Decision]:
        return None

    @property
    def reported(self) -> bool:
        return False


class Behavior:
    def spawn(self, ctx: NodeContext) -> Process:
        raise NotImplementedError


class HonestProcess(Process):
    def __init__(self, ctx: NodeContext, input: int, rand_value: int):
        self.state, self.own = init_node(ctx.node_id, input, rand_value, ctx.n)
        self.n = ctx.n
        self.last: Optional[Triplet] = None
        self._decision: Optional[Decision] = None
        self._reported = False

    def send(self, rnd):
        if self._reported:
            return None
        return self.own if rnd == 1 else self.last

    def receive(self, rnd, msg):
        if self._reported:
            return
        try:
            if rnd < self.n:
                self.state, self.last = relay_step(self.state, msg)
            else:
                self.state = verify_own_return(self.state, msg)
                self._decision = finalize(self.state)
        except CheaterDetected as exc:
            self._reported = True
            self.last = None
            self._decision = Decision.cheater(exc.reason)

    @property
    def decision(self):
        return self._decision

    @property
    def reported(self):
        return self._reported


@dataclass(frozen=True)
class HonestBehavior(Behavior):
    input: int
    rand_value: int

    def spawn(self, ctx):
        return HonestProcess(ctx, self.input, self.rand_value)


def honest_behavior(input: int, rand_value: int) -> HonestBehavior:
    if input not in (0, 1):
        raise ConfigError(f"input must be 0 or 1, got {input!r}")
    if rand_value < 0:
        raise ConfigError(f"random value must be non-negative, got {rand_value}")
    return HonestBehavior(input, rand_value)


@dataclass
class Trace:
    config: RingConfig
    sent: list[list[Optional[Triplet]]]
    received: list[list[Optional[Triplet]]]
    decisions: list[Optional[Decision]]
    reported: list[bool]
    own: list[Optional[Triplet]] = field(default_factory=list)

    def honest_decisions(self) -> dict[int, Decision]:
        return {p: self.decisions[p] for p in self.config.honest_positions}

    def to_dict(self) -> dict:
        def enc(t):
            return None if t is None else t.as_list()

        n = self.config.n
        rounds = [
            {
                "round": r + 1,
                "position": p,
                "sent": enc(self.sent[p][r]),
                "received": enc(self.received[p][r]),
            }
            for r in range(n)
            for p in range(n)
        ]
        nodes = []
        for p in range(n):
            d = self.decisions[p]
            nodes.append(
                {
                    "position": p,
                    "id": self.config.node_ids[p],
                    "role": self.config.roles[p],
                    "decision": None if d is None else d.to_json(),
                    "leader": None if d is None or d.detected else d.leader_id,
                    "reported_cheater": self.reported[p],
                }
            )
        return {"config": self.config.to_dict(), "rounds": rounds, "nodes": nodes}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)


def run_ring(config: RingConfig, behaviors: Sequence[Behavior]) -> Trace:
    n = config.n
    if len(behaviors) != n:
        raise ConfigError(f"expected {n} behaviors, got {len(behaviors)}")
    memory: dict = {}
    procs = []
    for p, b in enumerate(behaviors):
        shared = memory if config.roles[p] == COALITION else None
        procs.append(b.spawn(NodeContext(p, config.node_ids[p], config, shared)))
    sent = [[None] * n for _ in range(n)]
    received = [[None] * n for _ in range(n)]
    for rnd in range(1, n + 1):
        out = [proc.send(rnd) for proc in procs]
        for p, proc in enumerate(procs):
            msg = out[(p - 1) % n]
            sent[p][rnd - 1] = out[p]
            received[p][rnd - 1] = msg
            proc.receive(rnd, msg)
            if config.roles[p] == COALITION:
                memory[(p, rnd)] = msg
    return Trace(
        config=config,
        sent=sent,
        received=received,
        decisions=[proc.decision for proc in procs],
        reported=[proc.reported for proc in procs],
        own=[row[0] for row in sent],
    )
