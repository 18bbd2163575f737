"""Per-node state machine for the parity-leader consensus protocol on a ring.

Each honest node injects a triplet ``<id, input, random>``, relays every
triplet it receives for ``n - 1`` rounds, checks that its own triplet comes
back untouched, then elects the node at index ``rand_sum mod n`` of the
id-sorted array as leader and decides the parity of ``input_sum`` plus the
leader's input.

All functions are pure: they return new states and never mutate arguments.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Optional

__all__ = [
    "CheaterDetected",
    "ConfigError",
    "Decision",
    "NodeState",
    "Triplet",
    "finalize",
    "init_node",
    "relay_step",
    "verify_own_return",
]


class ConfigError(ValueError):
    """Raised for malformed configurations (bad bits, ranges, ids)."""


class CheaterDetected(Exception):
    """A node caught a protocol violation and reports a cheater."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class Triplet:
    id: int
    input: int
    random: int

    def as_list(self) -> list[int]:
        return [self.id, self.input, self.random]


@dataclass(frozen=True)
class NodeState:
    id: int
    input: int
    my_rand: int
    n: int
    ids_array: tuple[tuple[int, int], ...]
    rand_sum: int
    input_sum: int
    round: int = 0

    @property
    def own_triplet(self) -> Triplet:
        return Triplet(self.id, self.input, self.my_rand)


@dataclass(frozen=True)
class Decision:
    """Final output of a node: a decided bit, or a cheater report.

    ``leader_id`` and ``leader_index`` are filled in for decided nodes so the
    analysis layer can condition on who was elected.
    """

    value: Optional[int]
    leader_id: Optional[int] = None
    leader_index: Optional[int] = None
    reason: Optional[str] = None

    @classmethod
    def decided(cls, bit: int, leader_id: int, leader_index: int) -> "Decision":
        if bit not in (0, 1):
            raise ValueError(f"decision must be a bit, got {bit!r}")
        return cls(bit, leader_id, leader_index)

    @classmethod
    def cheater(cls, reason: str) -> "Decision":
        return cls(None, reason=reason)

    @property
    def detected(self) -> bool:
        return self.value is None

    def to_json(self):
        return "cheater" if self.detected else self.value


def _check_bit(value, what: str) -> None:
    if value not in (0, 1) or isinstance(value, bool):
        raise ConfigError(f"{what} must be 0 or 1, got {value!r}")


def init_node(id: int, input: int, rand_value: int, n: int) -> tuple[NodeState, Triplet]:
    """Set up a node and return it together with its round-1 message."""
    if n < 2:
        raise ConfigError(f"ring size must be at least 2, got {n}")
    _check_bit(input, "input")
    if not 0 <= rand_value < n:
        raise ConfigError(f"random value must lie in [0, {n}), got {rand_value}")
    if id < 0:
        raise ConfigError(f"ids are non-negative, got {id}")
    state = NodeState(
        id=id,
        input=input,
        my_rand=rand_value,
        n=n,
        ids_array=((id, input),),
        rand_sum=rand_value,
        input_sum=input,
    )
    return state, state.own_triplet


def relay_step(state: NodeState, incoming: Optional[Triplet]) -> tuple[NodeState, Triplet]:
    """Absorb one relayed triplet and return it unchanged as the next outgoing message.

    Raises :class:`CheaterDetected` when the message is missing or its input
    is not a bit.
    """
    if state.round >= state.n - 1:
        raise ValueError("all relay rounds already consumed")
    if incoming is None:
        raise CheaterDetected("missing message")
    if incoming.input not in (0, 1):
        raise CheaterDetected(f"input {incoming.input!r} is not a bit")
    new = replace(
        state,
        ids_array=state.ids_array + ((incoming.id, incoming.input),),
        rand_sum=state.rand_sum + incoming.random,
        input_sum=state.input_sum + incoming.input,
        round=state.round + 1,
    )
    return new, incoming


def verify_own_return(state: NodeState, incoming: Optional[Triplet]) -> NodeState:
    if state.round != state.n - 1:
        raise ValueError("own triplet is only checked after n - 1 relays")
    if incoming is None:
        raise CheaterDetected("own triplet never returned")
    if (
        incoming.input != state.input
        or incoming.id != state.id
        or incoming.random != state.my_rand
    ):
        raise CheaterDetected("own triplet altered in transit")
    return replace(state, round=state.n)


def finalize(state: NodeState) -> Decision:
    """Elect the leader and decide.

    The leader's input is added on top of ``input_sum``, which already
    contains it once; the double count is intentional.
    """
    if state.round != state.n or len(state.ids_array) != state.n:
        raise ValueError("finalize needs a node that completed all n rounds")
    ordered = sorted(state.ids_array, key=lambda pair: pair[0])
    counts = Counter(pid for pid, _ in ordered)
    dup = [pid for pid, c in counts.items() if c != 1]
    if dup:
        raise CheaterDetected(f"duplicate id {min(dup)}")
    index = state.rand_sum % state.n
    leader_id, leader_input = ordered[index]
    total = state.input_sum + leader_input
    return Decision.decided(total % 2, leader_id, index)
