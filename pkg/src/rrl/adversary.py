"""Coalition strategies and the truth/lie split of an honest node's view.

An honest node ``u`` whose closest upstream coalition member is ``v`` sees
``m`` triplets the coalition cannot touch (its own plus those of the honest
nodes strictly between ``v`` and ``u``) and ``n - m`` triplets that ``v``
chooses.  Only *head* nodes (honest nodes with a coalition predecessor)
receive coalition messages directly, so a :class:`ForgeScript` lists, for
every head, what to send in each of its ``n - 1`` relay rounds.

Slot kinds:

* :class:`Literal` -- a constant triplet fixed before round 1.
* :class:`Adaptive` -- built from the forger's own previous receipt
  (``relay(...)`` is the common case).  Used by the bounded adaptive search
  and the mirrored-leader rigger.
* :class:`Pinned` -- the true triplet of an honest node that must come back
  to it intact.  The coalition always returns own triplets correctly, since
  any mismatch is detected with certainty.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from math import prod
from typing import Iterator, Mapping, Optional, Sequence, Union

import numpy as np

from .protocol import ConfigError, Triplet
from .ring_sim import Behavior, HonestBehavior, NodeContext, Process, RingConfig, Trace

ID_PATTERNS = ("fresh", "mirrored", "echo")

# Batch encodings for Adaptive fields: -1 means "copy from last receipt".
FROM_LAST = -1
INPUT_LAST = 2
INPUT_FLIP = 3


@dataclass(frozen=True)
class Literal:
    id: int
    input: int
    random: int

    def to_json(self):
        return [self.id, self.input, self.random]


@dataclass(frozen=True)
class Adaptive:
    """Triplet derived from the forger's receipt in the previous round.

    ``id``/``random`` of ``None`` copy the received field; ``input`` is a bit,
    ``"last"`` (copy) or ``"flip"``.
    """

    id: Optional[int] = None
    input: Union[int, str] = "last"
    random: Optional[int] = None

    def to_json(self):
        return {"adaptive": {"id": self.id, "input": self.input, "random": self.random}}


@dataclass(frozen=True)
class Pinned:
    origin: int

    def to_json(self):
        return {"pinned": self.origin}


Slot = Union[Literal, Adaptive, Pinned]


def relay(input: Optional[int] = None) -> Adaptive:
    """Forward the previous receipt, optionally overwriting its input bit."""
    return Adaptive(None, "last" if input is None else input, None)


def _flip(value: int) -> int:
    return 1 - value if value in (0, 1) else value


def _slot_from_json(obj) -> Slot:
    if isinstance(obj, list):
        return Literal(*obj)
    if "pinned" in obj:
        return Pinned(obj["pinned"])
    a = obj["adaptive"]
    return Adaptive(a["id"], a["input"], a["random"])


@dataclass(frozen=True)
class ForgeScript:
    n: int
    targets: Mapping[int, tuple]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "targets": {
                str(t): [s.to_json() for s in slots] for t, slots in sorted(self.targets.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ForgeScript":
        targets = {
            int(t): tuple(_slot_from_json(s) for s in slots)
            for t, slots in data["targets"].items()
        }
        return cls(int(data["n"]), targets)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @property
    def digest(self) -> str:
        return hashlib.sha1(self.to_json().encode()).hexdigest()[:12]

    @property
    def is_fixed(self) -> bool:
        return all(not isinstance(s, Adaptive) for slots in self.targets.values() for s in slots)

    def validate(self, config: RingConfig) -> None:
        if config.n != self.n:
            raise ConfigError(f"script is for n={self.n}, ring has n={config.n}")
        missing = set(config.heads) - set(self.targets)
        if missing:
            raise ConfigError(f"script does not cover honest targets {sorted(missing)}")
        for t, slots in self.targets.items():
            if not config.is_honest(t) or config.is_honest(config.pred(t)):
                raise ConfigError(f"position {t} is not an honest node with a coalition predecessor")
            if len(slots) != self.n - 1:
                raise ConfigError(f"target {t} needs {self.n - 1} slots, got {len(slots)}")
            if isinstance(slots[0], Adaptive):
                raise ConfigError("round-1 slot cannot read a previous receipt")


def downstream_arc(config: RingConfig, u: int) -> list[int]:
    """Honest positions following ``u`` before the next coalition member."""
    arc = []
    p = config.succ(u)
    while config.is_honest(p) and p != u:
        arc.append(p)
        p = config.succ(p)
    return arc


def slot_origin(config: RingConfig, target: int, rnd: int) -> int:
    """Position whose triplet occupies ``target``'s round-``rnd`` receipt in an honest run."""
    return (target - rnd) % config.n


def pinned_rounds(config: RingConfig, target: int) -> list[int]:
    """Relay rounds whose content must equal an honest node's true triplet:
    the honest arc after ``target`` will carry it straight back to its owner."""
    arc = set(downstream_arc(config, target))
    return [r for r in range(1, config.n) if slot_origin(config, target, r) in arc]


def free_rounds(config: RingConfig, target: int) -> list[int]:
    pinned = set(pinned_rounds(config, target))
    return [r for r in range(1, config.n) if r not in pinned]


class ForgerProcess(Process):
    def __init__(self, ctx: NodeContext, script: ForgeScript, own: Triplet):
        self.ctx = ctx
        self.config = ctx.config
        self.memory = ctx.coalition_memory if ctx.coalition_memory is not None else {}
        self.script = script
        self.own = own
        self.target = self.config.succ(ctx.position)
        self.last: Optional[Triplet] = None
        if self.config.is_honest(self.target) and self.target not in script.targets:
            raise ConfigError(f"no script for honest target {self.target}")

    def _pinned(self, origin: int, rnd: int) -> Optional[Triplet]:
        c, d = self.config.downstream_coalition(origin)
        if d >= rnd:
            raise ConfigError(f"triplet of {origin} not yet seen by the coalition in round {rnd}")
        return self.memory.get((c, d))

    def send(self, rnd):
        if not self.config.is_honest(self.target):
            return self.own if rnd == 1 else self.last
        if rnd == self.config.n:
            return self._pinned(self.target, rnd)
        slot = self.script.targets[self.target][rnd - 1]
        if isinstance(slot, Literal):
            return Triplet(slot.id, slot.input, slot.random)
        if isinstance(slot, Pinned):
            return self._pinned(slot.origin, rnd)
        last = self.last
        needs_last = slot.id is None or slot.random is None or slot.input in ("last", "flip")
        if last is None and needs_last:
            return None
        if slot.input == "last":
            inp = last.input
        elif slot.input == "flip":
            inp = _flip(last.input)
        else:
            inp = slot.input
        return Triplet(
            last.id if slot.id is None else slot.id,
            inp,
            last.random if slot.random is None else slot.random,
        )

    def receive(self, rnd, msg):
        self.last = msg


@dataclass(frozen=True)
class ForgerBehavior(Behavior):
    script: ForgeScript
    input: int = 0
    rand_value: int = 0

    def spawn(self, ctx):
        return ForgerProcess(ctx, self.script, Triplet(ctx.node_id, self.input, self.rand_value))


def fixed_stream_forger(script: ForgeScript, input: int = 0, rand_value: int = 0) -> ForgerBehavior:
    """Coalition behavior that plays ``script`` into the honest node it feeds.

    Messages to coalition successors are honest relays.  The round-``n``
    message to an honest successor is always its own true triplet.
    """
    return ForgerBehavior(script, input, rand_value)


def input_cheater(declared: int, rand_value: int = 0) -> HonestBehavior:
    """Protocol-compliant node that pretends its input is ``declared``."""
    if declared not in (0, 1):
        raise ConfigError(f"declared input must be 0 or 1, got {declared!r}")
    return HonestBehavior(declared, rand_value)


def coalition_behaviors(config: RingConfig, honest: Mapping[int, tuple[int, int]], coalition) -> list[Behavior]:
    """Assemble per-position behaviors.

    ``honest`` maps honest positions to ``(input, random)``.  ``coalition`` is
    ``None`` (members run the protocol with input 0, random 0), a mapping of
    declared inputs, or a :class:`ForgeScript`.
    """
    out: list[Behavior] = []
    for p in range(config.n):
        if config.is_honest(p):
            out.append(HonestBehavior(*honest[p]))
        elif coalition is None:
            out.append(HonestBehavior(0, 0))
        elif isinstance(coalition, ForgeScript):
            out.append(fixed_stream_forger(coalition))
        else:
            out.append(input_cheater(coalition.get(p, 0)))
    return out


def fresh_id_base(config: RingConfig) -> int:
    return max(config.node_ids) + 1


def _pattern_id(config: RingConfig, pattern: str, target_index: int, target: int, rnd: int) -> int:
    base = fresh_id_base(config)
    if pattern == "fresh":
        return base + (target_index + 1) * config.n + rnd  # block 0 is the mirrored range
    if pattern == "mirrored":
        return base + rnd
    if pattern == "echo":
        return config.node_ids[slot_origin(config, target, rnd)]
    raise ConfigError(f"unknown id pattern {pattern!r}")


def parity_rigger(config: RingConfig, preferred: int, case: int = 1, randoms: Optional[Sequence[int]] = None) -> ForgeScript:
    """Script whose forged inputs sum to ``preferred`` mod 2 in every rigged view.

    ``case=1`` gives each target its own fresh ids, so the honest views share
    nothing.  ``case=2`` makes every view consist of the ring's true ids: slots
    for honest originators relay the true id and random with a scripted
    input, coalition slots use the member's id, so all targets compute the
    same ``rand_sum`` and elect the same leader.  ``randoms`` fills the
    literal slots in order (zeros by default).
    """
    if preferred not in (0, 1):
        raise ConfigError("preferred must be a bit")
    if case not in (1, 2):
        raise ConfigError(f"case must be 1 or 2, got {case}")
    heads = config.heads
    if not heads:
        raise ConfigError("no honest node has a coalition predecessor")
    targets = {}
    for k, t in enumerate(heads):
        free = free_rounds(config, t)
        slots: list[Slot] = []
        literal_i = 0
        rigged = False
        for rnd in range(1, config.n):
            origin = slot_origin(config, t, rnd)
            if rnd not in free:
                slots.append(Pinned(origin))
                continue
            if case == 2 and config.is_honest(origin):
                slots.append(relay(0))
                continue
            bit = 0 if rigged else preferred
            rigged = True
            rv = 0 if randoms is None else randoms[literal_i % len(randoms)] % config.n
            literal_i += 1
            pid = _pattern_id(config, "fresh" if case == 1 else "echo", k, t, rnd)
            slots.append(Literal(pid, bit, rv))
        if case == 2 and not rigged:
            # only relay slots: put the preferred parity on the first one
            i = next(i for i, s in enumerate(slots) if isinstance(s, Adaptive))
            slots[i] = relay(preferred)
        targets[t] = tuple(slots)
    return ForgeScript(config.n, targets)


@dataclass(frozen=True)
class ViewPartition:
    position: int
    v: int
    m: int
    truth: tuple
    lie: tuple
    input_t: int
    input_l: int
    random_t: int
    random_l: int


def compute_view_partition(trace: Trace, config: RingConfig, u: int) -> ViewPartition:
    if not config.is_honest(u):
        raise ConfigError(f"position {u} is not honest")
    if not config.coalition_positions:
        raise ConfigError("view partition needs a non-empty coalition")
    v, m = config.upstream_coalition(u)
    received = trace.received[u]
    truth = (trace.own[u],) + tuple(received[: m - 1])
    lie = tuple(received[m - 1 : config.n - 1])

    def total(items, attr):
        return sum(getattr(t, attr) for t in items if t is not None)

    return ViewPartition(
        position=u,
        v=v,
        m=m,
        truth=truth,
        lie=lie,
        input_t=total(truth, "input"),
        input_l=total(lie, "input"),
        random_t=total(truth, "random"),
        random_l=total(lie, "random"),
    )


@dataclass(frozen=True)
class UtilityModel:
    """Coalition payoff: ``legal_preferred`` when every honest node decides
    ``preferred``, ``legal_other`` for the other legal outcome, ``erroneous``
    for detections or honest disagreement."""

    preferred: int
    legal_preferred: int = 1
    legal_other: int = 0
    erroneous: int = 0

    def __post_init__(self):
        if self.preferred not in (0, 1):
            raise ConfigError("preferred must be a bit")
        if min(self.legal_preferred, self.legal_other) < self.erroneous:
            raise ConfigError("solution preference violated: a legal outcome is worth less than an erroneous one")


# --------------------------------------------------------------------------
# Strategy spaces.  Every free slot of every target chooses one option from a
# table; options are (id, input_code, random) with FROM_LAST sentinels.  The
# flat index of a script is the mixed-radix number of its option choices,
# target-major then round order.  Pinned rounds carry no choice.


@dataclass
class ScriptBatch:
    """Column form of ``size`` scripts: per target, per relay round, either a
    ``Pinned`` marker or three int arrays (id, input code, random)."""

    n: int
    size: int
    slots: dict

    def repeat(self, times: int) -> "ScriptBatch":
        out = {}
        for t, rounds in self.slots.items():
            out[t] = [
                s if isinstance(s, Pinned) else tuple(np.repeat(a, times) for a in s)
                for s in rounds
            ]
        return ScriptBatch(self.n, self.size * times, out)

    @classmethod
    def from_scripts(cls, scripts: Sequence[ForgeScript]) -> "ScriptBatch":
        n = scripts[0].n
        slots = {}
        for t in scripts[0].targets:
            rounds = []
            for r in range(n - 1):
                first = scripts[0].targets[t][r]
                if isinstance(first, Pinned):
                    if any(s.targets[t][r] != first for s in scripts):
                        raise ConfigError("pinned rounds must agree across a batch")
                    rounds.append(first)
                    continue
                cols = np.array([_encode(s.targets[t][r]) for s in scripts], dtype=np.int64)
                rounds.append((cols[:, 0], cols[:, 1], cols[:, 2]))
            slots[t] = rounds
        return cls(n, len(scripts), slots)


def _encode(slot: Slot) -> tuple[int, int, int]:
    if isinstance(slot, Pinned):
        raise ConfigError("cannot mix pinned and forged content in one round")
    if isinstance(slot, Literal):
        return (slot.id, slot.input, slot.random)
    inp = {"last": INPUT_LAST, "flip": INPUT_FLIP}.get(slot.input, slot.input)
    return (
        FROM_LAST if slot.id is None else slot.id,
        inp,
        FROM_LAST if slot.random is None else slot.random,
    )


def _decode(option: Sequence[int]) -> Slot:
    sid, inp, rv = (int(x) for x in option)
    if sid >= 0 and inp in (0, 1) and rv >= 0:
        return Literal(sid, inp, rv)
    inp_v = {INPUT_LAST: "last", INPUT_FLIP: "flip"}.get(inp, inp)
    return Adaptive(None if sid == FROM_LAST else sid, inp_v, None if rv == FROM_LAST else rv)


class StrategySpace:
    """Finite product of per-slot option tables over a ring's head targets.

    With ``tied=True`` all targets share one choice vector (they must have the
    same number of free slots and options per slot), which keeps symmetric
    policy families small.
    """

    def __init__(self, config: RingConfig, options: Mapping[int, Mapping[int, np.ndarray]], label: str, tied: bool = False):
        self.config = config
        self.label = label
        self.tied = tied
        self.targets = sorted(options)
        self.options = {t: {r: np.asarray(o, dtype=np.int64) for r, o in options[t].items()} for t in self.targets}
        self._axes = []  # (target, round) per mixed-radix digit
        for t in (self.targets[:1] if tied else self.targets):
            for r in sorted(self.options[t]):
                self._axes.append((t, r))
        if tied:
            shapes = {tuple(len(self.options[t][r]) for r in sorted(self.options[t])) for t in self.targets}
            if len(shapes) != 1:
                raise ConfigError("tied targets need identical option shapes")
        self.dims = tuple(len(self.options[t][r]) for t, r in self._axes)
        self.size = prod(self.dims) if self.targets else 0

    def __len__(self) -> int:
        return self.size

    def _choices(self, index: np.ndarray) -> dict:
        digits = np.unravel_index(index, self.dims) if self.dims else ()
        per_axis = dict(zip(self._axes, digits))
        out = {}
        for t in self.targets:
            for r in self.options[t]:
                src = (self.targets[0], r) if self.tied else (t, r)
                out[(t, r)] = per_axis[src]
        return out

    def batch(self, index) -> ScriptBatch:
        index = np.asarray(index, dtype=np.int64)
        choice = self._choices(index)
        n = self.config.n
        slots = {}
        for t in self.targets:
            rounds = []
            for r in range(1, n):
                if r in self.options[t]:
                    table = self.options[t][r][choice[(t, r)]]
                    rounds.append((table[:, 0], table[:, 1], table[:, 2]))
                else:
                    rounds.append(Pinned(slot_origin(self.config, t, r)))
            slots[t] = rounds
        return ScriptBatch(n, len(index), slots)

    def chunks(self, size: int) -> Iterator[tuple[int, ScriptBatch]]:
        for start in range(0, self.size, size):
            yield start, self.batch(np.arange(start, min(start + size, self.size)))

    def script(self, i: int) -> ForgeScript:
        if not 0 <= i < self.size:
            raise IndexError(i)
        b = self.batch([i])
        targets = {}
        for t, rounds in b.slots.items():
            targets[t] = tuple(
                s if isinstance(s, Pinned) else _decode([a[0] for a in s]) for s in rounds
            )
        return ForgeScript(self.config.n, targets)

    def __iter__(self) -> Iterator[ForgeScript]:
        for i in range(self.size):
            yield self.script(i)


def fixed_space(config: RingConfig, pattern: str) -> StrategySpace:
    """Every constant forged stream under one id pattern: each free slot takes
    an input bit and a random in ``Z_n``."""
    n = config.n
    options = {}
    for k, t in enumerate(config.heads):
        per = {}
        for r in free_rounds(config, t):
            pid = _pattern_id(config, pattern, k, t, r)
            per[r] = [(pid, b, x) for b in (0, 1) for x in range(n)]
        options[t] = per
    return StrategySpace(config, options, label=pattern)


def adaptive_space(config: RingConfig, pattern: str, tied: bool = False) -> StrategySpace:
    """Bounded family of history-reading policies.

    The first free slot of a target (nothing received yet when it is round 1)
    is a constant; every later free slot picks an id (pattern id or copied),
    an input rule (0, 1, copy, flip) and a random (0 or copied).
    """
    n = config.n
    options = {}
    for k, t in enumerate(config.heads):
        per = {}
        for r in free_rounds(config, t):
            pid = _pattern_id(config, pattern, k, t, r)
            if r == 1:
                per[r] = [(pid, b, x) for b in (0, 1) for x in range(n)]
            else:
                per[r] = [
                    (i, b, x)
                    for i in (pid, FROM_LAST)
                    for b in (0, 1, INPUT_LAST, INPUT_FLIP)
                    for x in (0, FROM_LAST)
                ]
        options[t] = per
    return StrategySpace(config, options, label=f"adaptive-{pattern}" + ("-tied" if tied else ""), tied=tied)


def count_fixed_strategies(config: RingConfig, id_patterns: Sequence[str] = ID_PATTERNS) -> int:
    """Size of the constant-stream space, computed from the slot counts alone."""
    heads = config.heads
    if not heads:
        return 0
    free = sum(len(free_rounds(config, t)) for t in heads)
    return len(id_patterns) * (2 * config.n) ** free


def enumerate_fixed_strategies(config: RingConfig, id_patterns: Sequence[str] = ID_PATTERNS) -> Iterator[ForgeScript]:
    if not config.heads:
        return
    for pattern in id_patterns:
        yield from fixed_space(config, pattern)


def random_scripts(config: RingConfig, count: int, seed: int, id_patterns: Sequence[str] = ID_PATTERNS) -> list[ForgeScript]:
    """Seeded sample from the constant-stream space."""
    rng = np.random.default_rng(seed)
    spaces = [fixed_space(config, p) for p in id_patterns]
    out = []
    for _ in range(count):
        space = spaces[int(rng.integers(len(spaces)))]
        out.append(space.script(int(rng.integers(space.size))))
    return out

