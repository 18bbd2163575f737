"""Consensus as a function of declared inputs, checked against input cheaters.

A :class:`ConsensusFunction` maps every declared input vector to one output
bit (agreement is built in).  A coalition of ``n - 1`` input cheaters can
pick any declaration; the function survives when no declaration improves the
coalition's expected payoff over the one excluded node's uniform input.

Two independent routes are provided: :func:`derive_constraints` replays the
backward induction over (excluded input, number of coalition ones) cells,
and :func:`equilibrium_functions_bruteforce` filters every truth table.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Optional, Union

import numpy as np

from .analysis import CapacityError
from .protocol import ConfigError

BRUTEFORCE_MAX_N = 4


def _index(bits) -> int:
    return sum(b << p for p, b in enumerate(bits))


@dataclass(frozen=True)
class ConsensusFunction:
    """Truth table over ``{0,1}^n``; bit ``sum(x[p] << p)`` of ``table`` is ``f(x)``."""

    n: int
    table: int

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("arity must be positive")
        if not 0 <= self.table < 1 << (1 << self.n):
            raise ConfigError(f"table does not fit 2^{self.n} entries")

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[tuple], int]) -> "ConsensusFunction":
        table = 0
        for x in product((0, 1), repeat=n):
            bits = x[::-1]  # product varies the last coordinate fastest
            if fn(bits):
                table |= 1 << _index(bits)
        return cls(n, table)

    @classmethod
    def xor(cls, n: int) -> "ConsensusFunction":
        return cls.from_callable(n, lambda x: sum(x) % 2)

    @classmethod
    def majority(cls, n: int) -> "ConsensusFunction":
        return cls.from_callable(n, lambda x: int(2 * sum(x) > n))

    @classmethod
    def constant(cls, n: int, bit: int) -> "ConsensusFunction":
        return cls(n, ((1 << (1 << n)) - 1) if bit else 0)

    def __call__(self, x) -> int:
        return (self.table >> _index(x)) & 1

    @property
    def is_valid(self) -> bool:
        return self((0,) * self.n) == 0 and self((1,) * self.n) == 1

    @property
    def hex(self) -> str:
        return format(self.table, f"0{max(1, (1 << self.n) // 4)}x")

    @property
    def name(self) -> Optional[str]:
        if self == ConsensusFunction.xor(self.n):
            return "xor"
        if self.n % 2 and self == ConsensusFunction.majority(self.n):
            return "majority"
        for b in (0, 1):
            if self == ConsensusFunction.constant(self.n, b):
                return f"constant-{b}"
        return None

    def to_dict(self) -> dict:
        return {"n": self.n, "hex": self.hex, "name": self.name}


@dataclass(frozen=True)
class DeclarationProfile:
    v_input: int
    coalition_decls: tuple

    @property
    def ones(self) -> int:
        return sum(self.coalition_decls)

    @property
    def alpha(self) -> int:
        return self.ones % 2

    def to_dict(self) -> dict:
        return {
            "v_input": self.v_input,
            "coalition_decls": list(self.coalition_decls),
            "ones": self.ones,
            "alpha": self.alpha,
        }


def forced_decision(v_input: int, ones_j: int, n: int) -> int:
    """Output pinned on the excluded node by equilibrium plus agreement."""
    if v_input not in (0, 1):
        raise ConfigError("v_input must be a bit")
    if not 0 <= ones_j <= n - 1:
        raise ConfigError(f"ones_j must lie in [0, {n - 1}]")
    parity = v_input ^ (ones_j % 2)
    return 1 - parity if n % 2 == 0 else parity


@dataclass
class Contradiction:
    n: int
    witness: DeclarationProfile
    forced: int
    required: int
    steps: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "result": "contradiction",
            "witness": self.witness.to_dict(),
            "forced": self.forced,
            "required": self.required,
        }


@dataclass
class UniqueFunction:
    function: ConsensusFunction
    steps: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.function.n

    def to_dict(self) -> dict:
        return {"n": self.n, "result": "unique", "function": self.function.to_dict()}


def derive_constraints(n: int) -> Union[Contradiction, UniqueFunction]:
    """Backward induction on the number of coalition ones.

    Cells ``D[v, k]`` hold the excluded node's output when its input is ``v``
    and ``k`` coalition members declare 1.  Rules:

    * validity seeds ``D[1, n-1] = 1`` and demands ``D[0, 0] = 0``;
    * deviation: the coalition can move between any two declarations, so
      ``D[0, k] + D[1, k]`` is the same for every ``k``; the seed and the
      demand squeeze that sum to 1, giving ``D[0, k] = 1 - D[1, k]``;
    * agreement: the vector seen as ``(1, k)`` from one node is ``(0, k+1)``
      from a node declaring 0, so ``D[1, k-1] = D[0, k]``.
    """
    if n < 2:
        raise ConfigError("ring size must be at least 2")
    cells: dict[tuple[int, int], int] = {(1, n - 1): 1}
    steps = [("validity", (1, n - 1), 1)]
    for k in range(n - 1, -1, -1):
        cells[(0, k)] = 1 - cells[(1, k)]
        steps.append(("deviation", (0, k), cells[(0, k)]))
        if k:
            cells[(1, k - 1)] = cells[(0, k)]
            steps.append(("agreement", (1, k - 1), cells[(1, k - 1)]))
    if cells[(0, 0)] != 0:
        witness = DeclarationProfile(0, (0,) * (n - 1))
        return Contradiction(n, witness, cells[(0, 0)], 0, steps)

    table = 0
    for i in range(1 << n):
        x = [(i >> p) & 1 for p in range(n)]
        out = {cells[(x[p], sum(x) - x[p])] for p in range(n)}
        if len(out) != 1:
            raise RuntimeError(f"cells disagree across positions at input {x}")
        table |= out.pop() << i
    f = ConsensusFunction(n, table)
    if f != ConsensusFunction.xor(n):
        raise RuntimeError("surviving function is not total parity")
    return UniqueFunction(f, steps)


def _payoff(f: ConsensusFunction, v: int, z: tuple, b: int) -> Fraction:
    """Expected payoff for preferring ``b`` when the others declare ``z`` and
    position ``v`` holds a uniform bit."""
    hits = 0
    for bit in (0, 1):
        x = list(z)
        x.insert(v, bit)
        hits += f(x) == b
    return Fraction(hits, 2)


def is_input_cheater_equilibrium(f: ConsensusFunction) -> bool:
    """Valid, and no declaration beats any truthful one for either preference."""
    if not f.is_valid:
        return False
    n = f.n
    for v in range(n):
        others = list(product((0, 1), repeat=n - 1))
        for b in (0, 1):
            payoffs = [_payoff(f, v, z, b) for z in others]
            # any true x may be replaced by any declared y
            if max(payoffs) > min(payoffs):
                return False
    return True


def constancy_characterization(f: ConsensusFunction) -> bool:
    """Valid, and for each position the sum ``f(z, v<-0) + f(z, v<-1)`` does not depend on ``z``."""
    if not f.is_valid:
        return False
    for v in range(f.n):
        sums = set()
        for i in range(1 << f.n):
            if not (i >> v) & 1:
                sums.add(((f.table >> i) & 1) + ((f.table >> (i | 1 << v)) & 1))
        if len(sums) > 1:
            return False
    return True


def equilibrium_functions_bruteforce(n: int) -> set[ConsensusFunction]:
    """Every table that passes the deviation test, found by vectorized filtering."""
    if n > BRUTEFORCE_MAX_N:
        raise CapacityError(f"2^(2^{n}) tables is beyond brute force; use derive_constraints")
    if n < 1:
        raise ConfigError("arity must be positive")
    size = 1 << n
    tables = np.arange(1 << size, dtype=np.int64)
    bits = (tables[:, None] >> np.arange(size)) & 1
    keep = (bits[:, 0] == 0) & (bits[:, size - 1] == 1)
    idx = np.arange(size)
    for v in range(n):
        low = idx[(idx >> v) & 1 == 0]
        twice_payoff_1 = bits[:, low] + bits[:, low | (1 << v)]
        for b in (0, 1):
            u = twice_payoff_1 if b else 2 - twice_payoff_1
            keep &= u.max(axis=1) <= u.min(axis=1)
    return {ConsensusFunction(n, int(t)) for t in tables[keep]}


def results_to_json(functions) -> str:
    rows = sorted((f.to_dict() for f in functions), key=lambda d: d["hex"])
    return json.dumps(rows, sort_keys=True)


__all__ = [
    "Contradiction",
    "ConsensusFunction",
    "DeclarationProfile",
    "UniqueFunction",
    "constancy_characterization",
    "derive_constraints",
    "equilibrium_functions_bruteforce",
    "forced_decision",
    "is_input_cheater_equilibrium",
    "results_to_json",
]
