"""Exact and Monte Carlo evaluation of coalition strategies.

The probability space is uniform honest inputs times uniform honest randoms
in ``Z_n``; with ``h`` honest nodes it has ``2**h * n**h`` points, each run
once.  Coalition members' true inputs are fixed (zero unless given) and do
not enter the expectation.  Every exact result is a :class:`fractions.Fraction`.
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .adversary import (
    ID_PATTERNS,
    ForgeScript,
    ScriptBatch,
    StrategySpace,
    UtilityModel,
    adaptive_space,
    coalition_behaviors,
    compute_view_partition,
    fixed_space,
    parity_rigger,
)
from .engine import DETECTED, run_ring_batch
from .protocol import ConfigError
from .ring_sim import RingConfig, run_ring

DEFAULT_MAX_UNIVERSE = 10**8
ROW_CHUNK = 1 << 14  # rows per vectorized pass; sized to stay cache-resident

Coalition = Union[None, Mapping[int, int], ForgeScript]


class CapacityError(RuntimeError):
    """The requested enumeration exceeds the configured bound."""


def max_universe() -> int:
    raw = os.environ.get("RRL_MAX_UNIVERSE")
    return int(raw) if raw else DEFAULT_MAX_UNIVERSE


class Outcome(enum.IntEnum):
    DECIDED_0 = 0
    DECIDED_1 = 1
    DISAGREEMENT = 2
    ERRONEOUS = 3

    @classmethod
    def decided(cls, bit: int) -> "Outcome":
        return cls(bit)

    @property
    def legal(self) -> bool:
        return self in (Outcome.DECIDED_0, Outcome.DECIDED_1)


@dataclass(frozen=True)
class OutcomeDistribution:
    counts: Mapping[Outcome, int]
    total: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise ValueError("outcome counts do not cover the universe")

    def prob(self, outcome: Outcome) -> Fraction:
        return Fraction(self.counts.get(outcome, 0), self.total)

    @property
    def probs(self) -> dict[Outcome, Fraction]:
        return {o: self.prob(o) for o in Outcome}

    def to_dict(self) -> dict:
        return {
            o.name.lower(): [p.numerator, p.denominator] for o, p in self.probs.items()
        }


def universe_size(config: RingConfig) -> int:
    h = len(config.honest_positions)
    return 2**h * config.n**h


def universe_points(config: RingConfig, start: int = 0, stop: Optional[int] = None):
    """Honest inputs and randoms for points ``start..stop``: two ``(rows, h)`` arrays.

    Point index = (input vector as base-2 digits) * n**h + (random vector as
    base-n digits), first honest position most significant.
    """
    h = len(config.honest_positions)
    size = universe_size(config)
    stop = size if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    digits = np.unravel_index(idx, (2,) * h + (config.n,) * h)
    inputs = np.stack(digits[:h], axis=1) if h else np.zeros((len(idx), 0), dtype=np.int64)
    rands = np.stack(digits[h:], axis=1) if h else np.zeros((len(idx), 0), dtype=np.int64)
    return inputs.astype(np.int64), rands.astype(np.int64)


def classify(decisions: Sequence[np.ndarray]) -> np.ndarray:
    """Outcome codes from the honest nodes' decision arrays."""
    d = np.stack(decisions, axis=1)
    out = np.where(np.all(d == d[:, :1], axis=1), d[:, 0], Outcome.DISAGREEMENT)
    out = np.where(np.any(d == DETECTED, axis=1), Outcome.ERRONEOUS, out)
    return out


def _classify_scalar(decisions) -> Outcome:
    if any(d is None or d.detected for d in decisions):
        return Outcome.ERRONEOUS
    values = {d.value for d in decisions}
    if len(values) > 1:
        return Outcome.DISAGREEMENT
    return Outcome.decided(values.pop())


def _compliant_rows(config, inputs, rands, coalition, coalition_inputs, rows):
    compliant = {p: (inputs[:, j], rands[:, j]) for j, p in enumerate(config.honest_positions)}
    if isinstance(coalition, ForgeScript):
        return compliant
    declared = coalition if coalition is not None else coalition_inputs
    for p in config.coalition_positions:
        compliant[p] = (declared.get(p, 0), 0)
    return compliant


def exact_distribution(
    config: RingConfig,
    coalition: Coalition = None,
    *,
    coalition_inputs: Optional[Mapping[int, int]] = None,
    engine: str = "batch",
    limit: Optional[int] = None,
) -> OutcomeDistribution:
    """Enumerate every honest input/random assignment and tally outcomes.

    ``coalition`` is ``None`` (members run the protocol truthfully with
    ``coalition_inputs``), a mapping of declared inputs (input cheaters), or a
    :class:`ForgeScript`.  ``engine="scalar"`` drives :func:`run_ring` once per
    point instead of the vectorized executor.
    """
    limit = max_universe() if limit is None else limit
    size = universe_size(config)
    if size > limit:
        raise CapacityError(f"universe of {size} runs exceeds bound {limit}")
    if not config.honest_positions:
        raise ConfigError("no honest nodes: outcome undefined")
    coalition_inputs = dict(coalition_inputs or {})
    if isinstance(coalition, ForgeScript):
        coalition.validate(config)
    counts = np.zeros(len(Outcome), dtype=np.int64)
    if engine == "scalar":
        honest = config.honest_positions
        inputs, rands = universe_points(config)
        for row in range(size):
            assign = {p: (int(inputs[row, j]), int(rands[row, j])) for j, p in enumerate(honest)}
            if coalition is None:
                behaviors = coalition_behaviors(config, assign, dict(coalition_inputs))
            else:
                behaviors = coalition_behaviors(config, assign, coalition)
            trace = run_ring(config, behaviors)
            counts[_classify_scalar([trace.decisions[p] for p in honest])] += 1
    elif engine == "batch":
        base = ScriptBatch.from_scripts([coalition]) if isinstance(coalition, ForgeScript) else None
        for start in range(0, size, ROW_CHUNK):
            stop = min(size, start + ROW_CHUNK)
            inputs, rands = universe_points(config, start, stop)
            rows = stop - start
            compliant = _compliant_rows(config, inputs, rands, coalition, coalition_inputs, rows)
            res = run_ring_batch(
                config, rows, compliant,
                script=None if base is None else base.repeat(rows),
                coalition_inputs=coalition_inputs,
            )
            codes = classify([res.decision[p] for p in config.honest_positions])
            counts += np.bincount(codes, minlength=len(Outcome))
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return OutcomeDistribution({o: int(counts[o]) for o in Outcome}, size)


def coalition_utility(dist: OutcomeDistribution, model: UtilityModel) -> Fraction:
    value = {
        Outcome.decided(model.preferred): model.legal_preferred,
        Outcome.decided(1 - model.preferred): model.legal_other,
        Outcome.DISAGREEMENT: model.erroneous,
        Outcome.ERRONEOUS: model.erroneous,
    }
    return sum((dist.prob(o) * value[o] for o in Outcome), Fraction(0))


# ---------------------------------------------------------------- fairness


@dataclass
class FairnessReport:
    n: int
    universe: int
    p_one: Fraction
    p_zero: Fraction
    agreement_violations: int
    validity_violations: int
    witness: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return (
            self.agreement_violations == 0
            and self.validity_violations == 0
            and self.p_one == Fraction(1, 2)
            and self.p_zero == Fraction(1, 2)
        )


def check_fairness(n: int, limit: Optional[int] = None) -> FairnessReport:
    """All-honest ring: agreement, validity and a fair coin over the full universe."""
    if n % 2:
        raise ConfigError("fairness holds for even ring sizes only")
    config = RingConfig.build(n)
    limit = max_universe() if limit is None else limit
    size = universe_size(config)
    if size > limit:
        raise CapacityError(f"universe of {size} runs exceeds bound {limit}")
    ones = zeros = agree_bad = valid_bad = 0
    witness = None
    for start in range(0, size, ROW_CHUNK):
        stop = min(size, start + ROW_CHUNK)
        inputs, rands = universe_points(config, start, stop)
        compliant = {p: (inputs[:, p], rands[:, p]) for p in range(n)}
        res = run_ring_batch(config, stop - start, compliant)
        d = np.stack([res.decision[p] for p in range(n)], axis=1)
        disagree = np.any(d != d[:, :1], axis=1) | np.any(d == DETECTED, axis=1)
        all0 = np.all(inputs == 0, axis=1)
        all1 = np.all(inputs == 1, axis=1)
        invalid = (all0 & np.any(d != 0, axis=1)) | (all1 & np.any(d != 1, axis=1))
        agree_bad += int(disagree.sum())
        valid_bad += int(invalid.sum())
        ones += int(np.sum(~disagree & (d[:, 0] == 1)))
        zeros += int(np.sum(~disagree & (d[:, 0] == 0)))
        bad = np.flatnonzero(disagree | invalid)
        if witness is None and len(bad):
            i = bad[0]
            witness = {
                "inputs": inputs[i].tolist(),
                "randoms": rands[i].tolist(),
                "decisions": d[i].tolist(),
            }
    return FairnessReport(
        n, size, Fraction(ones, size), Fraction(zeros, size), agree_bad, valid_bad, witness
    )


# ---------------------------------------------------------- leader election


@dataclass
class LeaderReport:
    position: int
    per_id: dict
    per_index: dict
    detected: int

    @property
    def uniform(self) -> bool:
        n = len(self.per_index)
        return self.detected == 0 and all(p == Fraction(1, n) for p in self.per_index.values())


def check_leader_uniformity(
    config: RingConfig,
    script: Optional[ForgeScript],
    u: int,
    assignment: Optional[Mapping[int, tuple[int, int]]] = None,
) -> LeaderReport:
    """Leader distribution seen by honest ``u`` as its own random ranges over
    ``Z_n`` with everything else held at ``assignment`` (zeros by default)."""
    if not config.is_honest(u):
        raise ConfigError(f"position {u} is not honest")
    n = config.n
    base = {p: (0, 0) for p in config.honest_positions}
    base.update(assignment or {})
    per_id: dict = {}
    per_index = {i: Fraction(0) for i in range(n)}
    detected = 0
    for r in range(n):
        assign = dict(base)
        assign[u] = (base[u][0], r)
        trace = run_ring(config, coalition_behaviors(config, assign, script))
        d = trace.decisions[u]
        if d.detected:
            detected += 1
            continue
        per_id[d.leader_id] = per_id.get(d.leader_id, Fraction(0)) + Fraction(1, n)
        per_index[d.leader_index] += Fraction(1, n)
    if detected:
        kept = n - detected
        per_id = {k: v * n / kept for k, v in per_id.items()}
        per_index = {k: v * n / kept for k, v in per_index.items()}
    return LeaderReport(u, per_id, per_index, detected)


# --------------------------------------------------- strategy-space sweeps


@dataclass
class SpaceStats:
    """Per-script integer tallies over the universe (``universe`` runs each)."""

    label: str
    universe: int
    success: np.ndarray
    detected: np.ndarray
    decided_one: dict = field(default_factory=dict)       # honest u -> count
    cond_total: dict = field(default_factory=dict)        # leader != u, not detected
    cond_one: dict = field(default_factory=dict)
    self_elected: dict = field(default_factory=dict)      # heads only
    control_violations: dict = field(default_factory=dict)
    leader_split: Optional[np.ndarray] = None             # (scripts, 3): other, first, second

    def utility(self, i: int) -> Fraction:
        return Fraction(int(self.success[i]), self.universe)


def evaluate_space(
    config: RingConfig,
    space: Union[StrategySpace, Sequence[ForgeScript]],
    preferred: int,
    *,
    coalition_inputs: Optional[Mapping[int, int]] = None,
    indices: Optional[np.ndarray] = None,
    limit: Optional[int] = None,
) -> SpaceStats:
    """Exact tallies for every script in ``space`` (or the chosen ``indices``)."""
    limit = max_universe() if limit is None else limit
    honest = config.honest_positions
    heads = config.heads
    U = universe_size(config)
    if isinstance(space, StrategySpace):
        label = space.label
        total = space.size if indices is None else len(indices)
    else:
        label = "scripts"
        scripts = list(space)
        total = len(scripts)
    if total * U > limit:
        raise CapacityError(f"{total} scripts x {U} runs exceeds bound {limit}")
    inputs_u, rands_u = universe_points(config)
    per_chunk = max(1, ROW_CHUNK // U)
    stats = SpaceStats(
        label, U,
        success=np.zeros(total, dtype=np.int64),
        detected=np.zeros(total, dtype=np.int64),
    )
    for name in ("decided_one", "cond_total", "cond_one"):
        setattr(stats, name, {p: np.zeros(total, dtype=np.int64) for p in honest})
    for name in ("self_elected", "control_violations"):
        setattr(stats, name, {p: np.zeros(total, dtype=np.int64) for p in heads})
    if len(honest) == 2:
        stats.leader_split = np.zeros((total, 3), dtype=np.int64)
    head_lie = {p: config.upstream_coalition(p)[1] for p in heads}
    for start in range(0, total, per_chunk):
        stop = min(total, start + per_chunk)
        S = stop - start
        if isinstance(space, StrategySpace):
            idx = np.arange(start, stop) if indices is None else np.asarray(indices[start:stop])
            batch = space.batch(idx)
        else:
            batch = ScriptBatch.from_scripts(scripts[start:stop])
        rows = S * U
        compliant = {
            p: (np.tile(inputs_u[:, j], S), np.tile(rands_u[:, j], S)) for j, p in enumerate(honest)
        }
        res = run_ring_batch(
            config, rows, compliant, script=batch.repeat(U),
            coalition_inputs=coalition_inputs, keep_receipts=bool(heads),
        )
        codes = classify([res.decision[p] for p in honest]).reshape(S, U)
        sl = slice(start, stop)
        stats.success[sl] = np.sum(codes == preferred, axis=1)
        stats.detected[sl] = np.sum(codes == Outcome.ERRONEOUS, axis=1)
        for p in honest:
            d = res.decision[p].reshape(S, U)
            lead = res.leader_id[p].reshape(S, U)
            not_self = (d != DETECTED) & (lead != config.node_ids[p])
            stats.decided_one[p][sl] = np.sum(d == 1, axis=1)
            stats.cond_total[p][sl] = np.sum(not_self, axis=1)
            stats.cond_one[p][sl] = np.sum(not_self & (d == 1), axis=1)
        for p in heads:
            d = res.decision[p]
            m = head_lie[p]
            lie = res.receipts[p][m - 1 : config.n - 1]
            input_l = sum(msg.input for msg in lie)
            selfie = (d != DETECTED) & (res.leader_id[p] == config.node_ids[p])
            bad = selfie & (d != input_l % 2)
            stats.self_elected[p][sl] = np.sum(selfie.reshape(S, U), axis=1)
            stats.control_violations[p][sl] = np.sum(bad.reshape(S, U), axis=1)
        if stats.leader_split is not None:
            a, b = honest
            la, lb = res.leader_id[a].reshape(S, U), res.leader_id[b].reshape(S, U)
            same = (la == lb) & (la != DETECTED)
            ida, idb = config.node_ids[a], config.node_ids[b]
            stats.leader_split[sl, 0] = np.sum(same & (la != ida) & (la != idb), axis=1)
            stats.leader_split[sl, 1] = np.sum(same & (la == ida), axis=1)
            stats.leader_split[sl, 2] = np.sum(same & (la == idb), axis=1)
    return stats


@dataclass
class ConditionalReport:
    conditional: dict          # honest u -> P(u decides 1 | leader != u, no detection)
    unconditional: dict        # honest u with an honest predecessor -> P(u decides 1)
    witness: Optional[dict] = None

    @property
    def passed(self) -> bool:
        half = Fraction(1, 2)
        return all(v == half for v in self.conditional.values()) and all(
            v == half for v in self.unconditional.values()
        )


def _conditional_from_stats(config, stats: SpaceStats, i: int) -> ConditionalReport:
    cond = {}
    for p in config.honest_positions:
        tot = int(stats.cond_total[p][i])
        cond[p] = Fraction(int(stats.cond_one[p][i]), tot) if tot else None
    uncond = {
        p: Fraction(int(stats.decided_one[p][i]), stats.universe)
        for p in config.honest_positions
        if config.is_honest(config.pred(p))
    }
    return ConditionalReport({p: v for p, v in cond.items() if v is not None}, uncond)


def check_conditional_half(config: RingConfig, script: Optional[ForgeScript]) -> ConditionalReport:
    if not config.honest_positions:
        raise ConfigError("needs at least one honest node")
    if script is None:
        honest_only = RingConfig(config.n, config.node_ids, ("honest",) * config.n)
        stats = _honest_stats(honest_only)
        report = _conditional_from_stats(honest_only, stats, 0)
        report.conditional = {p: v for p, v in report.conditional.items() if config.is_honest(p)}
        report.unconditional = {
            p: v for p, v in report.unconditional.items() if config.is_honest(p) and config.is_honest(config.pred(p))
        }
    else:
        script.validate(config)
        stats = evaluate_space(config, [script], preferred=1)
        report = _conditional_from_stats(config, stats, 0)
    if not report.passed:
        report.witness = {"script": None if script is None else script.to_dict()}
    return report


def _honest_stats(config: RingConfig) -> SpaceStats:
    # evaluate_space with an all-honest ring and a dummy one-script batch
    return evaluate_space(config, [ForgeScript(config.n, {})], preferred=1)


# ------------------------------------------------------------ best response


@dataclass
class EquilibriumReport:
    config: RingConfig
    preferred: int
    baseline: Fraction
    best_utility: Fraction
    best_script: Optional[ForgeScript]
    scripts_evaluated: int
    per_space: dict = field(default_factory=dict)     # label -> (max utility, count)
    best_detected: Fraction = Fraction(0)
    best_declaration: Optional[dict] = None

    @property
    def profitable(self) -> bool:
        return self.best_utility > self.baseline

    @property
    def verdict(self) -> str:
        return "ProfitableDeviation" if self.profitable else "NoProfitableDeviation"

    @property
    def witness(self) -> Optional[ForgeScript]:
        return self.best_script if self.profitable else None

    def to_dict(self) -> dict:
        frac = lambda f: [f.numerator, f.denominator]  # noqa: E731
        return {
            "config": self.config.to_dict(),
            "preferred": self.preferred,
            "baseline": frac(self.baseline),
            "best_utility": frac(self.best_utility),
            "best_detected": frac(self.best_detected),
            "best_script": None if self.best_script is None else self.best_script.to_dict(),
            "scripts_evaluated": self.scripts_evaluated,
            "per_space": {k: {"max": frac(v[0]), "scripts": v[1]} for k, v in self.per_space.items()},
            "verdict": self.verdict,
        }


def honest_baseline(config: RingConfig, preferred: int, coalition_inputs=None) -> Fraction:
    dist = exact_distribution(config, None, coalition_inputs=coalition_inputs)
    return coalition_utility(dist, UtilityModel(preferred))


def search_spaces(
    config: RingConfig,
    preferred: int,
    spaces: Sequence[StrategySpace],
    *,
    coalition_inputs: Optional[Mapping[int, int]] = None,
    sample: Optional[Mapping[str, np.ndarray]] = None,
    keep_stats: bool = False,
):
    """Exact utility of every script in ``spaces``; returns the report and,
    when ``keep_stats``, the per-space :class:`SpaceStats`."""
    baseline = honest_baseline(config, preferred, coalition_inputs)
    best, best_script, best_det = Fraction(-1), None, Fraction(0)
    evaluated = 0
    per_space = {}
    all_stats = []
    for space in spaces:
        idx = None if sample is None else sample.get(space.label)
        stats = evaluate_space(config, space, preferred, coalition_inputs=coalition_inputs, indices=idx)
        count = len(stats.success)
        evaluated += count
        if count == 0:
            continue
        i = int(np.argmax(stats.success))
        u = stats.utility(i)
        per_space[space.label] = (u, count)
        if u > best:
            best = u
            best_script = space.script(int(i if idx is None else idx[i]))
            best_det = Fraction(int(stats.detected[i]), stats.universe)
        if keep_stats:
            all_stats.append(stats)
    if best_script is None:
        best = baseline
    report = EquilibriumReport(config, preferred, baseline, best, best_script, evaluated, per_space, best_det)
    return (report, all_stats) if keep_stats else report


def _check_two_honest(config: RingConfig) -> None:
    if len(config.honest_positions) != 2:
        raise ConfigError("best-response search expects exactly two honest nodes")
    if config.n % 2:
        raise ConfigError("the n - 2 coalition claim concerns even ring sizes")


def best_response_search(
    config: RingConfig,
    preferred: int,
    *,
    patterns: Sequence[str] = ID_PATTERNS,
    coalition_inputs: Optional[Mapping[int, int]] = None,
    keep_stats: bool = False,
):
    """Exhaustive search over constant forged streams for an ``n - 2`` coalition."""
    _check_two_honest(config)
    spaces = [fixed_space(config, p) for p in patterns]
    return search_spaces(config, preferred, spaces, coalition_inputs=coalition_inputs, keep_stats=keep_stats)


def adaptive_search(
    config: RingConfig,
    preferred: int,
    *,
    patterns: Sequence[str] = ("fresh", "echo"),
    samples: int = 20000,
    seed: int = 0,
    coalition_inputs: Optional[Mapping[int, int]] = None,
):
    """Bounded search over history-reading policies.

    Covers every symmetric policy (all targets make the same choices) plus
    ``samples`` seeded joint policies per id pattern, and both rigger scripts.
    """
    _check_two_honest(config)
    rng = np.random.default_rng(seed)
    spaces, sample = [], {}
    for p in patterns:
        tied = adaptive_space(config, p, tied=True)
        if len(config.heads) > 1:
            spaces.append(tied)
        joint = adaptive_space(config, p)
        spaces.append(joint)
        if joint.size > samples:
            sample[joint.label] = np.sort(rng.choice(joint.size, size=samples, replace=False))
    report = search_spaces(config, preferred, spaces, coalition_inputs=coalition_inputs, sample=sample)
    for case in (1, 2):
        script = parity_rigger(config, preferred, case=case)
        u = coalition_utility(exact_distribution(config, script), UtilityModel(preferred))
        report.scripts_evaluated += 1
        report.per_space[f"rigger-case{case}"] = (u, 1)
        if u > report.best_utility:
            report.best_utility, report.best_script = u, script
    return report


def declaration_search(
    config: RingConfig,
    preferred: int,
    *,
    coalition_inputs: Optional[Mapping[int, int]] = None,
) -> EquilibriumReport:
    """Best input-cheater deviation: every coalition member runs the protocol
    but may declare either bit.  These spaces nest as the coalition grows."""
    members = config.coalition_positions
    if len(members) > 16:
        raise CapacityError("more than 2^16 declaration profiles")
    coalition_inputs = dict(coalition_inputs or {})
    model = UtilityModel(preferred)
    baseline = honest_baseline(config, preferred, coalition_inputs)
    best, best_decl = Fraction(-1), None
    for bits in range(1 << len(members)):
        declared = {p: (bits >> i) & 1 for i, p in enumerate(members)}
        u = coalition_utility(exact_distribution(config, declared), model)
        if u > best:
            best, best_decl = u, declared
    report = EquilibriumReport(config, preferred, baseline, best, None, 1 << len(members))
    report.per_space["declarations"] = (best, 1 << len(members))
    report.best_declaration = best_decl
    return report


# ------------------------------------------------------------ Monte Carlo


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int

    def within(self, value, k: float = 4.0) -> bool:
        return abs(self.estimate - float(value)) <= k * self.stderr


def monte_carlo(
    config: RingConfig,
    coalition: Coalition,
    samples: int,
    seed: int,
    preferred: int = 1,
    *,
    coalition_inputs: Optional[Mapping[int, int]] = None,
) -> MonteCarloEstimate:
    """Estimate the coalition's success probability from seeded samples."""
    if samples < 1:
        raise ConfigError("samples must be positive")
    rng = np.random.default_rng(seed)
    h = len(config.honest_positions)
    coalition_inputs = dict(coalition_inputs or {})
    if isinstance(coalition, ForgeScript):
        coalition.validate(config)
        base = ScriptBatch.from_scripts([coalition])
    else:
        base = None
    hits = 0
    for start in range(0, samples, ROW_CHUNK):
        rows = min(ROW_CHUNK, samples - start)
        inputs = rng.integers(0, 2, size=(rows, h))
        rands = rng.integers(0, config.n, size=(rows, h))
        compliant = _compliant_rows(config, inputs, rands, coalition, coalition_inputs, rows)
        res = run_ring_batch(
            config, rows, compliant,
            script=None if base is None else base.repeat(rows),
            coalition_inputs=coalition_inputs,
        )
        codes = classify([res.decision[p] for p in config.honest_positions])
        hits += int(np.sum(codes == preferred))
    p = hits / samples
    var = p * (1 - p) * samples / (samples - 1) if samples > 1 else 0.0
    return MonteCarloEstimate(p, float(np.sqrt(var / samples)), samples, seed)


__all__ = [
    "CapacityError",
    "ConditionalReport",
    "EquilibriumReport",
    "FairnessReport",
    "LeaderReport",
    "MonteCarloEstimate",
    "Outcome",
    "OutcomeDistribution",
    "SpaceStats",
    "adaptive_search",
    "best_response_search",
    "check_conditional_half",
    "check_fairness",
    "check_leader_uniformity",
    "coalition_utility",
    "declaration_search",
    "evaluate_space",
    "exact_distribution",
    "honest_baseline",
    "monte_carlo",
    "search_spaces",
    "universe_points",
    "universe_size",
]
