"""Command-line front end: ``rrl simulate`` and ``rrl verify``.

Exit codes: 0 all selected checks pass, 1 a claim failed (witness rows are
written), 2 configuration error, 3 capacity bound exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from fractions import Fraction
from typing import Optional

import jsonschema
import numpy as np

from . import analysis, impossibility
from .adversary import ID_PATTERNS, UtilityModel, coalition_behaviors, fixed_space, parity_rigger, random_scripts
from .protocol import ConfigError
from .ring_sim import RingConfig, run_ring

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_CAPACITY = 0, 1, 2, 3

CHECKS = (
    "fairness",
    "uniformity",
    "conditional",
    "full-control",
    "best-response",
    "impossibility",
    "uniqueness",
    "monte-carlo",
)

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["seed"],
    "properties": {
        "command": {"enum": ["simulate", "verify"]},
        "n": {"type": "integer", "minimum": 2},
        "node_ids": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "honest": {
            "oneOf": [
                {"enum": ["all", "adjacent", "nonadjacent"]},
                {"type": "array", "items": {"type": "integer", "minimum": 0}},
            ]
        },
        "preferred": {"enum": [0, 1]},
        "rigger": {"enum": ["none", "case1", "case2"]},
        "samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "checks": {"type": "array", "items": {"enum": list(CHECKS)}},
        "out": {"type": "string"},
        "format": {"enum": ["csv", "json"]},
    },
}

DEFAULTS = {
    "n": 4,
    "preferred": 1,
    "rigger": "none",
    "seed": 0,
    "format": "json",
}


def frac(f: Fraction) -> list[int]:
    return [f.numerator, f.denominator]


def resolve_honest(n: int, placement) -> list[int]:
    if placement is None or placement == "all" or placement == ["all"]:
        return list(range(n))
    if isinstance(placement, list) and len(placement) == 1 and isinstance(placement[0], str) and not placement[0].isdigit():
        placement = placement[0]
    if placement == "adjacent":
        if n < 3:
            raise ConfigError("adjacent placement needs n >= 3")
        return [n - 2, n - 1]
    if placement == "nonadjacent":
        if n < 4:
            raise ConfigError("non-adjacent placement needs n >= 4")
        return [1, 3]
    try:
        return sorted({int(p) for p in placement})
    except (TypeError, ValueError):
        raise ConfigError(f"bad honest placement {placement!r}") from None


def build_config(cfg: dict) -> RingConfig:
    n = cfg["n"]
    return RingConfig.build(n, resolve_honest(n, cfg.get("honest")), cfg.get("node_ids"))


def coalition_for(config: RingConfig, cfg: dict):
    rigger = cfg.get("rigger", "none")
    if rigger == "none" or not config.coalition_positions:
        return None
    return parity_rigger(config, cfg["preferred"], case=1 if rigger == "case1" else 2)


def atomic_write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".rrl-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------- checks


def _row(check, passed, **fields):
    out = {"check": check, "pass": bool(passed)}
    out.update(fields)
    return out


def run_fairness(cfg):
    r = analysis.check_fairness(cfg["n"])
    return [
        _row(
            "fairness", r.passed, n=r.n, p_one=frac(r.p_one), p_zero=frac(r.p_zero),
            agreement_violations=r.agreement_violations,
            validity_violations=r.validity_violations, witness=r.witness,
        )
    ]


def run_uniformity(cfg):
    config = build_config(cfg)
    count = cfg.get("samples") or 100
    scripts = random_scripts(config, count, cfg["seed"]) if config.heads else [None]
    rows = []
    for script in scripts:
        for u in config.honest_positions:
            r = analysis.check_leader_uniformity(config, script, u)
            rows.append(
                _row(
                    "uniformity", r.uniform, position=u,
                    script=None if script is None else script.digest,
                    per_index={str(k): frac(v) for k, v in r.per_index.items()},
                    detected=r.detected,
                    witness=None if r.uniform or script is None else script.to_dict(),
                )
            )
    return rows


def _space_stats(cfg):
    config = build_config(cfg)
    report, stats = analysis.best_response_search(config, cfg["preferred"], keep_stats=True)
    return config, report, stats


def run_conditional(cfg):
    config, _, stats = _space_stats(cfg)
    rows = []
    for st in stats:
        for u in config.honest_positions:
            tot, one = st.cond_total[u], st.cond_one[u]
            bad = np.flatnonzero((tot > 0) & (2 * one != tot))
            row = dict(space=st.label, position=u, scripts=len(tot), undefined=int(np.sum(tot == 0)),
                       violations=len(bad), kind="leader-not-self")
            rows.append(_row("conditional", len(bad) == 0, **row))
            if config.is_honest(config.pred(u)):
                bad_u = np.flatnonzero(2 * st.decided_one[u] != st.universe)
                rows.append(_row("conditional", len(bad_u) == 0, space=st.label, position=u,
                                 scripts=len(tot), violations=len(bad_u), kind="unconditional"))
    return rows


def run_full_control(cfg):
    config, _, stats = _space_stats(cfg)
    rows = []
    for st in stats:
        for u in config.heads:
            v = int(st.control_violations[u].sum())
            rows.append(_row("full-control", v == 0, space=st.label, position=u,
                             self_elected_traces=int(st.self_elected[u].sum()), violations=v))
    return rows


def run_best_response(cfg, per_strategy: bool):
    config = build_config(cfg)
    if per_strategy:
        report, stats = analysis.best_response_search(config, cfg["preferred"], keep_stats=True)
    else:
        report = analysis.best_response_search(config, cfg["preferred"])
    d = report.to_dict()
    summary = _row(
        "best-response", not report.profitable, baseline=d["baseline"], max=d["best_utility"],
        verdict=d["verdict"], scripts=d["scripts_evaluated"],
        best_script=None if report.best_script is None else report.best_script.digest,
        witness=d["best_script"] if report.profitable else None,
    )
    if not per_strategy:
        return [summary]
    rows = [summary]
    spaces = {s.label: s for s in (fixed_space(config, p) for p in ID_PATTERNS)}
    for st in stats:
        space = spaces[st.label]
        for i in range(len(st.success)):
            u = st.utility(i)
            rows.append(
                {
                    "check": "best-response-strategy",
                    "space": st.label,
                    "digest": space.script(i).digest,
                    "utility_num": u.numerator,
                    "utility_den": u.denominator,
                    "detected": frac(Fraction(int(st.detected[i]), st.universe)),
                }
            )
    return rows


def run_impossibility(cfg):
    n = cfg["n"]
    if n % 2:
        raise ConfigError("the impossibility claim concerns even n; use --check uniqueness for odd n")
    derived = impossibility.derive_constraints(n)
    ok = isinstance(derived, impossibility.Contradiction)
    row = dict(n=n, derivation=derived.to_dict())
    if n <= impossibility.BRUTEFORCE_MAX_N:
        survivors = impossibility.equilibrium_functions_bruteforce(n)
        ok = ok and not survivors
        row["survivors"] = len(survivors)
        row["functions"] = json.loads(impossibility.results_to_json(survivors))
    return [_row("impossibility", ok, **row)]


def run_uniqueness(cfg):
    n = cfg["n"]
    if n % 2 == 0:
        raise ConfigError("uniqueness concerns odd n; use --check impossibility for even n")
    derived = impossibility.derive_constraints(n)
    xor = impossibility.ConsensusFunction.xor(n)
    ok = isinstance(derived, impossibility.UniqueFunction) and derived.function == xor
    row = dict(n=n, derivation=derived.to_dict())
    if n <= impossibility.BRUTEFORCE_MAX_N:
        survivors = impossibility.equilibrium_functions_bruteforce(n)
        ok = ok and survivors == {xor}
        row["survivors"] = len(survivors)
        row["functions"] = json.loads(impossibility.results_to_json(survivors))
    return [_row("uniqueness", ok, **row)]


def run_monte_carlo(cfg):
    config = build_config(cfg)
    coalition = coalition_for(config, cfg)
    samples = cfg.get("samples") or 100_000
    est = analysis.monte_carlo(config, coalition, samples, cfg["seed"], cfg["preferred"])
    try:
        dist = analysis.exact_distribution(config, coalition)
        expected = analysis.coalition_utility(dist, UtilityModel(cfg["preferred"]))
        source = "exact"
    except analysis.CapacityError:
        if coalition is None and config.n % 2 == 0:
            expected, source = Fraction(1, 2), "fair-coin"
        else:
            expected, source = None, "none"
    ok = expected is None or est.within(expected)
    return [
        _row(
            "monte-carlo", ok, estimate=est.estimate, stderr=est.stderr, samples=est.samples,
            seed=est.seed, expected=None if expected is None else frac(expected), oracle=source,
        )
    ]


# ------------------------------------------------------------------ output


def _flatten(value):
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return value


def render(rows: list[dict], fmt: str, resolved: dict, passed: bool) -> str:
    if fmt == "json":
        return json.dumps({"config": resolved, "passed": passed, "results": rows}, sort_keys=True, indent=2) + "\n"
    columns: list[str] = []
    for r in rows:
        for k in r:
            if k not in columns:
                columns.append(k)
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(resolved, sort_keys=True) + "\n")
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _flatten(r.get(k)) for k in columns})
    return buf.getvalue()


# --------------------------------------------------------------- commands


def cmd_simulate(cfg: dict) -> int:
    config = build_config(cfg)
    rng = np.random.default_rng(cfg["seed"])
    honest = {
        p: (int(rng.integers(0, 2)), int(rng.integers(0, config.n))) for p in config.honest_positions
    }
    trace = run_ring(config, coalition_behaviors(config, honest, coalition_for(config, cfg)))
    payload = {"config": _resolved(cfg), "trace": trace.to_dict()}
    atomic_write(cfg.get("out"), json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return EXIT_PASS


def cmd_verify(cfg: dict) -> int:
    checks = cfg.get("checks") or []
    if not checks:
        raise ConfigError("verify needs at least one --check")
    rows: list[dict] = []
    for check in checks:
        if check == "fairness":
            rows += run_fairness(cfg)
        elif check == "uniformity":
            rows += run_uniformity(cfg)
        elif check == "conditional":
            rows += run_conditional(cfg)
        elif check == "full-control":
            rows += run_full_control(cfg)
        elif check == "best-response":
            rows += run_best_response(cfg, per_strategy=cfg["format"] == "csv")
        elif check == "impossibility":
            rows += run_impossibility(cfg)
        elif check == "uniqueness":
            rows += run_uniqueness(cfg)
        elif check == "monte-carlo":
            rows += run_monte_carlo(cfg)
    passed = all(r["pass"] for r in rows if "pass" in r)
    atomic_write(cfg.get("out"), render(rows, cfg["format"], _resolved(cfg), passed))
    return EXIT_PASS if passed else EXIT_FAIL


def _resolved(cfg: dict) -> dict:
    out = {k: v for k, v in cfg.items() if v is not None and k != "out"}
    if "n" in cfg:
        config = build_config(cfg)
        out["ring"] = config.to_dict()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rrl", description="Rational ring consensus laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment file (schema-validated, must name a seed)")
        p.add_argument("--n", type=int)
        p.add_argument("--ids", type=int, nargs="+", dest="node_ids", help="node ids in ring order")
        p.add_argument("--honest", nargs="+", help="all | adjacent | nonadjacent | positions...")
        p.add_argument("--preferred", type=int, choices=(0, 1))
        p.add_argument("--rigger", choices=("none", "case1", "case2"))
        p.add_argument("--seed", type=int, help=f"generator seed (default {DEFAULTS['seed']}, always recorded)")
        p.add_argument("--out")

    sim = sub.add_parser("simulate", help="run one seeded ring execution and write its trace")
    common(sim)
    ver = sub.add_parser("verify", help="run exact or sampled checks")
    common(ver)
    ver.add_argument("--check", action="append", dest="checks", choices=CHECKS)
    ver.add_argument("--samples", type=int)
    ver.add_argument("--format", choices=("csv", "json"))
    return parser


def merge_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config rejected: {exc.message}") from None
        cfg.update(data)
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        if key == "honest" and len(value) == 1 and not value[0].isdigit():
            value = value[0]
        cfg[key] = value
    for key, value in DEFAULTS.items():
        cfg.setdefault(key, value)
    cfg["command"] = args.command
    if cfg.get("samples") is not None and cfg["samples"] < 1:
        raise ConfigError("samples must be positive")
    if isinstance(cfg.get("honest"), list):
        cfg["honest"] = [int(p) for p in cfg["honest"]]
    build_config(cfg)  # structural validation up front
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = merge_config(args)
        if cfg["command"] == "simulate":
            return cmd_simulate(cfg)
        return cmd_verify(cfg)
    except analysis.CapacityError as exc:
        print(f"rrl: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ConfigError as exc:
        print(f"rrl: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
