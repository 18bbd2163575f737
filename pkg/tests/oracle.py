"""Stand-alone reference simulator used only by the tests.

Written from the protocol rules directly, sharing no code with the package:
plain tuples, a list of inboxes, and pinned slots resolved from the known
true triplets rather than from coalition memory.
"""
from fractions import Fraction
from itertools import product

X = "X"  # detected


def decide(n, own, receipts):
    """Decision of one honest node given its own triplet and n-1 receipts."""
    view = [own] + list(receipts)
    ids = sorted(view, key=lambda t: t[0])
    if len({t[0] for t in view}) != n:
        return X, None
    idx = sum(t[2] for t in view) % n
    leader = ids[idx]
    return (sum(t[1] for t in view) + leader[1]) % 2, leader[0]


def _forged(slot, last, truth):
    if isinstance(slot, list):
        return tuple(slot)
    if "pinned" in slot:
        return truth[slot["pinned"]]
    a = slot["adaptive"]
    needs = a["id"] is None or a["random"] is None or a["input"] in ("last", "flip")
    if last is None:
        return None if needs else (a["id"], a["input"], a["random"])
    inp = a["input"]
    if inp == "last":
        inp = last[1]
    elif inp == "flip":
        inp = 1 - last[1] if last[1] in (0, 1) else last[1]
    return (
        last[0] if a["id"] is None else a["id"],
        inp,
        last[2] if a["random"] is None else a["random"],
    )


def run(n, ids, honest, assign, script=None, coalition_inputs=None):
    """``assign``: pos -> (input, random) for honest positions; ``script`` in
    ForgeScript JSON form ({"targets": {...}}).  Returns pos -> (decision, leader_id)."""
    coalition_inputs = coalition_inputs or {}
    truth = {}
    for p in range(n):
        if p in honest:
            truth[p] = (ids[p], assign[p][0], assign[p][1])
        else:
            truth[p] = (ids[p], coalition_inputs.get(p, 0), 0)
    targets = {} if script is None else {int(k): v for k, v in script["targets"].items()}
    last = [None] * n
    silent = [False] * n
    receipts = [[] for _ in range(n)]
    out = {}
    for rnd in range(1, n + 1):
        msgs = []
        for p in range(n):
            succ = (p + 1) % n
            if p in honest:
                m = None if silent[p] else (truth[p] if rnd == 1 else last[p])
            elif script is not None and succ in honest:
                m = truth[succ] if rnd == n else _forged(targets[succ][rnd - 1], last[p], truth)
            else:
                m = truth[p] if rnd == 1 else last[p]
            msgs.append(m)
        for p in range(n):
            m = msgs[(p - 1) % n]
            if p in honest and not silent[p]:
                if rnd < n:
                    if m is None or m[1] not in (0, 1):
                        silent[p] = True
                        m = None
                    else:
                        receipts[p].append(m)
                elif m != truth[p]:
                    silent[p] = True
            last[p] = m
    for p in honest:
        out[p] = (X, None) if silent[p] else decide(n, truth[p], receipts[p])
    return out


def exact_utility(n, ids, honest, script, preferred, coalition_inputs=None):
    """Probability that every honest node decides ``preferred``."""
    honest = sorted(honest)
    hits = total = 0
    for inputs in product((0, 1), repeat=len(honest)):
        for rands in product(range(n), repeat=len(honest)):
            assign = {p: (inputs[j], rands[j]) for j, p in enumerate(honest)}
            dec = run(n, ids, set(honest), assign, script, coalition_inputs)
            total += 1
            hits += all(d == preferred for d, _ in dec.values())
    return Fraction(hits, total)
