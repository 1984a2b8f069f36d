"""Cut pool: admission filtering, aging, slack-based dropping, persistence.

The warm-start file is UTF-8 JSON lines with a version header; variable
references are symbolic (bus / pair / branch ids), so saved cuts survive model
rebuilds and transfer to load-perturbed instances of the same network.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import CutFileError
from .separation import LinearCut

T_AGE = 5
EPS_SLACK = 1e-5
COSINE_BOUND = 0.999
K_ADD = 5
FILE_HEADER = {"fmt": "cutpool", "v": 1}


@dataclass
class CutPool:
    cuts: dict = field(default_factory=dict)   # content_hash -> LinearCut
    added_per_round: list = field(default_factory=list)
    dropped_per_round: list = field(default_factory=list)

    def __len__(self):
        return len(self.cuts)

    def active(self):
        return list(self.cuts.values())


def _cosine(a: LinearCut, b: LinearCut) -> float:
    keys = set(a.terms) | set(b.terms)
    dot = na = nb = 0.0
    for k in keys:
        x = a.terms.get(k, 0.0)
        y = b.terms.get(k, 0.0)
        dot += x * y
        na += x * x
        nb += y * y
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / math.sqrt(na * nb)


def admit(pool: CutPool, candidates, violation_threshold: float = EPS_SLACK,
          cosine_bound: float = COSINE_BOUND, k_add: int = K_ADD):
    """Filter candidates into the pool; returns the admitted list.

    Rejects duplicates by hash, near-parallel cuts on the same variable
    support, and sub-threshold violations; admits by decreasing violation,
    at most `k_add` per provenance group per call.

    The parallelism check runs only within the current batch.  Checking
    against the whole pool can deadlock the loop: a refined cut is almost
    parallel to the stale one it should replace, so nothing gets admitted
    while a real violation persists.  Aging retires the stale copy instead.
    """
    by_support: dict[frozenset, list] = {}
    admitted = []
    per_group: dict[tuple, int] = {}
    ordered = sorted(candidates, key=lambda c: -c.violation_at_birth)
    for cut in ordered:
        if cut.violation_at_birth / cut.inf_norm < violation_threshold:
            continue
        if cut.content_hash in pool.cuts:
            continue
        group = cut.provenance
        if per_group.get(group, 0) >= k_add:
            continue
        support = frozenset(cut.terms)
        if any(abs(_cosine(cut, other)) > cosine_bound
               for other in by_support.get(support, [])):
            continue
        pool.cuts[cut.content_hash] = cut
        by_support.setdefault(support, []).append(cut)
        per_group[group] = per_group.get(group, 0) + 1
        admitted.append(cut)
    return admitted


def age_and_drop(pool: CutPool, slacks: dict, t_age: int = T_AGE,
                 eps_slack: float = EPS_SLACK):
    """Reset age on tight cuts, age the rest, drop old consistently-slack ones.

    `slacks` maps content hash to the cut's normalized slack at the current
    solution.  Returns the list of dropped cuts.
    """
    dropped = []
    for h, cut in list(pool.cuts.items()):
        slack = slacks.get(h, 0.0)
        if slack < eps_slack:
            cut.age = 0
            continue
        cut.age += 1
        if cut.age >= t_age:
            dropped.append(cut)
            del pool.cuts[h]
    return dropped


# -- persistence ----------------------------------------------------------


def _key_to_json(key):
    return list(key) if isinstance(key, tuple) else key


def _key_from_json(raw):
    if isinstance(raw, list):
        return tuple(_key_from_json(v) for v in raw)
    return raw


def save_cuts(pool: CutPool, stream):
    """Write the pool as JSON lines; one record per cut."""
    stream.write(json.dumps(FILE_HEADER) + "\n")
    for cut in sorted(pool.active(), key=lambda c: c.content_hash):
        rec = {
            "kind": cut.kind,
            "support": _key_to_json(cut.provenance),
            "terms": [[_key_to_json(k), w] for k, w in
                      sorted(cut.terms.items(), key=lambda kv: repr(kv[0]))],
            "rhs": cut.rhs,
        }
        stream.write(json.dumps(rec) + "\n")


def load_cuts(stream, model) -> tuple[CutPool, int]:
    """Read a cut file; returns (pool, skipped count).

    Cuts referencing variables absent from `model` are skipped; ages reset.
    """
    pool = CutPool()
    skipped = 0
    first = stream.readline()
    try:
        header = json.loads(first)
    except json.JSONDecodeError:
        raise CutFileError("missing or malformed cut file header", record=0)
    if header.get("fmt") != "cutpool" or header.get("v") != 1:
        raise CutFileError("unsupported cut file header %r" % (header,),
                           record=0)
    for num, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            terms = {_key_from_json(k): float(w) for k, w in rec["terms"]}
            cut = LinearCut(terms=terms, rhs=float(rec["rhs"]),
                            kind=rec["kind"],
                            provenance=_key_from_json(rec["support"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            raise CutFileError(
                "malformed cut record %d (last good record %d)"
                % (num, num - 1), record=num)
        if not model.has_variables(cut.terms):
            skipped += 1
            continue
        pool.cuts[cut.content_hash] = cut
    return pool, skipped
