"""Cutting-plane orchestration: solve-separate-manage rounds with escalation.

Each round solves the LP master, separates Jabr / limit / cost tangents and
clique PSD cuts, admits and ages cuts, and tracks a stall counter on relative
objective improvement.  After the hierarchy round the clique set is augmented once with
chordal cliques.  Every
round's LP optimum is a valid ACOPF lower bound, so the best bound is the
maximum over rounds (dropping cuts can make the per-round objective
non-monotone).
"""

from __future__ import annotations

import csv as csv_mod
import io
import math
import time
from dataclasses import dataclass, field

from . import cut_manager, separation
from .case_io import CaseData
from .cut_manager import CutPool, admit, age_and_drop
from .errors import ModelError
from .hermitian import eigen
from .lp_backend import get_backend
from .network import (PairGraph, branch_admittance, chordal_cliques,
                      enumerate_three_cycles)
from .relaxation import build_m0

EIG_RATIO_FLOOR = 1e-12


@dataclass
class RunConfig:
    time_limit: float = 1200.0
    stall_limit: int = 5            # rounds without sufficient improvement
    improve_tol: float = 1e-5       # relative objective improvement
    hierarchy_round: int = 5        # round after which cliques escalate
    max_clique_size: int = 5
    t_age: int = cut_manager.T_AGE
    eps_slack: float = cut_manager.EPS_SLACK
    violation_threshold: float = separation.VIOLATION_THRESHOLD
    cosine_bound: float = cut_manager.COSINE_BOUND
    k_add: int = cut_manager.K_ADD
    psd_tol: float = separation.PSD_TOL
    density_cap: int = separation.DENSITY_CAP
    feasibility_tol: float = 1e-6
    lp_backend: str = "highs"
    c_nonneg: bool = False
    seed: int = 0
    max_rounds: int | None = None

    def __post_init__(self):
        if self.time_limit < 0 or self.stall_limit < 1 or self.improve_tol <= 0:
            raise ValueError("nonpositive run limits")
        if self.hierarchy_round < 1:
            raise ValueError("hierarchy_round must be >= 1")
        if self.max_clique_size not in (3, 4, 5):
            raise ValueError("max_clique_size must be 3, 4 or 5")


@dataclass
class RoundStats:
    index: int
    objective: float
    cuts_added: int
    cuts_dropped: int
    wall_time: float
    trusted: bool = True     # primal verified feasible
    bound: float = -math.inf  # certified lower bound credited to this round


@dataclass
class RunReport:
    case_name: str
    rounds: list = field(default_factory=list)
    best_bound: float = -math.inf
    clique_counts: tuple = (0, 0, 0)        # initial 3-cycle census
    final_clique_counts: tuple = (0, 0, 0)  # census after any escalation
    eig_ratio: float = math.inf
    dual_inf: float | None = None
    termination: str = ""
    total_time: float = 0.0
    active_cuts: int = 0
    warm_started: bool = False
    pool: CutPool | None = None

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    def rounds_to_reach(self, bound: float):
        """1-based round index whose objective first reaches `bound`, or None."""
        for st in self.rounds:
            if st.objective >= bound:
                return st.index + 1
        return None


def cutplane(case: CaseData, config: RunConfig | None = None,
             warm: CutPool | None = None) -> RunReport:
    """Run the cutting-plane lower-bounding loop on a parsed case."""
    config = config or RunConfig()
    t_start = time.perf_counter()

    pairs = PairGraph.from_case(case)
    adm = {idx: branch_admittance(br)
           for idx, br in enumerate(case.branches) if br.status}
    cliques = enumerate_three_cycles(pairs)
    backend = get_backend(config.lp_backend,
                          feasibility_tol=config.feasibility_tol,
                          optimality_tol=config.feasibility_tol)
    model = build_m0(case, adm=adm, pairs=pairs, backend=backend,
                     c_nonneg=config.c_nonneg)

    pool = CutPool()
    report = RunReport(case_name=case.name, warm_started=warm is not None,
                       clique_counts=cliques.sizes())
    if warm is not None:
        for h, cut in sorted(warm.cuts.items()):
            if h in pool.cuts or not model.has_variables(cut.terms):
                continue
            cut.age = 0
            pool.cuts[h] = cut
            model.add_cut_row(h, cut.terms, cut.rhs)

    stall = 0
    z_prev = -math.inf
    escalated = False
    termination = None

    while True:
        res = model.solve()
        if res.status == "infeasible":
            raise ModelError(
                "master LP infeasible; the base relaxation is feasible for "
                "any feasible ACOPF instance, so the case data is suspect")
        if res.status != "optimal":
            termination = "backend_" + res.status
            break
        z = res.objective
        round_idx = len(report.rounds)
        trusted = res.primal_residual <= 10.0 * config.feasibility_tol
        # the primal objective of a mis-solved LP can overshoot the true
        # minimum, so the round is credited with the certified dual bound
        if res.dual_infeasibility is not None and math.isfinite(res.dual_bound) \
                and res.dual_infeasibility <= 10.0 * config.feasibility_tol:
            bound = res.dual_bound
        else:
            bound = z if trusted else -math.inf
        report.rounds.append(RoundStats(
            index=round_idx, objective=z, cuts_added=0, cuts_dropped=0,
            wall_time=time.perf_counter() - t_start, trusted=trusted,
            bound=bound))

        if time.perf_counter() - t_start >= config.time_limit:
            termination = "time"
            break
        if stall >= config.stall_limit:
            termination = "stall"
            break
        if config.max_rounds is not None and round_idx + 1 >= config.max_rounds:
            termination = "rounds"
            break

        candidates = _separate(model, cliques, config, round_idx)
        admitted = admit(pool, candidates,
                         violation_threshold=config.violation_threshold,
                         cosine_bound=config.cosine_bound,
                         k_add=config.k_add)
        for cut in admitted:
            model.add_cut_row(cut.content_hash, cut.terms, cut.rhs)

        new_hashes = {c.content_hash for c in admitted}
        slacks = {}
        for h, cut in pool.cuts.items():
            if h in new_hashes:
                slacks[h] = 0.0  # newly violated cuts are tight by definition
            else:
                slacks[h] = -cut.normalized_violation(
                    _value_view(model, cut.terms))
        dropped = age_and_drop(pool, slacks, t_age=config.t_age,
                               eps_slack=config.eps_slack)
        for cut in dropped:
            model.remove_cut_row(cut.content_hash)

        report.rounds[-1].cuts_added = len(admitted)
        report.rounds[-1].cuts_dropped = len(dropped)
        pool.added_per_round.append(len(admitted))
        pool.dropped_per_round.append(len(dropped))

        just_escalated = False
        if not escalated and round_idx + 1 >= config.hierarchy_round:
            extra = chordal_cliques(pairs, config.max_clique_size)
            model.extend_pairs(pairs.auxiliary_pairs)
            cliques = cliques.merged_with(extra)
            escalated = True
            just_escalated = True

        if not admitted and not just_escalated and escalated:
            termination = "no_cuts"
            break

        improved = (z - z_prev) >= config.improve_tol * abs(z_prev) \
            if math.isfinite(z_prev) else True
        stall = 0 if improved else stall + 1
        z_prev = z

    report.termination = termination
    report.best_bound = max((st.bound for st in report.rounds),
                            default=-math.inf)
    report.total_time = time.perf_counter() - t_start
    report.active_cuts = len(pool)
    report.final_clique_counts = cliques.sizes()
    report.dual_inf = model.last_result.dual_infeasibility \
        if model.last_result else None
    report.eig_ratio = _final_eig_ratio(model, cliques)
    report.pool = pool
    return report


def _value_view(model, terms):
    return {k: model.value(k) for k in terms}


def _separate(model, cliques, config: RunConfig, round_idx: int):
    case = model.case
    candidates = []

    for pair in model.pairs.all_pairs():
        ckey = ("c",) + pair
        if ckey not in model.var_index:
            continue
        cut = separation.jabr_cut(
            model.value(("v2", pair[0])), model.value(("v2", pair[1])),
            model.value(ckey), model.value(("s",) + pair), pair,
            birth_round=round_idx, tol=config.psd_tol)
        if cut is not None:
            candidates.append(cut)

    for idx, bkey in model.branch_keys.items():
        u = case.branches[idx].rate_a
        if u is None:
            continue
        for d in ("f", "t"):
            cut = separation.limit_cut(
                model.value(("P", bkey, d)), model.value(("Q", bkey, d)),
                u, (bkey, d), birth_round=round_idx)
            if cut is not None:
                candidates.append(cut)

    for idx, gkey in model.gen_keys.items():
        gen = case.generators[idx]
        cut = separation.cost_cut(
            model.value(("Pg", gkey)), model.value(("t", gkey)),
            gen, gkey, birth_round=round_idx)
        if cut is not None:
            candidates.append(cut)

    # hook for i2-family separators; intentionally inert
    for extra in _EXTRA_SEPARATORS:
        candidates.extend(extra(model, round_idx))

    for clique in cliques.cliques:
        x0 = model.clique_matrix(clique)
        dec = eigen(x0)
        cut = separation.eigen_cut(
            x0, clique, birth_round=round_idx, tol=config.psd_tol,
            density_cap=config.density_cap, decomposition=dec)
        if cut is not None:
            candidates.append(cut)
        neg = sum(1 for lam in dec.eigenvalues
                  if lam < -config.psd_tol * max(1.0, x0.trace()))
        if neg == 2:  # single-negative case is collinear with the eigen-cut
            pcut = separation.projection_cut(
                x0, clique, birth_round=round_idx, tol=config.psd_tol,
                density_cap=config.density_cap, decomposition=dec)
            if pcut is not None:
                candidates.append(pcut)
    return candidates


_EXTRA_SEPARATORS: list = []


def register_separator(fn):
    """Register an additional separator fn(model, round) -> list of cuts."""
    _EXTRA_SEPARATORS.append(fn)
    return fn


def _final_eig_ratio(model, cliques) -> float:
    ratio = math.inf
    if model.last_result is None or model.last_result.primal is None:
        return ratio
    for clique in cliques.cliques:
        try:
            dec = eigen(model.clique_matrix(clique))
        except ModelError:
            continue
        l1 = dec.eigenvalues[0]
        l2 = max(dec.eigenvalues[1], EIG_RATIO_FLOOR)
        ratio = min(ratio, l1 / l2)
    return ratio


# -- reporting ------------------------------------------------------------

_COLUMNS = ("Case", "Objective", "#Cliques", "DInf", "EigRatio",
            "Time", "Added", "Reason")


def _report_row(r: RunReport):
    return (
        r.case_name,
        "%.2f" % r.best_bound,
        "(%d,%d,%d)" % r.clique_counts,
        "%.2e" % r.dual_inf if r.dual_inf is not None else "-",
        "%.1f" % r.eig_ratio if math.isfinite(r.eig_ratio) else "inf",
        "%.2f" % r.total_time,
        str(r.active_cuts),
        r.termination,
    )


def report_table(reports, csv: bool = False) -> str:
    """Aligned-text or RFC-4180 CSV summary, one row per run."""
    rows = [_report_row(r) for r in reports]
    if csv:
        buf = io.StringIO()
        writer = csv_mod.writer(buf, quoting=csv_mod.QUOTE_MINIMAL,
                                lineterminator="\n")
        writer.writerow(_COLUMNS)
        writer.writerows(rows)
        return buf.getvalue()
    widths = [max(len(c), *(len(row[i]) for row in rows)) if rows else len(c)
              for i, c in enumerate(_COLUMNS)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(_COLUMNS, widths)).rstrip()]
    for row in rows:
        lines.append("  ".join(c.ljust(w)
                               for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
