"""Cross-session aggregation: matrices, rank tests, consistency, summaries.

Grouping mirrors the two analyses the protocol supports:

* ``shading``    - restrict scoring to pairs whose two stimuli share a
  shading mode (within-class comparisons), one subgroup per mode.
* ``confidence`` - split participants into high confidence (<= 4) and low
  confidence (>= 5) clusters and analyse each cluster over all pairs.

Quality enters correlations as its ordinal rank within the ladder (1 =
coarsest), which is scale-free and makes a noiseless quality-monotone
judge correlate exactly 1.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import dataclass, field

from ..errors import AggregationError, DataError, DegenerateInputError
from ..protocol.design import design_to_dict
from ..protocol.session import (
    Phase,
    QuestionnaireResponse,
    SessionState,
    pair_outcome,
    repetition_count,
    session_duration,
    session_outcomes,
)
from .hypotests import TestResult, kruskal_wallis, pearson, ranksum_z, wilcoxon_signed_rank
from .preference import PreferenceMatrix, circular_triads, preference_matrix, tournament_from_matrix

HIGH_CONFIDENCE_MAX = 4  # 1..4 -> HC, 5..10 -> LC


def cluster_confidence(responses: list[QuestionnaireResponse]) -> dict[str, list[QuestionnaireResponse]]:
    """Partition questionnaire responses into HC (<= 4) and LC (>= 5)."""
    clusters: dict[str, list[QuestionnaireResponse]] = {"HC": [], "LC": []}
    for response in responses:
        if not 1 <= response.confidence <= 10:
            raise DataError(f"confidence {response.confidence} outside 1..10")
        key = "HC" if response.confidence <= HIGH_CONFIDENCE_MAX else "LC"
        clusters[key].append(response)
    return clusters


def _subset_outcomes(state: SessionState, subset: set[str]) -> list:
    """Recount per-pair choices over the subset's complete sub-pairing."""
    from ..protocol.session import PairOutcome

    counts: dict[tuple[str, str], list[int]] = {}
    for pair in state.design.pairs:
        if pair[0] in subset and pair[1] in subset:
            counts[pair] = [0, 0]
    for record in state.history:
        pair = record.presentation.pair
        if pair in counts:
            counts[pair][0 if record.chosen_id == pair[0] else 1] += 1
    outcomes = []
    for pair, (t_a, t_b) in counts.items():
        pair_outcome(t_a, t_b)
        outcomes.append(PairOutcome(pair=pair, t_a=t_a, t_b=t_b))
    return outcomes


def _quality_ranks(qualities: list[int]) -> dict[int, int]:
    return {q: i + 1 for i, q in enumerate(sorted(set(qualities)))}


def _try(test, *args, **kwargs) -> TestResult | None:
    try:
        return test(*args, **kwargs)
    except (DegenerateInputError, ValueError):
        return None


def _summary(values: list[float]) -> dict | None:
    if not values:
        return None
    return {
        "n": len(values),
        "mean": statistics.fmean(values),
        "sd": statistics.stdev(values) if len(values) > 1 else 0.0,
        "min": min(values),
        "max": max(values),
    }


@dataclass
class GroupReport:
    label: str
    session_count: int
    stimulus_ids: list[str]
    mean_matrix: list[list[float]] | None = None
    mean_totals: dict[str, float] | None = None
    per_session_totals: dict[str, dict[str, float]] | None = None
    quality_preference_pearson: TestResult | None = None
    quality_ranksum: dict[str, TestResult] = field(default_factory=dict)
    quality_kruskal_wallis: TestResult | None = None
    shading_wilcoxon: TestResult | None = None
    between_shading_mean_ps: dict[str, float] | None = None
    realism_wilcoxon: TestResult | None = None
    triad_counts: list[int] = field(default_factory=list)
    zetas: list[float] = field(default_factory=list)
    duration_summary: dict | None = None
    repetition_rates: list[float] = field(default_factory=list)
    confidence_values: list[int] = field(default_factory=list)
    realism_most: list[int] = field(default_factory=list)
    realism_least: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        def tr(result: TestResult | None):
            return result.to_dict() if result else None

        return {
            "label": self.label,
            "session_count": self.session_count,
            "stimulus_ids": self.stimulus_ids,
            "mean_matrix": self.mean_matrix,
            "mean_totals": self.mean_totals,
            "per_session_totals": self.per_session_totals,
            "quality_preference_pearson": tr(self.quality_preference_pearson),
            "quality_ranksum": {k: tr(v) for k, v in sorted(self.quality_ranksum.items())},
            "quality_kruskal_wallis": tr(self.quality_kruskal_wallis),
            "shading_wilcoxon": tr(self.shading_wilcoxon),
            "between_shading_mean_ps": self.between_shading_mean_ps,
            "realism_wilcoxon": tr(self.realism_wilcoxon),
            "triad_counts": self.triad_counts,
            "zetas": self.zetas,
            "mean_zeta": statistics.fmean(self.zetas) if self.zetas else None,
            "duration_summary": self.duration_summary,
            "repetition_rates": self.repetition_rates,
            "mean_repetition_rate": (
                statistics.fmean(self.repetition_rates) if self.repetition_rates else None
            ),
            "confidence_values": self.confidence_values,
            "realism_most": self.realism_most,
            "realism_least": self.realism_least,
        }


@dataclass
class SessionReport:
    design: dict
    group_by: str | None
    session_ids: list[str]
    groups: dict[str, GroupReport]

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "group_by": self.group_by,
            "session_count": len(self.session_ids),
            "session_ids": self.session_ids,
            "groups": {label: g.to_dict() for label, g in sorted(self.groups.items())},
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"),
                          allow_nan=False).encode("utf-8")

    def to_csv_text(self) -> str:
        return report_csv_text(self.to_dict())


def report_csv_rows(doc: dict) -> list[dict]:
    """One row per statistic, from a serialized report document."""
    rows = []

    def add(group: str, statistic: str, qualifier: str, value, p_value=None, method=""):
        rows.append({
            "group": group,
            "statistic": statistic,
            "qualifier": qualifier,
            "value": value,
            "p_value": p_value,
            "method": method,
        })

    def add_test(group: str, qualifier: str, test: dict | None):
        if test:
            add(group, test["name"], qualifier, test["statistic"], test["p_value"],
                test["method"])

    for label in sorted(doc["groups"]):
        g = doc["groups"][label]
        add(label, "session_count", "", g["session_count"])
        if g.get("mean_totals"):
            for sid in g["stimulus_ids"]:
                add(label, "mean_total_ps", sid, g["mean_totals"][sid])
        add_test(label, "quality_vs_total_ps", g.get("quality_preference_pearson"))
        for key in sorted(g.get("quality_ranksum") or {}):
            add_test(label, key, g["quality_ranksum"][key])
        add_test(label, "quality_levels", g.get("quality_kruskal_wallis"))
        add_test(label, "within_shading_totals", g.get("shading_wilcoxon"))
        add_test(label, "realism_most_vs_least", g.get("realism_wilcoxon"))
        if g.get("mean_zeta") is not None:
            add(label, "mean_zeta", "", g["mean_zeta"])
            add(label, "mean_triads", "", statistics.fmean(g["triad_counts"]))
        if g.get("mean_repetition_rate") is not None:
            add(label, "mean_repetition_rate", "", g["mean_repetition_rate"])
        if g.get("duration_summary"):
            add(label, "mean_duration_s", "", g["duration_summary"]["mean"])
    return rows


def report_csv_text(doc: dict) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(
        buffer,
        fieldnames=["group", "statistic", "qualifier", "value", "p_value", "method"],
        lineterminator="\n",
    )
    writer.writeheader()
    writer.writerows(report_csv_rows(doc))
    return buffer.getvalue()


def _group_report(label: str, sessions: list[SessionState], session_ids: list[str],
                  subset_ids: tuple[str, ...]) -> GroupReport:
    report = GroupReport(label=label, session_count=len(sessions),
                         stimulus_ids=list(subset_ids))
    if not sessions or len(subset_ids) < 2:
        return report

    design = sessions[0].design
    subset = set(subset_ids)
    ranks = _quality_ranks([design.stimulus(sid).quality for sid in subset_ids])

    matrices: list[PreferenceMatrix] = []
    per_session_totals: dict[str, dict[str, float]] = {}
    pearson_x: list[float] = []
    pearson_y: list[float] = []
    by_quality: dict[int, list[float]] = {}
    subset_pairs = [p for p in design.pairs if p[0] in subset and p[1] in subset]

    for sid, state in zip(session_ids, sessions):
        outcomes = _subset_outcomes(state, subset)
        matrix = preference_matrix(outcomes, subset_ids)
        matrices.append(matrix)
        totals = matrix.totals
        per_session_totals[sid] = totals
        for stim_id in subset_ids:
            quality = design.stimulus(stim_id).quality
            pearson_x.append(float(ranks[quality]))
            pearson_y.append(totals[stim_id])
            by_quality.setdefault(quality, []).append(totals[stim_id])
        triads, zeta = circular_triads(tournament_from_matrix(matrix))
        report.triad_counts.append(triads)
        report.zetas.append(zeta)
        reps = sum(
            1 for r in state.history
            if r.presentation.round == 3 and r.presentation.pair in set(subset_pairs)
        )
        report.repetition_rates.append(reps / len(subset_pairs))

    n = len(subset_ids)
    mean_matrix = [[0.0] * n for _ in range(n)]
    for matrix in matrices:
        for i in range(n):
            for j in range(n):
                mean_matrix[i][j] += float(matrix.scores[i, j]) / len(matrices)
    report.mean_matrix = mean_matrix
    report.mean_totals = {
        sid: sum(t[sid] for t in per_session_totals.values()) / len(per_session_totals)
        for sid in subset_ids
    }
    report.per_session_totals = per_session_totals

    report.quality_preference_pearson = _try(pearson, pearson_x, pearson_y)
    levels = sorted(by_quality)
    for i, q_lo in enumerate(levels):
        for q_hi in levels[i + 1:]:
            key = f"{q_lo}_vs_{q_hi}"
            report.quality_ranksum[key] = _try(ranksum_z, by_quality[q_lo], by_quality[q_hi])
    report.quality_ranksum = {k: v for k, v in report.quality_ranksum.items() if v}
    if len(levels) >= 2:
        report.quality_kruskal_wallis = _try(
            kruskal_wallis, [by_quality[q] for q in levels]
        )

    report.duration_summary = _summary([session_duration(s) for s in sessions])
    questionnaires = [s.questionnaire for s in sessions if s.questionnaire]
    report.confidence_values = [q.confidence for q in questionnaires]
    report.realism_most = [q.realism_most_preferred for q in questionnaires]
    report.realism_least = [q.realism_least_preferred for q in questionnaires]
    if questionnaires:
        report.realism_wilcoxon = _try(
            wilcoxon_signed_rank,
            [float(q.realism_most_preferred) for q in questionnaires],
            [float(q.realism_least_preferred) for q in questionnaires],
        )
    return report


def _shading_pairing(sessions: list[SessionState], session_ids: list[str],
                     report_all: GroupReport) -> None:
    """Paired unlit-versus-lambert measures, attached to the 'all' group."""
    design = sessions[0].design
    shadings = sorted({s.shading.value for s in design.stimuli})
    if len(shadings) != 2:
        return
    first, second = shadings
    subset_a = tuple(s.id for s in design.stimuli if s.shading.value == first)
    subset_b = tuple(s.id for s in design.stimuli if s.shading.value == second)
    if len(subset_a) < 2 or len(subset_b) < 2:
        return
    qualities_a = {design.stimulus(sid).quality for sid in subset_a}
    qualities_b = {design.stimulus(sid).quality for sid in subset_b}
    if qualities_a != qualities_b:
        return

    rows_a: list[float] = []
    rows_b: list[float] = []
    mixed_means: dict[str, float] = {}
    for sid, state in zip(session_ids, sessions):
        totals_a = preference_matrix(_subset_outcomes(state, set(subset_a)), subset_a).totals
        totals_b = preference_matrix(_subset_outcomes(state, set(subset_b)), subset_b).totals
        for quality in sorted(qualities_a):
            a_id = next(i for i in subset_a if state.design.stimulus(i).quality == quality)
            b_id = next(i for i in subset_b if state.design.stimulus(i).quality == quality)
            rows_a.append(totals_a[a_id])
            rows_b.append(totals_b[b_id])
        # Mixed pairs, oriented first-shading minus second-shading.
        mixed = []
        for outcome in session_outcomes(state):
            sa = state.design.stimulus(outcome.pair[0]).shading.value
            sb = state.design.stimulus(outcome.pair[1]).shading.value
            if sa == sb:
                continue
            ps = outcome.ps
            mixed.append(ps if sa == first else -ps)
        if mixed:
            mixed_means[sid] = statistics.fmean(mixed)

    report_all.shading_wilcoxon = _try(wilcoxon_signed_rank, rows_a, rows_b)
    if report_all.shading_wilcoxon is not None:
        report_all.shading_wilcoxon.extras["pairing"] = f"{first}_vs_{second}"
    report_all.between_shading_mean_ps = mixed_means or None


def aggregate_report(sessions: list[SessionState], group_by: str | None = None,
                     session_ids: list[str] | None = None) -> SessionReport:
    """Build the full statistics bundle over completed sessions."""
    if not sessions:
        raise AggregationError("no sessions to aggregate")
    if session_ids is None:
        session_ids = [f"s{i:03d}" for i in range(len(sessions))]
    if len(session_ids) != len(sessions):
        raise AggregationError("session_ids must match sessions")
    if group_by not in (None, "shading", "confidence"):
        raise AggregationError(f"unsupported grouping {group_by!r}")

    reference = design_to_dict(sessions[0].design)
    for state in sessions:
        if state.phase is not Phase.COMPLETE:
            raise AggregationError("all sessions must be complete")
        if design_to_dict(state.design) != reference:
            raise AggregationError("sessions come from incompatible designs")

    design = sessions[0].design
    all_ids = design.ids
    groups: dict[str, GroupReport] = {
        "all": _group_report("all", sessions, session_ids, all_ids)
    }

    if group_by == "shading":
        for shading in sorted({s.shading.value for s in design.stimuli}):
            subset = tuple(s.id for s in design.stimuli if s.shading.value == shading)
            if len(subset) >= 2:
                groups[shading] = _group_report(shading, sessions, session_ids, subset)
        _shading_pairing(sessions, session_ids, groups["all"])
    elif group_by == "confidence":
        hc, lc, hc_ids, lc_ids = [], [], [], []
        for sid, state in zip(session_ids, sessions):
            if state.questionnaire is None:
                raise AggregationError("confidence grouping needs questionnaires")
            if state.questionnaire.confidence <= HIGH_CONFIDENCE_MAX:
                hc.append(state)
                hc_ids.append(sid)
            else:
                lc.append(state)
                lc_ids.append(sid)
        groups["HC"] = _group_report("HC", hc, hc_ids, all_ids)
        groups["LC"] = _group_report("LC", lc, lc_ids, all_ids)

    return SessionReport(
        design=reference,
        group_by=group_by,
        session_ids=list(session_ids),
        groups=groups,
    )
