import json

import pytest

from meshrank.errors import AggregationError
from meshrank.observers import DETERMINISTIC, GUESSER, LOGISTIC, ObserverModel, simulate_session
from meshrank.protocol.session import QuestionnaireResponse
from meshrank.stats.preference import preference_matrix
from meshrank.protocol.session import session_outcomes
from meshrank.stats.report import (
    aggregate_report,
    cluster_confidence,
    report_csv_rows,
    report_csv_text,
)

from conftest import make_design


def simulate_many(design, model, seeds):
    return [simulate_session(model, design, seed) for seed in seeds]


class TestClusterConfidence:
    def test_boundary_between_hc_and_lc(self):
        hc = QuestionnaireResponse(5, 5, 4)
        lc = QuestionnaireResponse(5, 5, 5)
        clusters = cluster_confidence([hc, lc])
        assert clusters["HC"] == [hc]
        assert clusters["LC"] == [lc]

    def test_all_certain_leaves_lc_empty(self):
        responses = [QuestionnaireResponse(5, 5, 1) for _ in range(4)]
        clusters = cluster_confidence(responses)
        assert len(clusters["HC"]) == 4
        assert clusters["LC"] == []

    def test_synthetic_roster_eight_thirteen(self):
        # 21 participants, confidences 1-4 for eight, 5-8 for thirteen
        confidences = [1, 2, 2, 3, 3, 4, 4, 4] + [5, 5, 5, 6, 6, 6, 7, 7, 7, 8, 8, 8, 5]
        responses = [QuestionnaireResponse(6, 3, c) for c in confidences]
        clusters = cluster_confidence(responses)
        assert len(clusters["HC"]) == 8
        assert len(clusters["LC"]) == 13


class TestAggregateReport:
    def test_single_session_matrix_passthrough(self, ladder_design):
        state = simulate_session(ObserverModel(kind=DETERMINISTIC), ladder_design, 3)
        report = aggregate_report([state])
        group = report.groups["all"]
        own = preference_matrix(session_outcomes(state), ladder_design.ids)
        assert group.mean_matrix == own.scores.tolist()
        assert group.mean_totals == own.totals
        assert group.session_count == 1

    def test_noiseless_observers_correlate_perfectly(self, ladder_design):
        states = simulate_many(
            ladder_design, ObserverModel(kind=DETERMINISTIC), range(6)
        )
        report = aggregate_report(states)
        result = report.groups["all"].quality_preference_pearson
        assert result.statistic == pytest.approx(1.0)
        assert report.groups["all"].zetas == [1.0] * 6

    def test_guessers_show_no_correlation(self, ladder_design):
        states = simulate_many(ladder_design, ObserverModel(kind=GUESSER), range(40))
        report = aggregate_report(states)
        result = report.groups["all"].quality_preference_pearson
        assert abs(result.statistic) < 0.25

    def test_quality_ranksum_direction(self, ladder_design):
        states = simulate_many(
            ladder_design, ObserverModel(kind=DETERMINISTIC), range(5)
        )
        report = aggregate_report(states)
        ranksums = report.groups["all"].quality_ranksum
        assert set(ranksums) == {
            "1000_vs_5000", "1000_vs_10000", "1000_vs_20000",
            "5000_vs_10000", "5000_vs_20000", "10000_vs_20000",
        }
        # lower quality scores lower -> negative Z, like the published runs
        assert all(r.statistic < 0 for r in ranksums.values())
        assert report.groups["all"].quality_kruskal_wallis.statistic > 0

    def test_shading_grouping(self, factorial_design):
        model = ObserverModel(kind=LOGISTIC, beta=2.0)
        states = simulate_many(factorial_design, model, range(8))
        report = aggregate_report(states, group_by="shading")
        assert set(report.groups) == {"all", "unlit", "lambert"}
        unlit = report.groups["unlit"]
        assert len(unlit.stimulus_ids) == 4
        assert all(":unlit" in sid for sid in unlit.stimulus_ids)
        assert unlit.quality_preference_pearson is not None
        # per-shading matrices are 4x4 over the shading's own sub-pairs
        assert len(unlit.mean_matrix) == 4
        assert report.groups["all"].shading_wilcoxon is not None
        assert report.groups["all"].between_shading_mean_ps is not None

    def test_confidence_grouping(self, ladder_design):
        confident = ObserverModel(kind=DETERMINISTIC)  # reports confidence 1
        guessing = ObserverModel(kind=GUESSER)  # reports confidence 10
        states = simulate_many(ladder_design, confident, range(3)) + simulate_many(
            ladder_design, guessing, range(100, 104)
        )
        report = aggregate_report(states, group_by="confidence")
        assert set(report.groups) == {"all", "HC", "LC"}
        assert report.groups["HC"].session_count == 3
        assert report.groups["LC"].session_count == 4
        assert report.groups["HC"].quality_preference_pearson.statistic == pytest.approx(1.0)

    def test_incomplete_sessions_rejected(self, ladder_design):
        from meshrank.protocol.session import build_schedule

        with pytest.raises(AggregationError):
            aggregate_report([build_schedule(ladder_design, 1)])

    def test_mixed_designs_rejected(self, ladder_design, factorial_design):
        a = simulate_session(ObserverModel(kind=GUESSER), ladder_design, 1)
        b = simulate_session(ObserverModel(kind=GUESSER), factorial_design, 1)
        with pytest.raises(AggregationError):
            aggregate_report([a, b])

    def test_empty_input_rejected(self):
        with pytest.raises(AggregationError):
            aggregate_report([])

    def test_bad_grouping_rejected(self, ladder_design):
        state = simulate_session(ObserverModel(kind=GUESSER), ladder_design, 1)
        with pytest.raises(AggregationError):
            aggregate_report([state], group_by="astrology")

    def test_mean_matrix_stays_antisymmetric(self, ladder_design):
        states = simulate_many(ladder_design, ObserverModel(kind=GUESSER), range(12))
        report = aggregate_report(states)
        matrix = report.groups["all"].mean_matrix
        n = len(matrix)
        for i in range(n):
            assert matrix[i][i] == 0.0
            for j in range(n):
                assert matrix[i][j] == pytest.approx(-matrix[j][i], abs=1e-12)
        assert sum(report.groups["all"].mean_totals.values()) == pytest.approx(0, abs=1e-9)

    def test_realism_wilcoxon_present(self, ladder_design):
        model = ObserverModel(
            kind=GUESSER, questionnaire=QuestionnaireResponse(8, 3, 7)
        )
        states = simulate_many(ladder_design, model, range(5))
        report = aggregate_report(states)
        result = report.groups["all"].realism_wilcoxon
        assert result is not None
        assert result.statistic == 15.0  # all five differences positive


class TestSerialization:
    def test_json_bytes_deterministic(self, ladder_design):
        states = simulate_many(ladder_design, ObserverModel(kind=GUESSER), range(4))
        a = aggregate_report(states).to_json_bytes()
        b = aggregate_report(states).to_json_bytes()
        assert a == b
        doc = json.loads(a)
        assert doc["session_count"] == 4
        assert "all" in doc["groups"]

    def test_csv_from_dict_matches_object(self, ladder_design):
        states = simulate_many(ladder_design, ObserverModel(kind=LOGISTIC, beta=1.0),
                               range(6))
        report = aggregate_report(states, group_by="shading")
        doc = json.loads(report.to_json_bytes())
        assert report_csv_text(doc) == report.to_csv_text()

    def test_csv_shape(self, ladder_design):
        states = simulate_many(ladder_design, ObserverModel(kind=GUESSER), range(3))
        report = aggregate_report(states)
        rows = report_csv_rows(json.loads(report.to_json_bytes()))
        assert all(
            set(row) == {"group", "statistic", "qualifier", "value", "p_value", "method"}
            for row in rows
        )
        text = report.to_csv_text()
        assert text.startswith("group,statistic,qualifier,value,p_value,method\n")
        assert len(text.strip().split("\n")) == len(rows) + 1

    def test_session_ids_respected(self, ladder_design):
        states = simulate_many(ladder_design, ObserverModel(kind=GUESSER), range(2))
        report = aggregate_report(states, session_ids=["p01", "p02"])
        assert set(report.groups["all"].per_session_totals) == {"p01", "p02"}
        with pytest.raises(AggregationError):
            aggregate_report(states, session_ids=["p01"])
