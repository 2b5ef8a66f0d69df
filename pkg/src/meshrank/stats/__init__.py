from .hypotests import (
    TestResult,
    average_ranks,
    kruskal_wallis,
    pearson,
    ranksum_z,
    wilcoxon_signed_rank,
)
from .preference import (
    PreferenceMatrix,
    Tournament,
    circular_triads,
    preference_matrix,
    tournament_from_matrix,
)
from .report import (
    GroupReport,
    SessionReport,
    aggregate_report,
    cluster_confidence,
    report_csv_rows,
    report_csv_text,
)

__all__ = [
    "TestResult",
    "average_ranks",
    "kruskal_wallis",
    "pearson",
    "ranksum_z",
    "wilcoxon_signed_rank",
    "PreferenceMatrix",
    "Tournament",
    "circular_triads",
    "preference_matrix",
    "tournament_from_matrix",
    "GroupReport",
    "SessionReport",
    "aggregate_report",
    "cluster_confidence",
    "report_csv_rows",
    "report_csv_text",
]
