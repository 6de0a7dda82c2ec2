"""Cuckoo search with interchangeable heavy-tailed step-length distributions.

Modules: ``htdist`` (step samplers), ``bench`` (test functions), ``cuckoo``
(the optimizer), ``stats`` (Wilcoxon/Friedman comparisons), ``fode``
(fractional financial system and its identification), ``experiment`` and
``cli`` (the reproducible experiment harness).
"""

from .bench import BenchmarkProblem, get_problem, suite
from .cuckoo import CSConfig, CuckooSearch, RunRecord, make_variant, run
from .fode import FinancialSystem, FractionalSystemIdentifier, identify, simulate
from .htdist import DistributionSpec, Kind, RandomStream, sample
from .stats import ResultMatrix, comparison_report, friedman, mark_table, wilcoxon_signed_rank

__version__ = "0.1.0"

__all__ = [
    "BenchmarkProblem",
    "CSConfig",
    "CuckooSearch",
    "DistributionSpec",
    "FinancialSystem",
    "FractionalSystemIdentifier",
    "Kind",
    "RandomStream",
    "ResultMatrix",
    "RunRecord",
    "comparison_report",
    "friedman",
    "get_problem",
    "identify",
    "make_variant",
    "mark_table",
    "run",
    "sample",
    "simulate",
    "suite",
    "wilcoxon_signed_rank",
]
