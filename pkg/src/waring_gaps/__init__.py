"""Exact-arithmetic toolkit for power-sum representation counts, residue
profiles, mild-gap detection on integer power series, and machine-checked
linear-independence certificates."""

from .certify import (
    ConditionResult,
    LinearForm,
    MaierCertificate,
    NestedGapsCertificate,
    PipelineConfig,
    Report,
    Verdict,
    check_measure,
    check_theta_linear_forms,
    half_function_from_spec,
    maier_qualifying_set,
    nested_certificate_from_json,
    pipeline_dry_run,
    verify_degree_criterion,
    verify_maier,
    verify_maier_inner,
    verify_nested_gaps,
)
from .modular import (
    GapModulusResult,
    PowerHistogram,
    ResidueProfile,
    crt_combine,
    power_histogram,
    residue_counts,
    search_gap_modulus,
)
from .repcount import (
    ExceptionalScan,
    GapRun,
    RepTable,
    WaringParams,
    find_gap_runs,
    floor_root,
    greedy_decompose,
    read_table_binary,
    read_table_csv,
    scan_exceptional_set,
    sieve_rep,
    write_table_binary,
    write_table_csv,
)
from .series import (
    Enclosure,
    GapVerdict,
    HalfFunction,
    MildGapCheck,
    MildGapScan,
    MildGapWitness,
    eval_enclosure,
    eval_truncated,
    is_mild_gap,
    linear_combination,
    scan_mild_gaps,
    tail_norm,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionResult",
    "Enclosure",
    "ExceptionalScan",
    "GapModulusResult",
    "GapRun",
    "GapVerdict",
    "HalfFunction",
    "LinearForm",
    "MaierCertificate",
    "MildGapCheck",
    "MildGapScan",
    "MildGapWitness",
    "NestedGapsCertificate",
    "PipelineConfig",
    "PowerHistogram",
    "RepTable",
    "Report",
    "ResidueProfile",
    "Verdict",
    "WaringParams",
    "check_measure",
    "check_theta_linear_forms",
    "crt_combine",
    "eval_enclosure",
    "eval_truncated",
    "find_gap_runs",
    "floor_root",
    "greedy_decompose",
    "half_function_from_spec",
    "is_mild_gap",
    "linear_combination",
    "maier_qualifying_set",
    "nested_certificate_from_json",
    "pipeline_dry_run",
    "power_histogram",
    "read_table_binary",
    "read_table_csv",
    "residue_counts",
    "scan_exceptional_set",
    "scan_mild_gaps",
    "search_gap_modulus",
    "sieve_rep",
    "tail_norm",
    "verify_degree_criterion",
    "verify_maier",
    "verify_maier_inner",
    "verify_nested_gaps",
    "write_table_binary",
    "write_table_csv",
]
