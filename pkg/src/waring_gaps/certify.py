"""Machine checkers for certificate-shaped counting and independence claims.

Four families live here: the progression-counting certificate (many
residues with small representation counts), the nested-gaps certificate
(two mild gaps of one series inside a larger gap of another), the degree
criterion it implies for power series of representation counts, and
exhaustive linear-form sweeps with certified enclosures.  A desk-scale
dry run wires them together: modulus search, limit and window selection,
tail schedule, counting, bad-pair filtering, separation tests and the
final criterion, each step reported with an exact verdict.

Every report is a JSON-ready record with one entry per condition;
verdicts are three-valued (pass, fail, inconclusive) and structural
defects of a certificate mark the whole report invalid.  No float is
ever consulted for a verdict.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .exact import decimal_str, fraction_str, parse_fraction
from .modular import ResidueProfile, residue_counts, search_gap_modulus
from .repcount import (
    RepTable,
    WaringParams,
    floor_root,
    loose_count_bound,
    read_table_binary,
    scan_exceptional_set,
    sieve_rep,
)
from .series import (
    Enclosure,
    GapVerdict,
    HalfFunction,
    MildGapCheck,
    eval_enclosure,
    eval_truncated,
    is_mild_gap,
    linear_combination,
)


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    @staticmethod
    def worst(verdicts: "Sequence[Verdict]") -> "Verdict":
        if any(v is Verdict.FAIL for v in verdicts):
            return Verdict.FAIL
        if any(v is Verdict.INCONCLUSIVE for v in verdicts):
            return Verdict.INCONCLUSIVE
        return Verdict.PASS


_GAP_TO_VERDICT = {
    GapVerdict.WITNESS: Verdict.PASS,
    GapVerdict.REJECTED: Verdict.FAIL,
    GapVerdict.INCONCLUSIVE: Verdict.INCONCLUSIVE,
}


@dataclass(frozen=True)
class ConditionResult:
    name: str
    verdict: Verdict
    witness: Any = None

    def to_json_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict.value, "witness": self.witness}


@dataclass
class Report:
    """Per-condition verdicts plus a summary, JSON-ready and replayable."""

    kind: str
    certificate: dict | None = None
    conditions: list[ConditionResult] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    invalid: bool = False

    def add(self, name: str, verdict: Verdict, witness: Any = None) -> ConditionResult:
        cond = ConditionResult(name=name, verdict=verdict, witness=witness)
        self.conditions.append(cond)
        return cond

    def condition(self, name: str) -> ConditionResult:
        for cond in self.conditions:
            if cond.name == name:
                return cond
        raise KeyError(name)

    @property
    def verdict(self) -> Verdict:
        return Verdict.worst([c.verdict for c in self.conditions])

    @property
    def exit_code(self) -> int:
        if self.invalid:
            return 3
        return {Verdict.PASS: 0, Verdict.FAIL: 1, Verdict.INCONCLUSIVE: 2}[self.verdict]

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "certificate": self.certificate,
            "per_condition": [c.to_json_dict() for c in self.conditions],
            "summary": self.summary,
            "verdict": "invalid" if self.invalid else self.verdict.value,
        }


def _mild_check_json(check: MildGapCheck, function: str) -> dict:
    out: dict[str, Any] = {
        "function": function,
        "n": check.n,
        "verdict": _GAP_TO_VERDICT[check.verdict].value,
    }
    if check.witness is not None:
        out["witness"] = check.witness.to_json_dict()
    else:
        out["failed_clause"] = check.failed_clause
        out["detail"] = check.detail
    return out


# ---------------------------------------------------------------------------
# Progression counting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaierCertificate:
    """Data for the progression-counting bound.

    eps[k] bounds the normalized residue count at m + k; caps[k] is the
    admissible representation count at offset k.  The derived alpha must
    stay below 1 for the counting bound to be nontrivial.
    """

    ell: int
    K: int
    M: int
    m: int
    eps: tuple[Fraction, ...]
    caps: tuple[int, ...]
    N: int

    def __post_init__(self) -> None:
        if len(self.eps) != self.K + 1 or len(self.caps) != self.K + 1:
            raise ValueError("eps and caps must both have K + 1 entries")

    @property
    def alpha(self) -> Fraction:
        return sum(
            (e / (cap + 1) for e, cap in zip(self.eps, self.caps)), Fraction(0)
        )

    def to_json_dict(self) -> dict:
        return {
            "ell": self.ell,
            "K": self.K,
            "M": self.M,
            "m": self.m,
            "eps": [fraction_str(e) for e in self.eps],
            "caps": list(self.caps),
            "N": self.N,
            "alpha": fraction_str(self.alpha),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "MaierCertificate":
        return cls(
            ell=int(obj["ell"]),
            K=int(obj["K"]),
            M=int(obj["M"]),
            m=int(obj["m"]),
            eps=tuple(parse_fraction(e) for e in obj["eps"]),
            caps=tuple(int(c) for c in obj["caps"]),
            N=int(obj["N"]),
        )


def maier_qualifying_set(
    table: RepTable, modulus: int, residue: int, caps: Sequence[int], limit: int, window: int
) -> np.ndarray:
    """Indices n in [0, limit - window) of the progression with capped counts."""
    hi = limit - window
    if hi <= residue:
        return np.empty(0, dtype=np.int64)
    idx = np.arange(residue, hi, modulus, dtype=np.int64)
    ok = np.ones(idx.shape, dtype=bool)
    ceiling = loose_count_bound(table.params.ell, table.limit)
    for k, cap in enumerate(caps):
        effective = min(int(cap), ceiling)
        ok &= table.counts[idx + k] <= effective
    return idx[ok]


def verify_maier(cert: MaierCertificate, table: RepTable, profile: ResidueProfile) -> Report:
    """Check every certificate invariant and the counting conclusion.

    Invariant violations are reported field by field and mark the report
    invalid, but counting still runs whenever the table allows it, so
    near-misses stay visible.  The one exception is alpha >= 1, which
    makes the claimed bound meaningless and rejects the certificate
    before counting.
    """
    report = Report(kind="maier", certificate=cert.to_json_dict())

    def structural(name: str, ok: bool, witness: Any = None) -> None:
        report.add(name, Verdict.PASS if ok else Verdict.FAIL, witness)
        if not ok:
            report.invalid = True

    structural(
        "window-in-modulus",
        0 <= cert.m and cert.K >= 0 and cert.m + cert.K < cert.M,
        {"m": cert.m, "K": cert.K, "M": cert.M},
    )
    structural(
        "limit-covers-modulus-power",
        cert.N >= cert.M**cert.ell,
        {"N": cert.N, "M^ell": cert.M**cert.ell},
    )
    structural("eps-positive", all(e > 0 for e in cert.eps))
    alpha = cert.alpha
    alpha_ok = alpha < 1
    structural("alpha-below-one", alpha_ok, {"alpha": fraction_str(alpha)})

    inputs_ok = (
        profile.ell == cert.ell
        and profile.modulus == cert.M
        and table.params.ell == cert.ell
        and table.params.s == cert.ell
        and table.limit >= cert.N - 1
    )
    structural(
        "inputs-match",
        inputs_ok,
        {
            "profile": {"ell": profile.ell, "M": profile.modulus},
            "table": {
                "ell": table.params.ell,
                "s": table.params.s,
                "limit": table.limit,
            },
        },
    )

    denom = cert.M ** (cert.ell - 1)
    violations = []
    for k, e in enumerate(cert.eps):
        r = profile.r(cert.m + k) if profile.modulus == cert.M else None
        if r is None or r * e.denominator > e.numerator * denom:
            violations.append({"k": k, "count": r, "eps": fraction_str(e)})
    report.add(
        "residue-count-bounds",
        Verdict.PASS if not violations else Verdict.FAIL,
        {"violations": violations} if violations else None,
    )
    if violations:
        report.invalid = True

    bound = (1 - alpha) * Fraction(cert.N, cert.M) / (1 << cert.ell)
    report.summary["alpha"] = fraction_str(alpha)
    report.summary["bound"] = fraction_str(bound)

    can_count = alpha_ok and table.limit >= cert.N - 1
    if not can_count:
        report.add(
            "count-at-least-bound",
            Verdict.FAIL,
            "counting skipped: certificate rejected before counting",
        )
        return report

    qualifying = maier_qualifying_set(table, cert.M, cert.m, cert.caps, cert.N, cert.K)
    count = int(qualifying.shape[0])
    report.summary["count"] = count
    report.add(
        "count-at-least-bound",
        Verdict.PASS if count >= bound else Verdict.FAIL,
        {"count": count, "bound": fraction_str(bound)},
    )
    return report


def verify_maier_inner(
    ell: int, m: int, k: int, M: int, L: int, table: RepTable
) -> Report:
    """Check the column-sum inequality behind the counting argument.

    Sums the representation counts along the progression m + k + i*M for
    i < L^ell * M^(ell-1) and compares with L^ell times the residue count.
    """
    if M < 1 or L < 1 or m < 0 or k < 0:
        raise ValueError("need M >= 1, L >= 1, m >= 0, k >= 0")
    if table.params.ell != ell or table.params.s != ell:
        raise ValueError("table must hold counts for ell summands of ell-th powers")
    column = L**ell * M ** (ell - 1)
    top = m + k + (column - 1) * M
    if table.limit < top:
        raise ValueError(
            f"table covers [0, {table.limit}] but the column reaches {top}"
        )
    assert column * loose_count_bound(ell, top) < 2**63
    lhs = int(table.counts[m + k : top + 1 : M].sum())
    profile = residue_counts(ell, M)
    rhs = L**ell * profile.r(m + k)
    report = Report(
        kind="maier-inner",
        certificate={"ell": ell, "m": m, "k": k, "M": M, "L": L},
    )
    report.add(
        "column-sum-bounded",
        Verdict.PASS if lhs <= rhs else Verdict.FAIL,
        {"column_sum": lhs, "bound": rhs, "column_length": column},
    )
    report.summary = {"column_sum": lhs, "bound": rhs}
    return report


# ---------------------------------------------------------------------------
# Nested gaps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NestedGapsCertificate:
    """All data needed to replay the nested-gaps independence argument."""

    q: int
    H: Fraction
    K1: int
    K2: int
    K_prime: int
    n1: int
    n2: int
    n_prime: int
    E: Fraction
    E_prime: Fraction
    f: HalfFunction
    g: HalfFunction
    f_spec: dict | None = None
    g_spec: dict | None = None

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "H": fraction_str(self.H),
            "K1": self.K1,
            "K2": self.K2,
            "K_prime": self.K_prime,
            "n1": self.n1,
            "n2": self.n2,
            "n_prime": self.n_prime,
            "E": fraction_str(self.E),
            "E_prime": fraction_str(self.E_prime),
            "f": self.f_spec if self.f_spec is not None else {"label": self.f.label},
            "g": self.g_spec if self.g_spec is not None else {"label": self.g.label},
        }


def verify_nested_gaps(cert: NestedGapsCertificate) -> Report:
    """Check hypotheses of the nested-gaps principle, each one exactly.

    A passing report records the conclusion (either g(1/q) = 0 or the two
    values are linearly independent over the rationals); it does not
    re-prove it.  Inconclusive tail verdicts propagate and never pass.
    """
    report = Report(kind="nested-gaps", certificate=cert.to_json_dict())

    shape_problems = []
    if cert.q < 2:
        shape_problems.append("q must be at least 2")
    if cert.H <= 0:
        shape_problems.append("H must be positive")
    if min(cert.K1, cert.K2, cert.K_prime) < 1:
        shape_problems.append("gap lengths must be positive")
    if not (0 <= cert.n_prime <= cert.n1 < cert.n2):
        shape_problems.append("need 0 <= n_prime <= n1 < n2")
    if cert.E <= 0 or cert.E_prime <= 0:
        shape_problems.append("tail bounds must be positive")
    if shape_problems:
        report.invalid = True
        report.add("certificate-shape", Verdict.FAIL, shape_problems)
        return report

    ordering_ok = (
        cert.K1 <= cert.K2 < cert.K_prime
        and cert.n1 + cert.K1 < cert.n2
        and cert.n2 + cert.K2 <= cert.n_prime + cert.K_prime
    )
    report.add(
        "ordering",
        Verdict.PASS if ordering_ok else Verdict.FAIL,
        {
            "K1": cert.K1,
            "K2": cert.K2,
            "K_prime": cert.K_prime,
            "n1+K1": cert.n1 + cert.K1,
            "n2": cert.n2,
            "n2+K2": cert.n2 + cert.K2,
            "n_prime+K_prime": cert.n_prime + cert.K_prime,
        },
    )

    checks = [
        (cert.f, cert.n1, cert.K1, cert.E),
        (cert.f, cert.n2, cert.K1, cert.E),
        (cert.g, cert.n_prime, cert.K_prime, cert.E_prime),
    ]
    results = [is_mild_gap(fn, n, K, E) for fn, n, K, E in checks]
    report.add(
        "mild-gaps",
        Verdict.worst([_GAP_TO_VERDICT[r.verdict] for r in results]),
        [_mild_check_json(r, fn.label) for r, (fn, *_rest) in zip(results, checks)],
    )

    window_sum = eval_truncated(cert.f, cert.q, cert.n2) - eval_truncated(
        cert.f, cert.q, cert.n1
    )
    report.add(
        "window-sum-nonzero",
        Verdict.PASS if window_sum != 0 else Verdict.FAIL,
        {"sum": fraction_str(window_sum)},
    )

    first = Fraction(cert.q**cert.K1) > cert.H * cert.E
    second = Fraction(cert.q**cert.K2) > cert.H * cert.E_prime
    report.add(
        "gap-dominates-height",
        Verdict.PASS if (first and second) else Verdict.FAIL,
        {
            "q^K1": str(cert.q**cert.K1),
            "H*E": fraction_str(cert.H * cert.E),
            "q^K2": str(cert.q**cert.K2),
            "H*E_prime": fraction_str(cert.H * cert.E_prime),
        },
    )

    if report.verdict is Verdict.PASS:
        report.summary["conclusion"] = (
            "either g(1/q) = 0 or f(1/q) and g(1/q) are linearly independent "
            "over the rationals"
        )
    return report


def check_measure(cert: NestedGapsCertificate, terms: int | None = None) -> Report:
    """Exhaustively certify |alpha*f(1/q) + beta*g(1/q)| >= q^(-n2).

    Runs over every integer pair with alpha != 0 and |alpha| + |beta|
    bounded by the certificate height, using certified enclosures; pairs
    whose enclosure straddles the threshold are reported for retry at a
    larger term count.
    """
    report = Report(kind="measure", certificate=cert.to_json_dict())
    base = verify_nested_gaps(cert)
    if base.invalid or base.verdict is Verdict.FAIL:
        report.invalid = True
        report.add("nested-gaps-precondition", Verdict.FAIL, base.to_json_dict())
        return report
    if base.verdict is Verdict.INCONCLUSIVE:
        report.add("nested-gaps-precondition", Verdict.INCONCLUSIVE, base.to_json_dict())
        return report
    report.add("nested-gaps-precondition", Verdict.PASS)

    if terms is None:
        terms = max(64, cert.n2 + cert.K2 + 1, cert.n_prime + cert.K_prime + 1)

    def clamp(f: HalfFunction) -> int:
        return terms if f.coverage is None else min(terms, f.coverage + 1)

    f_enc = eval_enclosure(cert.f, cert.q, clamp(cert.f))
    g_enc = eval_enclosure(cert.g, cert.q, clamp(cert.g))
    threshold = Fraction(1, cert.q**cert.n2)
    height = int(cert.H)
    if height > 100_000:
        raise ValueError(f"height {height} too large for exhaustive pair enumeration")

    minimum: Fraction | None = None
    minimum_pair = None
    failing = []
    undecided = []
    pairs = 0
    for alpha in range(-height, height + 1):
        if alpha == 0:
            continue
        beta_budget = height - abs(alpha)
        for beta in range(-beta_budget, beta_budget + 1):
            pairs += 1
            combined = f_enc.scale(alpha) + g_enc.scale(beta)
            lower = combined.abs_lower()
            if lower >= threshold:
                if minimum is None or lower < minimum:
                    minimum = lower
                    minimum_pair = (alpha, beta)
            elif combined.abs_upper() < threshold:
                failing.append((alpha, beta))
            else:
                undecided.append((alpha, beta))

    verdict = Verdict.PASS
    if failing:
        verdict = Verdict.FAIL
    elif undecided:
        verdict = Verdict.INCONCLUSIVE
    report.add(
        "pairs-above-threshold",
        verdict,
        {
            "pairs": pairs,
            "threshold": fraction_str(threshold),
            "failing": failing[:10],
            "undecided": undecided[:10],
        },
    )
    report.summary = {
        "pairs": pairs,
        "threshold": fraction_str(threshold),
        "min_lower_bound": fraction_str(minimum) if minimum is not None else None,
        "min_pair": list(minimum_pair) if minimum_pair is not None else None,
        "terms": terms,
    }
    return report


# ---------------------------------------------------------------------------
# Degree criterion
# ---------------------------------------------------------------------------


def verify_degree_criterion(
    ell: int,
    q: int,
    J: Fraction,
    E: Fraction,
    N: int,
    K1: int,
    K2: int,
    n1: int,
    n2: int,
    table_lower: RepTable,
    table_full: RepTable,
) -> Report:
    """Check the four conditions that force the power-sum series value to
    avoid low-degree algebraic relations at 1/q, for the given strength J.

    table_lower holds counts for ell - 1 summands, table_full for ell.
    """
    J = Fraction(J)
    E = Fraction(E)
    if J <= 0 or E <= 0:
        raise ValueError("J and E must be positive")
    if table_lower.params != WaringParams(ell, ell - 1):
        raise ValueError("table_lower must count sums of ell - 1 powers")
    if table_full.params != WaringParams(ell, ell):
        raise ValueError("table_full must count sums of ell powers")
    if table_lower.limit < n2 + K2 - 1 or table_full.limit < n2 - 1:
        raise ValueError("tables do not cover the inspection window")

    report = Report(
        kind="degree-criterion",
        certificate={
            "ell": ell,
            "q": q,
            "J": fraction_str(J),
            "E": fraction_str(E),
            "N": N,
            "K1": K1,
            "K2": K2,
            "n1": n1,
            "n2": n2,
        },
    )

    report.add(
        "ordering",
        Verdict.PASS if (n1 + K1 < n2 and n2 + K2 <= N) else Verdict.FAIL,
        {"n1+K1": n1 + K1, "n2": n2, "n2+K2": n2 + K2, "N": N},
    )

    f_full = HalfFunction.from_table(table_full)
    endpoint_checks = [is_mild_gap(f_full, n, K1, E) for n in (n1, n2)]
    report.add(
        "mild-gap-endpoints",
        Verdict.worst([_GAP_TO_VERDICT[r.verdict] for r in endpoint_checks]),
        [_mild_check_json(r, f_full.label) for r in endpoint_checks],
    )

    window = table_lower.counts[n1 : n2 + K2]
    nonzero = np.flatnonzero(window)
    report.add(
        "window-free-of-shorter-sums",
        Verdict.PASS if nonzero.size == 0 else Verdict.FAIL,
        None if nonzero.size == 0 else {"witness": int(n1 + nonzero[0])},
    )

    inner = table_full.counts[n1:n2]
    hits = np.flatnonzero(inner)
    report.add(
        "representable-point-inside",
        Verdict.PASS if hits.size else Verdict.FAIL,
        {"witness": int(n1 + hits[0])} if hits.size else None,
    )

    first = Fraction(q**K1) > J * E
    second = Fraction(q**K2) > J * N
    report.add(
        "height-gap",
        Verdict.PASS if (first and second) else Verdict.FAIL,
        {
            "q^K1": str(q**K1),
            "J*E": fraction_str(J * E),
            "q^K2": str(q**K2),
            "J*N": fraction_str(J * N),
        },
    )

    j_max = min(Fraction(q**K1) / E, Fraction(q**K2, N))
    unit_c_paper = ell * (1 << ell)
    unit_c_sum = 1 + (ell - 1) * (1 << ell)
    report.summary = {
        "largest_certifiable_J_below": fraction_str(j_max),
        "derived_outer_gap": n2 - n1 + K2,
        "outer_tail_bound_unit_height": fraction_str(8 * unit_c_paper * N),
        "outer_tail_bound_unit_height_sharper": fraction_str(8 * unit_c_sum * N),
    }
    if report.verdict is Verdict.PASS:
        report.summary["conclusion"] = (
            f"instance recorded as evidence that the series value at 1/{q} "
            f"admits no algebraic relation of degree at most {ell} at strength "
            f"J = {fraction_str(J)}"
        )
    return report


# ---------------------------------------------------------------------------
# Linear forms in powers of the series value
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearForm:
    """Integer linear form in (1, t, t^2, ..., t^ell) with bounded height."""

    coeffs: tuple[int, ...]
    height: int

    def __post_init__(self) -> None:
        if self.height < 1:
            raise ValueError("height must be positive")
        if max(abs(c) for c in self.coeffs) > self.height:
            raise ValueError("coefficient exceeds the declared height")


def check_theta_linear_forms(
    ell: int,
    q: int,
    height: int,
    terms: int,
    tables: Sequence[RepTable],
) -> Report:
    """Certify non-vanishing of every admissible linear form in the powers.

    Sweeps all integer forms with coefficients bounded by the height and
    nonzero leading coefficient, encloses each value via the direct
    power-series tables (not interval powers), and records the minimal
    certified lower bound.  Interval powers are still computed and
    cross-checked against the direct enclosures.
    """
    if height < 1:
        raise ValueError("height must be positive")
    if (2 * height + 1) ** (ell + 1) > 10_000_000:
        raise ValueError(f"height {height} too large for exhaustive form enumeration")
    if len(tables) != ell:
        raise ValueError(f"need tables for s = 1 .. {ell}")
    for s, table in enumerate(tables, start=1):
        if table.params != WaringParams(ell, s):
            raise ValueError(f"table {s} has parameters {table.params}")

    report = Report(
        kind="linear-forms",
        certificate={"ell": ell, "q": q, "height": height, "terms": terms},
    )
    functions = [HalfFunction.from_table(t) for t in tables]
    enclosures = [Enclosure(Fraction(1), Fraction(1))]
    for f in functions:
        used = terms if f.coverage is None else min(terms, f.coverage + 1)
        enclosures.append(eval_enclosure(f, q, used))

    theta = enclosures[1]
    crosscheck = []
    for j in range(2, ell + 1):
        powered = theta.power(j)
        crosscheck.append(
            {
                "power": j,
                "direct": enclosures[j].to_json_dict(),
                "interval_power": powered.to_json_dict(),
                "intersects": enclosures[j].intersects(powered),
            }
        )
    report.add(
        "interval-power-crosscheck",
        Verdict.PASS if all(c["intersects"] for c in crosscheck) else Verdict.FAIL,
        crosscheck,
    )

    minimum: Fraction | None = None
    minimum_form = None
    certified = 0
    undecided = []
    for coeffs in itertools.product(range(-height, height + 1), repeat=ell + 1):
        if coeffs[ell] == 0:
            continue
        form = LinearForm(coeffs=coeffs, height=height)
        combined = enclosures[0].scale(form.coeffs[0])
        for j in range(1, ell + 1):
            combined = combined + enclosures[j].scale(form.coeffs[j])
        lower = combined.abs_lower()
        if lower > 0:
            certified += 1
            if minimum is None or lower < minimum:
                minimum = lower
                minimum_form = coeffs
        else:
            undecided.append(list(coeffs))

    report.add(
        "forms-nonvanishing",
        Verdict.PASS if not undecided else Verdict.INCONCLUSIVE,
        {"certified": certified, "undecided": undecided[:10]},
    )
    report.summary = {
        "forms_checked": certified + len(undecided),
        "L_min": fraction_str(minimum) if minimum is not None else None,
        "L_min_form": list(minimum_form) if minimum_form is not None else None,
        "theta_enclosure": theta.to_json_dict(),
        "theta_width": fraction_str(theta.width),
    }
    return report


# ---------------------------------------------------------------------------
# Parameter pipeline dry run
# ---------------------------------------------------------------------------

DEFAULT_POOLS = {3: (9, 63), 4: (16, 32)}
DEFAULT_SIGMAS = {3: Fraction(13, 4), 4: Fraction(512, 127)}
SIGMA_RANGES = {
    3: (Fraction(3), Fraction(27, 8)),
    4: (Fraction(4), Fraction(16384, 4059)),
}


@dataclass(frozen=True)
class PipelineConfig:
    """Resource bounds and desk-scale choices for the dry run."""

    moduli_pool: tuple[int, ...] | None = None
    window: int = 2
    xi: Fraction = Fraction(32, 3)
    sigma: Fraction | None = None
    product_bound: int | None = None
    max_modulus: int = 4096
    max_limit: int = 2_000_000
    mild_check_cap: int = 200
    threads: int = 1

    def to_json_dict(self) -> dict:
        return {
            "moduli_pool": list(self.moduli_pool) if self.moduli_pool else None,
            "window": self.window,
            "xi": fraction_str(self.xi),
            "sigma": fraction_str(self.sigma) if self.sigma else None,
            "product_bound": self.product_bound,
            "max_modulus": self.max_modulus,
            "max_limit": self.max_limit,
            "mild_check_cap": self.mild_check_cap,
            "threads": self.threads,
        }


def _pow_floor(base: int, exponent: Fraction) -> int:
    """floor(base^exponent) for a positive rational exponent, exactly."""
    return floor_root(exponent.denominator, base**exponent.numerator)


def pipeline_dry_run(
    ell: int, q: int, J: Fraction | int = 1, config: PipelineConfig | None = None
) -> Report:
    """Run the full parameter recipe at desk scale and report each step.

    The modulus comes from an exact search instead of an analytic
    existence argument; every subsequent choice (limit, windows, tail
    schedule, counting, bad-pair filter, separation, degree criterion) is
    evaluated exactly and reported, including the steps that fail at this
    scale.  Exceeding a configured bound yields a partial report, never a
    silent truncation.
    """
    if ell not in (3, 4):
        raise ValueError("ell must be 3 or 4")
    if q < 2:
        raise ValueError("q must be at least 2")
    J = Fraction(J)
    if J <= 0:
        raise ValueError("J must be positive")
    config = config or PipelineConfig()

    report = Report(
        kind="pipeline",
        certificate={"ell": ell, "q": q, "J": fraction_str(J), "config": config.to_json_dict()},
    )
    summary: dict[str, Any] = {}
    report.summary = summary

    sigma = config.sigma if config.sigma is not None else DEFAULT_SIGMAS[ell]
    lo_sigma, hi_sigma = SIGMA_RANGES[ell]
    report.add(
        "exponent-in-range",
        Verdict.PASS if lo_sigma < sigma < hi_sigma else Verdict.FAIL,
        {
            "sigma": fraction_str(sigma),
            "open_interval": [fraction_str(lo_sigma), fraction_str(hi_sigma)],
        },
    )
    summary["sigma"] = fraction_str(sigma)

    pool = tuple(config.moduli_pool) if config.moduli_pool else DEFAULT_POOLS[ell]
    usable_pool = tuple(m for m in pool if m <= config.max_modulus)
    if usable_pool != pool:
        report.add(
            "pool-within-modulus-budget",
            Verdict.FAIL,
            {"dropped": [m for m in pool if m > config.max_modulus]},
        )
    K1 = config.window
    search = search_gap_modulus(
        ell, K1, usable_pool, product_bound=config.product_bound
    ) if usable_pool else None
    report.add(
        "modulus-search",
        Verdict.PASS if search is not None else Verdict.FAIL,
        search.to_json_dict() if search is not None else "no candidate met the small-count threshold",
    )
    if search is None:
        summary["halted_at"] = "modulus-search"
        return report
    M, m = search.modulus, search.residue
    summary["M"] = M
    summary["m"] = m
    summary["K1"] = K1

    exact_limit = _pow_floor(M, sigma)
    capped = exact_limit > config.max_limit
    N = min(exact_limit, config.max_limit)
    report.add(
        "limit-within-budget",
        Verdict.PASS if not capped else Verdict.FAIL,
        {"exact": exact_limit, "used": N, "max_limit": config.max_limit},
    )
    report.add(
        "limit-covers-modulus-power",
        Verdict.PASS if N >= M**ell else Verdict.FAIL,
        {"N": N, "M^ell": M**ell},
    )
    summary["N"] = N

    K2 = M // 2
    summary["K2"] = K2
    report.add(
        "windows-ordered", Verdict.PASS if K1 <= K2 else Verdict.FAIL, {"K1": K1, "K2": K2}
    )
    if K1 > K2:
        summary["halted_at"] = "windows-ordered"
        return report
    report.add(
        "second-window-doubles-first",
        Verdict.PASS if K2 > 2 * K1 else Verdict.FAIL,
        {"K1": K1, "K2": K2},
    )
    report.add(
        "residue-window-inside-modulus",
        Verdict.PASS if m + K2 < M else Verdict.FAIL,
        {"m+K2": m + K2, "M": M},
    )
    report.add(
        "size-shape",
        Verdict.PASS if max(2 * m, 4 * K1) < M else Verdict.FAIL,
        {"2m": 2 * m, "4K1": 4 * K1, "M": M},
    )
    report.add(
        "modulus-even", Verdict.PASS if M % 2 == 0 else Verdict.FAIL, {"M": M}
    )

    xi = Fraction(config.xi)
    eps = [Fraction(1, 2 * K1)] * K1 + [xi] * (K2 - K1 + 1)
    caps = [0] * K1 + [
        int(12 * xi * Fraction(3, 2) ** k) for k in range(K2 - K1 + 1)
    ]
    cert = MaierCertificate(
        ell=ell, K=K2, M=M, m=m, eps=tuple(eps), caps=tuple(caps), N=N
    )
    alpha = cert.alpha
    summary["alpha"] = fraction_str(alpha)
    summary["xi"] = fraction_str(xi)
    report.add(
        "schedule-alpha-below-three-quarters",
        Verdict.PASS if alpha < Fraction(3, 4) else Verdict.FAIL,
        {"alpha": fraction_str(alpha), "alpha_decimal_display_only": _display(alpha)},
    )
    report.add(
        "schedule-dominates-loose-bound",
        Verdict.PASS if 12 * xi >= 8 * (1 << ell) else Verdict.FAIL,
        {"12*xi": fraction_str(12 * xi), "8*2^ell": 8 * (1 << ell)},
    )
    kappa = K2 - K1
    report.add(
        "kappa-at-least-first-window",
        Verdict.PASS if kappa >= K1 else Verdict.FAIL,
        {"kappa": kappa, "K1": K1},
    )
    report.add(
        "kappa-at-least-log-limit",
        Verdict.PASS if (1 << kappa) >= N else Verdict.FAIL,
        {"kappa": kappa, "N": N},
    )
    E = 60 * xi
    summary["E"] = fraction_str(E)

    # Margin past N keeps boundary tail checks decidable; counting ignores it.
    sieve_limit = N + K2 + max(64, 4 * K1) + 8
    table_full = sieve_rep(WaringParams(ell, ell), sieve_limit)
    table_lower = sieve_rep(WaringParams(ell, ell - 1), sieve_limit)
    profile = residue_counts(ell, M)
    maier_report = verify_maier(cert, table_full, profile)
    report.add(
        "counting-certificate",
        Verdict.FAIL if maier_report.invalid else maier_report.verdict,
        maier_report.summary,
    )

    members = maier_qualifying_set(table_full, M, m, caps, N, K2)
    b_count = int(members.shape[0])
    summary["qualifying_points"] = b_count
    floor_bound = Fraction(N, (1 << (ell + 2)) * M)
    report.add(
        "qualifying-set-large",
        Verdict.PASS if b_count >= floor_bound else Verdict.FAIL,
        {"count": b_count, "bound": fraction_str(floor_bound)},
    )

    lower_nonzero = np.concatenate(
        ([0], np.cumsum((table_lower.counts != 0).astype(np.int64)))
    )

    def lower_hits(lo: int, hi_inclusive: int) -> int:
        hi_inclusive = min(hi_inclusive, table_lower.limit)
        if hi_inclusive < lo:
            return 0
        return int(lower_nonzero[hi_inclusive + 1] - lower_nonzero[lo])

    pairs = list(zip(members.tolist(), members.tolist()[1:]))
    good_pairs = [
        (b1, b2) for b1, b2 in pairs if lower_hits(b1, b2 + K2) == 0
    ]
    bad_count = len(pairs) - len(good_pairs)
    summary["pairs"] = len(pairs)
    summary["good_pairs"] = len(good_pairs)
    report.add(
        "bad-points-minority",
        Verdict.PASS if 2 * bad_count < b_count else Verdict.FAIL,
        {"bad": bad_count, "qualifying": b_count},
    )
    good_bound = Fraction(N, (1 << (ell + 3)) * M)
    report.add(
        "good-set-large",
        Verdict.PASS if len(good_pairs) >= good_bound else Verdict.FAIL,
        {"count": len(good_pairs), "bound": fraction_str(good_bound)},
    )

    f_full = HalfFunction.from_table(table_full)
    mild_counts = {"witness": 0, "rejected": 0, "inconclusive": 0}
    first_problem = None
    for b in members.tolist()[: config.mild_check_cap]:
        check = is_mild_gap(f_full, int(b), K1, E)
        mild_counts[
            "witness"
            if check.verdict is GapVerdict.WITNESS
            else "rejected"
            if check.verdict is GapVerdict.REJECTED
            else "inconclusive"
        ] += 1
        if check.verdict is not GapVerdict.WITNESS and first_problem is None:
            first_problem = _mild_check_json(check, f_full.label)
    mild_verdict = (
        Verdict.FAIL
        if mild_counts["rejected"]
        else Verdict.INCONCLUSIVE
        if mild_counts["inconclusive"]
        else Verdict.PASS
    )
    report.add(
        "qualifying-points-are-mild-gaps",
        mild_verdict,
        {"checked": sum(mild_counts.values()), **mild_counts, "first_problem": first_problem},
    )

    full_nonzero = np.concatenate(
        ([0], np.cumsum((table_full.counts != 0).astype(np.int64)))
    )

    def full_hits(lo: int, hi_exclusive: int) -> int:
        hi_exclusive = min(hi_exclusive, table_full.limit + 1)
        if hi_exclusive <= lo:
            return 0
        return int(full_nonzero[hi_exclusive] - full_nonzero[lo])

    if ell == 3:
        report.add(
            "greedy-window-within-modulus",
            Verdict.PASS if 25**27 * N**8 < M**27 else Verdict.FAIL,
            {"compare": "25^27 * N^8 < M^27", "N": N, "M": M},
        )
    else:
        epsilon = (Fraction(1) / sigma - Fraction(4059, 16384)) / 2
        report.add(
            "window-exponent-positive",
            Verdict.PASS if epsilon > 0 else Verdict.FAIL,
            {"epsilon": fraction_str(epsilon)},
        )
        if epsilon > 0:
            exponent = Fraction(4059, 16384) + epsilon
            ed, en = exponent.denominator, exponent.numerator
            report.add(
                "half-modulus-exceeds-window",
                Verdict.PASS if M**ed > 2**ed * N**en else Verdict.FAIL,
                {"compare": "(M/2)^d > N^n", "exponent": fraction_str(exponent)},
            )
            scan = scan_exceptional_set(4, N, epsilon, table_full)
            exceptional = set(scan.members)
            half = (M + 1) // 2
            window_points = set()
            for b, _b2 in good_pairs:
                window_points.update(range(max(1, b + half), min(N, b + M - 1) + 1))
            escaped = sorted(window_points - exceptional)
            report.add(
                "window-set-escapes-exceptional",
                Verdict.PASS if escaped else Verdict.FAIL,
                {
                    "window_points": len(window_points),
                    "exceptional": len(exceptional),
                    "escaped": len(escaped),
                    "epsilon": fraction_str(epsilon),
                },
            )
            summary["exceptional_density"] = fraction_str(scan.density)

    qualified_pairs = [
        (b1, b2) for b1, b2 in good_pairs if full_hits(b1 + 1, b2) > 0
    ]
    report.add(
        "representable-point-in-some-pair",
        Verdict.PASS if qualified_pairs else Verdict.FAIL,
        {"qualified": len(qualified_pairs), "good_pairs": len(good_pairs)},
    )

    if qualified_pairs:
        n1, n2 = qualified_pairs[0]
        degree_report = verify_degree_criterion(
            ell, q, J, E, N, K1, K2, n1, n2, table_lower, table_full
        )
        report.add(
            "degree-criterion",
            degree_report.verdict,
            {
                "n1": n1,
                "n2": n2,
                "per_condition": [c.to_json_dict() for c in degree_report.conditions],
                "summary": degree_report.summary,
            },
        )
        summary["largest_certifiable_J_below"] = degree_report.summary[
            "largest_certifiable_J_below"
        ]
    else:
        report.add("degree-criterion", Verdict.FAIL, "no qualifying pair available")

    return report


def _display(x: Fraction) -> str:
    return decimal_str(x, 6)


# ---------------------------------------------------------------------------
# Certificate wire formats
# ---------------------------------------------------------------------------


def half_function_from_spec(spec: dict, base_dir: Path | None = None) -> HalfFunction:
    """Build a series from its JSON description.

    Kinds: constant {value}, coefficients {entries|values, c?, label?},
    rep-table {path} or {ell, s, limit}, combination {alphas, parts}.
    """
    kind = spec.get("kind")
    if kind == "constant":
        return HalfFunction.constant(int(spec["value"]))
    if kind == "coefficients":
        if "entries" in spec:
            values = {int(n): int(a) for n, a in spec["entries"]}
        else:
            values = {n: int(a) for n, a in enumerate(spec["values"])}
        c = parse_fraction(spec["c"]) if "c" in spec else None
        return HalfFunction.from_coefficients(
            values, c=c, label=spec.get("label", "poly")
        )
    if kind == "rep-table":
        if "path" in spec:
            path = Path(spec["path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return HalfFunction.from_table(read_table_binary(path))
        params = WaringParams(int(spec["ell"]), int(spec["s"]))
        return HalfFunction.from_table(sieve_rep(params, int(spec["limit"])))
    if kind == "combination":
        parts = [half_function_from_spec(p, base_dir) for p in spec["parts"]]
        return linear_combination([int(a) for a in spec["alphas"]], parts)
    raise ValueError(f"unknown half-function kind {kind!r}")


def nested_certificate_from_json(
    obj: dict, base_dir: Path | None = None
) -> NestedGapsCertificate:
    """Parse the nested-gaps certificate wire format."""
    return NestedGapsCertificate(
        q=int(obj["q"]),
        H=parse_fraction(obj["H"]),
        K1=int(obj["K1"]),
        K2=int(obj["K2"]),
        K_prime=int(obj["K_prime"]),
        n1=int(obj["n1"]),
        n2=int(obj["n2"]),
        n_prime=int(obj["n_prime"]),
        E=parse_fraction(obj["E"]),
        E_prime=parse_fraction(obj["E_prime"]),
        f=half_function_from_spec(obj["f"], base_dir),
        g=half_function_from_spec(obj["g"], base_dir),
        f_spec=obj["f"],
        g_spec=obj["g"],
    )
