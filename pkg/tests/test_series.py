import random
from fractions import Fraction

import pytest

from oracles import weighted_tail_bruteforce
from waring_gaps.repcount import WaringParams, sieve_rep
from waring_gaps.series import (
    CoverageError,
    Enclosure,
    GapVerdict,
    GrowthCertificateError,
    HalfFunction,
    eval_enclosure,
    eval_truncated,
    is_mild_gap,
    linear_combination,
    scan_mild_gaps,
    tail_norm,
)


class TestEnclosure:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Enclosure(Fraction(1), Fraction(0))

    def test_arithmetic(self):
        a = Enclosure(Fraction(1), Fraction(2))
        b = Enclosure(Fraction(-1), Fraction(3))
        assert (a + b).lo == 0 and (a + b).hi == 5
        assert a.scale(-2).lo == -4 and a.scale(-2).hi == -2
        prod = a * b
        assert prod.lo == -2 and prod.hi == 6
        assert a.power(3).lo == 1 and a.power(3).hi == 8

    def test_abs_bounds(self):
        assert Enclosure(Fraction(2), Fraction(3)).abs_lower() == 2
        assert Enclosure(Fraction(-3), Fraction(-2)).abs_lower() == 2
        assert Enclosure(Fraction(-1), Fraction(2)).abs_lower() == 0
        assert Enclosure(Fraction(-3), Fraction(2)).abs_upper() == 3

    def test_containment_and_json(self):
        outer = Enclosure(Fraction(0), Fraction(1))
        inner = Enclosure(Fraction(1, 4), Fraction(1, 2))
        assert outer.contains_enclosure(inner)
        assert outer.intersects(inner)
        assert inner.to_json_dict() == {"lo": "1/4", "hi": "1/2"}


class TestHalfFunction:
    def test_table_backed_coefficients(self, table_3_3):
        f = HalfFunction.from_table(table_3_3)
        assert f.coefficient(0) == 1
        assert f.coefficient(8) == 3
        assert f.c == 8
        assert f.label == "f_3_3"
        assert f.nonnegative

    def test_coverage_enforced(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        with pytest.raises(CoverageError):
            f.coefficient(table_3_1.limit + 1)

    def test_growth_certificate_enforced(self):
        f = HalfFunction.from_coefficients({0: 1, 5: 100}, c=Fraction(1))
        assert f.coefficient(0) == 1
        with pytest.raises(GrowthCertificateError):
            f.coefficient(5)

    def test_constant(self):
        one = HalfFunction.constant(1)
        assert one.coefficient(0) == 1
        assert one.coefficient(7) == 0
        zero = HalfFunction.constant(0)
        assert zero.c == 0

    def test_default_growth_certificate_is_tight(self):
        f = HalfFunction.from_coefficients({3: 8})
        assert f.c == Fraction(8, 4)


class TestLinearCombination:
    def test_cancellation_gives_zero_function(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        combo = linear_combination([1, -1], [f, f])
        assert all(combo.coefficient(n) == 0 for n in range(50))
        assert combo.c == 16

    def test_scaling(self, table_3_1):
        combo = linear_combination([2], [HalfFunction.from_table(table_3_1)])
        assert combo.coefficient(8) == 2

    def test_three_part_sum(self, table_3_1, table_3_2):
        combo = linear_combination(
            [1, 1, 1],
            [
                HalfFunction.constant(1),
                HalfFunction.from_table(table_3_1),
                HalfFunction.from_table(table_3_2),
            ],
        )
        assert combo.coefficient(9) == 0 + 0 + 2
        assert combo.coefficient(0) == 3

    def test_certificate_is_weighted_sum(self, table_3_1, table_3_2):
        f1 = HalfFunction.from_table(table_3_1)
        f2 = HalfFunction.from_table(table_3_2)
        combo = linear_combination([-3, 2], [f1, f2])
        assert combo.c == 3 * f1.c + 2 * f2.c
        assert not combo.nonnegative

    def test_length_mismatch(self, table_3_1):
        with pytest.raises(ValueError):
            linear_combination([1, 2], [HalfFunction.from_table(table_3_1)])


class TestTailNorm:
    def test_zero_function_majorant(self):
        f = HalfFunction(lambda n: 0, c=Fraction(3), label="zero_fn")
        tail = tail_norm(f, 5, 10)
        assert tail.lo == 0
        assert tail.hi <= 8 * 3 * 10 * Fraction(1, 32)

    def test_certified_zero_tail_is_exact(self):
        f = HalfFunction.from_coefficients({0: 1, 5: 1})
        tail = tail_norm(f, 6, 10)
        assert tail.lo == tail.hi == 0

    def test_linear_coefficients_stay_below_majorant(self):
        f = HalfFunction(lambda n: n + 1, c=Fraction(1), label="linear")
        tail = tail_norm(f, 1, 90)
        # exact value of the weighted tail at 1 is 6; the majorant gives 8
        assert tail.lo < 6 < tail.hi
        assert tail.hi <= 8

    def test_single_cube_series_partial_sum(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        tail = tail_norm(f, 9, 70)
        assert tail.lo == Fraction(1, 2**18) + Fraction(1, 2**55)
        assert tail.hi - tail.lo <= 8 * f.c * 70 * Fraction(1, 2**61)

    def test_majorant_formula_at_cutoff(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        tail = tail_norm(f, 9, 60)
        assert tail.lo == Fraction(1, 2**18)
        assert tail.hi - tail.lo <= 8 * f.c * 60 * Fraction(1, 2**51)

    def test_rejects_bad_window(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        with pytest.raises(ValueError):
            tail_norm(f, 0, 5)
        with pytest.raises(ValueError):
            tail_norm(f, 5, 4)


class TestMildGap:
    def test_two_term_series_witness(self):
        f = HalfFunction.from_coefficients({0: 1, 5: 1})
        check = is_mild_gap(f, 1, 4, Fraction(1))
        assert check.is_witness
        assert check.witness.tail_enclosure.lo == 1
        assert check.witness.tail_enclosure.hi == 1

    def test_three_cube_witness(self, table_3_3):
        f = HalfFunction.from_table(table_3_3)
        check = is_mild_gap(f, 4, 4, Fraction(8))
        assert check.is_witness
        w = check.witness
        assert w.zero_checked_up_to == 7
        assert w.tail_enclosure.hi <= 8

    def test_zero_run_rejection(self, table_3_3):
        f = HalfFunction.from_table(table_3_3)
        check = is_mild_gap(f, 4, 5, Fraction(8))
        assert check.verdict is GapVerdict.REJECTED
        assert check.failed_clause == "zero-run"
        assert "8" in check.detail

    def test_definite_tail_rejection(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        check = is_mild_gap(f, 2, 6, Fraction(1, 2))
        assert check.verdict is GapVerdict.REJECTED
        assert check.failed_clause == "tail-norm"

    def test_inconclusive_band_distinct_from_rejection(self):
        table = sieve_rep(WaringParams(3, 1), 40)
        f = HalfFunction.from_table(table)
        base = tail_norm(f, 8, 41)
        assert base.lo < base.hi
        bound = (base.lo + base.hi) / 2
        check = is_mild_gap(f, 2, 6, bound)
        assert check.verdict is GapVerdict.INCONCLUSIVE
        assert "inside the tail enclosure" in check.detail

    def test_gap_at_index_zero_permitted(self):
        f = HalfFunction.from_coefficients({5: 1})
        check = is_mild_gap(f, 0, 5, Fraction(2))
        assert check.is_witness

    def test_witness_json_fields(self, table_3_3):
        f = HalfFunction.from_table(table_3_3)
        obj = is_mild_gap(f, 4, 4, Fraction(8)).witness.to_json_dict()
        assert set(obj) == {"function", "n", "K", "E", "zero_checked_up_to", "tail_enclosure"}
        assert obj["function"] == "f_3_3"
        assert obj["E"] == "8"


class TestScanMildGaps:
    def test_three_cubes_window(self, table_3_3):
        f = HalfFunction.from_table(table_3_3)
        scan = scan_mild_gaps(f, 0, 100, 4, Fraction(8))
        assert [w.n for w in scan.witnesses] == [
            4, 11, 12, 18, 19, 20, 30, 37, 38, 39, 44, 45, 46, 47, 48, 49, 50,
            56, 57, 58, 67, 74, 75, 76, 82, 83, 84, 85, 86, 93, 94, 95,
        ]
        assert scan.inconclusive == ()
        # runs whose weighted tail exceeds the bound are excluded for good
        assert {31, 68, 87}.isdisjoint({w.n for w in scan.witnesses})

    def test_single_cube_window(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        scan = scan_mild_gaps(f, 2, 3, 6, Fraction(2))
        assert [w.n for w in scan.witnesses] == [2]
        tail = scan.witnesses[0].tail_enclosure
        assert tail.lo == 1 + Fraction(1, 2**19) + Fraction(1, 2**56)

    def test_empty_range(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        scan = scan_mild_gaps(f, 10, 10, 2, Fraction(1))
        assert scan.witnesses == () and scan.inconclusive == ()

    def test_witness_replay(self, table_3_3):
        f = HalfFunction.from_table(table_3_3)
        scan = scan_mild_gaps(f, 0, 60, 4, Fraction(8))
        counts = table_3_3.counts.tolist()
        for w in scan.witnesses:
            assert all(counts[w.n + k] == 0 for k in range(w.gap_length))
            exact_partial = weighted_tail_bruteforce(
                counts[: w.n + w.gap_length + 120], w.n + w.gap_length
            )
            assert w.tail_enclosure.lo <= exact_partial
            assert exact_partial <= w.tail_enclosure.hi + Fraction(1, 2**100)
            # a longer cutoff can only confirm the witness
            again = is_mild_gap(f, w.n, w.gap_length, w.tail_bound,
                                cutoff=w.n + w.gap_length + 150)
            assert again.is_witness


class TestEvalTruncated:
    def test_single_cube_nine_terms(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        assert eval_truncated(f, 2, 9) == Fraction(385, 256)

    def test_zero_terms(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        assert eval_truncated(f, 5, 0) == 0

    def test_constant(self):
        assert eval_truncated(HalfFunction.constant(1), 7, 5) == 1

    @pytest.mark.parametrize("q", [2, 3, 7, 10])
    @pytest.mark.parametrize("terms", [1, 5, 17, 40])
    def test_denominator_divides_power(self, table_3_3, q, terms):
        f = HalfFunction.from_table(table_3_3)
        value = eval_truncated(f, q, terms)
        assert q ** (terms - 1) % value.denominator == 0

    def test_rejects_small_q(self, table_3_1):
        with pytest.raises(ValueError):
            eval_truncated(HalfFunction.from_table(table_3_1), 1, 5)

    def test_rejects_non_integer_q(self, table_3_1):
        with pytest.raises(TypeError):
            eval_truncated(HalfFunction.from_table(table_3_1), 2.5, 5)


class TestEvalEnclosure:
    def test_theta_two_lower_end(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        enc = eval_enclosure(f, 2, 28)
        assert enc.lo == Fraction(385, 256) + Fraction(1, 2**27)
        assert enc.width < Fraction(1, 2**50)

    def test_zero_function(self):
        enc = eval_enclosure(HalfFunction.constant(0), 3, 10)
        assert enc.lo == enc.hi == 0

    def test_three_cube_series_vs_interval_cube(self, table_3_1, table_3_3):
        direct = eval_enclosure(HalfFunction.from_table(table_3_3), 2, 30)
        cubed = eval_enclosure(HalfFunction.from_table(table_3_1), 2, 30).power(3)
        assert direct.intersects(cubed)

    def test_signed_series_two_sided(self, table_3_1):
        f = HalfFunction.from_table(table_3_1)
        combo = linear_combination([-1], [f])
        enc = eval_enclosure(combo, 2, 28)
        value = eval_truncated(combo, 2, 28)
        assert enc.lo < value < enc.hi

    @pytest.mark.parametrize("q", [2, 3])
    def test_nesting_as_terms_grow(self, table_3_3, q):
        f = HalfFunction.from_table(table_3_3)
        enclosures = [eval_enclosure(f, q, terms) for terms in (5, 10, 20, 40, 64)]
        for wider, narrower in zip(enclosures, enclosures[1:]):
            assert wider.contains_enclosure(narrower)


class TestTailBounds:
    def test_linear_growth_bound_randomized(self):
        # |a_n| <= c (n+1) forces the weighted tail at n0 below 8 c n0
        rng = random.Random(20260809)
        for _ in range(200):
            c = rng.randint(1, 10)
            n0 = rng.randint(1, 50)
            length = n0 + rng.randint(50, 150)
            values = [rng.choice([-1, 1]) * rng.randint(0, c * (n + 1)) for n in range(length)]
            exact = weighted_tail_bruteforce(values, n0)
            discarded = Fraction(2 * c * (length + 2) + 2 * c, 2 ** (length - n0))
            assert exact + discarded <= 8 * c * n0

    def test_capped_window_bound_randomized(self):
        # caps (3/2)^i E on a window of length kappa >= log2(N) keep the tail below 5E
        rng = random.Random(42)
        for _ in range(200):
            c = rng.randint(1, 10)
            e_bound = 8 * c * rng.randint(1, 3)
            n0 = rng.randint(1, 50)
            kappa = rng.randint(20, 60)
            total = n0 + kappa
            assert kappa >= total.bit_length()  # 2^kappa >= N = n0 + kappa
            length = total + rng.randint(40, 80)
            values = []
            for n in range(length):
                cap = c * (n + 1)
                if n0 <= n < n0 + kappa:
                    cap = min(cap, int(Fraction(3, 2) ** (n - n0) * e_bound))
                values.append(rng.choice([-1, 1]) * rng.randint(0, cap))
            exact = weighted_tail_bruteforce(values, n0)
            discarded = Fraction(2 * c * (length + 2) + 2 * c, 2 ** (length - n0))
            assert exact + discarded <= 5 * e_bound
