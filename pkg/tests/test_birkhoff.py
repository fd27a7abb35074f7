"""
Tests for Birkhoff sums, variations, integrals and the sum bounds.
"""

import random
from fractions import Fraction

import pytest

from ergoflow.birkhoff.bounds import (
    SumMode,
    class_threshold,
    gamma_bounds_check,
    gamma_prime,
    h1_prime_function,
    phi_sum_check,
    reduction_check,
    u_point,
)
from ergoflow.birkhoff.engine import (
    admissible_samples,
    birkhoff_sum,
    closest_approach,
    cocycle_check,
    dk_check,
    integral,
    partial_sums,
    variation,
)
from ergoflow.birkhoff.models import Piece, PiecewiseFunction, Term, TermKind
from ergoflow.cf.arithmetic import class_members, representative
from ergoflow.cf.models import DigitSchedule
from ergoflow.core.exceptions import (
    InfiniteVariationError,
    NotBoundedVariationError,
    PreconditionError,
    SingularOrbitError,
    SingularPointError,
)
from ergoflow.core.logforms import LogLinearForm
from ergoflow.core.reports import CheckStatus
from ergoflow.geometry.models import TorusPoint
from ergoflow.roof import roof_spec_for
from ergoflow.skew import SkewConfig
from ergoflow.skew.tower import build_tower

ALPHA = Fraction(4, 7)
HALF_STEP = PiecewiseFunction.step([(0, Fraction(1, 2), 1)], label="half")


class TestPiecewiseFunction:
    """Tests for PiecewiseFunction."""

    def test_must_cover_circle(self):
        """Test that pieces must cover [0, 1)."""
        with pytest.raises(ValueError):
            PiecewiseFunction([Piece(Fraction(0), Fraction(1, 2), ())])

    def test_step_values(self):
        """Test step values with overlap."""
        f = PiecewiseFunction.step([(0, Fraction(1, 2), 1), (Fraction(1, 4), Fraction(3, 4), 2)])
        assert f(Fraction(1, 8)) == 1
        assert f(Fraction(3, 8)) == 3
        assert f(Fraction(5, 8)) == 2
        assert f(Fraction(7, 8)) == 0

    def test_level_mask(self):
        """Test that a masked function vanishes off its level."""
        f = h1_prime_function()
        assert f(TorusPoint(Fraction(1, 4), 0)) == 0
        assert f(TorusPoint(Fraction(1, 4), 1)) == -4

    def test_pole(self):
        """Test evaluation at a pole."""
        term = Term(TermKind.INVERSE, Fraction(1), Fraction(1, 3))
        with pytest.raises(SingularPointError):
            term.value(Fraction(1, 3))


class TestBirkhoffSums:
    """Tests for exact and enclosed Birkhoff sums."""

    def test_exact_sum(self):
        """Test S_7 of the half-circle indicator under rotation by 4/7."""
        total = birkhoff_sum(ALPHA, HALF_STEP, 7, Fraction(0))
        assert total.is_exact
        assert total.lo == 4

    def test_enclosed_sum_contains_exact(self):
        """Test that the dyadic enclosure contains the exact sum."""
        exact = birkhoff_sum(ALPHA, HALF_STEP, 20, Fraction(1, 14), exact=True)
        enclosed = birkhoff_sum(ALPHA, HALF_STEP, 20, Fraction(1, 14), bits=64, exact=False)
        assert enclosed.contains(exact.lo)

    def test_partial_sums(self):
        """Test the stream of partial sums."""
        sums = list(partial_sums(ALPHA, HALF_STEP, 3, Fraction(0), bits=64))
        assert [s.lo for s in sums] == [0, 1, 1, 2]

    def test_skew_sum_respects_levels(self, toy_config):
        """Test a level-masked sum along a skew orbit."""
        f = PiecewiseFunction.from_parts(
            [(0, 1, Term(TermKind.CONSTANT, Fraction(1)))], level_mask=1
        )
        # levels along the orbit of (0, 0): 0, 0, 1, 1, 1, 1, 1
        assert birkhoff_sum(toy_config, f, 7, TorusPoint(Fraction(0), 0)).lo == 5

    def test_singular_orbit(self):
        """Test an orbit hitting a pole."""
        f = PiecewiseFunction.from_parts([(0, 1, Term(TermKind.INVERSE, Fraction(1), Fraction(1, 7)))])
        with pytest.raises(SingularOrbitError):
            birkhoff_sum(ALPHA, f, 3, Fraction(0))

    def test_cocycle(self):
        """Test S_(a+b) = S_a + S_b o R^a."""
        assert cocycle_check(ALPHA, HALF_STEP, 3, 5, Fraction(1, 14)).passed

    def test_closest_approach(self):
        """Test the closest approach of an orbit to 0."""
        assert closest_approach(ALPHA, Fraction(1, 14), 7, [0]) == Fraction(1, 14)
        with pytest.raises(ValueError):
            closest_approach(ALPHA, 0, 0, [0])

    def test_admissible_samples(self):
        """Test that admissible samples keep their clearance."""
        clearance = Fraction(1, 28)
        xs = admissible_samples(ALPHA, 3, 4, clearance)
        assert xs == sorted(xs)
        assert 0 < len(xs) <= 4
        assert all(closest_approach(ALPHA, x, 7, [0]) >= clearance for x in xs)


class TestVariationAndIntegral:
    """Tests for closed-form variation and integral."""

    def test_step_variation(self):
        """Test the variation of an indicator."""
        var = variation(HALF_STEP)
        assert var.is_exact
        assert var.lo == 2

    def test_step_integral(self):
        """Test the integral of an indicator."""
        assert integral(HALF_STEP).constant == Fraction(1, 2)

    def test_inverse_integral(self):
        """Test the integral of 1/||x|| over [1/4, 1/2)."""
        f = PiecewiseFunction.from_parts(
            [(Fraction(1, 4), Fraction(1, 2), Term(TermKind.INVERSE, Fraction(1), Fraction(0)))]
        )
        assert (integral(f) - LogLinearForm.log(2)).is_zero() is True

    def test_unbounded_function(self):
        """Test that a pole in a piece closure is rejected."""
        f = PiecewiseFunction.from_parts([(0, 1, Term(TermKind.INVERSE, Fraction(1), Fraction(0)))])
        assert not f.is_bounded()
        with pytest.raises(InfiniteVariationError):
            variation(f)
        with pytest.raises(NotBoundedVariationError):
            dk_check(f, ALPHA, 3, [Fraction(1, 14)])


class TestDenjoyKoksma:
    """Tests for the Denjoy-Koksma check."""

    def test_indicator(self):
        """Test the inequality for a step function."""
        reports = dk_check(HALF_STEP, ALPHA, 3, [Fraction(1, 14), Fraction(3, 14)], bits=64)
        assert len(reports) == 2
        assert all(r.status == CheckStatus.PASSED for r in reports)
        assert reports[0].q_n == 7

    def test_rows(self):
        """Test the report row conversions."""
        report = dk_check(HALF_STEP, ALPHA, 2, [Fraction(1, 14)], bits=64)[0]
        row = report.to_row()
        assert row["q_n"] == 2
        assert row["passed"] is True
        assert report.to_check().sample == "(1/14, 0)"

    @pytest.mark.parametrize("seed", range(6))
    def test_random_step_functions(self, seed):
        """Test the inequality for random step functions over random angles."""
        rng = random.Random(seed)
        schedule = DigitSchedule(digits=tuple(rng.randint(1, 5) for _ in range(rng.randint(6, 12))))
        alpha = representative(schedule)
        steps = []
        for _ in range(rng.randint(1, 4)):
            lo, hi = sorted(rng.sample(range(24), 2))
            steps.append((Fraction(lo, 23), Fraction(hi, 23), rng.randint(-3, 3)))
        f = PiecewiseFunction.step(steps, label=f"random-{seed}")
        samples = [Fraction(rng.randrange(1, 97), 97) for _ in range(3)]
        for n in range(1, schedule.length):
            reports = dk_check(f, alpha, n, samples, bits=64)
            assert all(r.status == CheckStatus.PASSED for r in reports), (seed, n)


class TestGammaBounds:
    """Tests for the gamma' and gamma'' bounds."""

    def test_pieces_recombine(self, desk_schedule):
        """Test that the weighted pieces add up to gamma'."""
        alpha = representative(desk_schedule)
        cfg = SkewConfig(alpha=alpha, schedule=desk_schedule)
        spec = roof_spec_for(cfg, Fraction(6, 5))
        x = admissible_samples(alpha, 5, 4, Fraction(1, 8 * 34), [spec.x0, spec.x1])[0]
        reports = gamma_bounds_check(alpha, spec, 5, x, bits=64)
        by_name = {r.name: r for r in reports}
        assert by_name["gamma.pieces"].status == CheckStatus.PASSED
        assert by_name["gamma.corollary"].status == CheckStatus.INFO
        assert by_name["gamma.second"].status == CheckStatus.INFO
        for name in ("gamma.closest_return", "gamma.partial"):
            assert by_name[name].status == CheckStatus.PASSED, name
        sandwich = [r for r in reports if r.name.startswith("gamma.sandwich.")]
        assert len(sandwich) == 10
        assert all(r.status == CheckStatus.PASSED for r in sandwich)
        assert gamma_prime(spec).poles == sorted({spec.x0, spec.x1})

    def test_class_threshold(self, desk_schedule):
        """Test ell_0 = min{ell : q_ell > q_(n_m)^2}."""
        assert class_threshold(desk_schedule, 1) == 3
        assert class_threshold(desk_schedule, 2) == 8


@pytest.fixture
def desk_config(desk_schedule) -> SkewConfig:
    """Provide the skew product over the desk representative."""
    return SkewConfig(alpha=representative(desk_schedule), schedule=desk_schedule)


class TestPhiSums:
    """Tests for the phi sum bounds and the reduction to the rotation."""

    def test_single_angle(self, desk_config):
        """Test the bound 43 q_n + 64 q_(n_m)^2 at q_9 = 197."""
        alpha = desk_config.alpha
        tower = build_tower(desk_config, 2)
        for x in admissible_samples(alpha, 9, 2, Fraction(1, 16 * 197)):
            (report,) = phi_sum_check(desk_config, 2, 9, u_point(tower, x), SumMode.SINGLE, bits=64)
            assert report.name == "phi.single"
            assert report.q_n == 197
            assert report.bound.contains(43 * 197 + 64 * 9**2)
            assert report.status == CheckStatus.PASSED

    def test_single_needs_long_orbit(self, desk_config):
        """Test that n must exceed n_m + 1."""
        z = u_point(build_tower(desk_config, 2), Fraction(1, 2))
        with pytest.raises(PreconditionError):
            phi_sum_check(desk_config, 2, 5, z, SumMode.SINGLE, bits=64)

    def test_class_uniform(self, desk_config, desk_schedule):
        """Test the class bound 155 q_n with its sub-margins 107 q_n and 48 q_n."""
        ell0 = class_threshold(desk_schedule, 2)
        q = 120
        for member in class_members(desk_schedule, ell0, 3):
            member_cfg = desk_config.with_alpha(member)
            tower = build_tower(member_cfg, 2)
            x = admissible_samples(member, ell0, 1, Fraction(1, 16 * q))[0]
            reports = phi_sum_check(member_cfg, 2, ell0, u_point(tower, x), SumMode.CLASS, bits=64)
            by_name = {r.name: r for r in reports}
            assert set(by_name) == {"phi.class.own", "phi.class.discrepancy", "phi.class"}
            assert by_name["phi.class.own"].bound.contains(107 * q)
            assert by_name["phi.class.discrepancy"].bound.contains(48 * q)
            assert by_name["phi.class"].bound.contains(155 * q)
            assert all(r.status == CheckStatus.PASSED for r in reports)

    def test_discrepancy(self, desk_config, desk_schedule):
        """Test |Phi_(alpha,m) - Phi_(beta,m)| < 12 (M + 1) with M = a_(n_m+1) = 3."""
        a, b, c = class_members(desk_schedule, class_threshold(desk_schedule, 2), 3)
        z = TorusPoint(Fraction(1, 2), 0)
        for first, second in ((a, b), (a, c), (b, c)):
            (report,) = phi_sum_check(
                desk_config.with_alpha(first), 2, 8, z, SumMode.DISCREPANCY, other=second, bits=64
            )
            assert report.name == "discrepancy"
            assert report.bound.contains(48)
            assert report.status == CheckStatus.PASSED

    def test_discrepancy_needs_other(self, desk_config):
        """Test that the discrepancy mode needs a second class member."""
        with pytest.raises(PreconditionError):
            phi_sum_check(desk_config, 2, 8, TorusPoint(Fraction(1, 2), 0), SumMode.DISCREPANCY)

    def test_reduction(self, desk_config):
        """Test that the h_1' sum over T_m equals the phi sum over the rotation."""
        tower = build_tower(desk_config, 2)
        for x in admissible_samples(desk_config.alpha, 5, 3, Fraction(1, 16 * 34)):
            z = u_point(tower, x)
            check = reduction_check(desk_config, 2, z, 34)
            assert check.name == "reduction"
            assert check.passed
            assert check.value == check.bound

    def test_reduction_outside_tower(self, desk_config):
        """Test that a point off U_m is rejected."""
        z = u_point(build_tower(desk_config, 2), Fraction(1, 2)).flipped()
        with pytest.raises(PreconditionError):
            reduction_check(desk_config, 2, z, 34)
