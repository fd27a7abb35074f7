"""
The built-in verification suites.

Each suite maps one family of explicit inequalities onto the verifiers of the
engine packages and collects their rows in one report.
"""

from fractions import Fraction
from itertools import combinations

import structlog

from ergoflow.birkhoff.bounds import SumMode, class_threshold, gamma_bounds_check, phi_sum_check
from ergoflow.birkhoff.engine import admissible_samples, dk_check
from ergoflow.birkhoff.models import PiecewiseFunction
from ergoflow.cf.arithmetic import angle_denominator, class_members, denominators, sandwich_report, verify_same_cell
from ergoflow.construction.conditions import weighted_sum_report
from ergoflow.construction.witness import attach_witnesses
from ergoflow.core.exceptions import PreconditionError
from ergoflow.core.reports import CheckResult, VerificationReport
from ergoflow.flow.criterion import criterion_report
from ergoflow.flow.probes import ue_probe
from ergoflow.flow.rigidity import build_rigidity_set, rigidity_report
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import TorusPoint
from ergoflow.roof.functions import roof_spec_for
from ergoflow.roof.regions import phi_bounds_report, psi_decompose_check, variation_report
from ergoflow.skew.tower import build_tower, structure_report
from ergoflow.suites.base import SuiteContext, VerificationSuite

logger = structlog.get_logger(__name__)


# regions A_m..F_m and the phi sums only exist from level 2 on
REGION_START = 2


def _levels(context: SuiteContext, start: int = 1) -> range:
    return range(start, len(context.schedule.even_checkpoints) + 1)


def _in_tower(cfg, m: int, x: Fraction) -> TorusPoint:
    """The level of x that lies in U_m."""
    tower = build_tower(cfg, m)
    z = TorusPoint(x, 0)
    return z if tower.U.contains(z) else TorusPoint(x, 1)


class DenjoyKoksmaSuite(VerificationSuite):
    name = "dk"
    title = "Denjoy-Koksma"
    description = "|S_(q_n) F - q_n int F| <= Var F for step functions"

    FUNCTIONS = (
        PiecewiseFunction.step([(0, Fraction(1, 3), 1), (Fraction(1, 4), Fraction(3, 4), -2)], label="two-step"),
        PiecewiseFunction.step(
            [(Fraction(i, 7), Fraction(i, 7) + Fraction(1, 11), i % 3 - 1) for i in range(7)], label="comb"
        ),
    )

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        cfg = context.config()
        top = context.largest_index()
        samples = [Fraction(2 * i + 1, 2 * context.samples) for i in range(context.samples)]
        for n in range(1, (top or 0) + 1):
            for f in self.FUNCTIONS:
                for row in dk_check(f, cfg.alpha, n, samples, context.bits):
                    report.add_sum(row)
        report.compute_summary()
        return report


class GammaSuite(VerificationSuite):
    name = "gamma"
    title = "gamma' and gamma'' sums"
    description = "Closest-return, partial-sum and sandwich bounds for the g-part of the roof"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        cfg = context.config()
        spec = roof_spec_for(cfg, context.A)
        top = context.largest_index(minimum=2)
        if top is None:
            report.add(CheckResult.info("gamma.skipped", detail="no q_n within max_q"))
        for n in range(2, (top or 1) + 1):
            q = angle_denominator(cfg.alpha, n)
            xs = admissible_samples(cfg.alpha, n, context.samples, Fraction(1, 8 * q), [spec.x0, spec.x1])
            for x in xs:
                for row in gamma_bounds_check(cfg.alpha, spec, n, x, bits=context.bits):
                    report.add_sum(row)
        report.compute_summary()
        return report


class TowerSuite(VerificationSuite):
    name = "tower"
    title = "Tower structure"
    description = "Invariance, discontinuities, involution and near-zero inclusions of U_m"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        cfg = context.config()

        def check(m: int) -> None:
            report.extend(structure_report(build_tower(cfg, m), cfg))

        for m in _levels(context):
            self.guarded(report, f"m = {m}", lambda m=m: check(m), k=m)
        report.compute_summary()
        return report


class PsiSuite(VerificationSuite):
    name = "psi"
    title = "phi decomposition"
    description = "phi_(alpha,m) equals its six-term region decomposition"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        cfg = context.config()
        grid = 16 * context.samples
        sample = [Fraction(2 * i + 1, 2 * grid) for i in range(grid)]
        for m in _levels(context, REGION_START):
            self.guarded(
                report, f"m = {m}", lambda m=m: report.extend(psi_decompose_check(cfg, m, sample)), k=m
            )
        report.compute_summary()
        return report


class VariationSuite(VerificationSuite):
    name = "variations"
    title = "Region variations"
    description = "Variation and integral bounds on the phi regions and the two-sided Phi bounds"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        cfg = context.config()
        for m in _levels(context, REGION_START):
            self.guarded(report, f"m = {m}", lambda m=m: report.extend(variation_report(cfg, m)), k=m)
            self.guarded(report, f"m = {m}", lambda m=m: report.extend(phi_bounds_report(cfg, m)), k=m)
        report.compute_summary()
        return report


class SingleAngleSuite(VerificationSuite):
    name = "single"
    title = "Single-angle phi sums"
    description = "|S_(q_n)(h_1') + q_n log q_n - q_n Phi| <= 43 q_n + 64 q_(n_m)^2"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        cfg = context.config()
        for m in _levels(context, REGION_START):
            n_m = context.schedule.checkpoint(m)
            n = context.largest_index(minimum=n_m + 2)
            if n is None:
                report.add(CheckResult.info("single.skipped", k=m, detail="no n > n_m + 1 within max_q"))
                continue
            q = angle_denominator(cfg.alpha, n)
            for x in admissible_samples(cfg.alpha, n, context.samples, Fraction(1, 16 * q)):

                def check(m=m, n=n, x=x) -> None:
                    for row in phi_sum_check(cfg, m, n, _in_tower(cfg, m, x), SumMode.SINGLE, bits=context.bits):
                        report.add_sum(row)

                self.guarded(report, f"x = {x}", check, k=m)
        report.compute_summary()
        return report


class _ClassSuite(VerificationSuite):
    """Shared set-up of the suites that compare class members."""

    members = 5

    def _members(self, context: SuiteContext, m: int):
        ell0 = class_threshold(context.schedule, m)
        if ell0 >= context.schedule.length:
            raise PreconditionError("schedule longer than ell_0", f"ell_0 = {ell0}")
        return ell0, class_members(context.schedule, ell0, self.members)


class ClassUniformSuite(_ClassSuite):
    name = "class"
    title = "Class-uniform phi sums"
    description = "|S_(q_n)(h_1') + q_n log q_n - q_n Phi_class| <= 155 q_n across class members"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        cfg = context.config()
        for m in _levels(context, REGION_START):

            def check(m=m) -> None:
                ell0, members = self._members(context, m)
                for member in members:
                    member_cfg = cfg.with_alpha(member)
                    q = angle_denominator(member, ell0)
                    xs = admissible_samples(member, ell0, context.samples, Fraction(1, 16 * q))
                    for x in xs:
                        z = _in_tower(member_cfg, m, x)
                        for row in phi_sum_check(member_cfg, m, ell0, z, SumMode.CLASS, bits=context.bits):
                            report.add_sum(row)

            self.guarded(report, f"m = {m}", check, k=m)
        report.compute_summary()
        return report


class DiscrepancySuite(_ClassSuite):
    name = "discrepancy"
    title = "Phi discrepancy"
    description = "|Phi_(alpha,m) - Phi_(beta,m)| < 12 (M + 1) for class members alpha, beta"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        cfg = context.config()
        for m in _levels(context, REGION_START):

            def check(m=m) -> None:
                ell0, members = self._members(context, m)
                for a, b in combinations(members, 2):
                    z = TorusPoint(Fraction(1, 2), 0)
                    rows = phi_sum_check(cfg.with_alpha(a), m, ell0, z, SumMode.DISCREPANCY, other=b,
                                         bits=context.bits)
                    for row in rows:
                        report.add_sum(row)

            self.guarded(report, f"m = {m}", check, k=m)
        report.compute_summary()
        return report


class CriterionSuite(VerificationSuite):
    name = "crit"
    title = "Non-mixing criterion"
    description = "Rigidity sets E_k and the non-mixing criterion at every stage with a witness"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        if context.state is None:
            report.add(CheckResult.info("crit.skipped", detail="the criterion needs a construction state"))
            report.compute_summary()
            return report
        state = context.state
        if not state.witnesses:
            state, witness_report = attach_witnesses(state, context.workers)
            report.extend(witness_report)
        for cert in state.witnesses:
            report.extend(rigidity_report(build_rigidity_set(state, cert.k, context.c)))
            report.extend(weighted_sum_report(state, cert.k, context.workers, context.bits))
        report.extend(criterion_report(state, context.c, context.C, workers=context.workers, bits=context.bits))
        report.compute_summary()
        return report


class UniqueErgodicitySuite(VerificationSuite):
    name = "ue"
    title = "Unique-ergodicity ingredients"
    description = "Deviation sets on U_2k, the odd-level sandwich and the decay of the even levels"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        cfg = context.config()
        k = len(context.schedule.even_checkpoints) // 2
        A = TorusIntervalSet.arc(0, Fraction(1, 2), levels=(0,))
        self.guarded(report, f"k = {k}", lambda: report.extend(ue_probe(cfg, k, A, context.eps)), k=k)
        report.compute_summary()
        return report


class ContinuedFractionSuite(VerificationSuite):
    name = "cf"
    title = "Continued fractions"
    description = "Best-approximation sandwich at every index of the schedule"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        report.extend(sandwich_report(context.schedule, context.config().angle))
        report.compute_summary()
        return report


class SameCellSuite(VerificationSuite):
    name = "cells"
    title = "Same-cell property"
    description = "k alpha and k beta share their q_n-cell for class members alpha, beta"

    def run(self, context: SuiteContext) -> VerificationReport:
        report = self.new_report(context)
        schedule = context.schedule
        qs = denominators(schedule)
        for n in range(1, schedule.length):
            if qs[n] > context.max_q:
                break
            members = class_members(schedule, n, 3)
            for a, b in combinations(members, 2):
                report.extend(verify_same_cell(a, b, n))
        report.compute_summary()
        return report


def get_all_suites() -> list[VerificationSuite]:
    """Get all built-in suites, in registry order."""
    return [
        DenjoyKoksmaSuite(),
        GammaSuite(),
        TowerSuite(),
        PsiSuite(),
        VariationSuite(),
        SingleAngleSuite(),
        ClassUniformSuite(),
        DiscrepancySuite(),
        CriterionSuite(),
        UniqueErgodicitySuite(),
        ContinuedFractionSuite(),
        SameCellSuite(),
    ]
