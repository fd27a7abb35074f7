"""
Witness points (y_k, j_k).

A witness is the midpoint of a long component of U_(2k+1), buffered by
||q_(t_k) alpha|| on both sides, whose orbit keeps away from 0 and |J| for
q_(t_k) + 1 steps, on which T and T_(2k+1) agree for 2 q_(t_k) steps, and
which returns to its own component and level after q_(t_k) steps.
"""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Optional

import structlog

from ergoflow.birkhoff.engine import closest_approach
from ergoflow.cf.arithmetic import dist_to_int
from ergoflow.core.exceptions import WitnessNotFoundError
from ergoflow.core.logforms import fraction_str
from ergoflow.core.reports import CheckResult, VerificationReport
from ergoflow.construction.models import ConstructionState, WitnessCertificate
from ergoflow.geometry.metric import product_dist
from ergoflow.geometry.models import Arc, TorusPoint
from ergoflow.skew.models import SkewConfig
from ergoflow.skew.system import lattice_for, skew_apply, slit_length
from ergoflow.skew.tower import build_tower, coincidence_set

logger = structlog.get_logger(__name__)

# longest components examined before a stage is reported below the witness regime
MAX_CANDIDATES = 128


def _inside(arc: Arc, x: Fraction, buffer: Fraction = Fraction(0)) -> bool:
    """x in the open arc shrunk by buffer on both sides."""
    for shifted in (x, x + 1):
        if arc.left + buffer < shifted < arc.right - buffer:
            return True
    return False


def coincidence_break(cfg: SkewConfig, m: int, y: Fraction, horizon: int) -> Optional[int]:
    """
    First w < horizon with y + w alpha in J minus J^m, or None.

    T^k and T_m^k agree at (y, j) for every k < horizon iff there is none.
    """
    full = slit_length(cfg)
    truncated = slit_length(cfg, m)
    if full == truncated:
        return None
    lattice = lattice_for(cfg, y, truncated)
    denom, step, slit = lattice
    lo = lattice.encode(truncated)
    x = lattice.encode(y % 1)
    for w in range(1, horizon):
        x += step
        if x >= denom:
            x -= denom
        if lo <= x < slit:
            return w
    return None


class _Search:
    """Shared data of one witness search."""

    def __init__(self, state: ConstructionState, k: int):
        record = state.record(k)
        self.k = k
        self.m = record.level
        self.cfg = state.config()
        self.alpha = self.cfg.angle
        self.q_t = state.q(record.t)
        self.buffer = dist_to_int(self.q_t, self.alpha)
        self.radius = Fraction(1, state.params.clearance * self.q_t)
        self.slit = slit_length(self.cfg)
        self.tower = build_tower(self.cfg, self.m)
        self.arcs = self.tower.U.arcs()

    def centres(self) -> list[Fraction]:
        return [Fraction(0), self.slit]

    def examine(self, index: int) -> tuple[Optional[WitnessCertificate], str]:
        """Certificate for the midpoint of arc `index`, or the filter that rejected it."""
        arc = self.arcs[index]
        y = arc.midpoint % 1
        if not _inside(arc, y, self.buffer):
            return None, "short"
        clearance = closest_approach(self.alpha, y, self.q_t + 1, self.centres())
        if clearance < self.radius:
            return None, "omega"
        horizon = 2 * self.q_t
        if coincidence_break(self.cfg, self.m, y, horizon) is not None:
            return None, "coincidence"
        start = TorusPoint(y, arc.level)
        back = skew_apply(self.cfg.truncated(self.m), start, self.q_t)
        if back.level != arc.level or not _inside(arc, back.x):
            return None, "return"
        cert = WitnessCertificate(
            k=self.k,
            y=y,
            j=arc.level,
            component_index=index,
            component_left=arc.left,
            component_right=arc.right,
            buffer=self.buffer,
            omega_clearance=clearance,
            clearance_bound=self.radius,
            coincidence_horizon=horizon,
            return_point=back.x,
            displacement=product_dist(start, back),
            diagnostics=self.diagnostics(),
        )
        return cert, "ok"

    def diagnostics(self) -> dict[str, Fraction]:
        """Measure terms: admissible >= buffered - coincidence - omega."""
        buffered = sum(
            (max(Fraction(0), arc.length - 2 * self.buffer) / 2 for arc in self.arcs), Fraction(0)
        )
        gap = self.slit - slit_length(self.cfg, self.m)
        coincidence = min(Fraction(1), (2 * self.q_t - 1) * gap)
        omega = min(Fraction(1), 2 * (self.q_t + 1) * 2 * self.radius)
        return {
            "short_component_defect": self.tower.U.measure() - buffered,
            "coincidence_defect": coincidence,
            "omega_bound": omega,
            "admissible_lower_bound": buffered - coincidence - omega,
        }


def witness_points(
    state: ConstructionState, k: int, workers: int = 1, max_candidates: int = MAX_CANDIDATES
) -> tuple[TorusPoint, WitnessCertificate]:
    """
    The witness (y_k, j_k) of stage k with its certificate.

    The max_candidates longest components are scanned by decreasing length
    (ties by level, then left end) and the first midpoint passing every filter
    wins; with several workers the
    candidates are examined in ordered batches, so the choice does not depend
    on the worker count.

    Raises:
        WitnessNotFoundError: If no midpoint passes, with the measure diagnostics.
    """
    search = _Search(state, k)
    order = sorted(range(len(search.arcs)), key=lambda i: (-search.arcs[i].length, i))[:max_candidates]
    rejected: dict[str, int] = {}
    batch = max(1, workers)
    with ThreadPoolExecutor(max_workers=batch) as executor:
        for offset in range(0, len(order), batch):
            chunk = order[offset:offset + batch]
            for cert, reason in executor.map(search.examine, chunk):
                if cert is not None:
                    logger.info(
                        "Witness found",
                        k=k,
                        y=fraction_str(cert.y),
                        j=cert.j,
                        component=cert.component_index,
                        clearance=fraction_str(cert.omega_clearance),
                    )
                    return cert.point, cert
                rejected[reason] = rejected.get(reason, 0) + 1
    diagnostics = {key: fraction_str(value) for key, value in search.diagnostics().items()}
    diagnostics.update({f"rejected_{key}": str(count) for key, count in sorted(rejected.items())})
    diagnostics["examined"] = str(len(order))
    logger.warning("Witness not found", k=k, **diagnostics)
    raise WitnessNotFoundError(k, diagnostics)


def verify_witness(state: ConstructionState, cert: WitnessCertificate) -> VerificationReport:
    """
    Re-check a certificate from scratch with the skew and geometry layers.

    Uses the exact coincidence set and the full map T, not the lattice scans of
    the search.
    """
    k = cert.k
    record = state.record(k)
    m = record.level
    cfg = state.config()
    alpha = cfg.angle
    q_t = state.q(record.t)
    buffer = dist_to_int(q_t, alpha)
    point = cert.point
    report = VerificationReport(title=f"witness.k{k}").with_constants(
        k=k, q_t=q_t, clearance=state.params.clearance
    )
    sample = f"({fraction_str(cert.y)}, {cert.j})"

    arc = build_tower(cfg, m).U.component_of(point)
    holds = (
        arc is not None
        and arc.left == cert.component_left
        and arc.right == cert.component_right
        and _inside(arc, cert.y, buffer)
    )
    report.add(
        CheckResult.exact("witness.component", holds, value=buffer, k=k, sample=sample,
                          detail="inside the buffered component of U_(2k+1)")
    )

    clearance = closest_approach(alpha, cert.y, q_t + 1, [0, slit_length(cfg)])
    bound = Fraction(1, state.params.clearance * q_t)
    report.add(
        CheckResult.exact(
            "witness.clearance",
            clearance >= bound and clearance == cert.omega_clearance,
            value=clearance,
            bound=bound,
            margin=clearance - bound,
            k=k,
            sample=sample,
        )
    )

    horizon = 2 * q_t
    agree = coincidence_set(cfg, m, horizon - 1)
    report.add(
        CheckResult.exact("witness.coincidence", agree.contains(point), value=horizon, k=k,
                          sample=sample, detail="T^i = T_(2k+1)^i for i < 2 q_(t_k)")
    )

    back = skew_apply(cfg, point, q_t)
    returned = arc is not None and back.level == cert.j and _inside(arc, back.x)
    report.add(
        CheckResult.exact("witness.return", returned, value=back.x, k=k, sample=sample,
                          detail="same component and level after q_(t_k) steps")
    )
    moved = product_dist(point, back)
    report.add(
        CheckResult.exact("witness.displacement", moved == buffer, value=moved, bound=buffer, k=k,
                          sample=sample)
    )
    report.compute_summary()
    return report


def attach_witnesses(
    state: ConstructionState, workers: int = 1
) -> tuple[ConstructionState, VerificationReport]:
    """
    Search a witness for every stage without one.

    A stage below the asymptotic regime gets an informational row with the
    measure diagnostics instead of a placeholder point.
    """
    report = VerificationReport(title="witnesses").with_constants(**state.params.constants())
    found = list(state.witnesses)
    for record in state.records:
        cert = state.witness(record.k)
        if cert is None:
            try:
                _, cert = witness_points(state, record.k, workers)
            except WitnessNotFoundError as exc:
                detail = ", ".join(f"{key}={value}" for key, value in exc.diagnostics.items())
                report.add(
                    CheckResult.info("witness.threshold_not_reached", k=record.k, detail=detail)
                )
                continue
            found.append(cert)
        report.extend(verify_witness(state, cert))
    report.compute_summary()
    return state.with_witnesses(found), report
