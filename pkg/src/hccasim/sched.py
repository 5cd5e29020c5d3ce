"""TXOP scheduling math: TSPEC model, service-interval assignment,
per-stream TXOP computation for the reference (mean-based) and adaptive
(next-frame-size) schedulers, and the admission control unit.

Times are integer nanoseconds throughout; the admission inequality is
evaluated exactly in integers, never in floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .phy import NS_PER_S, PhyParams, data_tx_time, tx_duration_ns, txop_overhead

OVERHEAD_PER_MSDU = "per_msdu"   # default: overhead scales with the MSDU count
OVERHEAD_LUMPED = "lumped"       # single per-TXOP overhead regardless of count
OVERHEAD_MODES = (OVERHEAD_PER_MSDU, OVERHEAD_LUMPED)


@dataclass(frozen=True)
class Tspec:
    """Negotiated traffic specification for one uplink stream."""

    mean_data_rate_bps: float      # rho
    nominal_msdu_bytes: int        # L
    max_msdu_bytes: int            # M
    delay_bound_ns: int            # D
    max_service_interval_ns: int   # MSI
    phys_rate_bps: int             # R

    def __post_init__(self):
        if self.mean_data_rate_bps <= 0:
            raise ValueError("mean_data_rate must be positive")
        if self.nominal_msdu_bytes <= 0 or self.max_msdu_bytes <= 0:
            raise ValueError("MSDU sizes must be positive")
        if self.nominal_msdu_bytes > self.max_msdu_bytes:
            raise ValueError(
                f"nominal MSDU {self.nominal_msdu_bytes} exceeds max {self.max_msdu_bytes}"
            )
        if self.delay_bound_ns <= 0 or self.max_service_interval_ns <= 0:
            raise ValueError("delay bound and MSI must be positive")
        if self.max_service_interval_ns > self.delay_bound_ns:
            raise ValueError("MSI must not exceed the delay bound")
        if self.phys_rate_bps <= 0:
            raise ValueError("phys_rate must be positive")


# Jurassic Park 1 MPEG-4 presets: (rho bit/s, L bytes, M bytes, D, MSI, R).
TSPEC_PRESETS = {
    "jurassic-low": Tspec(1.5e5, 770, 8154, 80 * 10**6, 40 * 10**6, 11_000_000),
    "jurassic-medium": Tspec(2.7e5, 1300, 8511, 80 * 10**6, 40 * 10**6, 11_000_000),
    "jurassic-high": Tspec(7.7e5, 3800, 16745, 80 * 10**6, 40 * 10**6, 11_000_000),
}


def tspec_preset(name: str) -> Tspec:
    try:
        return TSPEC_PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown TSPEC preset {name!r}; choose from {sorted(TSPEC_PRESETS)}"
        ) from None


@dataclass(frozen=True)
class Schedule:
    """Polling schedule: service interval as a divisor of the beacon interval
    plus the per-flow grants in polling (FIFO admission) order."""

    beacon_interval_ns: int
    si_ns: int
    divisor: int
    grants: tuple = ()   # ((flow_id, txop_ns), ...)


@dataclass
class AdmissionState:
    """Admitted flows plus the beacon budget the ACU protects."""

    beacon_interval_ns: int
    cp_reservation_ns: int = 0
    admitted: list = field(default_factory=list)   # [(flow_id, Tspec, txop_ns)]

    def utilization(self) -> float:
        """Sum of TXOP_i/SI for the current admitted set (0.0 when empty)."""
        if not self.admitted:
            return 0.0
        si, x = assign_si(self.beacon_interval_ns,
                          min_msi([t for _, t, _ in self.admitted]))
        return float(sum(g for _, _, g in self.admitted) * x) / self.beacon_interval_ns


@dataclass(frozen=True)
class AdmissionDecision:
    accepted: bool
    reason: str | None
    state: AdmissionState
    schedule: Schedule | None


def min_msi(tspecs) -> int:
    """Smallest maximum service interval over the given streams."""
    tspecs = list(tspecs)
    if not tspecs:
        raise ValueError("min_msi of an empty stream set is undefined")
    return min(t.max_service_interval_ns for t in tspecs)


def assign_si(beacon_ns: int, msi_min_ns: int) -> tuple[int, int]:
    """Pick the largest SI = beacon/x (integer x >= 1) with SI <= MSI_min.

    Returns (si_ns, x). si_ns is floored when x does not divide the beacon;
    callers that need drift-free boundaries should place them at
    (k * beacon_ns) // x.
    """
    if beacon_ns <= 0 or msi_min_ns <= 0:
        raise ValueError("beacon and MSI_min must be positive")
    x = max(1, -(-beacon_ns // msi_min_ns))
    return beacon_ns // x, x


def msdu_count(si_ns: int, t: Tspec) -> int:
    """Expected MSDU arrivals per SI at the mean rate: ceil(SI*rho / (L*8)),
    floored at 1 so every grant carries at least one MSDU's worth of time."""
    if si_ns <= 0:
        raise ValueError("si must be positive")
    bits_per_si = Fraction(si_ns) * Fraction(t.mean_data_rate_bps) / NS_PER_S
    n = math.ceil(bits_per_si / (t.nominal_msdu_bytes * 8))
    return max(1, n)


def reference_txop(t: Tspec, si_ns: int, p: PhyParams,
                   overhead_mode: str = OVERHEAD_PER_MSDU) -> int:
    """Mean-characteristics TXOP: the larger of time for N nominal MSDUs and
    time for one maximum MSDU, each plus overhead. Payload bits ride at the
    TSPEC physical rate."""
    if overhead_mode not in OVERHEAD_MODES:
        raise ValueError(f"unknown overhead_mode {overhead_mode!r}")
    n = msdu_count(si_ns, t)
    o_n = txop_overhead(n if overhead_mode == OVERHEAD_PER_MSDU else 1, p)
    o_1 = txop_overhead(1, p)
    nominal_arm = tx_duration_ns(n * t.nominal_msdu_bytes * 8, t.phys_rate_bps) + o_n
    max_arm = tx_duration_ns(t.max_msdu_bytes * 8, t.phys_rate_bps) + o_1
    return max(nominal_arm, max_arm)


def adaptive_txop(next_size_bytes: int, t: Tspec, p: PhyParams) -> int:
    """Feedback-driven TXOP: air time of exactly one MSDU of the reported
    next-frame size, plus single-MSDU overhead."""
    if next_size_bytes <= 0:
        raise ValueError(
            "next_size must be positive; a zero report gets a minimal poll grant"
        )
    return tx_duration_ns(next_size_bytes * 8, t.phys_rate_bps) + txop_overhead(1, p)


def minimal_txop(t: Tspec, p: PhyParams) -> int:
    """Grant for a station that reported an empty queue: just enough for a
    null data frame so the station stays pollable and can refresh its report."""
    return txop_overhead(1, p) + data_tx_time(0, p)


def admit(state: AdmissionState, candidate: Tspec, p: PhyParams,
          overhead_mode: str = OVERHEAD_PER_MSDU,
          flow_id: int | None = None) -> AdmissionDecision:
    """Admission control: recompute SI over admitted+candidate, recompute every
    admitted flow's TXOP at the new SI, and accept iff the total stays within
    the HCCA share of the beacon interval.

    The acceptance test sum(TXOP_i)/SI <= (T - T_CP)/T is evaluated exactly:
    with SI = T/x it reduces to sum(TXOP_i) * x <= T - T_CP.
    """
    if flow_id is None:
        flow_id = len(state.admitted)
    tspecs = [t for _, t, _ in state.admitted] + [candidate]
    si_ns, x = assign_si(state.beacon_interval_ns, min_msi(tspecs))
    txops = [reference_txop(t, si_ns, p, overhead_mode) for t in tspecs]
    budget_ns = state.beacon_interval_ns - state.cp_reservation_ns
    total = sum(txops)
    if total * x > budget_ns:
        reason = (
            f"utilization {float(total * x) / state.beacon_interval_ns:.4f} exceeds "
            f"{budget_ns / state.beacon_interval_ns:.4f} "
            f"(sum TXOP {total} ns over SI {si_ns} ns)"
        )
        return AdmissionDecision(False, reason, state, None)
    flows = [(fid, t, txop)
             for (fid, t, _), txop in zip(state.admitted, txops)]
    flows.append((flow_id, candidate, txops[-1]))
    new_state = AdmissionState(state.beacon_interval_ns, state.cp_reservation_ns, flows)
    schedule = Schedule(state.beacon_interval_ns, si_ns, x,
                        tuple((fid, g) for fid, _, g in flows))
    return AdmissionDecision(True, None, new_state, schedule)
