"""Node-power and utilization calculus.

"Power" here is a work rate in packets per second, not wattage: how fast a
node pushes out its own packets (over t_pp) and forwards neighbor packets
(over t_np), relative to how fast neighbor packets arrive. Utilization is the
ratio of outgoing to incoming work rate; a perfectly cooperative relay sits
at 1.0 and a selfish node below it.

The total over routes is computed two independent ways, as a ratio of rates
and in a factored form, and the two must agree; this redundancy is part of
the contract, not an optimization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import NoInputError, ZeroTimeError
from .model import TimeBudget

__all__ = [
    "PacketCounters",
    "PowerRates",
    "RouteUtilization",
    "power_out",
    "utilization_node",
    "utilization_node_factored",
    "utilization_total",
]

# Relative disagreement beyond this between the ratio form and the factored
# form means a real bug, not float noise.
_AGREEMENT_RTOL = 1e-9


@dataclass(frozen=True)
class PacketCounters:
    """Per-node packet counts over one observation window.

    k_pout: own packets sent out; k_nout: neighbor packets forwarded out;
    k_nin: neighbor packets received. Every packet received is neighbor
    traffic, so ``k_pin`` is an alias of ``k_nin``.
    """

    k_pout: float
    k_nout: float
    k_nin: float

    def __post_init__(self) -> None:
        if self.k_pout < 0 or self.k_nout < 0 or self.k_nin < 0:
            raise ValueError(f"packet counts must be >= 0, got {self}")
        if self.k_nout > self.k_nin:
            raise ValueError(
                "cannot forward more neighbor packets than received: "
                f"k_nout={self.k_nout} > k_nin={self.k_nin}"
            )

    @property
    def k_pin(self) -> float:
        return self.k_nin


@dataclass(frozen=True)
class PowerRates:
    """Work rates in packets per second; ``n_pout`` is the exact sum of parts."""

    n_ppout: float
    n_pnout: float
    n_pin: float

    @property
    def n_pout(self) -> float:
        return self.n_ppout + self.n_pnout


@dataclass(frozen=True)
class RouteUtilization:
    """Utilization of one route, 1-indexed."""

    route_index: int
    value: float


def _rate(count: float, time: float, what: str) -> float:
    # A zero count costs no work regardless of the time window; only a
    # nonzero count over a zero time is meaningless.
    if count == 0:
        return 0.0
    if time <= 0:
        raise ZeroTimeError(f"{what}: nonzero count {count} over non-positive time {time}")
    return count / time


def power_out(counters: PacketCounters, times: TimeBudget) -> PowerRates:
    """Outgoing and incoming work rates for one node."""
    return PowerRates(
        n_ppout=_rate(counters.k_pout, times.t_pp, "own-packet rate"),
        n_pnout=_rate(counters.k_nout, times.t_np, "forwarded-packet rate"),
        n_pin=_rate(counters.k_nin, times.t_np, "incoming rate"),
    )


def utilization_node(counters: PacketCounters, times: TimeBudget) -> float:
    """Utilization of one node: outgoing work rate over incoming work rate.

        U = (k_pout/t_pp + k_nout/t_np) / (k_nin/t_np)

    Raises NoInputError for an isolated node (k_nin = 0) and ZeroTimeError if
    a needed time component is not positive.
    """
    if counters.k_nin == 0:
        raise NoInputError("utilization undefined: node received no neighbor packets")
    if times.t_np <= 0:
        raise ZeroTimeError(f"t_np must be > 0, got {times.t_np}")
    if times.t_pp <= 0:
        raise ZeroTimeError(f"t_pp must be > 0, got {times.t_pp}")
    n_out = counters.k_pout / times.t_pp + counters.k_nout / times.t_np
    n_in = counters.k_nin / times.t_np
    return n_out / n_in


def utilization_node_factored(counters: PacketCounters, times: TimeBudget) -> float:
    """The same utilization with t_np distributed through the ratio:

        U = (k_pout * t_np / t_pp + k_nout) / k_nin

    Algebraically identical to :func:`utilization_node`; computed separately
    so the two routes stay independent checks on each other.
    """
    if counters.k_nin == 0:
        raise NoInputError("utilization undefined: node received no neighbor packets")
    if times.t_np <= 0:
        raise ZeroTimeError(f"t_np must be > 0, got {times.t_np}")
    if times.t_pp <= 0:
        raise ZeroTimeError(f"t_pp must be > 0, got {times.t_pp}")
    return (counters.k_pout * times.t_np / times.t_pp + counters.k_nout) / counters.k_nin


def per_route_utilization(
    per_route: Sequence[tuple[PacketCounters, TimeBudget]],
) -> list[RouteUtilization]:
    """Factored-form utilization of each route, 1-indexed."""
    return [
        RouteUtilization(route_index=i, value=utilization_node_factored(c, t))
        for i, (c, t) in enumerate(per_route, start=1)
    ]


def utilization_total(per_route: Sequence[tuple[PacketCounters, TimeBudget]]) -> float:
    """System utilization: sum of per-route utilization.

    Every route is evaluated through both the ratio form and the factored
    form; a relative disagreement beyond 1e-9 raises. The factored-form sum
    is returned. An empty route list is a vacuous sum, 0.0.
    """
    total_ratio = 0.0
    total_factored = 0.0
    for counters, times in per_route:
        u_ratio = utilization_node(counters, times)
        u_factored = utilization_node_factored(counters, times)
        scale = max(abs(u_ratio), abs(u_factored), 1.0)
        if abs(u_ratio - u_factored) > _AGREEMENT_RTOL * scale:
            raise ArithmeticError(
                f"utilization forms disagree: ratio={u_ratio!r} factored={u_factored!r}"
            )
        total_ratio += u_ratio
        total_factored += u_factored
    return total_factored
