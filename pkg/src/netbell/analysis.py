"""Noise-robustness thresholds, the product-form matrix inequality, and
consolidated violation reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .builder import NetworkInequality, mixed_state_bound
from .errors import NegativeEntryError, UnsupportedMapError
from .evaluator import (
    MeasurementStrategy,
    check_conditions,
    evaluate_S,
    optimal_strategy,
)
from .fcbi import CHAINED, CHSH
from .qstate import TwoQubitState


def format_sig(x: float, digits: int = 12) -> float:
    """Round to a fixed number of significant digits for stable reports."""
    return float(f"{x:.{digits}g}")


@dataclass
class ViolationReport:
    """Everything a run produces: value, per-column correlators, bounds, flags.

    provenance records where the strategy came from, the seeds, and the
    tolerances, so a report is reproducible from its own contents.
    """

    S: float
    I: list[float]
    classical_bound: float
    quantum_bound: float
    mixed_bound: float
    flags: dict[str, bool]
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "S": format_sig(self.S),
            "I": [format_sig(v) for v in self.I],
            "classical_bound": format_sig(self.classical_bound),
            "quantum_bound": format_sig(self.quantum_bound),
            "mixed_bound": format_sig(self.mixed_bound),
            "flags": dict(self.flags),
            "provenance": self.provenance,
        }


def _uniform_map(ineq: NetworkInequality) -> tuple[str, int]:
    """(tag, k) if every peripheral FCBI is the same catalog entry."""
    tags = {m.tag for m in ineq.fcbi_map.values()}
    if len(tags) != 1:
        raise UnsupportedMapError(
            "threshold formulas need the same FCBI on every peripheral source"
        )
    tag = tags.pop()
    if tag == CHSH:
        return CHSH, 2
    if tag == CHAINED:
        ks = {m.k_param for m in ineq.fcbi_map.values()}
        if len(ks) != 1:
            raise UnsupportedMapError("mixed chain lengths are not supported")
        return CHAINED, ks.pop()
    raise UnsupportedMapError(
        f"no closed-form visibility threshold for the {tag} map"
    )


def werner_violation_threshold(
    ineq: NetworkInequality, schmidt: dict[int, float] | float = 1.0 / np.sqrt(2.0)
) -> float:
    """Threshold on the product of per-source visibilities for violation.

    For the two-input map on Schmidt states a|00> + b|11> the inequality is
    violated when prod_i v_i exceeds 1 / prod_i sqrt(1 + 4 a_i^2 b_i^2).
    For the k-input chained map (maximally entangled only) the threshold is
    ((k-1) / (k cos(pi/2k)))^l.

    Args:
        schmidt: Schmidt coefficient per peripheral source, or one value
            shared by all of them.
    """
    tag, k = _uniform_map(ineq)
    peripheral = sorted(ineq.leaves.peripheral_set)
    if not isinstance(schmidt, dict):
        schmidt = {s: float(schmidt) for s in peripheral}
    if tag == CHSH:
        prod = 1.0
        for s in peripheral:
            a = schmidt[s]
            b2 = 1.0 - a * a
            prod *= np.sqrt(1.0 + 4.0 * a * a * b2)
        return float(1.0 / prod)
    for s in peripheral:
        if abs(schmidt[s] - 1.0 / np.sqrt(2.0)) > 1e-12:
            raise UnsupportedMapError(
                "the chained-map threshold is closed-form only for maximally "
                "entangled sources; bisect mixed_state_bound instead"
            )
    return float(((k - 1.0) / (k * np.cos(np.pi / (2 * k)))) ** ineq.l)


def critical_visibility_uniform(ineq: NetworkInequality) -> float:
    """Per-source critical visibility for uniform maximally entangled Werner
    states: ((k-1)/(k cos(pi/2k)))^(l/M)."""
    _, k = _uniform_map(ineq)
    m = ineq.topology.n_sources
    base = (k - 1.0) / (k * np.cos(np.pi / (2 * k)))
    return float(base ** (ineq.l / m))


def mahler_check(X, tol: float = 1e-12, rank_tol: float = 1e-9) -> dict:
    """Check the product-form inequality for a non-negative matrix.

    lhs = sum_j (prod_i x_ji)^(1/q) and rhs = prod_i (sum_j x_ji)^(1/q)
    with q the number of columns; lhs never exceeds rhs, with equality
    exactly when X has rank one or a zero column.

    Returns:
        dict with keys holds, lhs, rhs, equality.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.size == 0:
        raise NegativeEntryError("expected a non-empty 2-d matrix")
    if np.any(X < 0):
        raise NegativeEntryError("matrix entries must be non-negative")
    q = X.shape[1]
    lhs = float(np.sum(np.prod(X, axis=1) ** (1.0 / q)))
    rhs = float(np.prod(np.sum(X, axis=0) ** (1.0 / q)))
    svals = np.linalg.svd(X, compute_uv=False)
    rank1 = bool(
        svals[0] > 0 and (len(svals) < 2 or svals[1] <= rank_tol * svals[0])
    )
    zero_column = bool(np.any(np.all(X == 0.0, axis=0)))
    return {
        "holds": lhs <= rhs + tol,
        "lhs": lhs,
        "rhs": rhs,
        "equality": rank1 or zero_column,
    }


def report(
    ineq: NetworkInequality,
    states: dict[int, TwoQubitState],
    strategy: MeasurementStrategy | str = "auto",
    seed: int = 0,
    restarts: int = 32,
    tol: float = 1e-9,
) -> ViolationReport:
    """Evaluate a strategy and assemble the full violation report."""
    source = "explicit"
    if isinstance(strategy, str):
        if strategy != "auto":
            raise ValueError(f"unknown strategy spec {strategy!r}")
        strategy = optimal_strategy(ineq, states)
        source = "auto"
    result = evaluate_S(ineq, states, strategy, tol=tol)
    mixed = mixed_state_bound(ineq, states, restarts=restarts, seed=seed)
    conditions = check_conditions(ineq, states, strategy)
    return ViolationReport(
        S=result.S,
        I=[float(v) for v in result.I],
        classical_bound=ineq.classical_bound,
        quantum_bound=ineq.quantum_bound,
        mixed_bound=mixed,
        flags={
            "violates_classical": bool(result.classical_violation),
            "saturates_quantum": bool(result.quantum_saturation),
            "conditions_met": bool(conditions.saturated),
        },
        provenance={
            "strategy": source,
            "seed": seed,
            "restarts": restarts,
            "tol": tol,
        },
    )
