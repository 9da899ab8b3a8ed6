"""Search machinery: network see-saw, local-hidden-variable oracle, and
topology discrimination.

The see-saw is a coordinate ascent over all Bloch-vector slots. Slots whose
input is only used in a single column admit an exact closed-form update
(the objective is linear in them); leaf slots enter every column and are
polished by projected gradient on the sphere. Restarts use sub-seeds
derived from the master seed, so results do not depend on execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iter_product

import numpy as np

from .builder import NetworkInequality
from .errors import (
    PartyCountMismatchError,
    TooFewLeavesError,
    TooLargeForExhaustiveError,
    UnsupportedFcbiError,
)
from .evaluator import MeasurementStrategy, QubitObservable, evaluate_S
from .fcbi import CHSH
from .qstate import TwoQubitState
from .topology import NetworkTopology, find_leaves

EXHAUSTIVE_CAP_BITS = 24
HIDDEN_SPACE_CAP = 2**12

VIOLATED = "VIOLATED"
BOUNDARY = "BOUNDARY"
NOT_FOUND = "NOT_FOUND"


@dataclass
class SearchReport:
    """Outcome of a randomized search."""

    best_value: float
    best_config: object
    restarts_used: int
    seed: int
    converged: bool
    history: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)


@dataclass
class LocalModel:
    """Source-local hidden-variable model.

    weights[s] is a distribution over the alphabet of source s;
    responses[p] has shape (inputs_p, prod of incident alphabet sizes) with
    +/-1 entries, incident sources ordered by ascending index.
    """

    cardinalities: dict[int, int]
    weights: dict[int, np.ndarray]
    responses: dict[int, np.ndarray]


def _normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 1e-14 else v


# ---------------------------------------------------------------------------
# Raw-strategy representation used inside the searches: a dict mapping
# (party, input, source) -> unnormalized 3-vector. Zero vectors are legal
# intermediates during affine-coefficient extraction.
# ---------------------------------------------------------------------------


def _to_strategy(raw: dict) -> MeasurementStrategy:
    strategy = MeasurementStrategy()
    for (party, inp, source), vec in raw.items():
        n = np.linalg.norm(vec)
        vec = vec / n if n > 1e-14 else np.array([0.0, 0.0, 1.0])
        strategy.slots[(party, inp, source)] = QubitObservable(vec)
    return strategy


class _CrossObjective:
    """S of a target inequality evaluated on strategies of a host network.

    The target supplies the leaf set, Delta coefficients, column count, and
    exponent 1/l; the host supplies the sources, states, and slot layout.
    When host and target coincide this is the plain network objective.
    """

    def __init__(
        self,
        target: NetworkInequality,
        host: NetworkTopology,
        states: dict[int, TwoQubitState],
    ):
        if host.n_parties != target.topology.n_parties:
            raise PartyCountMismatchError(
                "host and target networks must have the same party count"
            )
        self.target = target
        self.host = host
        self.states = states
        self.k = target.k
        self.l = target.l
        self.leaf_list = [int(p) for p in target.leaves.leaf_set]
        self.matrices = [target.leaf_fcbi(p) for p in self.leaf_list]
        self.intermediate = [int(p) for p in target.leaves.intermediate_set]
        self.corrs = {
            s: states[s].corr for s in range(1, host.n_sources + 1)
        }
        # Input count per party in the host strategy space.
        self.input_counts = {p: self.k for p in self.intermediate}
        for p, m in zip(self.leaf_list, self.matrices):
            self.input_counts[p] = m.rows
        # Per-column expansion: list of (coefficient, input dict).
        self.columns = []
        for j in range(1, self.k + 1):
            terms = []
            shape = [m.rows for m in self.matrices]
            for combo in np.ndindex(*shape):
                coeff = 1.0
                x = {p: j for p in self.intermediate}
                for leaf, m, c in zip(self.leaf_list, self.matrices, combo):
                    coeff *= m.entries[c, j - 1]
                    x[leaf] = c + 1
                if coeff != 0.0:
                    terms.append((coeff, x))
            self.columns.append(terms)

    def slot_keys(self) -> list[tuple[int, int, int]]:
        keys = []
        for p in range(1, self.host.n_parties + 1):
            for inp in range(1, self.input_counts[p] + 1):
                for s in self.host.incident_sources(p):
                    keys.append((p, inp, s))
        return keys

    def random_raw(self, rng) -> dict:
        return {
            key: _normalize(rng.normal(size=3)) for key in self.slot_keys()
        }

    def _term_value(self, raw: dict, x: dict, skip_source: int | None = None) -> float:
        value = 1.0
        for s in range(1, self.host.n_sources + 1):
            if s == skip_source:
                continue
            a, b = self.host.endpoints(s)
            value *= float(raw[(a, x[a], s)] @ self.corrs[s] @ raw[(b, x[b], s)])
        return value

    def column_value(self, raw: dict, j: int) -> float:
        return sum(
            coeff * self._term_value(raw, x) for coeff, x in self.columns[j - 1]
        )

    def value(self, raw: dict) -> float:
        return float(
            sum(
                abs(self.column_value(raw, j)) ** (1.0 / self.l)
                for j in range(1, self.k + 1)
            )
        )

    def affected_columns(self, party: int, inp: int) -> list[int]:
        if party in self.intermediate:
            return [inp] if inp <= self.k else []
        return list(range(1, self.k + 1))

    def affine_coeffs(
        self, raw: dict, slot: tuple[int, int, int], j: int
    ) -> tuple[float, np.ndarray]:
        """I_j as c + g . n for the given slot vector n."""
        party, inp, source = slot
        c = 0.0
        g = np.zeros(3)
        corr = self.corrs[source]
        a, b = self.host.endpoints(source)
        for coeff, x in self.columns[j - 1]:
            if x[party] != inp:
                c += coeff * self._term_value(raw, x)
                continue
            rest = coeff * self._term_value(raw, x, skip_source=source)
            if party == a:
                g += rest * (corr @ raw[(b, x[b], source)])
            else:
                g += rest * (corr.T @ raw[(a, x[a], source)])
        return c, g


def _max_abs_powersum(
    cs: np.ndarray, gs: np.ndarray, l: int, start: np.ndarray
) -> np.ndarray:
    """Maximize sum_j |c_j + g_j . n|^(1/l) over the unit sphere.

    Candidate directions plus projected-gradient polish with backtracking;
    the returned vector never scores below `start`.
    """

    def h(n):
        return float(np.sum(np.abs(cs + gs @ n) ** (1.0 / l)))

    candidates = [start]
    for g in gs:
        norm = np.linalg.norm(g)
        if norm > 1e-14:
            candidates.append(g / norm)
            candidates.append(-g / norm)
    best = max(candidates, key=h)
    best_val = h(best)

    n, val, step = best, best_val, 0.5
    for _ in range(60):
        v = cs + gs @ n
        mags = np.maximum(np.abs(v), 1e-12)
        grad = ((1.0 / l) * mags ** (1.0 / l - 1.0) * np.sign(v)) @ gs
        improved = False
        while step > 1e-12:
            cand = _normalize(n + step * grad)
            cand_val = h(cand)
            if cand_val > val:
                gain = cand_val - val
                n, val = cand, cand_val
                step = min(step * 1.5, 2.0)
                improved = True
                break
            step *= 0.5
        if not improved or gain < 1e-13:
            break
    return n if val >= best_val else best


def _seesaw_once(obj: _CrossObjective, rng, sweeps: int = 120, tol: float = 1e-11):
    raw = obj.random_raw(rng)
    value = obj.value(raw)
    converged = False
    for _ in range(sweeps):
        for slot in obj.slot_keys():
            party, inp, _ = slot
            cols = obj.affected_columns(party, inp)
            if not cols:
                continue
            if len(cols) == 1:
                c, g = obj.affine_coeffs(raw, slot, cols[0])
                norm = np.linalg.norm(g)
                if norm > 1e-14:
                    raw[slot] = np.sign(c) * g / norm if c != 0.0 else g / norm
            else:
                cs, gs = [], []
                for j in cols:
                    c, g = obj.affine_coeffs(raw, slot, j)
                    cs.append(c)
                    gs.append(g)
                raw[slot] = _max_abs_powersum(
                    np.array(cs), np.array(gs), obj.l, raw[slot]
                )
        new_value = obj.value(raw)
        if new_value - value < tol:
            value = max(value, new_value)
            converged = True
            break
        value = new_value
    return value, raw, converged


def _run_restarts(obj: _CrossObjective, restarts: int, seed: int) -> SearchReport:
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    best_value, best_raw = -np.inf, None
    history = []
    any_converged = False
    for child in seeds:
        rng = np.random.default_rng(child)
        value, raw, conv = _seesaw_once(obj, rng)
        history.append(value)
        any_converged = any_converged or conv
        if value > best_value:
            best_value, best_raw = value, raw
    return SearchReport(
        best_value=best_value,
        best_config=_to_strategy(best_raw),
        restarts_used=restarts,
        seed=seed,
        converged=any_converged,
        history=history,
    )


def seesaw_network(
    ineq: NetworkInequality,
    states: dict[int, TwoQubitState],
    restarts: int = 32,
    seed: int = 0,
) -> SearchReport:
    """Maximize S over separable strategies on the inequality's own network."""
    obj = _CrossObjective(ineq, ineq.topology, states)
    report = _run_restarts(obj, restarts, seed)
    # Round-trip through the public evaluator so the reported value is the
    # one any caller would recompute.
    result = evaluate_S(ineq, states, report.best_config)
    report.best_value = max(report.best_value, result.S)
    return report


def discriminate(
    ineq_target: NetworkInequality,
    topology_source: NetworkTopology,
    states: dict[int, TwoQubitState],
    restarts: int = 64,
    seed: int = 0,
    tol: float = 1e-6,
) -> SearchReport:
    """Maximize the target inequality over strategies realizable in another
    network of the same size.

    The verdict is three-valued: VIOLATED if the search exceeded sqrt(2) by
    more than tol, BOUNDARY within tol of sqrt(2), NOT_FOUND otherwise. A
    NOT_FOUND is a search outcome, not a proof of impossibility.
    """
    for m in ineq_target.fcbi_map.values():
        if m.tag != CHSH:
            raise UnsupportedFcbiError(
                "topology discrimination is defined for the two-input CHSH map"
            )
    obj = _CrossObjective(ineq_target, topology_source, states)
    report = _run_restarts(obj, restarts, seed)
    bound = np.sqrt(2.0)
    if report.best_value > bound + tol:
        verdict = VIOLATED
    elif report.best_value >= bound - tol:
        verdict = BOUNDARY
    else:
        verdict = NOT_FOUND
    report.extra["verdict"] = verdict
    report.extra["quantum_bound"] = bound
    return report


def cross_evaluate(
    ineq_target: NetworkInequality,
    topology_source: NetworkTopology,
    states: dict[int, TwoQubitState],
    strategy: MeasurementStrategy,
) -> float:
    """Evaluate the target S for an explicit strategy on the host network."""
    obj = _CrossObjective(ineq_target, topology_source, states)
    raw = {key: strategy.bloch(*key) for key in obj.slot_keys()}
    return obj.value(raw)


# ---------------------------------------------------------------------------
# Local-hidden-variable oracle
# ---------------------------------------------------------------------------


def _party_layout(ineq: NetworkInequality) -> tuple[list[int], dict[int, int]]:
    """Party order and per-party input counts."""
    counts = {int(p): ineq.k for p in ineq.leaves.intermediate_set}
    for leaf in ineq.leaves.leaf_set:
        counts[int(leaf)] = ineq.leaf_fcbi(int(leaf)).rows
    return sorted(counts), counts


def _sign_table(n_inputs: int) -> np.ndarray:
    """All 2^n deterministic +/-1 assignments, shape (2^n, n)."""
    codes = np.arange(2**n_inputs, dtype=np.int64)
    return 1.0 - 2.0 * ((codes[:, None] >> np.arange(n_inputs)) & 1)


def classical_oracle(
    ineq: NetworkInequality,
    cardinalities: dict[int, int] | None = None,
    mode: str = "exhaustive",
    budget: int = 10_000,
    seed: int = 0,
) -> SearchReport:
    """Max S over source-local classical models.

    exhaustive: all deterministic response tables with point-mass hidden
    variables (complete for the deterministic extreme points).
    random: budgeted random mixtures - Dirichlet weights over each source
    alphabet and random +/-1 response tables, averaged over the hidden
    product alphabet.
    """
    if mode == "exhaustive":
        return _oracle_exhaustive(ineq)
    if mode == "random":
        return _oracle_random(ineq, cardinalities, budget, seed)
    raise ValueError(f"unknown oracle mode {mode!r}")


def _oracle_exhaustive(ineq: NetworkInequality) -> SearchReport:
    parties, counts = _party_layout(ineq)
    total_bits = sum(counts.values())
    if total_bits > EXHAUSTIVE_CAP_BITS:
        raise TooLargeForExhaustiveError(
            f"2^{total_bits} deterministic assignments exceed the cap"
        )
    leaf_set = {int(p) for p in ineq.leaves.leaf_set}
    # Per-party contribution table, one row per deterministic assignment:
    # leaves contribute their Delta row, intermediates their chosen signs.
    tables = []
    for p in parties:
        signs = _sign_table(counts[p])
        if p in leaf_set:
            tables.append(signs @ ineq.leaf_fcbi(p).entries)  # (2^r, k)
        else:
            tables.append(signs[:, :ineq.k])
    prod = np.ones((1, ineq.k))
    for table in tables:
        prod = (prod[:, None, :] * table[None, :, :]).reshape(-1, ineq.k)
    s_values = np.abs(prod) ** (1.0 / ineq.l)
    s_all = s_values.sum(axis=1)
    best_idx = int(np.argmax(s_all))

    # Decode the flat index back into per-party assignments.
    sizes = [2 ** counts[p] for p in parties]
    codes = []
    rem = best_idx
    for size in reversed(sizes):
        codes.append(rem % size)
        rem //= size
    codes.reverse()
    responses = {}
    for p, code in zip(parties, codes):
        signs = _sign_table(counts[p])[code]
        responses[p] = signs[:, None].astype(float)
    model = LocalModel(
        cardinalities={s: 1 for s in range(1, ineq.topology.n_sources + 1)},
        weights={s: np.array([1.0]) for s in range(1, ineq.topology.n_sources + 1)},
        responses=responses,
    )
    return SearchReport(
        best_value=float(s_all[best_idx]),
        best_config=model,
        restarts_used=len(s_all),
        seed=0,
        converged=True,
    )


def _incident_sorted(topology: NetworkTopology, party: int) -> list[int]:
    return sorted(topology.incident_sources(party))


def evaluate_local_model(ineq: NetworkInequality, model: LocalModel) -> float:
    """S of a local model, averaging over the hidden product alphabet."""
    parties, counts = _party_layout(ineq)
    leaf_set = {int(p) for p in ineq.leaves.leaf_set}
    topology = ineq.topology
    sources = list(range(1, topology.n_sources + 1))
    alphabets = [range(model.cardinalities[s]) for s in sources]

    I = np.zeros(ineq.k)
    for lam in iter_product(*alphabets):
        lam_of = dict(zip(sources, lam))
        weight = 1.0
        for s in sources:
            weight *= float(model.weights[s][lam_of[s]])
        for j in range(1, ineq.k + 1):
            term = weight
            for p in parties:
                inc = _incident_sorted(topology, p)
                idx = 0
                for s in inc:
                    idx = idx * model.cardinalities[s] + lam_of[s]
                if p in leaf_set:
                    m = ineq.leaf_fcbi(p)
                    term *= float(
                        m.entries[:, j - 1] @ model.responses[p][:, idx]
                    )
                else:
                    term *= float(model.responses[p][j - 1, idx])
            I[j - 1] += term
    return float(np.sum(np.abs(I) ** (1.0 / ineq.l)))


def _oracle_random(
    ineq: NetworkInequality,
    cardinalities: dict[int, int] | None,
    budget: int,
    seed: int,
) -> SearchReport:
    topology = ineq.topology
    sources = list(range(1, topology.n_sources + 1))
    cards = {s: 2 for s in sources}
    if cardinalities:
        cards.update({int(s): int(c) for s, c in cardinalities.items()})
    space = int(np.prod([cards[s] for s in sources]))
    if space > HIDDEN_SPACE_CAP:
        raise TooLargeForExhaustiveError(
            f"hidden product alphabet of size {space} exceeds the cap"
        )
    parties, counts = _party_layout(ineq)
    leaf_set = {int(p) for p in ineq.leaves.leaf_set}
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    best_value, best_model = -np.inf, None
    chunk = 4096
    done = 0
    while done < budget:
        n = min(chunk, budget - done)
        weights = {
            s: rng.dirichlet(np.ones(cards[s]), size=n) for s in sources
        }
        responses = {}
        for p in parties:
            size = int(np.prod([cards[s] for s in _incident_sorted(topology, p)]))
            responses[p] = rng.choice(
                [-1.0, 1.0], size=(n, counts[p], size)
            )
        I = np.zeros((n, ineq.k))
        for lam in iter_product(*[range(cards[s]) for s in sources]):
            lam_of = dict(zip(sources, lam))
            w = np.ones(n)
            for s in sources:
                w = w * weights[s][:, lam_of[s]]
            for j in range(1, ineq.k + 1):
                term = w.copy()
                for p in parties:
                    inc = _incident_sorted(topology, p)
                    idx = 0
                    for s in inc:
                        idx = idx * cards[s] + lam_of[s]
                    if p in leaf_set:
                        m = ineq.leaf_fcbi(p)
                        term = term * (responses[p][:, :, idx] @ m.entries[:, j - 1])
                    else:
                        term = term * responses[p][:, j - 1, idx]
                I[:, j - 1] += term
        s_all = (np.abs(I) ** (1.0 / ineq.l)).sum(axis=1)
        idx = int(np.argmax(s_all))
        if s_all[idx] > best_value:
            best_value = float(s_all[idx])
            best_model = LocalModel(
                cardinalities=dict(cards),
                weights={s: weights[s][idx] for s in sources},
                responses={p: responses[p][idx] for p in parties},
            )
        done += n
    return SearchReport(
        best_value=best_value,
        best_config=best_model,
        restarts_used=budget,
        seed=seed,
        converged=True,
    )


# ---------------------------------------------------------------------------
# Visibility windows
# ---------------------------------------------------------------------------


def uniform_visibility_threshold(l: int, m: int) -> float:
    """Per-source critical visibility (1/sqrt(2))^(l/m) for the CHSH map."""
    return float(2.0 ** (-l / (2.0 * m)))


def visibility_window(
    topology_a: NetworkTopology, topology_b: NetworkTopology
) -> dict:
    """Uniform-Werner visibility thresholds for two same-size networks.

    States with per-source visibility strictly inside the window violate
    only the inequality of the network with the larger leaf count.
    """
    results = {}
    for name, topology in (("a", topology_a), ("b", topology_b)):
        leaves = find_leaves(topology)
        if leaves.l < 2:
            raise TooFewLeavesError(
                f"topology {name} has {leaves.l} leaf nodes; need at least 2"
            )
        results[name] = {
            "l": leaves.l,
            "m": topology.n_sources,
            "threshold": uniform_visibility_threshold(leaves.l, topology.n_sources),
        }
    lo = min(results["a"]["threshold"], results["b"]["threshold"])
    hi = max(results["a"]["threshold"], results["b"]["threshold"])
    results["window"] = (lo, hi)
    return results
