"""Bipartite full-correlation Bell inequalities.

An FCBI is sum_{x,y} M[x,y] <A_x B_y> <= beta, fully specified by its real
coefficient matrix. This module holds the catalog (CHSH, chained, elegant),
the exact classical bound by sign enumeration, a see-saw maximizer for
quantum values on arbitrary two-qubit states, and the column-norm witness
that certifies quantum upper bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadKError, NonConvergenceError, TooLargeError
from .qstate import IDENTITY2, TwoQubitState, bloch_matrix

ENUMERATION_CAP_BITS = 24

CHSH = "CHSH"
CHAINED = "CHAINED"
EBI = "EBI"
CUSTOM = "CUSTOM"


@dataclass(frozen=True)
class CoefficientMatrix:
    """FCBI coefficient matrix with its two bounds.

    Attributes:
        entries: (rows, cols) real matrix; rows index the A-side inputs,
            columns the B-side inputs.
        tag: CHSH | CHAINED | EBI | CUSTOM.
        k_param: chain length for CHAINED, else None.
        classical_bound: beta, verified by enumeration at construction.
        quantum_opt: optimal quantum value (closed form for the catalog,
            see-saw estimate for CUSTOM).
    """

    entries: np.ndarray
    tag: str
    classical_bound: float
    quantum_opt: float
    k_param: int | None = None

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def delta_vectors(self, bloch_rows: np.ndarray) -> np.ndarray:
        """Column vectors d_y = sum_x M[x,y] a_x for A-side Bloch rows a_x."""
        return self.entries.T @ np.asarray(bloch_rows, dtype=float)


def classical_bound(entries) -> float:
    """Exact classical bound: max over A_x = +/-1 of sum_y |sum_x M[x,y] A_x|."""
    m = np.asarray(entries, dtype=float)
    rows = m.shape[0]
    if m.size == 0:
        raise TooLargeError("coefficient matrix must be non-empty")
    if rows > ENUMERATION_CAP_BITS:
        raise TooLargeError(
            f"enumeration over 2^{rows} sign assignments exceeds the cap"
        )
    codes = np.arange(2**rows, dtype=np.int64)
    signs = 1.0 - 2.0 * ((codes[:, None] >> np.arange(rows)) & 1)
    return float(np.abs(signs @ m).sum(axis=1).max())


def chsh_matrix() -> np.ndarray:
    """M[x,y] = (-1)^(x*y) / 2 with x, y in {1, 2}."""
    x = np.arange(1, 3)[:, None]
    y = np.arange(1, 3)[None, :]
    return 0.5 * (-1.0) ** (x * y)


def chained_matrix(k: int) -> np.ndarray:
    """k x k chained coefficients: column j couples rows j and j+1 (wrapping).

    The wrap column j = k pairs row k with row 1 carrying a minus sign,
    which realizes the A_{k+1} = -A_1 convention.
    """
    if k < 2:
        raise BadKError("chained inequality needs k >= 2")
    m = np.zeros((k, k))
    for j in range(k):
        m[j, j] += 0.5
        if j + 1 < k:
            m[j + 1, j] += 0.5
        else:
            m[0, j] -= 0.5
    return m


def ebi_matrix() -> np.ndarray:
    """3x4 elegant-inequality signs: columns are A1+A2+A3 with A3, A2 flips."""
    return np.array(
        [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, 1.0, -1.0, -1.0],
            [1.0, -1.0, 1.0, -1.0],
        ]
    )


def make_catalog(tag: str, k: int | None = None) -> CoefficientMatrix:
    """Catalog constructor with closed-form bounds.

    CHSH: (beta, opt) = (1, sqrt(2)). CHAINED(k): (k-1, k cos(pi/2k)).
    EBI: (6, 4 sqrt(3)).
    """
    if tag == CHSH:
        entries, beta, opt, kp = chsh_matrix(), 1.0, np.sqrt(2.0), None
    elif tag == CHAINED:
        if k is None or k < 2:
            raise BadKError("chained inequality needs k >= 2")
        entries = chained_matrix(k)
        beta, opt, kp = float(k - 1), k * np.cos(np.pi / (2 * k)), k
    elif tag == EBI:
        entries, beta, opt, kp = ebi_matrix(), 6.0, 4.0 * np.sqrt(3.0), None
    else:
        raise BadKError(f"unknown catalog tag {tag!r}")

    enum = classical_bound(entries)
    if abs(enum - beta) > 1e-9:
        raise AssertionError(f"catalog bound mismatch for {tag}: {enum} != {beta}")
    return CoefficientMatrix(
        entries=entries, tag=tag, classical_bound=beta, quantum_opt=opt, k_param=kp
    )


def custom_matrix(entries, restarts: int = 32, seed: int = 0) -> CoefficientMatrix:
    """Wrap a user matrix; bounds filled by enumeration and see-saw."""
    m = np.asarray(entries, dtype=float)
    beta = classical_bound(m)
    opt, _ = _seesaw_value(m, np.eye(3), restarts=restarts, seed=seed)
    # The see-saw can only underestimate; the quantum set contains the
    # classical strategies, so never report an optimum below beta.
    return CoefficientMatrix(
        entries=m,
        tag=CUSTOM,
        classical_bound=beta,
        quantum_opt=max(opt, beta),
    )


def _objective(bloch_rows: np.ndarray, m: np.ndarray, corr: np.ndarray) -> float:
    td = (m.T @ bloch_rows) @ corr  # row y = (T^T d_y)^T
    return float(np.linalg.norm(td, axis=1).sum())


def _normalize_rows(a: np.ndarray, fallback: np.ndarray | None = None) -> np.ndarray:
    """Row-normalize; rows of near-zero norm fall back to the given rows."""
    norms = np.linalg.norm(a, axis=1, keepdims=True)
    safe = np.where(norms > 1e-14, norms, 1.0)
    out = a / safe
    if fallback is not None:
        out = np.where(norms > 1e-14, out, fallback)
    return out


def _seesaw_once(
    m: np.ndarray,
    corr: np.ndarray,
    start: np.ndarray,
    iters: int = 200,
    stag_tol: float = 1e-12,
) -> tuple[float, np.ndarray, bool]:
    """Alternating exact updates on the two sides.

    With the A-side fixed, the best B observables are b_y || T^T d_y; with
    those fixed, the best A observables are a_x || sum_y M[x,y] T b_y. Both
    half-steps are exact maximizations, so the value is monotone; stop when
    a full sweep gains less than stag_tol.
    """
    a = _normalize_rows(np.asarray(start, dtype=float))
    value = _objective(a, m, corr)
    converged = False
    for _ in range(iters):
        b = _normalize_rows((m.T @ a) @ corr)
        a = _normalize_rows(m @ (b @ corr.T), fallback=a)
        new_value = _objective(a, m, corr)
        if new_value - value < stag_tol:
            value = max(value, new_value)
            converged = True
            break
        value = new_value
    return value, a, converged


def _seesaw_value(
    m: np.ndarray, corr: np.ndarray, restarts: int, seed: int
) -> tuple[float, np.ndarray]:
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    best_val, best_obs = -np.inf, None
    any_converged = False
    for child in seeds:
        rng = np.random.default_rng(child)
        start = rng.normal(size=(m.shape[0], 3))
        val, obs, conv = _seesaw_once(m, corr, start)
        any_converged = any_converged or conv
        if val > best_val:
            best_val, best_obs = val, obs
    if not any_converged:
        raise NonConvergenceError(
            "see-saw failed to converge in every restart", best_value=best_val
        )
    return best_val, best_obs


def quantum_opt_numeric(
    matrix: CoefficientMatrix, restarts: int = 32, seed: int = 0
) -> tuple[float, np.ndarray]:
    """See-saw estimate of the optimal quantum value.

    Maximizes sum_y ||d_y|| over unit A-side Bloch vectors with the
    maximally entangled reference (T = identity). Deterministic per seed.

    Returns:
        (value, bloch_rows) with bloch_rows the optimizing A-side vectors.
    """
    return _seesaw_value(matrix.entries, np.eye(3), restarts, seed)


def state_max(
    matrix: CoefficientMatrix,
    rho: TwoQubitState,
    restarts: int = 32,
    seed: int = 0,
    force_numeric: bool = False,
) -> float:
    """Maximal quantum value of the FCBI on a given two-qubit state.

    CHSH has the closed form sqrt(t0^2 + t1^2); everything else (or
    force_numeric) runs the see-saw on sum_y ||T^T d_y||.
    """
    if matrix.tag == CHSH and not force_numeric:
        t0, t1 = rho.singvals[0], rho.singvals[1]
        return float(np.sqrt(t0 * t0 + t1 * t1))
    val, _ = _seesaw_value(matrix.entries, rho.corr, restarts, seed)
    return val


@dataclass(frozen=True)
class SosWitness:
    """Column-norm certificate for a strategy on a state.

    omega[y] = sqrt(Tr[Delta_y^dag Delta_y rho]); the achieved Bell value can
    never exceed sum_y omega[y], and the per-column residuals <L_y^dag L_y>
    are non-negative, vanishing exactly at the quantum optimum.
    """

    omega: np.ndarray
    predicted_bound: float
    residuals: np.ndarray
    achieved: float


def sos_witness(
    matrix: CoefficientMatrix,
    rho: TwoQubitState,
    a_bloch: np.ndarray,
    b_bloch: np.ndarray,
) -> SosWitness:
    """Evaluate the witness for explicit A/B observables on a state.

    Args:
        a_bloch: (rows, 3) unit Bloch vectors for the A-side inputs.
        b_bloch: (cols, 3) unit Bloch vectors for the B-side inputs.
    """
    a_bloch = np.asarray(a_bloch, dtype=float)
    b_bloch = np.asarray(b_bloch, dtype=float)
    if a_bloch.shape != (matrix.rows, 3) or b_bloch.shape != (matrix.cols, 3):
        raise ValueError("observable arrays do not match the matrix shape")

    omegas = np.zeros(matrix.cols)
    residuals = np.zeros(matrix.cols)
    achieved = 0.0
    for y in range(matrix.cols):
        delta = sum(
            matrix.entries[x, y] * np.kron(bloch_matrix(a_bloch[x]), IDENTITY2)
            for x in range(matrix.rows)
        )
        omega = np.sqrt(
            max(np.trace(delta.conj().T @ delta @ rho.matrix).real, 0.0)
        )
        b_op = np.kron(IDENTITY2, bloch_matrix(b_bloch[y]))
        cross = np.trace(delta @ b_op @ rho.matrix).real
        achieved += cross
        omegas[y] = omega
        residuals[y] = 2.0 - 2.0 * cross / omega if omega > 1e-14 else 0.0
    return SosWitness(
        omega=omegas,
        predicted_bound=float(omegas.sum()),
        residuals=residuals,
        achieved=achieved,
    )
