"""Pure-state bipartite entanglement measures.

Every measure is computable by at least two independent routes (coefficient
matrix vs Schmidt spectrum vs reduced density operator) so tests can
cross-validate them. The ``*_from_lambdas`` / objective machinery is
vectorized over leading axes; the convex-roof optimizer evaluates ensembles
through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    clip_spectrum,
    partial_transpose,
    reshape_to_coefficient_matrix,
    schmidt_lambdas,
    trace_norm,
)
from .states import BipartiteDims, InvariantViolation, PureState

ENTANGLEMENT_NUMBER = "entanglement-number"
P_NUMBER = "p-number"
ENTROPY = "entropy"
NEGATIVITY = "negativity"
CONCURRENCE = "concurrence"
GEOMETRIC = "geometric"

KINDS = (ENTANGLEMENT_NUMBER, P_NUMBER, ENTROPY, NEGATIVITY, CONCURRENCE, GEOMETRIC)


@dataclass(frozen=True)
class MeasureSpec:
    """Selector for a measure and its parameters.

    Parameters must be present exactly when the kind requires them:
    ``p`` (> 1) for the p-number, ``k`` for the concurrence family,
    ``ranks`` for the geometric measure, ``log_base`` (2 or e) for the
    entropy.
    """

    kind: str
    p: float | None = None
    k: int | None = None
    ranks: tuple[int, int] | None = None
    log_base: float = 2.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}; expected one of {KINDS}")
        if (self.p is not None) != (self.kind == P_NUMBER):
            raise ValueError("parameter p is required exactly for the p-number")
        if self.p is not None and not (1.0 < self.p < math.inf):
            raise ValueError(f"p must lie in (1, inf), got {self.p}")
        if (self.k is not None) != (self.kind == CONCURRENCE):
            raise ValueError("parameter k is required exactly for the concurrence")
        if self.k is not None and self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if (self.ranks is not None) != (self.kind == GEOMETRIC):
            raise ValueError("parameter ranks is required exactly for the geometric measure")
        if self.ranks is not None:
            ranks = tuple(int(r) for r in self.ranks)
            if len(ranks) != 2 or min(ranks) < 1:
                raise ValueError(f"ranks must be two positive integers, got {self.ranks}")
            object.__setattr__(self, "ranks", ranks)
        if self.log_base not in (2.0, math.e):
            raise ValueError(f"log_base must be 2 or e, got {self.log_base}")


def validate_spec_dims(spec: MeasureSpec, dims: BipartiteDims) -> None:
    """Check parameter ranges that depend on the state's dimensions."""
    d = dims.d
    if spec.kind == NEGATIVITY and d < 2:
        raise InvariantViolation(
            "degenerate-dimension", d,
            "negativity is undefined for min(dim_a, dim_b) = 1 (zero normalizer)")
    if spec.kind == CONCURRENCE and not (1 <= spec.k <= d):
        raise ValueError(f"concurrence order k={spec.k} outside [1, d={d}]")
    if spec.kind == GEOMETRIC:
        k1, k2 = spec.ranks
        if not (1 <= k1 <= dims.dim_a and 1 <= k2 <= dims.dim_b):
            raise ValueError(
                f"projector ranks {spec.ranks} outside ([1,{dims.dim_a}], [1,{dims.dim_b}])")


# ---------------------------------------------------------------------------
# spectra of coefficient matrices, vectorized over leading axes


def gram_spectra(states: np.ndarray, dims: BipartiteDims) -> np.ndarray:
    """Descending eigenvalues of C C^dagger for a stack of state vectors.

    ``states`` has shape (..., dim_a*dim_b); the result has shape (..., d)
    with d = min(dim_a, dim_b). For normalized inputs the rows sum to one
    (these are the squared Schmidt coefficients). Dimension-2 spectra use
    the closed-form 2x2 eigenvalues, avoiding per-matrix LAPACK calls.
    """
    da, db = dims.dim_a, dims.dim_b
    c = states.reshape(states.shape[:-1] + (da, db))
    d = min(da, db)
    if d == 1:
        w = np.sum(np.abs(states) ** 2, axis=-1)
        return w[..., None]
    if d == 2:
        if da <= db:
            g00 = np.sum(np.abs(c[..., 0, :]) ** 2, axis=-1)
            g11 = np.sum(np.abs(c[..., 1, :]) ** 2, axis=-1)
            g01 = np.sum(c[..., 0, :] * c[..., 1, :].conj(), axis=-1)
        else:
            g00 = np.sum(np.abs(c[..., :, 0]) ** 2, axis=-1)
            g11 = np.sum(np.abs(c[..., :, 1]) ** 2, axis=-1)
            g01 = np.sum(c[..., :, 0] * c[..., :, 1].conj(), axis=-1)
        tr = g00 + g11
        det = g00 * g11 - np.abs(g01) ** 2
        disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
        hi = np.maximum((tr + disc) / 2.0, 0.0)
        lo = np.maximum((tr - disc) / 2.0, 0.0)
        return np.stack([hi, lo], axis=-1)
    if da <= db:
        g = np.einsum("...ik,...jk->...ij", c, c.conj())
    else:
        g = np.einsum("...ki,...kj->...ij", c.conj(), c)
    w = np.linalg.eigvalsh(g)
    return np.maximum(w[..., ::-1], 0.0)


def _xlog(x: np.ndarray, log_base: float) -> np.ndarray:
    """x*log(x) with the 0*log(0) = 0 convention."""
    out = np.zeros_like(x)
    mask = x > 0.0
    np.log(x, where=mask, out=out)
    if log_base != math.e:
        out /= math.log(log_base)
    return x * out


def elementary_symmetric(lams: np.ndarray, k: int) -> np.ndarray:
    """k-th elementary symmetric polynomial along the last axis."""
    d = lams.shape[-1]
    e = np.zeros(lams.shape[:-1] + (k + 1,))
    e[..., 0] = 1.0
    for idx in range(d):
        x = lams[..., idx]
        for j in range(min(idx + 1, k), 0, -1):
            e[..., j] += x * e[..., j - 1]
    return e[..., k]


def value_from_lambdas(spec: MeasureSpec, lams: np.ndarray, dims: BipartiteDims) -> np.ndarray:
    """Evaluate a measure on stacks of normalized Schmidt spectra.

    ``lams`` has shape (..., r) with rows summing to one, descending. Rows
    shorter than d = min(dim_a, dim_b) are treated as zero-padded.
    """
    d = dims.d
    if spec.kind == ENTANGLEMENT_NUMBER:
        return np.sqrt(np.maximum(1.0 - np.sum(lams * lams, axis=-1), 0.0))
    if spec.kind == P_NUMBER:
        return np.maximum(1.0 - np.sum(lams ** spec.p, axis=-1), 0.0) ** (1.0 / spec.p)
    if spec.kind == ENTROPY:
        return -np.sum(_xlog(lams, spec.log_base), axis=-1)
    if spec.kind == NEGATIVITY:
        s = np.sum(np.sqrt(np.maximum(lams, 0.0)), axis=-1)
        return np.maximum(s * s - 1.0, 0.0) / (d - 1)
    if spec.kind == CONCURRENCE:
        k = spec.k
        if lams.shape[-1] < d:
            pad = np.zeros(lams.shape[:-1] + (d - lams.shape[-1],))
            lams = np.concatenate([lams, pad], axis=-1)
        norm = math.comb(d, k) / d**k
        ratio = np.maximum(elementary_symmetric(lams, k), 0.0) / norm
        return ratio ** (1.0 / k)
    if spec.kind == GEOMETRIC:
        k1, k2 = spec.ranks
        if k1 != k2:
            raise ValueError(
                "the Schmidt-spectrum route applies to equal projector ranks only; "
                "use geometric_measure_alternating for unequal ranks")
        top = min(k1, lams.shape[-1])
        return np.sum(lams[..., :top], axis=-1)
    raise AssertionError(spec.kind)


def make_objective(spec: MeasureSpec, dims: BipartiteDims):
    """Vectorized pure-state objective: state vectors (..., n) -> values.

    The returned function is scale-invariant (spectra are normalized
    internally), so callers may pass unnormalized nonzero vectors. Used by
    the convex-roof optimizer and handy for batched evaluation.
    """
    validate_spec_dims(spec, dims)

    def objective(states: np.ndarray) -> np.ndarray:
        lams = gram_spectra(states, dims)
        lams = lams / np.maximum(np.sum(lams, axis=-1, keepdims=True), 1e-300)
        return value_from_lambdas(spec, lams, dims)

    return objective


# ---------------------------------------------------------------------------
# scalar measures on PureState


def entanglement_number_pure(psi: PureState) -> float:
    """sqrt(1 - Tr|C|^4) via the column Gram matrix of the coefficient matrix.

    Tr|C|^4 = Tr((C^t C)^2) equals the squared Frobenius norm of the Gram
    matrix of C's columns, i.e. the sum of |<c_r, c_s>|^2.
    """
    c = reshape_to_coefficient_matrix(psi)
    gram = c.conj().T @ c
    fourth = float(np.sum(np.abs(gram) ** 2))
    return math.sqrt(max(1.0 - fourth, 0.0))


def purity_deficit(rho_mat: np.ndarray) -> float:
    """sqrt(1 - Tr(rho^2)) of a density matrix.

    On a reduced density matrix of a pure state this is the reduced-operator
    route to the entanglement number.
    """
    rho_mat = np.asarray(rho_mat, dtype=np.complex128)
    return math.sqrt(max(1.0 - float(np.trace(rho_mat @ rho_mat).real), 0.0))


def schatten_deficit(rho_mat: np.ndarray, p: float) -> float:
    """(1 - ||rho||_p^p)^(1/p) of a density matrix, for p > 1.

    Reduced-operator route to the p-number.
    """
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    w = clip_spectrum(np.linalg.eigvalsh(np.asarray(rho_mat, dtype=np.complex128)))
    return max(1.0 - float(np.sum(w**p)), 0.0) ** (1.0 / p)


def p_number_pure(psi: PureState, p: float) -> float:
    """(1 - sum_k lambda_k^p)^(1/p) from the Schmidt spectrum; equals the
    entanglement number at p = 2."""
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    lams = schmidt_lambdas(psi)
    return max(1.0 - float(np.sum(lams**p)), 0.0) ** (1.0 / p)


def schmidt_power_deficit(psi: PureState, p: float) -> float:
    """1 - sum_k lambda_k^p for p > 1; the p-th power of the p-number."""
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    lams = schmidt_lambdas(psi)
    return max(1.0 - float(np.sum(lams**p)), 0.0)


def entanglement_entropy_pure(psi: PureState, log_base: float = 2.0) -> float:
    """-sum lambda_i log(lambda_i); symmetric in which factor is traced out."""
    lams = schmidt_lambdas(psi)
    return float(-np.sum(_xlog(lams, log_base)))


def von_neumann_entropy(rho_mat: np.ndarray, log_base: float = 2.0) -> float:
    """-Tr(rho log rho) from the clipped eigenvalue spectrum."""
    w = clip_spectrum(np.linalg.eigvalsh(np.asarray(rho_mat, dtype=np.complex128)))
    return float(-np.sum(_xlog(w, log_base)))


def negativity_pure(psi: PureState) -> float:
    """((sum_i sqrt(lambda_i))^2 - 1) / (d - 1)."""
    d = psi.dims.d
    if d < 2:
        raise InvariantViolation(
            "degenerate-dimension", d,
            "negativity is undefined for min(dim_a, dim_b) = 1 (zero normalizer)")
    s = float(np.sum(np.sqrt(schmidt_lambdas(psi))))
    return max(s * s - 1.0, 0.0) / (d - 1)


def negativity_via_partial_transpose(psi: PureState) -> float:
    """(||(|psi><psi|)^T_B||_1 - 1) / (d - 1); trace-norm route."""
    d = psi.dims.d
    if d < 2:
        raise InvariantViolation(
            "degenerate-dimension", d,
            "negativity is undefined for min(dim_a, dim_b) = 1 (zero normalizer)")
    from .states import DensityOperator

    pt = partial_transpose(DensityOperator.from_pure(psi), "B")
    return (trace_norm(pt) - 1.0) / (d - 1)


def concurrence_pure(psi: PureState, k: int) -> float:
    """k-th concurrence monotone: normalized elementary symmetric polynomial
    of the Schmidt spectrum (zero-padded to length d), to the power 1/k."""
    d = psi.dims.d
    if not 1 <= k <= d:
        raise ValueError(f"concurrence order k={k} outside [1, d={d}]")
    lams = np.zeros(d)
    found = schmidt_lambdas(psi)
    lams[: found.size] = found
    norm = math.comb(d, k) / d**k
    return float(max(elementary_symmetric(lams, k), 0.0) / norm) ** (1.0 / k)


def geometric_measure_pure(psi: PureState, ranks: tuple[int, int]) -> float:
    """Maximal squared norm of psi compressed by rank-constrained local
    projectors.

    Equal ranks (k, k) have the closed form sum of the top k Schmidt
    weights; unequal ranks fall back to alternating maximization over
    projector pairs (a certified lower bound).
    """
    spec = MeasureSpec(GEOMETRIC, ranks=tuple(ranks))
    validate_spec_dims(spec, psi.dims)
    k1, k2 = spec.ranks
    if k1 == k2:
        lams = schmidt_lambdas(psi)
        return float(np.sum(lams[: min(k1, lams.size)]))
    return geometric_measure_alternating(psi, spec.ranks)


def geometric_measure_alternating(
    psi: PureState,
    ranks: tuple[int, int],
    restarts: int = 16,
    max_iters: int = 500,
    tol: float = 1e-12,
    seed: int = 0,
) -> float:
    """Alternating maximization of ||(P_A x P_B) psi||^2 over projector pairs.

    Each half-step is the exact best response (top eigenvectors of the
    partially compressed Gram matrix), so iterations increase the value
    monotonically. One start is aligned with the Schmidt bases; the rest
    are random isometries. Every returned value is attained by a feasible
    projector pair, hence a lower bound on the supremum.
    """
    spec = MeasureSpec(GEOMETRIC, ranks=tuple(ranks))
    validate_spec_dims(spec, psi.dims)
    k1, k2 = spec.ranks
    c = reshape_to_coefficient_matrix(psi)
    da, db = psi.dims.as_tuple()

    u, _, vh = np.linalg.svd(c, full_matrices=True)
    starts = [(u[:, :k1], vh.conj().T[:, :k2])]
    rng = np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), 0x6E0]))
    for _ in range(restarts):
        ga = rng.normal(size=(da, k1)) + 1j * rng.normal(size=(da, k1))
        gb = rng.normal(size=(db, k2)) + 1j * rng.normal(size=(db, k2))
        starts.append((np.linalg.qr(ga)[0], np.linalg.qr(gb)[0]))

    def top_eigvecs(g: np.ndarray, k: int) -> np.ndarray:
        w, v = np.linalg.eigh(g)
        return v[:, ::-1][:, :k]

    best = 0.0
    for a, b in starts:
        prev = -1.0
        for _ in range(max_iters):
            m = c @ b
            a = top_eigvecs(m @ m.conj().T, k1)
            nmat = c.conj().T @ a
            b = top_eigvecs(nmat @ nmat.conj().T, k2)
            val = float(np.sum(np.abs(a.conj().T @ c @ b) ** 2))
            if val - prev < tol:
                prev = val
                break
            prev = val
        best = max(best, prev)
    return best


def measure_sup(spec: MeasureSpec, dims: BipartiteDims) -> float:
    """Analytic supremum of a measure over pure states of the given dims.

    All suprema are attained by the maximally entangled state (measures in
    the decreasing family) or by a compatible product state (geometric).
    """
    validate_spec_dims(spec, dims)
    d = dims.d
    if spec.kind == ENTANGLEMENT_NUMBER:
        return math.sqrt(1.0 - 1.0 / d)
    if spec.kind == P_NUMBER:
        return (1.0 - d ** (1.0 - spec.p)) ** (1.0 / spec.p)
    if spec.kind == ENTROPY:
        return math.log(d) / math.log(spec.log_base)
    if spec.kind in (NEGATIVITY, CONCURRENCE, GEOMETRIC):
        return 1.0
    raise AssertionError(spec.kind)


def decreasing_counterpart(spec: MeasureSpec, dims: BipartiteDims):
    """Map a measure to its sup-shifted mirror image, psi -> sup - mu(psi).

    Applied to an increasing monotone this yields a decreasing one (and
    vice versa), so concave-roof problems can be rephrased as convex roofs
    of the counterpart. Returns (sup, objective) with the objective
    vectorized like :func:`make_objective`.
    """
    sup = measure_sup(spec, dims)
    base = make_objective(spec, dims)

    def objective(states: np.ndarray) -> np.ndarray:
        return sup - base(states)

    return sup, objective


def measure_value(spec: MeasureSpec, psi: PureState) -> float:
    """Evaluate a MeasureSpec on a pure state."""
    validate_spec_dims(spec, psi.dims)
    if spec.kind == ENTANGLEMENT_NUMBER:
        return entanglement_number_pure(psi)
    if spec.kind == P_NUMBER:
        return p_number_pure(psi, spec.p)
    if spec.kind == ENTROPY:
        return entanglement_entropy_pure(psi, spec.log_base)
    if spec.kind == NEGATIVITY:
        return negativity_pure(psi)
    if spec.kind == CONCURRENCE:
        return concurrence_pure(psi, spec.k)
    if spec.kind == GEOMETRIC:
        return geometric_measure_pure(psi, spec.ranks)
    raise AssertionError(spec.kind)
