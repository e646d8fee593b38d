"""Shared fixtures: canonical states, tree builders, and an independent
sampling oracle for roof values (numpy-only, no optimizer internals)."""

from __future__ import annotations

import numpy as np

from entroof import BipartiteDims, DensityOperator, PureState
from entroof.locc import LoccNode
from entroof.sampling import random_instrument

DIMS22 = BipartiteDims(2, 2)


def bell() -> PureState:
    return PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), DIMS22)


def product_01() -> PureState:
    return PureState(np.array([0.0, 1.0, 0.0, 0.0], dtype=complex), DIMS22)


def diag_state(l1: float, l2: float) -> PureState:
    """sqrt(l1)|00> + sqrt(l2)|11>, Schmidt spectrum (l1, l2)."""
    v = np.zeros(4, dtype=complex)
    v[0] = np.sqrt(l1)
    v[3] = np.sqrt(l2)
    return PureState(v, DIMS22)


def leaf(party: str = "A") -> LoccNode:
    return LoccNode(party)


def one_round_tree(rng: np.random.Generator, party: str, outcomes: int = 2,
                   dim: int = 2) -> LoccNode:
    kraus = random_instrument(dim, outcomes, rng)
    return LoccNode(party, kraus=tuple(kraus),
                    children=tuple(leaf(party) for _ in kraus))


def two_round_tree(rng: np.random.Generator, first: str, second: str,
                   outcomes: int = 2, dim: int = 2) -> LoccNode:
    kraus = random_instrument(dim, outcomes, rng)
    kids = []
    for _ in kraus:
        sub = random_instrument(dim, outcomes, rng)
        kids.append(LoccNode(second, kraus=tuple(sub),
                             children=tuple(leaf(second) for _ in sub)))
    return LoccNode(first, kraus=tuple(kraus), children=tuple(kids))


def sampling_oracle_roof(
    rho: DensityOperator,
    member_value,
    samples: int = 100_000,
    ensemble_size: int | None = None,
    seed: int = 0,
    polish_steps: int = 3000,
) -> float:
    """Dense random-sampling + stochastic-polish upper bound on a convex roof.

    Independent of the package optimizer: eigendecomposition, isometry
    sampling, and the polish are plain numpy here, and ``member_value``
    maps stacks of normalized state vectors to measure values (tests pass
    an SVD-based implementation).
    """
    w, v = np.linalg.eigh(rho.matrix)
    keep = w > 1e-12 * w.max()
    b = v[:, keep] * np.sqrt(w[keep])
    r = b.shape[1]
    m = ensemble_size if ensemble_size is not None else r * r
    rng = np.random.default_rng(seed)

    def average(vs: np.ndarray) -> np.ndarray:
        chi = vs @ b.T                      # (..., m, n)
        wts = np.sum(np.abs(chi) ** 2, axis=-1)
        psi = chi / np.sqrt(np.maximum(wts, 1e-300))[..., None]
        return np.sum(wts * member_value(psi), axis=-1)

    g = rng.normal(size=(samples, m, r)) + 1j * rng.normal(size=(samples, m, r))
    vs = np.linalg.qr(g)[0]
    vals = average(vs)
    best_idx = int(np.argmin(vals))
    best_v, best = vs[best_idx], float(vals[best_idx])

    sigma = 0.3
    for step in range(polish_steps):
        cand = np.linalg.qr(
            best_v + sigma * (rng.normal(size=(m, r)) + 1j * rng.normal(size=(m, r))))[0]
        val = float(average(cand[None])[0])
        if val < best:
            best_v, best = cand, val
        else:
            sigma *= 0.999
    return best


def svd_member_e(psi: np.ndarray) -> np.ndarray:
    """Entanglement number of normalized two-qubit state stacks via SVD."""
    c = psi.reshape(psi.shape[:-1] + (2, 2))
    s = np.linalg.svd(c, compute_uv=False)
    lams = s * s
    return np.sqrt(np.maximum(1.0 - np.sum(lams * lams, axis=-1), 0.0))
