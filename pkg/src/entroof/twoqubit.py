"""Closed-form two-qubit entanglement quantities.

These serve as independent oracles for the numerical convex-roof optimizer:
the concurrence of a two-qubit density operator has the Wootters spin-flip
closed form, and the entanglement of formation follows from it through the
binary entropy. Nothing here touches the optimizer.
"""

from __future__ import annotations

import math

import numpy as np

from .states import DensityOperator

_SY_SY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def _as_two_qubit_matrix(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=np.complex128)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit density matrix, got shape {m.shape}")
    return m


def concurrence(rho) -> float:
    """Spin-flip concurrence max(0, sqrt(w1)-sqrt(w2)-sqrt(w3)-sqrt(w4)).

    Spectrum entries below 1e-12 of the largest are zeroed before the
    square root; otherwise rank-deficient inputs (pure states in
    particular) pick up sqrt(machine-eps) noise from the spurious zeros.
    """
    m = _as_two_qubit_matrix(rho)
    r = m @ _SY_SY @ m.conj() @ _SY_SY
    w = np.sort(np.abs(np.linalg.eigvals(r).real))[::-1]
    w[w < 1e-12 * max(w[0], 1e-300)] = 0.0
    s = np.sqrt(w)
    return max(0.0, float(s[0] - s[1] - s[2] - s[3]))


def _binary_entropy(x: float, log_base: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    h = -(x * math.log(x) + (1.0 - x) * math.log(1.0 - x))
    return h / math.log(log_base)


def entanglement_of_formation(rho, log_base: float = 2.0) -> float:
    """Two-qubit entanglement of formation from the concurrence closed form."""
    c = concurrence(rho)
    x = (1.0 + math.sqrt(max(1.0 - c * c, 0.0))) / 2.0
    return _binary_entropy(x, log_base)
