"""Standard test models."""

from __future__ import annotations

import numpy as np

from hochwalk.bimodule import LindbladGenerator
from hochwalk.star_algebra import StarAlgebra, full_matrix

RANDOM_SEED = 20240611


def amplitude_damping(gamma: float = 1.0) -> tuple[StarAlgebra, LindbladGenerator]:
    """M_2 with H = 0 and a single jump operator sqrt(gamma) E_21."""
    sm = np.array([[0, 0], [1, 0]], dtype=complex)
    return full_matrix(2), LindbladGenerator(np.zeros((2, 2)), [np.sqrt(gamma) * sm])


def random_model(d: int = 3, nk: int = 2, seed: int = RANDOM_SEED, scale: float = 0.5):
    """M_d with a random Hamiltonian and nk random jump operators of moderate norm."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    H = scale * (a + a.conj().T) / 2
    ops = [scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(d) for _ in range(nk)]
    return full_matrix(d), LindbladGenerator(H, ops)


def zero_model(d: int = 2, nk: int = 1) -> tuple[StarAlgebra, LindbladGenerator]:
    return full_matrix(d), LindbladGenerator(np.zeros((d, d)), [np.zeros((d, d))] * nk)
