"""
Misure informazionali su stati densi: entropia di von Neumann (nats),
informazione mutua, fedeltà/distanza di Bures, distanza di traccia,
entropia relativa.
"""

import numpy as np
from scipy.special import entr

from qcore.exceptions import DimensionMismatchError, InvalidStateError, SupportError
from qcore.states import (
    PSD_TOL,
    BipartitionLayout,
    StateLike,
    as_matrix,
    hermitian_sqrt,
    reduced_states,
)

SUPPORT_TOL = 1e-12


def clamped_spectrum(rho: StateLike) -> np.ndarray:
    """Autovalori con arrotondamenti in [-1e-10, 0) portati a zero; sotto -1e-10 è errore."""
    lam = np.linalg.eigvalsh(as_matrix(rho))
    if lam[0] < -PSD_TOL:
        raise InvalidStateError(f"autovalore {lam[0]:.3e} sotto la tolleranza: stato non valido")
    return np.clip(lam, 0.0, None)


def von_neumann_entropy(rho: StateLike) -> float:
    return float(entr(clamped_spectrum(rho)).sum())


def mutual_information(rho: StateLike, layout: BipartitionLayout) -> float:
    rho_s, rho_r = reduced_states(rho, layout)
    return von_neumann_entropy(rho_s) + von_neumann_entropy(rho_r) - von_neumann_entropy(rho)


def is_product(rho: StateLike, layout: BipartitionLayout, tol: float = 1e-9) -> bool:
    return mutual_information(rho, layout) <= tol


def _same_dim(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimensioni diverse: {a.shape[0]} e {b.shape[0]}")


def fidelity_and_bures(rho: StateLike, sigma: StateLike) -> tuple:
    """F = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, D_B = sqrt(2(1 - sqrt F))."""
    a, b = as_matrix(rho), as_matrix(sigma)
    _same_dim(a, b)
    root = hermitian_sqrt(a)
    inner = root @ b @ root
    lam = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    if lam[0] < -PSD_TOL:
        raise InvalidStateError(f"matrice interna della fedeltà non positiva ({lam[0]:.3e})")
    root_fidelity = min(1.0, float(np.sqrt(np.clip(lam, 0.0, None)).sum()))
    fidelity = root_fidelity**2
    bures = float(np.sqrt(max(0.0, 2.0 * (1.0 - root_fidelity))))
    return fidelity, bures


def bures_distance(rho: StateLike, sigma: StateLike) -> float:
    return fidelity_and_bures(rho, sigma)[1]


def trace_distance(rho: StateLike, sigma: StateLike) -> float:
    a, b = as_matrix(rho), as_matrix(sigma)
    _same_dim(a, b)
    diff = a - b
    return 0.5 * float(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


def relative_entropy(rho: StateLike, sigma: StateLike) -> float:
    """S(rho||sigma) = tr rho (ln rho - ln sigma), in nats."""
    a, b = as_matrix(rho), as_matrix(sigma)
    _same_dim(a, b)
    mu, vecs = np.linalg.eigh(b)
    # pesi di rho sugli autovettori di sigma
    weights = np.einsum("ki,kl,li->i", vecs.conj(), a, vecs).real
    kernel = mu < SUPPORT_TOL
    leak = float(weights[kernel].sum())
    if leak > SUPPORT_TOL:
        raise SupportError(f"supporto di rho fuori da quello di sigma (peso {leak:.3e}): entropia relativa infinita")
    cross = float((weights[~kernel] * np.log(mu[~kernel])).sum())
    value = -von_neumann_entropy(a) - cross
    return max(0.0, value)
