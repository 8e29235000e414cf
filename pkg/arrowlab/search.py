"""
Ricerca di un unitario globale che riduce la somma delle entropie locali di
uno stato correlato.

U(theta) = exp(-i sum_k theta_k G_k) B_r, con G_k base di Gell-Mann
generalizzata (più l'identità) ortonormale nel prodotto di traccia e B_r il
punto base della ripartenza r:
  r = 0  -> unitario di ordinamento spettrale
  r = 1  -> identità
  r >= 2 -> campioni di Haar dai figli della RandomSource
Ogni ripartenza è un Nelder-Mead (scipy) partendo da theta = 0.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from arrowlab.balance import entropy_balance, local_entropy_change
from qcore.entropy import mutual_information, von_neumann_entropy
from qcore.exceptions import PreconditionError
from qcore.sampling import RandomSource, haar_random_unitary
from qcore.states import BipartitionLayout, DensityOperator, UnitaryOperator, reduced_states
from runner.log_manager import get_logger

logger = get_logger("arrowlab.search")

NON_PRODUCT_TOL = 1e-6


@dataclass
class UnitarySearchConfig:
    rng: RandomSource
    max_iterations: int = 1500
    tolerance: float = 1e-12
    restarts: int = 3
    step: float = 0.3

    def __post_init__(self):
        if self.max_iterations < 1:
            raise PreconditionError("max_iterations deve essere >= 1")
        if self.tolerance <= 0:
            raise PreconditionError("tolerance deve essere > 0")
        if self.restarts < 1:
            raise PreconditionError("restarts deve essere >= 1")


@dataclass
class SearchResult:
    unitary: UnitaryOperator
    achieved_sum: float
    decreased: bool
    best_restart: int
    restart_sums: list = field(default_factory=list)


def generator_basis(dim: int) -> np.ndarray:
    """Matrici di Gell-Mann generalizzate più I/sqrt(d): dim^2 generatori, tr(G_j G_k) = delta_jk."""
    basis = [np.eye(dim, dtype=complex) / np.sqrt(dim)]
    for j in range(dim):
        for k in range(j + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((dim, dim), dtype=complex)
            anti[j, k] = -1j / np.sqrt(2)
            anti[k, j] = 1j / np.sqrt(2)
            basis += [sym, anti]
    for level in range(1, dim):
        diag = np.zeros(dim)
        diag[:level] = 1.0
        diag[level] = -level
        basis.append(np.diag(diag / np.sqrt(level * (level + 1))).astype(complex))
    return np.array(basis)


def parametrized_unitary(theta: np.ndarray, basis: np.ndarray, base: np.ndarray) -> np.ndarray:
    h = np.tensordot(theta, basis, axes=1)
    lam, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    return ((vecs * np.exp(-1j * lam)) @ vecs.conj().T) @ base


def spectral_ordering_unitary(rho: DensityOperator) -> UnitaryOperator:
    """Porta gli autovettori di rho (autovalori decrescenti) sulla base computazionale in ordine."""
    _, vecs = np.linalg.eigh(rho.matrix)
    return UnitaryOperator(vecs[:, ::-1].conj().T)


def _base_points(rho: DensityOperator, config: UnitarySearchConfig) -> list:
    dim = rho.dim
    points = [spectral_ordering_unitary(rho).matrix, np.eye(dim, dtype=complex)]
    extra = config.restarts - len(points)
    if extra > 0:
        points += [haar_random_unitary(dim, child).matrix for child in config.rng.split(extra)]
    return points[: config.restarts]


def search_entropy_decreasing_unitary(
    rho_joint: DensityOperator, layout: BipartitionLayout, config: UnitarySearchConfig
) -> SearchResult:
    info = mutual_information(rho_joint, layout)
    if info <= NON_PRODUCT_TOL:
        raise PreconditionError(
            f"stato prodotto (I = {info:.3e}): la somma delle entropie locali non può diminuire"
        )

    dim = rho_joint.dim
    basis = generator_basis(dim)
    rho = rho_joint.matrix
    baseline = sum(von_neumann_entropy(r) for r in reduced_states(rho_joint, layout))

    def objective(theta, base):
        u = parametrized_unitary(theta, basis, base)
        return local_entropy_change(u @ rho @ u.conj().T, layout, baseline)

    n_params = basis.shape[0]
    simplex = np.vstack([np.zeros(n_params), config.step * np.eye(n_params)])
    # vicino al minimo f varia come |dx|^2: xatol coerente con fatol
    xatol = float(np.sqrt(config.tolerance))

    best = None
    sums = []
    for index, base in enumerate(_base_points(rho_joint, config)):
        res = minimize(
            objective,
            np.zeros(n_params),
            args=(base,),
            method="Nelder-Mead",
            options={
                "maxiter": config.max_iterations,
                "maxfev": config.max_iterations * 2,
                "fatol": config.tolerance,
                "xatol": xatol,
                "initial_simplex": simplex,
                "adaptive": True,
            },
        )
        unitary = UnitaryOperator(parametrized_unitary(res.x, basis, base))
        achieved = entropy_balance(rho_joint, layout, unitary).total
        sums.append(achieved)
        logger.debug(f"ripartenza {index}: somma {achieved:.6e} ({res.nfev} valutazioni)")
        # a parità di valore vince l'indice più basso
        if best is None or achieved < best[1]:
            best = (unitary, achieved, index)

    unitary, achieved, index = best
    decreased = achieved < 0
    if not decreased:
        logger.warning(
            f"nessuna diminuzione trovata dopo {config.restarts} ripartenze (migliore {achieved:.3e}, I = {info:.3e})"
        )
    return SearchResult(unitary, achieved, decreased, index, sums)
