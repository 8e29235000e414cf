"""
Costruzioni analitiche: stato vicino a un prodotto e unitario che lo
decorrela, demo classica, versione purificata per prodotti di stati misti e
campionamento nell'intorno di Bures di uno stato prodotto.
"""

import numpy as np
from scipy.special import entr

from arrowlab.balance import EntropyBalanceReport, entropy_balance
from qcore.entropy import fidelity_and_bures, mutual_information
from qcore.exceptions import PreconditionError
from qcore.sampling import RandomSource, random_density_operator
from qcore.states import (
    QUBITS,
    BipartitionLayout,
    DensityOperator,
    UnitaryOperator,
    purify,
)
from runner.log_manager import get_logger

logger = get_logger("arrowlab.constructions")

BURES_FLOOR = 1e-6
_SQ = 1 / np.sqrt(2)


def _ket(layout: BipartitionLayout, i: int, j: int) -> np.ndarray:
    v = np.zeros(layout.joint_dim, dtype=complex)
    v[i * layout.dim_r + j] = 1.0
    return v


def near_product_state(epsilon: float, layout: BipartitionLayout = QUBITS) -> DensityOperator:
    """(1 - eps)|00><00| + eps|Psi+><Psi+|, con |Psi+> = (|01> + |10>)/sqrt(2)."""
    if not 0.0 <= epsilon <= 1.0:
        raise PreconditionError(f"epsilon deve stare in [0, 1], ricevuto {epsilon!r}")
    zero = _ket(layout, 0, 0)
    psi_plus = _SQ * (_ket(layout, 0, 1) + _ket(layout, 1, 0))
    m = (1 - epsilon) * np.outer(zero, zero.conj()) + epsilon * np.outer(psi_plus, psi_plus.conj())
    return DensityOperator(m)


def decorrelating_unitary(layout: BipartitionLayout = QUBITS) -> UnitaryOperator:
    """|00> -> |00>, Psi+ -> |01>, Psi- -> |10>, |11> -> |11>; identità fuori da span{0,1}x{0,1}."""
    u = np.eye(layout.joint_dim, dtype=complex)
    i01 = 0 * layout.dim_r + 1
    i10 = 1 * layout.dim_r + 0
    u[[i01, i10], i01] = [_SQ, _SQ]
    u[[i01, i10], i10] = [_SQ, -_SQ]
    return UnitaryOperator(u)


def binary_entropy(p: float) -> float:
    """H(p) = -p ln p - (1-p) ln(1-p), in nat."""
    return float(entr(p) + entr(1.0 - p))


def near_product_mutual_information(epsilon: float) -> float:
    """Informazione mutua in forma chiusa dello stato vicino al prodotto: 2 H(eps/2) - H(eps)."""
    return 2 * binary_entropy(epsilon / 2) - binary_entropy(epsilon)


# ---------- Correlazioni classiche ----------

def classical_correlated_state() -> DensityOperator:
    return DensityOperator.diagonal([0.5, 0.0, 0.0, 0.5])


def classical_decorrelating_unitary() -> UnitaryOperator:
    """Permutazione |00>->|00>, |01>->|01>, |10>->|11>, |11>->|10>."""
    perm = np.zeros((4, 4), dtype=complex)
    for src, dst in ((0, 0), (1, 1), (2, 3), (3, 2)):
        perm[dst, src] = 1.0
    return UnitaryOperator(perm)


def classical_correlated_demo() -> EntropyBalanceReport:
    return entropy_balance(classical_correlated_state(), QUBITS, classical_decorrelating_unitary())


def bell_state() -> DensityOperator:
    return DensityOperator.from_ket([1, 0, 0, 1])


def cnot() -> UnitaryOperator:
    return UnitaryOperator(np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex))


# ---------- Prodotti di stati misti ----------

def _completion(vector: np.ndarray) -> np.ndarray:
    """Unitario con prima colonna uguale a `vector` (completamento via QR)."""
    dim = vector.shape[0]
    q, _ = np.linalg.qr(np.column_stack([vector, np.eye(dim, dtype=complex)]))
    q[:, 0] = vector
    return q


def _purification_frame(rho: DensityOperator) -> np.ndarray:
    psi = purify(rho).matrix
    lam, vecs = np.linalg.eigh(psi)
    return _completion(vecs[:, -1])


def purified_near_product_state(rho_s: DensityOperator, rho_r: DensityOperator, epsilon: float) -> tuple:
    """Stato vicino al prodotto delle purificazioni di rho_S e rho_R.

    Il fattore S vive su S (x) S', il fattore R su R (x) R'; a eps = 0 le
    riduzioni restituiscono rho_S e rho_R.
    """
    layout = BipartitionLayout(rho_s.dim**2, rho_r.dim**2)
    frame = np.kron(_purification_frame(rho_s), _purification_frame(rho_r))
    core = near_product_state(epsilon, layout).matrix
    return DensityOperator(frame @ core @ frame.conj().T), layout


def purified_decorrelating_unitary(rho_s: DensityOperator, rho_r: DensityOperator) -> UnitaryOperator:
    layout = BipartitionLayout(rho_s.dim**2, rho_r.dim**2)
    frame = np.kron(_purification_frame(rho_s), _purification_frame(rho_r))
    w = decorrelating_unitary(layout).matrix
    return UnitaryOperator(frame @ w @ frame.conj().T)


# ---------- Intorno di Bures ----------

def bures_neighborhood_sample(
    product: DensityOperator,
    layout: BipartitionLayout,
    delta: float,
    rng: RandomSource,
    max_draws: int = 10,
    bisection_steps: int = 60,
) -> DensityOperator:
    """Stato correlato entro distanza di Bures `delta` da uno stato prodotto.

    Mescola il prodotto con una perturbazione casuale di rango pieno e cerca
    per bisezione il peso massimo che resta dentro la palla.
    """
    if delta < BURES_FLOOR:
        raise PreconditionError(f"delta {delta!r} sotto il limite numerico {BURES_FLOOR}")
    if mutual_information(product, layout) > 1e-9:
        raise PreconditionError("lo stato di partenza non è uno stato prodotto")

    base = product.matrix
    for draw in range(max_draws):
        perturbation = random_density_operator(layout.joint_dim, layout.joint_dim, rng).matrix

        def mix(w):
            return DensityOperator((1 - w) * base + w * perturbation)

        lo, hi = 0.0, 1.0
        if fidelity_and_bures(mix(hi), product)[1] > delta:
            for _ in range(bisection_steps):
                mid = 0.5 * (lo + hi)
                if fidelity_and_bures(mix(mid), product)[1] <= delta:
                    lo = mid
                else:
                    hi = mid
        else:
            lo = hi
        candidate = mix(lo)
        if lo > 0 and mutual_information(candidate, layout) > 0:
            logger.debug(f"campione di Bures: peso {lo:.3e} al tentativo {draw}")
            return candidate
    raise PreconditionError(f"nessuno stato correlato trovato entro delta={delta} in {max_draws} tentativi")
