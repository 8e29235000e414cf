"""
Protocollo di misura a due tempi: misura proiettiva su H_i, evoluzione U,
misura proiettiva su H_f. Distribuzioni congiunte in avanti e all'indietro
calcolate per enumerazione esatta di tutte le coppie (n, m).
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from qcore.exceptions import DimensionMismatchError, InvalidStateError, PreconditionError
from qcore.states import Hamiltonian, UnitaryOperator, gibbs_state, log_partition_function

CLUSTER_TOL = 1e-9
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EigenProjector:
    energy: float
    projector: np.ndarray

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.projector).real))


def eigen_projectors(hamiltonian: Hamiltonian, tol: float = CLUSTER_TOL) -> List[EigenProjector]:
    """Un proiettore per ogni gruppo di autovalori con salti <= tol."""
    lam = hamiltonian.eigenvalues
    vecs = hamiltonian.eigenvectors
    clusters = [[0]]
    for i in range(1, len(lam)):
        if lam[i] - lam[i - 1] <= tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    out = []
    for idx in clusters:
        block = vecs[:, idx]
        out.append(EigenProjector(float(np.mean(lam[idx])), block @ block.conj().T))
    return out


@dataclass(frozen=True, eq=False)
class TwoPointProtocol:
    h_initial: Hamiltonian
    h_final: Hamiltonian
    unitary: UnitaryOperator
    beta: float

    def __post_init__(self):
        if not (self.h_initial.dim == self.h_final.dim == self.unitary.dim):
            raise DimensionMismatchError("H_i, H_f e U devono avere la stessa dimensione")
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise PreconditionError(f"beta deve essere finito e > 0, ricevuto {self.beta!r}")

    @property
    def delta_f(self) -> float:
        """F_f - F_i con F = -ln(Z)/beta."""
        return -(log_partition_function(self.h_final, self.beta) - log_partition_function(self.h_initial, self.beta)) / self.beta


@dataclass(frozen=True, eq=False)
class JointOutcomeDistribution:
    probs: np.ndarray
    energies_initial: np.ndarray
    energies_final: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (len(self.energies_initial), len(self.energies_final)):
            raise DimensionMismatchError(f"probabilità di forma {p.shape} incompatibile con gli spettri")
        if p.min() < -NORMALIZATION_TOL:
            raise InvalidStateError(f"probabilità negativa: {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        total = float(p.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidStateError(f"distribuzione non normalizzata: somma {total!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def work(self) -> np.ndarray:
        """W_nm = E'_m - E_n."""
        return np.subtract.outer(self.energies_final, self.energies_initial).T


def _energies(projectors) -> np.ndarray:
    return np.array([p.energy for p in projectors])


def forward_distribution(protocol: TwoPointProtocol) -> JointOutcomeDistribution:
    """p_f(n,m) = tr(Q^m U P^n rho_i P^n U^dagger), rho_i di Gibbs su H_i."""
    ps = eigen_projectors(protocol.h_initial)
    qs = eigen_projectors(protocol.h_final)
    rho = gibbs_state(protocol.h_initial, protocol.beta).matrix
    u = protocol.unitary.matrix
    probs = np.empty((len(ps), len(qs)))
    for n, p in enumerate(ps):
        moved = u @ p.projector @ rho @ p.projector @ u.conj().T
        for m, q in enumerate(qs):
            probs[n, m] = np.trace(q.projector @ moved).real
    return JointOutcomeDistribution(probs, _energies(ps), _energies(qs))


def backward_distribution(protocol: TwoPointProtocol) -> JointOutcomeDistribution:
    """p_b(n,m) = tr(P^n U^dagger Q^m rho_f Q^m U), rho_f di Gibbs su H_f."""
    ps = eigen_projectors(protocol.h_initial)
    qs = eigen_projectors(protocol.h_final)
    rho = gibbs_state(protocol.h_final, protocol.beta).matrix
    u = protocol.unitary.matrix
    probs = np.empty((len(ps), len(qs)))
    for m, q in enumerate(qs):
        moved = u.conj().T @ q.projector @ rho @ q.projector @ u
        for n, p in enumerate(ps):
            probs[n, m] = np.trace(p.projector @ moved).real
    return JointOutcomeDistribution(probs, _energies(ps), _energies(qs))


def qubit_flip_protocol() -> TwoPointProtocol:
    """Caso risolto a mano: H_i = H_f = diag(0, ln 3), U = X, beta = 1.

    rho_i = diag(3/4, 1/4); p_f = [[0, 3/4], [1/4, 0]], p_b = [[0, 1/4], [3/4, 0]],
    rapporti 3 e 1/3, sigma medio = ln(3)/2.
    """
    h = Hamiltonian.diagonal([0.0, float(np.log(3.0))])
    return TwoPointProtocol(h, h, UnitaryOperator(np.array([[0, 1], [1, 0]], dtype=complex)), 1.0)
