"""
Tipi di base del laboratorio: stati, unitari, hamiltoniane e bipartizioni.

Convenzione di base: base computazionale in ordine lessicografico, il
sottosistema S è il fattore tensoriale di sinistra (lento). Tutte le funzioni
di matrice (exp, log, sqrt) passano per la decomposizione hermitiana.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from qcore.exceptions import DimensionMismatchError, InvalidStateError, PreconditionError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
UNITARY_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-10


def _square(matrix, what: str) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise InvalidStateError(f"{what}: attesa matrice quadrata, ricevuto shape {m.shape}")
    return m


def _freeze(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


# ---------- Stato ----------

@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Stato quantistico (eventualmente misto): hermitiano, traccia unitaria, semidefinito positivo."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _square(self.matrix, "DensityOperator")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > HERMITIAN_TOL:
            raise InvalidStateError(f"DensityOperator non hermitiano (scarto {herm:.3e})")
        m = (m + m.conj().T) / 2
        trace = float(np.trace(m).real)
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"DensityOperator con traccia {trace!r} != 1")
        lam_min = float(np.linalg.eigvalsh(m)[0])
        if lam_min < -PSD_TOL:
            raise InvalidStateError(f"DensityOperator non positivo (autovalore minimo {lam_min:.3e})")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_ket(cls, psi) -> "DensityOperator":
        v = np.asarray(psi, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise InvalidStateError("vettore di stato nullo")
        v = v / norm
        return cls(np.outer(v, v.conj()))

    @classmethod
    def basis_state(cls, dim: int, index: int) -> "DensityOperator":
        m = np.zeros((dim, dim), dtype=complex)
        m[index, index] = 1.0
        return cls(m)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def diagonal(cls, populations) -> "DensityOperator":
        return cls(np.diag(np.asarray(populations, dtype=complex)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_pure(self, tol: float = 1e-10) -> bool:
        return abs(float(np.trace(self.matrix @ self.matrix).real) - 1.0) <= tol


# ---------- Evoluzione ----------

@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = _square(self.matrix, "UnitaryOperator")
        err = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
        if err > UNITARY_TOL:
            raise InvalidStateError(f"UnitaryOperator non unitario (scarto {err:.3e})")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "UnitaryOperator":
        return cls(np.eye(dim, dtype=complex))

    def dagger(self) -> "UnitaryOperator":
        return UnitaryOperator(self.matrix.conj().T)


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Hamiltoniana hermitiana (unità naturali adimensionali) con la sua decomposizione spettrale."""

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(init=False)
    eigenvectors: np.ndarray = field(init=False)

    def __post_init__(self):
        m = _square(self.matrix, "Hamiltonian")
        scale = max(1.0, float(np.max(np.abs(m))))
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > HERMITIAN_TOL * scale:
            raise InvalidStateError(f"Hamiltonian non hermitiana (scarto {herm:.3e})")
        m = (m + m.conj().T) / 2
        lam, vecs = np.linalg.eigh(m)
        recon = float(np.max(np.abs(vecs @ np.diag(lam) @ vecs.conj().T - m)))
        if recon > RECONSTRUCTION_TOL * scale:
            raise InvalidStateError(f"decomposizione spettrale instabile (scarto {recon:.3e})")
        object.__setattr__(self, "matrix", _freeze(m))
        object.__setattr__(self, "eigenvalues", _freeze(lam))
        object.__setattr__(self, "eigenvectors", _freeze(vecs))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def diagonal(cls, energies) -> "Hamiltonian":
        return cls(np.diag(np.asarray(energies, dtype=complex)))


# ---------- Bipartizione ----------

class Subsystem(str, Enum):
    S = "S"
    R = "R"


@dataclass(frozen=True)
class BipartitionLayout:
    dim_s: int
    dim_r: int

    def __post_init__(self):
        if self.dim_s < 2 or self.dim_r < 2:
            raise DimensionMismatchError(
                f"bipartizione {self.dim_s}x{self.dim_r}: ogni fattore deve avere dimensione >= 2"
            )

    @property
    def joint_dim(self) -> int:
        return self.dim_s * self.dim_r

    @classmethod
    def parse(cls, text: str) -> "BipartitionLayout":
        """Legge una stringa del tipo '2x3'."""
        parts = text.lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"formato dims non valido: '{text}' (atteso es. 2x2)")
        return cls(int(parts[0]), int(parts[1]))

    def __str__(self) -> str:
        return f"{self.dim_s}x{self.dim_r}"


QUBITS = BipartitionLayout(2, 2)

StateLike = Union[DensityOperator, np.ndarray]


def as_matrix(x) -> np.ndarray:
    if isinstance(x, (DensityOperator, UnitaryOperator, Hamiltonian)):
        return x.matrix
    return np.asarray(x, dtype=complex)


def _check_joint(m: np.ndarray, layout: BipartitionLayout):
    if m.shape[0] != layout.joint_dim:
        raise DimensionMismatchError(
            f"stato di dimensione {m.shape[0]} incompatibile con la bipartizione {layout}"
        )


# ---------- Operazioni ----------

def tensor_product(a: DensityOperator, b: DensityOperator) -> DensityOperator:
    return DensityOperator(np.kron(a.matrix, b.matrix))


def partial_trace(rho: StateLike, layout: BipartitionLayout, keep: Subsystem) -> DensityOperator:
    m = as_matrix(rho)
    _check_joint(m, layout)
    t = m.reshape(layout.dim_s, layout.dim_r, layout.dim_s, layout.dim_r)
    if Subsystem(keep) is Subsystem.S:
        reduced = np.einsum("ijkj->ik", t)
    else:
        reduced = np.einsum("ijik->jk", t)
    return DensityOperator(reduced)


def reduced_states(rho: StateLike, layout: BipartitionLayout):
    return partial_trace(rho, layout, Subsystem.S), partial_trace(rho, layout, Subsystem.R)


def evolve(rho: DensityOperator, unitary: UnitaryOperator) -> DensityOperator:
    if rho.dim != unitary.dim:
        raise DimensionMismatchError(f"stato di dimensione {rho.dim}, unitario di dimensione {unitary.dim}")
    u = unitary.matrix
    out = u @ rho.matrix @ u.conj().T
    return DensityOperator((out + out.conj().T) / 2)


def unitary_from_hamiltonian(hamiltonian: Hamiltonian, t: float) -> UnitaryOperator:
    """U = exp(-iHt) per via spettrale."""
    vecs = hamiltonian.eigenvectors
    phases = np.exp(-1j * hamiltonian.eigenvalues * t)
    return UnitaryOperator((vecs * phases) @ vecs.conj().T)


def gibbs_state(hamiltonian: Hamiltonian, beta: float) -> DensityOperator:
    if not np.isfinite(beta) or beta < 0:
        raise PreconditionError(f"beta deve essere finito e >= 0, ricevuto {beta!r}")
    lam = hamiltonian.eigenvalues
    # shift sul minimo per evitare overflow
    weights = np.exp(-beta * (lam - lam[0]))
    populations = weights / weights.sum()
    vecs = hamiltonian.eigenvectors
    return DensityOperator((vecs * populations) @ vecs.conj().T)


def log_partition_function(hamiltonian: Hamiltonian, beta: float) -> float:
    """ln Z calcolato in modo stabile (log-sum-exp)."""
    lam = hamiltonian.eigenvalues
    return float(-beta * lam[0] + np.log(np.exp(-beta * (lam - lam[0])).sum()))


def hermitian_sqrt(m: np.ndarray) -> np.ndarray:
    lam, vecs = np.linalg.eigh(m)
    return (vecs * np.sqrt(np.clip(lam, 0.0, None))) @ vecs.conj().T


def purify(rho: DensityOperator) -> DensityOperator:
    """Purificazione canonica |psi> = (sqrt(rho) x I) sum_i |i>|i> su dim^2."""
    psi = hermitian_sqrt(rho.matrix).reshape(-1)
    return DensityOperator.from_ket(psi)


# ---------- Registri di qubit ----------

def apply_two_qubit_gate(rho: np.ndarray, gate: np.ndarray, q0: int, q1: int, n_qubits: int) -> np.ndarray:
    """Applica G (4x4) ai qubit (q0, q1) di un registro di n qubit: rho -> G rho G^dagger."""
    if q0 == q1 or not (0 <= q0 < n_qubits and 0 <= q1 < n_qubits):
        raise DimensionMismatchError(f"qubit non validi ({q0}, {q1}) su {n_qubits}")
    n = n_qubits
    g = np.asarray(gate, dtype=complex).reshape(2, 2, 2, 2)
    t = np.asarray(rho, dtype=complex).reshape([2] * (2 * n))
    t = np.tensordot(g, t, axes=([2, 3], [q0, q1]))
    t = np.moveaxis(t, [0, 1], [q0, q1])
    t = np.tensordot(t, g.conj(), axes=([n + q0, n + q1], [2, 3]))
    t = np.moveaxis(t, [-2, -1], [n + q0, n + q1])
    return t.reshape(2**n, 2**n)


def reduce_to_qubit(rho: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    left, right = 2**qubit, 2 ** (n_qubits - qubit - 1)
    t = np.asarray(rho).reshape(left, 2, right, left, 2, right)
    return np.einsum("aibajb->ij", t)
