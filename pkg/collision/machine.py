"""
Macchina termalizzante a collisioni: un qubit di sistema urta in sequenza
ancille fresche del serbatoio.

Due modalità:
  reduced -> si segue solo lo stato 2x2 del sistema (ancilla fresca e
             scorrelata a ogni urto);
  joint   -> si conserva lo stato congiunto sistema + tutte le ancille
             (sistema = qubit 0, ancilla k = qubit k+1), così la reversibilità
             e la costanza dell'entropia globale sono verificabili esattamente.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.stats import linregress

from qcore.entropy import trace_distance, von_neumann_entropy
from qcore.exceptions import DimensionMismatchError, JointDimensionError, PreconditionError
from qcore.sampling import RandomSource
from qcore.states import DensityOperator, UnitaryOperator, apply_two_qubit_gate, reduce_to_qubit
from runner.log_manager import get_logger
from runner.settings import SETTINGS

logger = get_logger("collision.machine")

EXACT_TOL = 1e-14

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def partial_swap_unitary(theta: float) -> UnitaryOperator:
    """cos(theta) I + i sin(theta) SWAP."""
    return UnitaryOperator(np.cos(theta) * np.eye(4) + 1j * np.sin(theta) * SWAP)


# ---------- Serbatoio e registrazioni ----------

@dataclass(frozen=True, eq=False)
class ReservoirSpec:
    ancilla_state: DensityOperator
    count: int
    ancilla_states: tuple = ()

    def __post_init__(self):
        if self.count < 0:
            raise PreconditionError(f"numero di ancille negativo: {self.count}")
        if self.ancilla_state.dim != 2:
            raise DimensionMismatchError("le ancille sono qubit")
        if self.ancilla_states:
            if len(self.ancilla_states) != self.count:
                raise PreconditionError("ancilla_states deve avere esattamente `count` elementi")
            if any(a.dim != 2 for a in self.ancilla_states):
                raise DimensionMismatchError("le ancille sono qubit")

    @property
    def homogeneous(self) -> bool:
        return not self.ancilla_states

    def ancilla(self, k: int) -> DensityOperator:
        return self.ancilla_states[k] if self.ancilla_states else self.ancilla_state


@dataclass(frozen=True, eq=False)
class TranscriptEntry:
    collision_index: int
    unitary: UnitaryOperator


@dataclass(frozen=True, eq=False)
class CollisionTranscript:
    entries: tuple
    system_initial: DensityOperator
    joint_state: Optional[np.ndarray] = None

    def __post_init__(self):
        indices = sorted(e.collision_index for e in self.entries)
        if indices != list(range(len(self.entries))):
            raise PreconditionError(f"indici di collisione non contigui da 0: {indices}")


@dataclass
class TrajectoryRecord:
    system_states: List[DensityOperator] = field(default_factory=list)
    entropies: List[float] = field(default_factory=list)
    distances: List[float] = field(default_factory=list)
    joint_entropies: List[float] = field(default_factory=list)
    marginal_entropy_sums: List[float] = field(default_factory=list)
    homogeneous: bool = True

    def __len__(self) -> int:
        return len(self.system_states)

    def record(self, state: DensityOperator, ancilla: DensityOperator):
        self.system_states.append(state)
        self.entropies.append(von_neumann_entropy(state))
        self.distances.append(trace_distance(state, ancilla))


# ---------- Dinamica ----------

def _check_joint_dim(n_qubits: int, cap: int):
    if 2**n_qubits > cap:
        raise JointDimensionError(f"stato congiunto di dimensione 2^{n_qubits} oltre il limite {cap}")


def _reduced_step(rho: np.ndarray, ancilla: np.ndarray, gate: np.ndarray) -> np.ndarray:
    joint = gate @ np.kron(rho, ancilla) @ gate.conj().T
    return np.einsum("ijkj->ik", joint.reshape(2, 2, 2, 2))


def run_collisions(
    system_init: DensityOperator,
    spec: ReservoirSpec,
    gate: UnitaryOperator,
    mode: str = "reduced",
    joint_dim_cap: int = None,
) -> tuple:
    """Esegue `spec.count` urti; restituisce (TrajectoryRecord, CollisionTranscript)."""
    if system_init.dim != 2 or gate.dim != 4:
        raise DimensionMismatchError("sistema di dimensione 2 e porta di dimensione 4 richiesti")
    if mode not in ("reduced", "joint"):
        raise PreconditionError(f"modalità sconosciuta: {mode!r}")
    cap = joint_dim_cap or SETTINGS["joint_dim_cap"]

    g = gate.matrix
    trajectory = TrajectoryRecord(homogeneous=spec.homogeneous)
    trajectory.record(system_init, spec.ancilla(0))
    entries = tuple(TranscriptEntry(k, gate) for k in range(spec.count))

    if mode == "reduced":
        rho = system_init.matrix
        for k in range(spec.count):
            ancilla = spec.ancilla(k)
            rho = _reduced_step(rho, ancilla.matrix, g)
            trajectory.record(DensityOperator(rho), ancilla)
            logger.debug(f"urto {k}: distanza {trajectory.distances[-1]:.6e}")
        return trajectory, CollisionTranscript(entries, system_init)

    n_qubits = spec.count + 1
    _check_joint_dim(n_qubits, cap)
    state = system_init.matrix
    for k in range(spec.count):
        state = np.kron(state, spec.ancilla(k).matrix)

    def record_joint(current):
        trajectory.joint_entropies.append(von_neumann_entropy(current))
        trajectory.marginal_entropy_sums.append(
            sum(von_neumann_entropy(reduce_to_qubit(current, q, n_qubits)) for q in range(n_qubits))
        )

    record_joint(state)
    for k in range(spec.count):
        state = apply_two_qubit_gate(state, g, 0, k + 1, n_qubits)
        trajectory.record(DensityOperator(reduce_to_qubit(state, 0, n_qubits)), spec.ancilla(k))
        record_joint(state)
        logger.debug(f"urto {k} (joint): distanza {trajectory.distances[-1]:.6e}")
    return trajectory, CollisionTranscript(entries, system_init, state)


def reverse_collisions(transcript: CollisionTranscript, spec: ReservoirSpec, joint_dim_cap: int = None) -> DensityOperator:
    """Applica gli inversi degli urti nell'ordine registrato, a ritroso, sullo stato congiunto."""
    if len(transcript.entries) != spec.count:
        raise DimensionMismatchError(
            f"transcript con {len(transcript.entries)} urti, serbatoio con {spec.count} ancille"
        )
    if not transcript.entries:
        return transcript.system_initial
    if transcript.joint_state is None:
        raise PreconditionError("inversione possibile solo con lo stato congiunto (modalità joint)")

    n_qubits = spec.count + 1
    _check_joint_dim(n_qubits, joint_dim_cap or SETTINGS["joint_dim_cap"])
    state = transcript.joint_state
    for entry in reversed(transcript.entries):
        state = apply_two_qubit_gate(state, entry.unitary.dagger().matrix, 0, entry.collision_index + 1, n_qubits)
    return DensityOperator(reduce_to_qubit(state, 0, n_qubits))


def shuffled_transcript(transcript: CollisionTranscript, rng: RandomSource) -> CollisionTranscript:
    """Stesse voci in ordine permutato (diverso dall'originale quando possibile)."""
    entries = list(transcript.entries)
    if len(entries) < 2:
        return transcript
    order = list(range(len(entries)))
    while order == list(range(len(entries))):
        order = [int(i) for i in rng.generator.permutation(len(entries))]
    return CollisionTranscript(tuple(entries[i] for i in order), transcript.system_initial, transcript.joint_state)


# ---------- Convergenza ----------

@dataclass(frozen=True)
class ConvergenceSummary:
    final_distance: float
    rate: Optional[float]
    residual: Optional[float]
    exact: bool


def convergence_report(trajectory: TrajectoryRecord) -> ConvergenceSummary:
    """Fit ai minimi quadrati di ln(distanza) contro l'indice di urto."""
    if len(trajectory) < 3:
        raise PreconditionError("servono almeno 3 punti di traiettoria")
    distances = np.asarray(trajectory.distances)
    final = float(distances[-1])
    if not trajectory.homogeneous:
        logger.warning("serbatoio inomogeneo: fit del tasso di contrazione saltato")
        return ConvergenceSummary(final, None, None, final < EXACT_TOL)

    index = np.arange(len(distances))
    mask = distances > EXACT_TOL
    if mask.sum() < 2:
        return ConvergenceSummary(final, float("-inf"), 0.0, True)
    fit = linregress(index[mask], np.log(distances[mask]))
    predicted = fit.intercept + fit.slope * index[mask]
    residual = float(np.sqrt(np.mean((np.log(distances[mask]) - predicted) ** 2)))
    return ConvergenceSummary(final, float(fit.slope), residual, False)
