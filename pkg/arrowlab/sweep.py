"""
Mappa di fase in regime di accoppiamento debole: per ogni (g, eps, t) evolve
lo stato vicino al prodotto sotto exp(-i(H_S + H_R + g H_int)t) e registra
dS_S + dS_R.
"""

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from arrowlab.balance import entropy_balance
from arrowlab.constructions import near_product_state
from qcore.exceptions import DimensionMismatchError, PreconditionError
from qcore.states import QUBITS, Hamiltonian, unitary_from_hamiltonian
from runner.log_manager import get_logger

logger = get_logger("arrowlab.sweep")


@dataclass(frozen=True)
class SweepGrid:
    couplings: tuple
    epsilons: tuple
    times: tuple

    def __post_init__(self):
        for name in ("couplings", "epsilons", "times"):
            values = tuple(float(v) for v in getattr(self, name))
            if not all(math.isfinite(v) for v in values):
                raise PreconditionError(f"{name}: valori non finiti nella griglia")
            object.__setattr__(self, name, values)
        if any(not 0.0 <= e <= 1.0 for e in self.epsilons):
            raise PreconditionError("epsilons: ogni valore deve stare in [0, 1]")

    @property
    def size(self) -> int:
        return len(self.couplings) * len(self.epsilons) * len(self.times)


@dataclass(frozen=True)
class SweepCell:
    coupling: float
    epsilon: float
    time: float
    min_sum: float

    def as_row(self) -> dict:
        return {"g": self.coupling, "epsilon": self.epsilon, "t": self.time, "sum": self.min_sum}


def exchange_interaction(kind: str = "dm") -> Hamiltonian:
    """Interazioni di scambio tra due qubit che conservano il numero di eccitazioni.

    "xy": |01><10| + |10><01| (lascia fermo Psi+, stato stazionario);
    "dm": i(|10><01| - |01><10|), rotazione reale nel sottospazio {|01>, |10>}.
    """
    h = np.zeros((4, 4), dtype=complex)
    if kind == "xy":
        h[1, 2] = h[2, 1] = 1.0
    elif kind == "dm":
        h[2, 1] = 1j
        h[1, 2] = -1j
    else:
        raise PreconditionError(f"interazione sconosciuta: {kind!r}")
    return Hamiltonian(h)


def default_local_hamiltonian() -> Hamiltonian:
    return Hamiltonian.diagonal([0.0, 1.0])


def weak_coupling_sweep(
    h_local_s: Hamiltonian, h_local_r: Hamiltonian, h_int: Hamiltonian, grid: SweepGrid
) -> List[SweepCell]:
    if h_local_s.dim != 2 or h_local_r.dim != 2 or h_int.dim != 4:
        raise DimensionMismatchError("la mappa di fase lavora su bipartizione 2x2")

    h_free = np.kron(h_local_s.matrix, np.eye(2)) + np.kron(np.eye(2), h_local_r.matrix)
    cells = []
    for g in grid.couplings:
        hamiltonian = Hamiltonian(h_free + g * h_int.matrix)
        for eps in grid.epsilons:
            state = near_product_state(eps)
            for t in grid.times:
                report = entropy_balance(state, QUBITS, unitary_from_hamiltonian(hamiltonian, t))
                cells.append(SweepCell(g, eps, t, report.total))
    logger.debug(f"mappa di fase: {len(cells)} celle")
    return cells
