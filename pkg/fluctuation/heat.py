"""
Temperature effettive, disuguaglianza di Clausius e calore dissipato nel
serbatoio come entropia relativa rispetto allo stato di Gibbs finale.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from arrowlab.balance import EntropyBalanceReport, entropy_balance
from arrowlab.sweep import exchange_interaction
from qcore.entropy import relative_entropy
from qcore.exceptions import PreconditionError, UndefinedTemperatureError
from qcore.states import (
    QUBITS,
    BipartitionLayout,
    DensityOperator,
    Hamiltonian,
    UnitaryOperator,
    evolve,
    gibbs_state,
    reduced_states,
    tensor_product,
    unitary_from_hamiltonian,
)

ENTROPY_FLOOR = 1e-10


@dataclass(frozen=True)
class TemperatureReport:
    t_s: float
    t_r: float
    clausius_lhs: float
    delta_u_s: float
    delta_u_r: float
    heat_flow_consistent: Optional[bool] = None


def effective_temperatures(
    report: EntropyBalanceReport, delta_u_s: float, delta_u_r: float, product_gibbs: bool = False
) -> TemperatureReport:
    """T = dU/dS per sottosistema; Clausius dU_S/T_S + dU_R/T_R = dS_S + dS_R."""
    for name, ds in (("S", report.delta_s_s), ("R", report.delta_s_r)):
        if abs(ds) <= ENTROPY_FLOOR:
            raise UndefinedTemperatureError(f"temperatura di {name} non definita: dS = {ds:.3e}")
    for name, du in (("S", delta_u_s), ("R", delta_u_r)):
        if du == 0:
            raise UndefinedTemperatureError(f"temperatura di {name} nulla: dU = 0")

    t_s = delta_u_s / report.delta_s_s
    t_r = delta_u_r / report.delta_s_r
    clausius = delta_u_s / t_s + delta_u_r / t_r

    consistent = None
    if product_gibbs and t_s != t_r:
        # il calore va dal più caldo al più freddo
        consistent = delta_u_r > delta_u_s if t_r < t_s else delta_u_s > delta_u_r
    return TemperatureReport(t_s, t_r, clausius, delta_u_s, delta_u_r, consistent)


def energy_changes(
    rho_joint: DensityOperator,
    layout: BipartitionLayout,
    unitary: UnitaryOperator,
    h_s: Hamiltonian,
    h_r: Hamiltonian,
) -> tuple:
    before = reduced_states(rho_joint, layout)
    after = reduced_states(evolve(rho_joint, unitary), layout)

    def energy(h, rho):
        return float(np.trace(h.matrix @ rho.matrix).real)

    return energy(h_s, after[0]) - energy(h_s, before[0]), energy(h_r, after[1]) - energy(h_r, before[1])


@dataclass(frozen=True)
class HeatFlowResult:
    beta_s: float
    beta_r: float
    balance: EntropyBalanceReport
    delta_u_s: float
    delta_u_r: float
    temperatures: Optional[TemperatureReport]

    @property
    def hot_energy_change(self) -> float:
        """Variazione di energia del sottosistema più caldo (beta minore)."""
        return self.delta_u_s if self.beta_s < self.beta_r else self.delta_u_r


def heat_flow_trial(beta_s: float, beta_r: float, omega: float, t: float, coupling: float = 1.0) -> HeatFlowResult:
    """Qubit di Gibbs con lo stesso gap e scambio risonante che commuta con H_S + H_R."""
    if beta_s <= 0 or beta_r <= 0:
        raise PreconditionError("le temperature inverse devono essere > 0")
    h_local = Hamiltonian.diagonal([0.0, omega])
    initial = tensor_product(gibbs_state(h_local, beta_s), gibbs_state(h_local, beta_r))
    h_total = Hamiltonian(
        np.kron(h_local.matrix, np.eye(2))
        + np.kron(np.eye(2), h_local.matrix)
        + coupling * exchange_interaction("xy").matrix
    )
    unitary = unitary_from_hamiltonian(h_total, t)
    balance = entropy_balance(initial, QUBITS, unitary)
    du_s, du_r = energy_changes(initial, QUBITS, unitary, h_local, h_local)
    try:
        temperatures = effective_temperatures(balance, du_s, du_r, product_gibbs=True)
    except UndefinedTemperatureError:
        temperatures = None
    return HeatFlowResult(beta_s, beta_r, balance, du_s, du_r, temperatures)


def damping_heat(state: DensityOperator, h_final: Hamiltonian, beta: float) -> float:
    """Calore dissipato portando `state` allo stato di Gibbs di H_f: S(state || e^{-beta H_f}/Z_f)."""
    return relative_entropy(state, gibbs_state(h_final, beta))
