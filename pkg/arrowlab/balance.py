"""
Bilancio delle entropie locali sotto un unitario globale.

Per uno stato iniziale prodotto vale dS_S + dS_R = I(S':R') >= 0; in generale
dS_S + dS_R = I(S':R') - I(S:R), perché l'entropia congiunta non cambia.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import entr

from qcore.entropy import mutual_information, von_neumann_entropy
from qcore.exceptions import InvalidStateError
from qcore.states import BipartitionLayout, DensityOperator, UnitaryOperator, evolve, reduced_states

PRODUCT_TOL = 1e-9
ALIGNMENT_TOL = 1e-10


@dataclass(frozen=True)
class EntropyBalanceReport:
    delta_s_s: float
    delta_s_r: float
    total: float
    mutual_info_final: float
    mutual_info_initial: float
    schrodinger_product: float
    product_input: bool

    def __post_init__(self):
        if abs(self.total - (self.delta_s_s + self.delta_s_r)) > 1e-12:
            raise InvalidStateError("report incoerente: total != dS_S + dS_R")

    @property
    def identity_gap(self) -> float:
        """Scarto da dS_S + dS_R = I' - I (zero a meno di arrotondamenti)."""
        return self.total - (self.mutual_info_final - self.mutual_info_initial)

    def as_row(self) -> dict:
        return {
            "dS_S": self.delta_s_s,
            "dS_R": self.delta_s_r,
            "sum": self.total,
            "I_initial": self.mutual_info_initial,
            "I_final": self.mutual_info_final,
            "schrodinger_product": self.schrodinger_product,
            "product_input": self.product_input,
        }


def _local_entropies(rho, layout: BipartitionLayout) -> tuple:
    rho_s, rho_r = reduced_states(rho, layout)
    return von_neumann_entropy(rho_s), von_neumann_entropy(rho_r)


def entropy_balance(
    rho_joint: DensityOperator, layout: BipartitionLayout, unitary: UnitaryOperator
) -> EntropyBalanceReport:
    final = evolve(rho_joint, unitary)
    s_s, s_r = _local_entropies(rho_joint, layout)
    s_s_final, s_r_final = _local_entropies(final, layout)
    joint = von_neumann_entropy(rho_joint)
    joint_final = von_neumann_entropy(final)

    d_s = s_s_final - s_s
    d_r = s_r_final - s_r
    mi_initial = s_s + s_r - joint
    return EntropyBalanceReport(
        delta_s_s=d_s,
        delta_s_r=d_r,
        total=d_s + d_r,
        mutual_info_final=s_s_final + s_r_final - joint_final,
        mutual_info_initial=mi_initial,
        schrodinger_product=d_s * d_r,
        product_input=mi_initial <= PRODUCT_TOL,
    )


# ---------- Criterio di Schrödinger ----------

class ArrowAlignment(str, Enum):
    ALIGNED = "aligned"
    ANTI_ALIGNED = "antiAligned"
    DEGENERATE = "degenerate"


def schrodinger_check(report: EntropyBalanceReport, tol: float = ALIGNMENT_TOL) -> ArrowAlignment:
    """Frecce relative di sistema e resto: concordi se dS_S * dS_R > tol."""
    if report.schrodinger_product > tol:
        return ArrowAlignment.ALIGNED
    if report.schrodinger_product < -tol:
        return ArrowAlignment.ANTI_ALIGNED
    return ArrowAlignment.DEGENERATE


def correlation_ceiling(rho, layout: BipartitionLayout) -> tuple:
    """(I, 2 min(S_S, S_R)): con un resto quasi puro l'informazione mutua è limitata dalla sua entropia."""
    s_s, s_r = _local_entropies(rho, layout)
    return mutual_information(rho, layout), 2.0 * min(s_s, s_r)


def local_entropy_change(matrix: np.ndarray, layout: BipartitionLayout, baseline: float) -> float:
    """S(rho_S) + S(rho_R) - baseline su matrice grezza.

    Percorso veloce dell'ottimizzatore: tracce parziali e spettri su array
    numpy, senza costruire DensityOperator validati. La validazione resta
    agli ingressi di entropy_balance e della ricerca.
    """
    t = matrix.reshape(layout.dim_s, layout.dim_r, layout.dim_s, layout.dim_r)
    lam_s = np.linalg.eigvalsh(np.einsum("ijkj->ik", t))
    lam_r = np.linalg.eigvalsh(np.einsum("ijik->jk", t))
    lam = np.clip(np.concatenate([lam_s, lam_r]), 0.0, None)
    return float(entr(lam).sum()) - baseline
