"""
Relazione di Crooks, uguaglianza di Jarzynski, identità della produzione di
entropia e simmetria delle probabilità condizionate di misura.

Convenzione: S_nm = beta (W_nm - dF), con dF = F_f - F_i.
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.special import rel_entr

from fluctuation.protocol import (
    JointOutcomeDistribution,
    TwoPointProtocol,
    backward_distribution,
    forward_distribution,
)
from qcore.exceptions import SupportError
from qcore.states import as_matrix
from runner.log_manager import get_logger

logger = get_logger("fluctuation.crooks")

ZERO_PROB = 1e-15


@dataclass(frozen=True)
class CrooksPair:
    n: int
    m: int
    ratio: float
    predicted: float
    deviation: float


@dataclass
class CrooksReport:
    pairs: List[CrooksPair]
    delta_f: float
    jarzynski_lhs: float
    entropy_production: float
    hard_failures: List[str] = field(default_factory=list)

    @property
    def max_relative_deviation(self) -> float:
        return max((p.deviation / p.predicted for p in self.pairs), default=0.0)

    def passed(self, tol: float = 1e-9) -> bool:
        return not self.hard_failures and self.max_relative_deviation <= tol


def crooks_check(protocol: TwoPointProtocol) -> CrooksReport:
    pf = forward_distribution(protocol)
    pb = backward_distribution(protocol)
    beta = protocol.beta
    delta_f = protocol.delta_f
    work = pf.work

    pairs, failures = [], []
    n_count, m_count = pf.probs.shape
    for n in range(n_count):
        for m in range(m_count):
            f, b = pf.probs[n, m], pb.probs[n, m]
            if b <= ZERO_PROB:
                if f > ZERO_PROB:
                    failures.append(f"({n},{m}): p_f = {f:.3e} con p_b nulla")
                continue
            predicted = float(np.exp(beta * (work[n, m] - delta_f)))
            ratio = float(f / b)
            pairs.append(CrooksPair(n, m, ratio, predicted, abs(ratio - predicted)))

    lhs, _ = jarzynski_check(pf, beta, delta_f)
    _, sigma = entropy_production_identity(pf, pb, beta, delta_f)
    report = CrooksReport(pairs, delta_f, lhs, sigma, failures)
    if failures:
        logger.warning(f"Crooks: {len(failures)} coppie impossibili osservate")
    return report


def jarzynski_check(dist: JointOutcomeDistribution, beta: float, delta_f: float) -> tuple:
    """(sum p_f e^{-beta W}, e^{-beta dF})."""
    lhs = float((dist.probs * np.exp(-beta * dist.work)).sum())
    return lhs, float(np.exp(-beta * delta_f))


def entropy_production_identity(
    pf: JointOutcomeDistribution, pb: JointOutcomeDistribution, beta: float, delta_f: float
) -> tuple:
    """(KL(p_f || p_b), sum p_f beta (W - dF)): coincidono per la relazione di Crooks."""
    f, b = pf.probs, pb.probs
    leak = (f > ZERO_PROB) & (b <= ZERO_PROB)
    if leak.any():
        raise SupportError(f"p_f ha supporto fuori da p_b in {int(leak.sum())} celle")
    mask = f > ZERO_PROB
    kl = float(rel_entr(f[mask], b[mask]).sum())
    sigma = float((f * beta * (pf.work - delta_f)).sum())
    return kl, sigma


# ---------- Simmetria delle misure ----------

def measurement_symmetry_check(p, q, unitary) -> tuple:
    """(tr(Q U P U^dagger), tr(P U^dagger Q U)): uguali per ciclicità della traccia."""
    pm, qm, u = as_matrix(p), as_matrix(q), as_matrix(unitary)
    forward = np.trace(qm @ u @ pm @ u.conj().T).real
    backward = np.trace(pm @ u.conj().T @ qm @ u).real
    return float(forward), float(backward)


def matrix_element_symmetry(operator, m, n) -> tuple:
    """(|<m|P|n>|^2, |<n|P|m>|^2) per P hermitiano."""
    pm = as_matrix(operator)
    vm = np.asarray(m, dtype=complex).reshape(-1)
    vn = np.asarray(n, dtype=complex).reshape(-1)
    return float(abs(vm.conj() @ pm @ vn) ** 2), float(abs(vn.conj() @ pm @ vm) ** 2)
