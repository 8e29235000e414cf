import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from collision.machine import SWAP
from fluctuation.crooks import (
    crooks_check,
    entropy_production_identity,
    jarzynski_check,
    matrix_element_symmetry,
    measurement_symmetry_check,
)
from fluctuation.protocol import (
    JointOutcomeDistribution,
    TwoPointProtocol,
    backward_distribution,
    forward_distribution,
    qubit_flip_protocol,
)
from qcore.entropy import mutual_information
from qcore.exceptions import SupportError
from qcore.sampling import RandomSource, haar_random_unitary, random_hamiltonian
from qcore.states import QUBITS, Hamiltonian, UnitaryOperator, evolve, gibbs_state


def _protocol(seed, dim=4, beta=1.0):
    rng = RandomSource(seed)
    return TwoPointProtocol(random_hamiltonian(dim, rng), random_hamiltonian(dim, rng), haar_random_unitary(dim, rng), beta)


class TestCrooks:
    @pytest.mark.parametrize("seed", range(8))
    def test_random_protocols(self, seed):
        report = crooks_check(_protocol(seed))
        assert report.passed(1e-9)
        assert len(report.pairs) == 16

    @pytest.mark.parametrize("beta", [0.1, 1.0, 3.0])
    def test_jarzynski(self, beta):
        protocol = _protocol(7, beta=beta)
        lhs, rhs = jarzynski_check(forward_distribution(protocol), protocol.beta, protocol.delta_f)
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_degenerate_spectra(self, rng):
        h_i = Hamiltonian.diagonal([0.0, 0.0, 1.0, 2.0])
        h_f = Hamiltonian.diagonal([0.5, 1.5, 1.5, 1.5])
        protocol = TwoPointProtocol(h_i, h_f, haar_random_unitary(4, rng), 0.7)
        report = crooks_check(protocol)
        assert len(report.pairs) == 3 * 2
        assert report.passed(1e-9)

    def test_entropy_production_equals_divergence(self):
        protocol = _protocol(3)
        kl, sigma = entropy_production_identity(
            forward_distribution(protocol), backward_distribution(protocol), protocol.beta, protocol.delta_f
        )
        assert kl >= 0
        assert kl == pytest.approx(sigma, abs=1e-9)

    def test_pauli_x_worked_example(self):
        protocol = qubit_flip_protocol()
        pf, pb = forward_distribution(protocol), backward_distribution(protocol)
        assert_allclose(pf.probs, [[0.0, 0.75], [0.25, 0.0]], atol=1e-15)
        assert_allclose(pb.probs, [[0.0, 0.25], [0.75, 0.0]], atol=1e-15)
        report = crooks_check(protocol)
        ratios = {(p.n, p.m): p.ratio for p in report.pairs}
        assert ratios == pytest.approx({(0, 1): 3.0, (1, 0): 1 / 3})
        kl, sigma = entropy_production_identity(pf, pb, protocol.beta, protocol.delta_f)
        assert sigma == pytest.approx(0.5 * math.log(3), abs=1e-12)
        assert kl == pytest.approx(sigma, abs=1e-12)

    def test_product_final_state_still_produces_entropy(self):
        # gap 1 su S, gap 2 su R: lo SWAP scambia gli stati di Gibbs locali
        h = Hamiltonian.diagonal([0.0, 2.0, 1.0, 3.0])
        protocol = TwoPointProtocol(h, h, UnitaryOperator(SWAP), 1.0)
        final = evolve(gibbs_state(h, 1.0), protocol.unitary)
        assert mutual_information(final, QUBITS) == pytest.approx(0.0, abs=1e-12)

        kl, sigma = entropy_production_identity(
            forward_distribution(protocol), backward_distribution(protocol), protocol.beta, protocol.delta_f
        )
        z = (1 + math.exp(-1)) * (1 + math.exp(-2))
        assert sigma == pytest.approx((math.exp(-1) - math.exp(-2)) / z, abs=1e-12)
        assert sigma > 0
        assert kl == pytest.approx(sigma, abs=1e-12)

    def test_support_violation(self):
        energies = np.array([0.0, 1.0])
        pf = JointOutcomeDistribution(np.array([[1.0, 0.0], [0.0, 0.0]]), energies, energies)
        pb = JointOutcomeDistribution(np.array([[0.0, 1.0], [0.0, 0.0]]), energies, energies)
        with pytest.raises(SupportError):
            entropy_production_identity(pf, pb, 1.0, 0.0)


class TestSymmetry:
    def test_conditional_probabilities(self, rng):
        for _ in range(10):
            v, w = rng.complex_gaussian(4), rng.complex_gaussian(4)
            p = np.outer(v, v.conj()) / np.vdot(v, v).real
            q = np.outer(w, w.conj()) / np.vdot(w, w).real
            forward, backward = measurement_symmetry_check(p, q, haar_random_unitary(4, rng))
            assert forward == pytest.approx(backward, abs=1e-12)

    def test_matrix_elements(self, rng):
        h = random_hamiltonian(5, rng)
        m, n = rng.complex_gaussian(5), rng.complex_gaussian(5)
        a, b = matrix_element_symmetry(h, m, n)
        assert a == pytest.approx(b, rel=1e-12)
