import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from collision.machine import (
    SWAP,
    CollisionTranscript,
    ReservoirSpec,
    TranscriptEntry,
    convergence_report,
    partial_swap_unitary,
    reverse_collisions,
    run_collisions,
    shuffled_transcript,
)
from qcore.entropy import trace_distance
from qcore.exceptions import DimensionMismatchError, JointDimensionError, PreconditionError
from qcore.sampling import RandomSource, random_density_operator
from qcore.states import DensityOperator, Hamiltonian, gibbs_state

EXCITED = DensityOperator.basis_state(2, 1)
GROUND = DensityOperator.basis_state(2, 0)


def _thermal(beta=1.0):
    return gibbs_state(Hamiltonian.diagonal([0.0, 1.0]), beta)


class TestPartialSwap:
    def test_unitary(self):
        u = partial_swap_unitary(0.37).matrix
        assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-14)

    def test_full_swap(self):
        assert_allclose(partial_swap_unitary(math.pi / 2).matrix, 1j * SWAP, atol=1e-15)


class TestReducedMode:
    @pytest.mark.parametrize("theta", [math.pi / 8, math.pi / 4, math.pi / 3])
    def test_commuting_contraction(self, theta):
        spec = ReservoirSpec(_thermal(), 6)
        trajectory, transcript = run_collisions(EXCITED, spec, partial_swap_unitary(theta))
        assert len(trajectory) == 7
        assert len(transcript.entries) == 6
        d0 = trajectory.distances[0]
        expected = [d0 * math.cos(theta) ** (2 * k) for k in range(7)]
        assert_allclose(trajectory.distances, expected, rtol=1e-10)

    def test_fitted_rate(self):
        spec = ReservoirSpec(_thermal(), 8)
        trajectory, _ = run_collisions(EXCITED, spec, partial_swap_unitary(math.pi / 4))
        summary = convergence_report(trajectory)
        assert not summary.exact
        assert summary.rate == pytest.approx(math.log(0.5), abs=1e-6)
        assert summary.residual < 1e-9

    def test_full_swap_converges_exactly(self):
        spec = ReservoirSpec(_thermal(), 3)
        trajectory, _ = run_collisions(EXCITED, spec, partial_swap_unitary(math.pi / 2))
        assert trajectory.distances[1] == pytest.approx(0.0, abs=1e-14)
        summary = convergence_report(trajectory)
        assert summary.exact
        assert summary.rate == -math.inf

    def test_state_approaches_ancilla(self, rng):
        ancilla = random_density_operator(2, 2, rng)
        spec = ReservoirSpec(ancilla, 20)
        trajectory, _ = run_collisions(random_density_operator(2, 2, rng), spec, partial_swap_unitary(math.pi / 4))
        # contrazione almeno cos(theta) per urto
        assert trajectory.distances[-1] <= 1e-2 * trajectory.distances[0]

    def test_zero_collisions(self):
        trajectory, transcript = run_collisions(EXCITED, ReservoirSpec(_thermal(), 0), partial_swap_unitary(0.3))
        assert len(trajectory) == 1
        assert transcript.entries == ()

    def test_inhomogeneous_reservoir_skips_fit(self):
        ancillas = (GROUND, _thermal(0.5), _thermal(2.0))
        spec = ReservoirSpec(GROUND, 3, ancillas)
        trajectory, _ = run_collisions(EXCITED, spec, partial_swap_unitary(0.4))
        assert not trajectory.homogeneous
        assert convergence_report(trajectory).rate is None

    def test_fit_needs_three_points(self):
        trajectory, _ = run_collisions(EXCITED, ReservoirSpec(_thermal(), 1), partial_swap_unitary(0.3))
        with pytest.raises(PreconditionError):
            convergence_report(trajectory)


class TestJointMode:
    def test_matches_reduced_trajectory(self, rng):
        initial = random_density_operator(2, 2, rng)
        spec = ReservoirSpec(_thermal(), 4)
        gate = partial_swap_unitary(0.6)
        reduced, _ = run_collisions(initial, spec, gate, mode="reduced")
        joint, _ = run_collisions(initial, spec, gate, mode="joint")
        for a, b in zip(reduced.system_states, joint.system_states):
            assert_allclose(a.matrix, b.matrix, atol=1e-12)

    def test_global_entropy_constant_and_marginals_grow(self, rng):
        spec = ReservoirSpec(_thermal(), 5)
        trajectory, _ = run_collisions(random_density_operator(2, 2, rng), spec, partial_swap_unitary(math.pi / 4), mode="joint")
        assert max(trajectory.joint_entropies) - min(trajectory.joint_entropies) < 1e-9
        sums = trajectory.marginal_entropy_sums
        assert all(b >= a - 1e-9 for a, b in zip(sums, sums[1:]))

    def test_exact_reversal(self, rng):
        initial = random_density_operator(2, 2, rng)
        spec = ReservoirSpec(_thermal(), 5)
        _, transcript = run_collisions(initial, spec, partial_swap_unitary(math.pi / 4), mode="joint")
        recovered = reverse_collisions(transcript, spec)
        assert trace_distance(recovered, initial) <= 1e-9

    def test_shuffled_reversal_fails(self):
        spec = ReservoirSpec(GROUND, 2)
        _, transcript = run_collisions(EXCITED, spec, partial_swap_unitary(math.pi / 4), mode="joint")
        shuffled = shuffled_transcript(transcript, RandomSource(0))
        assert [e.collision_index for e in shuffled.entries] == [1, 0]
        recovered = reverse_collisions(shuffled, spec)
        assert trace_distance(recovered, EXCITED) == pytest.approx(7 / 16, abs=1e-12)

    def test_reversal_needs_joint_state(self):
        spec = ReservoirSpec(_thermal(), 2)
        _, transcript = run_collisions(EXCITED, spec, partial_swap_unitary(0.3))
        with pytest.raises(PreconditionError):
            reverse_collisions(transcript, spec)

    def test_reversal_count_mismatch(self):
        spec = ReservoirSpec(_thermal(), 2)
        _, transcript = run_collisions(EXCITED, spec, partial_swap_unitary(0.3), mode="joint")
        with pytest.raises(DimensionMismatchError):
            reverse_collisions(transcript, ReservoirSpec(_thermal(), 3))

    def test_joint_dimension_cap(self):
        with pytest.raises(JointDimensionError):
            run_collisions(EXCITED, ReservoirSpec(_thermal(), 4), partial_swap_unitary(0.3), mode="joint", joint_dim_cap=16)


class TestValidation:
    def test_negative_count(self):
        with pytest.raises(PreconditionError):
            ReservoirSpec(GROUND, -1)

    def test_ancilla_must_be_qubit(self):
        with pytest.raises(DimensionMismatchError):
            ReservoirSpec(DensityOperator.maximally_mixed(3), 2)

    def test_transcript_indices_contiguous(self):
        gate = partial_swap_unitary(0.1)
        with pytest.raises(PreconditionError):
            CollisionTranscript((TranscriptEntry(0, gate), TranscriptEntry(2, gate)), EXCITED)

    def test_unknown_mode(self):
        with pytest.raises(PreconditionError):
            run_collisions(EXCITED, ReservoirSpec(GROUND, 1), partial_swap_unitary(0.1), mode="mixed")
