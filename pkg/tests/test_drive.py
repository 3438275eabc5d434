import math
import threading
from dataclasses import dataclass

import numpy as np
import pytest

from app.core.exceptions import DegenerateLevelError, DimensionMismatchError, LabError
from app.core.operators import HermitianOperator, hs_norm
from app.modules.drive import service as drive_service
from app.modules.drive.schemas import GeneratorTag, Ordering
from app.modules.drive.service import (
    adiabatic_unitary,
    composite_unitary,
    drive_infidelity,
    gate_sequence,
    generator_gap,
    quench_infidelity,
    replay_gates,
    scaling_exponent,
    sequence_complexity,
    sweep_K,
    transfer_infidelity,
)
from app.modules.hamiltonians.service import two_level_exact_agp, two_level_gap
from app.modules.schedule.schemas import AngleSchedule
from app.modules.schedule.service import complexity_estimate, standard_angles, two_level_angles
from tests.conftest import LMG_LAMBDA, LMG_STEP, local_maxima, local_minima

STEPS = (4e-2, 2e-2, 1e-2, 5e-3)


@dataclass
class FixedModel:
    """A lambda-independent H with a fixed derivative."""

    h: np.ndarray
    dh: np.ndarray

    @property
    def dimension(self) -> int:
        return self.h.shape[0]

    def hamiltonian(self, lam: float) -> HermitianOperator:
        return HermitianOperator(self.h)

    def derivative(self, lam: float) -> HermitianOperator:
        return HermitianOperator(self.dh)


def _random_schedule(rng, K: int | None = None) -> AngleSchedule:
    K = K or int(rng.integers(1, 6))
    return AngleSchedule.build(float(rng.uniform(1.0, 8.0)), 1e-2, rng.uniform(-0.05, 0.05, size=K))


class TestCompositeUnitary:

    def test_zero_angles_give_identity(self, random_hermitian):
        h, dh = random_hermitian(4), random_hermitian(4)
        sched = AngleSchedule.build(3.0, 1e-3, [0.0, 0.0, 0.0])
        np.testing.assert_allclose(composite_unitary(h, dh, sched).matrix, np.eye(4), atol=1e-12)

    def test_commuting_generators(self, pauli):
        z = HermitianOperator(pauli["Z"])
        sched = standard_angles(4, 2.0, 1e-2)
        # conjugations cancel and the +k and -k kicks cancel pairwise
        np.testing.assert_allclose(composite_unitary(z, z, sched).matrix, np.eye(2), atol=1e-12)

    def test_dimension_mismatch(self, random_hermitian):
        with pytest.raises(DimensionMismatchError):
            composite_unitary(random_hermitian(2), random_hermitian(3), standard_angles(1, 1.0, 1e-3))

    def test_unitary_for_random_schedules(self, random_hermitian, rng):
        for _ in range(5):
            u = composite_unitary(random_hermitian(5), random_hermitian(5), _random_schedule(rng))
            np.testing.assert_allclose(u.matrix.conj().T @ u.matrix, np.eye(5), atol=1e-9)

    def test_orderings_differ_at_second_order(self, random_hermitian):
        h, dh = random_hermitian(4), random_hermitian(4)
        small = AngleSchedule.build(3.0, 1e-2, [1e-3, -2e-3, 1.5e-3])
        large = AngleSchedule.build(3.0, 1e-2, [2e-3, -4e-3, 3e-3])
        gap_small = hs_norm(
            composite_unitary(h, dh, small).matrix - composite_unitary(h, dh, small, Ordering.DESCENDING).matrix
        )
        gap_large = hs_norm(
            composite_unitary(h, dh, large).matrix - composite_unitary(h, dh, large, Ordering.DESCENDING).matrix
        )
        assert 3.0 < gap_large / gap_small < 5.0


class TestAdiabaticUnitary:

    def test_identity_cases(self, two_level_model):
        agp = two_level_exact_agp(two_level_model, 0.3)
        np.testing.assert_allclose(adiabatic_unitary(agp, 0.0).matrix, np.eye(2), atol=1e-15)
        np.testing.assert_allclose(adiabatic_unitary(HermitianOperator.zeros(2), 0.1).matrix, np.eye(2), atol=1e-15)

    def test_fourth_order_transport(self, two_level_model):
        lam = 0.5
        agp = two_level_exact_agp(two_level_model, lam)
        values = [transfer_infidelity(two_level_model, lam, s, adiabatic_unitary(agp, s)) for s in STEPS]
        assert 3.5 <= scaling_exponent(STEPS, values) <= 4.5


class TestGeneratorGap:

    def test_zero_angles(self, random_hermitian):
        sched = AngleSchedule.build(2.0, 1e-3, [0.0])
        assert generator_gap(random_hermitian(3), random_hermitian(3), sched) < 1e-12

    def test_commuting_case(self, pauli):
        z = HermitianOperator(pauli["Z"])
        assert generator_gap(z, z, standard_angles(3, 2.0, 1e-2)) < 1e-12

    def test_second_order_in_angles(self, two_level_model):
        lam = 0.5
        h, dh = two_level_model.hamiltonian(lam), two_level_model.derivative(lam)
        gap = two_level_gap(two_level_model, lam)
        values = [generator_gap(h, dh, two_level_angles(gap, s)) for s in STEPS]
        assert 3.4 <= values[2] / values[3] <= 4.6
        assert abs(scaling_exponent(STEPS, values) - 2.0) <= 0.3


class TestGateSequence:

    def test_counts(self):
        one = gate_sequence(standard_angles(1, 2.0, 1e-3))
        assert len(one) == 6 and not one.merged
        two = gate_sequence(standard_angles(2, 2.0, 1e-3), merge=True)
        assert len(two) == 9 and two.merged
        assert two.count(GeneratorTag.DH) == 4
        assert len(gate_sequence(standard_angles(7, 2.0, 1e-3), merge=True)) == 4 * 7 + 1

    def test_merged_rotation_angles(self):
        omega = 2.0
        seq = gate_sequence(standard_angles(3, omega, 1e-3), merge=True)
        h_angles = [step.angle for step in seq.steps if step.tag == GeneratorTag.H]
        assert h_angles[0] == pytest.approx(-3 * math.pi / omega)
        assert h_angles[-1] == pytest.approx(-3 * math.pi / omega)
        interior = h_angles[1:-1]
        assert interior[len(interior) // 2] == pytest.approx(2 * math.pi / omega)
        others = interior[: len(interior) // 2] + interior[len(interior) // 2 + 1 :]
        assert others == pytest.approx([math.pi / omega] * len(others))

    def test_replay_matches_composite(self, random_hermitian, rng):
        for ordering in (Ordering.ASCENDING, Ordering.DESCENDING):
            for _ in range(5):
                h, dh = random_hermitian(4), random_hermitian(4)
                sched = _random_schedule(rng)
                target = composite_unitary(h, dh, sched, ordering).matrix
                for merge in (False, True):
                    replayed = replay_gates(h, dh, gate_sequence(sched, merge, ordering)).matrix
                    np.testing.assert_allclose(replayed, target, atol=1e-10)

    def test_merge_preserves_unitary(self, random_hermitian, rng):
        h, dh = random_hermitian(3), random_hermitian(3)
        sched = _random_schedule(rng, K=4)
        merged = replay_gates(h, dh, gate_sequence(sched, merge=True)).matrix
        unmerged = replay_gates(h, dh, gate_sequence(sched, merge=False)).matrix
        np.testing.assert_allclose(merged, unmerged, atol=1e-12)

    def test_sequence_complexity_counts_every_gate(self):
        sched = standard_angles(2, 1.0, 1e-3)
        unmerged = sequence_complexity(gate_sequence(sched), 1.0, 1.0)
        merged = sequence_complexity(gate_sequence(sched, merge=True), 1.0, 1.0)
        # unmerged H rotations are 2 * sum_k 2 theta_k = 12 pi
        assert unmerged.h_term == pytest.approx(12 * math.pi)
        assert merged.h_term == pytest.approx(8 * math.pi)
        assert merged.dh_term == pytest.approx(unmerged.dh_term)


class TestInfidelity:

    def test_quench_two_level(self, two_level_model):
        assert quench_infidelity(two_level_model, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert abs(quench_infidelity(two_level_model, 0.0, 1e-3) - 2.5e-7) < 1e-9

    def test_exact_drive_beats_quench(self, two_level_model):
        step = 1e-3
        sched = two_level_angles(two_level_gap(two_level_model, 0.0), step)
        driven = drive_infidelity(two_level_model, 0.0, sched)
        assert driven <= 1e-4 * quench_infidelity(two_level_model, 0.0, step)

    def test_empty_drive_equals_quench(self, small_lmg_model):
        sched = AngleSchedule.build(5.0, 1e-2, [0.0, 0.0])
        assert drive_infidelity(small_lmg_model, 1.0, sched) == pytest.approx(
            quench_infidelity(small_lmg_model, 1.0, 1e-2), abs=1e-12
        )

    def test_two_level_drive_order(self, two_level_model):
        lam = 0.5
        gap = two_level_gap(two_level_model, lam)
        values = [drive_infidelity(two_level_model, lam, two_level_angles(gap, s)) for s in STEPS]
        assert scaling_exponent(STEPS, values) >= 3.5

    def test_excited_state_target(self, two_level_model):
        gap = two_level_gap(two_level_model, 0.0)
        sched = two_level_angles(gap, 1e-3)
        excited = drive_infidelity(two_level_model, 0.0, sched, target_index=1)
        assert excited <= 1e-4 * quench_infidelity(two_level_model, 0.0, 1e-3, target_index=1)

    def test_degenerate_target(self):
        model = FixedModel(h=np.diag([0.0, 0.0, 1.0]).astype(complex), dh=np.eye(3, dtype=complex))
        with pytest.raises(DegenerateLevelError):
            quench_infidelity(model, 0.0, 1e-3)
        # level 2 is isolated
        assert quench_infidelity(model, 0.0, 1e-3, target_index=2) == pytest.approx(0.0, abs=1e-15)

    def test_target_out_of_range(self, two_level_model):
        with pytest.raises(LabError):
            quench_infidelity(two_level_model, 0.0, 1e-3, target_index=2)

    def test_lmg_cancellation_beats_accumulation(self, lmg_model, lmg_spectrum):
        omega = lmg_spectrum.delta_max
        four = drive_infidelity(lmg_model, LMG_LAMBDA, standard_angles(4, omega, LMG_STEP))
        eight = drive_infidelity(lmg_model, LMG_LAMBDA, standard_angles(8, omega, LMG_STEP))
        assert four < eight

    def test_replayed_merged_sequence_agrees(self, lmg_model, lmg_spectrum):
        h, dh = lmg_model.hamiltonian(LMG_LAMBDA), lmg_model.derivative(LMG_LAMBDA)
        for K in range(1, 6):
            sched = standard_angles(K, lmg_spectrum.delta_max, LMG_STEP)
            via_composite = drive_infidelity(lmg_model, LMG_LAMBDA, sched)
            replayed = replay_gates(h, dh, gate_sequence(sched, merge=True))
            via_gates = transfer_infidelity(lmg_model, LMG_LAMBDA, LMG_STEP, replayed)
            assert via_gates == pytest.approx(via_composite, abs=1e-8)


class TestSweep:

    def test_two_level_rows(self, two_level_model):
        result = sweep_K(two_level_model, 0.0, 1e-3, None, 3)
        assert [row.K for row in result.rows] == [1, 2, 3]
        assert result.omega == pytest.approx(2.0)
        assert result.predicted_period == pytest.approx(1.0)
        assert result.ordering == Ordering.ASCENDING
        for row in result.rows:
            assert row.quench_infidelity == pytest.approx(quench_infidelity(two_level_model, 0.0, 1e-3))

    def test_complexity_uses_spectral_norms(self, small_lmg_model):
        result = sweep_K(small_lmg_model, 1.0, 1e-3, 6.0, 2)
        h, dh = small_lmg_model.hamiltonian(1.0), small_lmg_model.derivative(1.0)
        expected = complexity_estimate(
            standard_angles(2, 6.0, 1e-3), float(np.linalg.norm(h.matrix, 2)), float(np.linalg.norm(dh.matrix, 2))
        )
        assert result.rows[1].complexity.total == pytest.approx(expected.total, rel=1e-12)

    def test_parallel_rows_match_serial(self, small_lmg_model):
        serial = sweep_K(small_lmg_model, 1.0, 1e-3, None, 5, workers=1)
        parallel = sweep_K(small_lmg_model, 1.0, 1e-3, None, 5, workers=3)
        assert parallel.infidelities == pytest.approx(serial.infidelities, rel=1e-12, abs=1e-15)
        assert [row.K for row in parallel.rows] == [1, 2, 3, 4, 5]

    def test_regularized_schedules_built_before_fan_out(self, small_lmg_model, monkeypatch):
        threads = []
        original = drive_service.regularized_angles

        def recording(*args, **kwargs):
            threads.append(threading.current_thread())
            return original(*args, **kwargs)

        monkeypatch.setattr(drive_service, "regularized_angles", recording)
        parallel = sweep_K(small_lmg_model, 1.0, 1e-3, None, 4, eta=0.2, workers=3)
        assert threads == [threading.main_thread()] * 4
        serial = sweep_K(small_lmg_model, 1.0, 1e-3, None, 4, eta=0.2, workers=1)
        assert parallel.infidelities == pytest.approx(serial.infidelities, rel=1e-12, abs=1e-15)

    def test_rejects_empty_sweep(self, two_level_model):
        with pytest.raises(LabError):
            sweep_K(two_level_model, 0.0, 1e-3, None, 0)


@pytest.fixture(scope="module")
def lmg_sweep(lmg_model):
    return sweep_K(lmg_model, LMG_LAMBDA, LMG_STEP, None, 20)


@pytest.mark.slow
class TestLmgSweeps:

    def test_cancellation_and_accumulation(self, lmg_sweep, lmg_spectrum):
        values = lmg_sweep.infidelities
        minima, maxima = local_minima(values), local_maxima(values)
        assert any(abs(K - 4) <= 1 for K in minima)
        assert any(abs(K - 13) <= 1 for K in minima)
        assert any(abs(K - 8) <= 1 for K in maxima)
        assert any(abs(K - 17) <= 1 for K in maxima)
        assert min(values) <= 1e-2 * lmg_sweep.rows[0].quench_infidelity
        assert lmg_sweep.predicted_period == pytest.approx(lmg_spectrum.delta_max / lmg_spectrum.delta_min)

    def test_regularization_suppresses_returns(self, lmg_model, lmg_spectrum, lmg_sweep):
        eta = 0.1 * lmg_spectrum.delta_min
        regularized = sweep_K(lmg_model, LMG_LAMBDA, LMG_STEP, None, 20, eta=eta)
        quench = lmg_sweep.rows[0].quench_infidelity
        for K in (8, 17):
            assert regularized.rows[K - 1].infidelity < lmg_sweep.rows[K - 1].infidelity
            assert regularized.rows[K - 1].infidelity < quench
        assert regularized.eta == eta

    def test_cutoff_fifteen(self, lmg_model, lmg_spectrum):
        result = sweep_K(lmg_model, LMG_LAMBDA, LMG_STEP, 15.0, 20)
        values = result.infidelities
        assert result.predicted_period == pytest.approx(15.0 / lmg_spectrum.delta_min)
        assert min(values) <= 1e-2 * result.rows[0].quench_infidelity
        minima = local_minima(values)
        # low infidelity near odd multiples of K_p / 2
        first = result.predicted_period / 2
        early = min(minima, key=lambda K: abs(K - first))
        late = min(minima, key=lambda K: abs(K - 3 * first))
        assert abs(early - first) <= 1.5
        assert abs(late - 3 * first) <= 1.5
        # observed spacing of the returns matches the predicted period
        assert abs((late - early) - result.predicted_period) <= 1.0
