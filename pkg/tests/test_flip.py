import math

import numpy as np
import pytest

from cptsim.atom import DecayConfig, dark_states, mixing_angle
from cptsim.errors import ValidationError
from cptsim.flip import (
    HwpSchedule,
    adiabatic_flip,
    adiabatic_flip_dissipative,
    hwp_to_fields,
    ramp_sweep,
)
from cptsim.stateprep import QUBIT_MAP

QUARTER_PI = math.pi / 4


class TestHwpToFields:
    def test_plate_at_zero_feeds_pi_beam(self):
        fields = hwp_to_fields(0.0, 3.0)
        assert fields.omega_p == 0.0
        assert fields.omega_z == 3.0

    def test_plate_at_quarter_pi_feeds_in_plane_beam(self):
        fields = hwp_to_fields(QUARTER_PI, 3.0)
        assert abs(fields.omega_p) == pytest.approx(3.0)
        assert abs(fields.omega_z) <= 1e-15

    def test_midpoint_splits_evenly(self):
        fields = hwp_to_fields(math.pi / 8, 1.0)
        assert abs(fields.omega_p) == pytest.approx(1.0 / math.sqrt(2.0))
        assert abs(fields.omega_z) == pytest.approx(1.0 / math.sqrt(2.0))
        theta, _ = mixing_angle(fields)
        assert theta == pytest.approx(2.0 * math.atan2(1.0, math.sqrt(2.0)))

    def test_intensity_conserved(self):
        for alpha in np.linspace(0, QUARTER_PI, 7):
            fields = hwp_to_fields(alpha, 2.0)
            assert abs(fields.omega_p) ** 2 + abs(fields.omega_z) ** 2 == pytest.approx(4.0)

    def test_endpoints_reproduce_qubit_targets(self):
        (dark0,) = dark_states(hwp_to_fields(0.0, 1.0))
        (dark1,) = dark_states(hwp_to_fields(QUARTER_PI, 1.0))
        assert abs(np.vdot(dark0, QUBIT_MAP.zero_state)) ** 2 >= 1.0 - 1e-12
        assert abs(np.vdot(dark1, QUBIT_MAP.one_state)) ** 2 >= 1.0 - 1e-12


class TestHwpSchedule:
    def test_endpoints_must_be_pure_beam(self):
        with pytest.raises(ValidationError):
            HwpSchedule(0.1, QUARTER_PI, 1.0, 1.0)

    def test_profile_bounds(self):
        sched = HwpSchedule(0.0, QUARTER_PI, 2.0, 1.0, "sine_squared")
        assert sched.alpha(0.0) == 0.0
        assert sched.alpha(2.0) == pytest.approx(QUARTER_PI)

    def test_unknown_profile_rejected(self):
        with pytest.raises(ValidationError):
            HwpSchedule(0.0, QUARTER_PI, 1.0, 1.0, kind="cubic")


class TestAdiabaticFlip:
    def test_slow_ramp_flips(self):
        sched = HwpSchedule(0.0, QUARTER_PI, 20.0, 10.0)
        res = adiabatic_flip(sched)
        assert res.flip_fidelity >= 0.999
        assert res.tracking_min >= 0.99
        assert res.min_gap > 0.0

    def test_sudden_ramp_fails_to_flip(self):
        sched = HwpSchedule(0.0, QUARTER_PI, 1e-4, 10.0)
        res = adiabatic_flip(sched)
        assert res.flip_fidelity <= 0.05

    def test_constant_plate_is_stationary(self):
        sched = HwpSchedule(0.0, 0.0, 5.0, 10.0)
        res = adiabatic_flip(sched)
        psi0 = dark_states(sched.fields_at(0.0))[0]
        assert abs(np.vdot(psi0, res.psi_final)) ** 2 >= 1.0 - 1e-8

    def test_wrong_start_state_rejected(self):
        sched = HwpSchedule(0.0, QUARTER_PI, 10.0, 10.0)
        with pytest.raises(ValidationError):
            adiabatic_flip(sched, psi0=QUBIT_MAP.one_state)

    def test_reversibility(self):
        forward = HwpSchedule(0.0, QUARTER_PI, 20.0, 10.0)
        res_fwd = adiabatic_flip(forward)
        backward = HwpSchedule(QUARTER_PI, 0.0, 20.0, 10.0)
        res_back = adiabatic_flip(backward, psi0=res_fwd.psi_final)
        psi0 = dark_states(forward.fields_at(0.0))[0]
        assert abs(np.vdot(psi0, res_back.psi_final)) ** 2 >= 0.995

    def test_dimensionless_rescaling(self):
        # same ramp at twice the drive and half the time: identical physics
        a = adiabatic_flip(HwpSchedule(0.0, QUARTER_PI, 10.0, 10.0))
        b = adiabatic_flip(HwpSchedule(0.0, QUARTER_PI, 5.0, 20.0))
        assert abs(a.flip_fidelity - b.flip_fidelity) <= 1e-6


class TestDissipativeVerification:
    def test_excited_states_stay_dark_along_slow_ramp(self):
        sched = HwpSchedule(0.0, QUARTER_PI, 20.0, 10.0)
        res = adiabatic_flip_dissipative(sched, DecayConfig(gamma=1.0))
        assert res.flip_fidelity >= 0.99
        # time-averaged excited population stays below the percent level
        assert res.excited_population_integral / sched.duration <= 1e-2
        assert res.sink_leakage == 0.0

    def test_sink_leakage_reported_with_loss_channel(self):
        sched = HwpSchedule(0.0, QUARTER_PI, 20.0, 10.0)
        res = adiabatic_flip_dissipative(
            sched, DecayConfig(gamma=1.0, loss_fraction_beta=0.5)
        )
        assert 0.0 < res.sink_leakage < 0.05


class TestRampSweep:
    def test_fidelity_increases_with_duration(self):
        res = ramp_sweep([0.1, 1.0, 10.0], total_rabi=10.0)
        assert res.fidelity_increases
        by_duration = {row.duration: row.flip_fidelity for row in res.rows}
        assert by_duration[10.0] > by_duration[0.1]

    def test_needs_three_points(self):
        with pytest.raises(ValidationError):
            ramp_sweep([1.0, 2.0], total_rabi=10.0)

    def test_diagnostics_present(self):
        res = ramp_sweep([0.5, 2.0, 8.0], total_rabi=10.0)
        for row in res.rows:
            assert row.min_gap > 0
            assert row.max_theta_rate > 0
