import math

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from apps.pumping.exceptions import DomainError
from apps.pumping.model import BathSpec
from apps.pumping.model import DriveProtocol
from apps.pumping.model import ModelParams
from apps.pumping.model import bath_rates
from apps.pumping.model import bose_occupation
from apps.pumping.model import rates
from apps.pumping.model import squeezed_occupation
from apps.pumping.model import temperature
from apps.pumping.model import temperature_rate
from apps.pumping.model import theta_from_omega0
from apps.pumping.presets import OMEGA0
from apps.pumping.tests.factories import BathSpecFactory
from apps.pumping.tests.factories import DriveProtocolFactory
from apps.pumping.tests.factories import ModelParamsFactory
from apps.pumping.tests.factories import RandomModelParamsFactory


class TestParameterValidation:
    """Test the invariants enforced when parameters are built."""

    def test_site_quantum_from_frequency(self):
        """Test omega0 = 7.4*pi THz corresponds to roughly 177.6 K."""
        assert theta_from_omega0(OMEGA0) == pytest.approx(177.6, abs=0.1)

    def test_negative_coupling_rejected(self):
        """Test a negative coupling is keyed by gamma."""
        with pytest.raises(ValidationError) as exc:
            BathSpecFactory(gamma=-1.0)
        assert "gamma" in exc.value.message_dict

    def test_zero_coupling_allowed_on_one_side(self):
        """Test an uncoupled reservoir is accepted when the other one is coupled."""
        params = ModelParamsFactory(left=BathSpecFactory(gamma=0.0))
        assert params.left.gamma == 0.0

    def test_both_uncoupled_rejected(self):
        """Test gamma_left + gamma_right must be positive."""
        with pytest.raises(ValidationError):
            ModelParamsFactory(left=BathSpecFactory(gamma=0.0), right=BathSpecFactory(gamma=0.0, T0=250.0))

    def test_orbit_must_stay_positive(self):
        """Test T0 - A0 <= 0 is rejected with the positivity message."""
        with pytest.raises(ValidationError) as exc:
            ModelParamsFactory(left=BathSpecFactory(T0=50.0))
        assert "left" in exc.value.message_dict
        assert "Temperature positivity violated" in exc.value.message_dict["left"][0]

    def test_negative_squeezing_rejected(self):
        """Test x < 0 is rejected."""
        with pytest.raises(ValidationError):
            BathSpecFactory(squeeze_x=-0.1)

    def test_non_finite_phase_rejected(self):
        """Test a NaN phase is rejected."""
        with pytest.raises(ValidationError):
            DriveProtocolFactory(phi_left=math.nan)


class TestDriveProtocol:
    """Test the temperature modulation."""

    def test_cos_sin_lags_by_quarter_period(self):
        """Test the cos/sin protocol has a relative phase of pi/2."""
        drive = DriveProtocol.cos_sin(100.0, 100.0, math.pi / 4)
        assert drive.relative_phase == pytest.approx(math.pi / 2)

    def test_with_relative_phase(self):
        """Test the right phase lags the left one by delta."""
        drive = DriveProtocol.with_relative_phase(100.0, 100.0, 0.3, 1.0)
        assert drive.phi_right == pytest.approx(-0.7)

    def test_undriven_period_is_infinite(self):
        """Test Omega = 0 has no finite period and is not driven."""
        drive = DriveProtocol()
        assert math.isinf(drive.period)
        assert not drive.is_driven

    def test_amplitude_inert_without_frequency(self):
        """Test A0 > 0 with Omega = 0 leaves both reservoirs at their base temperatures."""
        params = ModelParamsFactory(drive=DriveProtocol(A0=100.0, Omega=0.0, phi_left=0.0))
        assert params.drive.amplitude == 0.0
        assert temperature(params, "left", 0.0) == pytest.approx(300.0)
        assert temperature(params, "right", 0.0) == pytest.approx(250.0)
        assert temperature_rate(params, "left", 0.0) == 0.0
        assert rates(params, "left", 0.0) == rates(params.reference(), "left", 0.0)

    def test_temperature_trajectory(self, driven):
        """Test T(t) follows T0 + A0*cos(Omega*t + phi)."""
        t = np.linspace(0.0, driven.period, 7)
        expected = 300.0 + 100.0 * np.cos(100.0 * t + math.pi / 4)
        assert np.allclose(temperature(driven, "left", t), expected)
        assert temperature(driven, "right", 0.0) == pytest.approx(250.0 + 100.0 * math.cos(-math.pi / 4))

    def test_temperature_rate_matches_difference(self, driven):
        """Test the analytic temperature velocity against a central difference."""
        t, h = 0.013, 1e-7
        numeric = (temperature(driven, "left", t + h) - temperature(driven, "left", t - h)) / (2 * h)
        assert temperature_rate(driven, "left", t) == pytest.approx(numeric, rel=1e-6)

    def test_scalar_in_scalar_out(self, driven):
        """Test scalar times return plain floats."""
        assert isinstance(temperature(driven, "left", 0.0), float)


class TestOccupations:
    """Test Bose and squeezed occupations."""

    def test_bose_occupation(self):
        """Test n = 1/(exp(theta0/T) - 1)."""
        assert bose_occupation(100.0, 200.0) == pytest.approx(1.0 / (math.exp(0.5) - 1.0))

    def test_bose_occupation_needs_positive_temperature(self):
        """Test T <= 0 raises DomainError."""
        with pytest.raises(DomainError):
            bose_occupation(100.0, np.array([10.0, 0.0]))

    def test_unsqueezed_occupation_unchanged(self):
        """Test x = 0 leaves the occupation untouched."""
        assert squeezed_occupation(1.3, 0.0) == pytest.approx(1.3)

    def test_squeezed_vacuum(self):
        """Test N = sinh^2(x) at zero temperature."""
        assert squeezed_occupation(0.0, 0.8) == pytest.approx(math.sinh(0.8) ** 2)

    def test_rates_differ_by_coupling(self):
        """Test alpha - beta = gamma for every squeezing."""
        for x in (0.0, 0.7, 3.0):
            alpha, beta = bath_rates(177.6, BathSpec(1000.0, x, 300.0), 300.0)
            assert alpha - beta == pytest.approx(1000.0)

    def test_uncoupled_reservoir_has_zero_rates(self):
        """Test gamma = 0 yields vanishing rates."""
        alpha, beta = bath_rates(177.6, BathSpec(0.0, 1.0, 300.0), 300.0)
        assert alpha == 0.0
        assert beta == 0.0

    def test_rates_broadcast_over_time(self, driven):
        """Test rate evaluation keeps the shape of the time argument."""
        alpha, beta = rates(driven, "right", np.zeros((3, 4)))
        assert alpha.shape == (3, 4)
        assert beta.shape == (3, 4)


class TestModelParams:
    """Test derived parameter sets."""

    def test_swapped_exchanges_reservoirs(self, driven):
        """Test swapping exchanges baths together with their drive phases."""
        swapped = driven.swapped()
        assert swapped.left == driven.right
        assert swapped.drive.phi_left == driven.drive.phi_right
        assert temperature(swapped, "left", 0.01) == pytest.approx(temperature(driven, "right", 0.01))

    def test_reference_is_static_and_unsqueezed(self):
        """Test the reference keeps base temperatures and couplings only."""
        params = ModelParamsFactory().with_squeezing(0.5, 1.5)
        reference = params.reference()
        assert reference.left.squeeze_x == 0.0
        assert reference.right.squeeze_x == 0.0
        assert reference.drive.A0 == 0.0
        assert reference.right.T0 == params.right.T0

    def test_random_models_are_valid(self):
        """Test random static models satisfy the parameter invariants."""
        for _ in range(5):
            params = RandomModelParamsFactory()
            assert isinstance(params, ModelParams)
            assert not params.drive.is_driven
