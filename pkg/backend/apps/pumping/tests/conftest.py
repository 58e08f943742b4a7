import factory.random
import pytest

from apps.pumping.model import ModelParams
from apps.pumping.presets import PRESETS
from apps.pumping.tests.factories import ModelParamsFactory


@pytest.fixture(autouse=True)
def _reseed_factories() -> None:
    factory.random.reseed_random("squeezed-pumping")


@pytest.fixture
def driven() -> ModelParams:
    """300 K / 250 K reservoirs under the cos/sin drive, no squeezing."""
    return PRESETS["fig3"].params()


@pytest.fixture
def balanced() -> ModelParams:
    """Equal 300 K base temperatures under the cos/sin drive."""
    return PRESETS["fig2"].params()


@pytest.fixture
def static() -> ModelParams:
    """Undriven, unsqueezed 300 K / 250 K model."""
    return ModelParamsFactory().reference()
