"""
Tests for the per-point Celery task.

Tasks run eagerly under the test settings.
"""

from apps.pumping.config import build_config
from apps.pumping.services import build_payload
from apps.pumping.services import evaluate_payload
from apps.pumping.tasks import evaluate_point


def _payload():
    config = build_config(
        {
            "model": {
                "theta0": 177.6,
                "left": {"gamma": 1000.0, "T0": 300.0},
                "right": {"gamma": 500.0, "T0": 250.0, "squeeze_x": 0.3},
            },
            "outputs": ["dynamic", "tur"],
            "seed": 9,
        },
    )
    return build_payload(config, config.grid()[0])


class TestEvaluatePointTask:
    """Test suite for the evaluate_point task."""

    def test_direct_call(self):
        """Test calling the task synchronously evaluates the payload."""
        payload = _payload()
        assert evaluate_point(payload) == evaluate_payload(payload)

    def test_delay(self):
        """Test the queued task returns the same result."""
        payload = _payload()
        result = evaluate_point.delay(payload).get()
        assert result["index"] == 0
        assert result["values"] == evaluate_payload(payload)["values"]

    def test_static_point_flags(self):
        """Test a static nonequilibrium point reports no flags."""
        result = evaluate_point(_payload())
        assert result["flags"] == {}
        assert result["values"]["tur"]["g_omega"] == 1.0
