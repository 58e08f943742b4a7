"""
Celery tasks for distributed sweeps.

One task per grid point; payloads and results are plain JSON so any worker
can evaluate any point.
"""

import logging

from celery import shared_task

from apps.pumping.services import evaluate_payload

logger = logging.getLogger(__name__)


@shared_task
def evaluate_point(payload):
    """
    Evaluate the requested output kinds at one grid point.

    Args:
        payload: dict built by services.build_payload

    Returns:
        dict: index, coords, per-kind values and flags, cross-check failures
    """
    logger.info(f"Worker evaluating point {payload['index']}")
    return evaluate_payload(payload)
