"""
Celery task wrapping one Monte Carlo work item.
"""

import logging

from celery import shared_task

from .exceptions import SimulationError

logger = logging.getLogger(__name__)


@shared_task(bind=True, max_retries=3)
def run_trial_batch_task(
    self,
    cfg_payload: dict,
    series_value: float,
    sweep_value: float,
    architecture: str,
    trial_indices: list[int],
) -> list[dict]:
    """
    Solve a chunk of trials on a worker.

    Bad parameters fail at once; worker-side OSError / MemoryError are
    retried with exponential backoff.
    """
    from .services import run_trial_batch

    try:
        return run_trial_batch(cfg_payload, series_value, sweep_value, architecture, trial_indices)
    except SimulationError:
        logger.error(
            "Work item (series %s, value %s, %s, trials %d-%d) failed on invalid input.",
            series_value,
            sweep_value,
            architecture,
            trial_indices[0] if trial_indices else -1,
            trial_indices[-1] if trial_indices else -1,
        )
        raise
    except (OSError, MemoryError) as exc:
        if self.request.retries >= self.max_retries:
            logger.error("Work item failed permanently after %d retries: %s", self.max_retries, exc)
            raise
        logger.warning(
            "Work item failed (attempt %d/%d): %s, retrying.",
            self.request.retries + 1,
            self.max_retries,
            exc,
        )
        # 5s, 10s, 20s, ... capped at a minute
        countdown = min(2**self.request.retries * 5, 60)
        raise self.retry(exc=exc, countdown=countdown)
