"""Shared HTTP plumbing for the embedding and LLM backends.

Both clients POST JSON, authenticate with a bearer token from the
``PD_API_KEY`` environment variable when it is set, retry transport
failures with exponential backoff, and share one fan-out limit so the
total number of in-flight requests stays bounded no matter which client
issues them.
"""

from __future__ import annotations

import os
import threading
import time
from typing import Any, Callable

import requests

from .errors import BackendError, ProtocolError

API_KEY_ENV = "PD_API_KEY"
DEFAULT_FAN_OUT = 4
MAX_ATTEMPTS = 3
BACKOFF_START_S = 1.0

_fan_out_lock = threading.Lock()
_fan_out_limit = DEFAULT_FAN_OUT
_fan_out_sem = threading.BoundedSemaphore(DEFAULT_FAN_OUT)


def set_fan_out(limit: int) -> None:
    """Set the shared cap on concurrent in-flight requests."""
    global _fan_out_limit, _fan_out_sem
    if limit < 1:
        raise ValueError(f"fan-out limit must be >= 1, got {limit}")
    with _fan_out_lock:
        _fan_out_limit = limit
        _fan_out_sem = threading.BoundedSemaphore(limit)


def get_fan_out() -> int:
    with _fan_out_lock:
        return _fan_out_limit


def auth_headers() -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(API_KEY_ENV)
    if key:
        headers["Authorization"] = f"Bearer {key}"
    return headers


def post_json(
    url: str,
    body: dict[str, Any],
    timeout: float,
    sleep: Callable[[float], None] = time.sleep,
) -> dict[str, Any]:
    """POST ``body`` as JSON and return the decoded JSON response.

    Transport errors and non-2xx statuses are retried up to
    ``MAX_ATTEMPTS`` times with exponential backoff starting at
    ``BACKOFF_START_S``; the final failure is raised as BackendError with
    the status detail. ``sleep`` is injectable so tests can skip the wait.
    """
    with _fan_out_lock:
        sem = _fan_out_sem
    last_detail = ""
    for attempt in range(MAX_ATTEMPTS):
        if attempt > 0:
            sleep(BACKOFF_START_S * 2 ** (attempt - 1))
        try:
            with sem:
                resp = requests.post(
                    url, json=body, headers=auth_headers(), timeout=timeout
                )
        except requests.RequestException as exc:
            last_detail = f"transport error: {exc}"
            continue
        if resp.status_code == 200:
            try:
                return resp.json()
            except ValueError as exc:
                # A 200 with an unparseable body is not a transport glitch.
                raise ProtocolError(
                    f"POST {url}: response is not valid JSON: {exc}"
                ) from exc
        last_detail = f"HTTP {resp.status_code}: {resp.text[:200]}"
    raise BackendError(
        f"POST {url} failed after {MAX_ATTEMPTS} attempts ({last_detail})"
    )
