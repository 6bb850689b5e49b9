"""Minimal JSON-over-HTTP client with retry and backoff.

Shared by the score-matrix and language-model adapters. Transient failures
(connection errors, 5xx) are retried with exponential backoff; anything else
surfaces as a RemoteError carrying the status and a body excerpt.
"""

from __future__ import annotations

import time

import requests

from .errors import RemoteError

_RETRYABLE_STATUS = {500, 502, 503, 504}
_BODY_EXCERPT = 400


def post_json(url: str, payload: dict, *, timeout: float = 30.0,
              max_retries: int = 3, backoff: float = 0.5,
              headers: dict[str, str] | None = None) -> dict:
    """POST a JSON payload and return the decoded JSON response."""
    last_error: Exception | None = None
    for attempt in range(max_retries + 1):
        try:
            response = requests.post(url, json=payload, timeout=timeout, headers=headers)
        except requests.RequestException as exc:
            last_error = exc
        else:
            if response.status_code in _RETRYABLE_STATUS:
                last_error = RemoteError(
                    f"{url}: transient status {response.status_code}",
                    status=response.status_code,
                    body=response.text[:_BODY_EXCERPT],
                )
            elif not response.ok:
                raise RemoteError(
                    f"{url}: status {response.status_code}: {response.text[:_BODY_EXCERPT]}",
                    status=response.status_code,
                    body=response.text[:_BODY_EXCERPT],
                )
            else:
                try:
                    return response.json()
                except ValueError as exc:
                    raise RemoteError(
                        f"{url}: response is not JSON: {response.text[:_BODY_EXCERPT]}",
                        status=response.status_code,
                        body=response.text[:_BODY_EXCERPT],
                    ) from exc
        if attempt < max_retries and backoff > 0:
            time.sleep(backoff * (2 ** attempt))
    if isinstance(last_error, RemoteError):
        raise last_error
    raise RemoteError(f"{url}: request failed after {max_retries + 1} attempts: {last_error}")
