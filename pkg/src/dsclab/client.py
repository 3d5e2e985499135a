"""Thin client for the service: in-process by default, HTTP when given a
base URL.

The in-process path mounts the FastAPI app behind a test transport, so
command-line runs need no server and stay byte-deterministic; pointing
the same client at a remote base URL switches to plain HTTP without any
caller-visible change.
"""

from __future__ import annotations

import httpx


class ServiceError(RuntimeError):
    def __init__(self, status_code, detail):
        super().__init__(f"service returned {status_code}: {detail}")
        self.status_code = status_code
        self.detail = detail


class ServiceClient:
    def __init__(self, base_url: str | None = None):
        if base_url is None:
            import warnings
            with warnings.catch_warnings():
                # the in-process transport is an implementation detail;
                # its upstream deprecation notice is not actionable here
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import app
            self._client = TestClient(app)
        else:
            self._client = httpx.Client(base_url=base_url, timeout=600.0)

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise ServiceError(resp.status_code, detail)
        return resp.json()

    def health(self) -> dict:
        resp = self._client.get("/health")
        if resp.status_code != 200:
            raise ServiceError(resp.status_code, resp.text)
        return resp.json()

    def simulate(self, config: dict, seed=None, trial_log=False) -> dict:
        return self._post("/simulate", {"config": config, "seed": seed,
                                        "trial_log": trial_log})

    def region(self, problem: dict, mode="rit", example=None, eliminate=False,
               point=None) -> dict:
        return self._post("/region", {"problem": problem, "mode": mode,
                                      "example": example,
                                      "eliminate": eliminate, "point": point})

    def verify(self, scope="all") -> dict:
        return self._post("/verify", {"scope": scope})

    def spectrum(self, config: dict, seed=None) -> dict:
        return self._post("/spectrum", {"config": config, "seed": seed})
