"""Point-forecast cloud cover over HTTP.

The endpoint is a URL template with ``{lat}``, ``{lon}``, ``{time}`` and
``{key}`` placeholders. The response is JSON carrying either
``{"cloud_cover": <fraction>}`` or the OpenWeatherMap-style
``{"clouds": {"all": <percent>}}``. The API key is read from the environment
variable ``EOSCHED_WEATHER_API_KEY`` unless another name is configured.
"""
from __future__ import annotations

import json
import logging
import os
import urllib.error
import urllib.request
from datetime import datetime, timezone

log = logging.getLogger(__name__)

DEFAULT_KEY_ENV = "EOSCHED_WEATHER_API_KEY"
BUCKET_SECONDS = 3 * 3600


class WeatherError(RuntimeError):
    pass


def _parse_cloud(payload: dict) -> float:
    if "cloud_cover" in payload:
        value = float(payload["cloud_cover"])
    elif "clouds" in payload and "all" in payload["clouds"]:
        value = float(payload["clouds"]["all"]) / 100.0
    else:
        raise WeatherError(f"no cloud field in response: {sorted(payload)}")
    return min(1.0, max(0.0, value))


class PointForecastClient:
    def __init__(self, endpoint: str, key_env: str = DEFAULT_KEY_ENV, timeout: float = 2.0, retries: int = 1):
        self.endpoint = endpoint
        self.key = os.environ.get(key_env, "")
        self.timeout = timeout
        self.retries = retries
        self._cache: dict[tuple[float, float, int], float] = {}

    def bucket(self, unix_t: float) -> int:
        return int(unix_t // BUCKET_SECONDS) * BUCKET_SECONDS

    def cloud_cover(self, lat: float, lon: float, unix_t: float) -> float:
        key = (round(lat, 2), round(lon, 2), self.bucket(unix_t))
        if key in self._cache:
            return self._cache[key]
        stamp = datetime.fromtimestamp(key[2], tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        url = self.endpoint.format(lat=key[0], lon=key[1], time=stamp, key=self.key)
        last_exc: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                    value = _parse_cloud(json.loads(resp.read().decode("utf-8")))
                self._cache[key] = value
                return value
            except (urllib.error.URLError, TimeoutError, OSError, ValueError, WeatherError) as exc:
                last_exc = exc
        raise WeatherError(f"forecast request failed for {url}: {last_exc}")
