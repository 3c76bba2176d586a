"""Chat-completion backends: HTTP client, scripted mock, offline heuristic.

All backends expose ``complete(prompt) -> str`` and are safe for concurrent
calls (no per-request mutable state is shared). The mock and heuristic
backends are deterministic functions of the prompt text so campaigns using
them replay bit-identically.
"""
from __future__ import annotations

import hashlib
import math
import os
import re
import time
from typing import Protocol, Sequence

import requests

from ..errors import BackendError
from ..environments.collision import SPACE as COLLISION_SPACE
from ..environments.coopnav import SPACE as COOPNAV_SPACE

API_KEY_ENV = "SCENFUZZ_API_KEY"


class LlmBackend(Protocol):
    def complete(self, prompt: str) -> str: ...


class MockBackend:
    """Replays canned responses in order; raises once the script runs out."""

    def __init__(self, responses: Sequence[str]):
        self._responses = list(responses)
        self._cursor = 0

    def complete(self, prompt: str) -> str:
        if self._cursor >= len(self._responses):
            raise BackendError("mock backend exhausted its scripted responses")
        text = self._responses[self._cursor]
        self._cursor += 1
        return text


class HttpBackend:
    """OpenAI-compatible chat-completions client with exponential backoff.

    Retries 429 and 5xx responses and transport errors up to ``max_retries``
    times; any other non-200 status fails immediately. The API key comes from
    the constructor or the SCENFUZZ_API_KEY environment variable.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        *,
        temperature: float = 1.0,
        timeout: float = 30.0,
        api_key: str | None = None,
        max_retries: int = 3,
        backoff_base: float = 0.5,
        session=None,
        sleep=time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.temperature = temperature
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._api_key = api_key
        self._session = session if session is not None else requests
        self._sleep = sleep

    def complete(self, prompt: str) -> str:
        key = self._api_key or os.environ.get(API_KEY_ENV, "")
        if not key:
            raise BackendError(f"no API key: set {API_KEY_ENV} or pass api_key")
        url = f"{self.base_url}/chat/completions"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        headers = {
            "Authorization": f"Bearer {key}",
            "Content-Type": "application/json",
        }
        last_problem = "no attempt made"
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                resp = self._session.post(url, json=body, headers=headers, timeout=self.timeout)
            except requests.RequestException as exc:
                last_problem = f"transport error: {exc}"
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_problem = f"HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise BackendError(f"HTTP {resp.status_code} from {url}")
            try:
                return str(resp.json()["choices"][0]["message"]["content"])
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise BackendError(f"malformed completion payload: {exc}") from exc
        raise BackendError(
            f"backend unreachable after {self.max_retries + 1} attempts ({last_problem})"
        )


_SEED_LINE = re.compile(r"Seed scenario:\s*\[([^\][]*)\]")


def _extract_seed(prompt: str, dims: int) -> tuple[float, ...]:
    m = _SEED_LINE.search(prompt)
    if m is None:
        raise BackendError("heuristic backend found no 'Seed scenario: [...]' line")
    try:
        values = tuple(float(x) for x in m.group(1).split(","))
    except ValueError as exc:
        raise BackendError(f"heuristic backend could not parse the seed: {exc}") from exc
    if len(values) != dims:
        raise BackendError(f"seed has {len(values)} values, expected {dims}")
    return values


def _hash_units(prompt: str, n: int) -> list[float]:
    """n deterministic values in [0, 1) derived from the prompt text."""
    digest = hashlib.sha256(prompt.encode("utf-8")).digest()
    out = []
    for k in range(n):
        chunk = digest[(4 * k) % 28:(4 * k) % 28 + 4]
        out.append(int.from_bytes(chunk, "big") / 2**32)
    return out


def _clamp(v: float, lo: float, hi: float) -> float:
    return min(max(v, lo), hi)


class HeuristicBackend:
    """Offline stand-in for an LLM: an analytically computed adversarial edit.

    Like the model it replaces, it reasons globally but answers coarsely:
    every output coordinate is rounded onto a grid of ``quant`` * range, so it
    cannot fine-tune near-failure scenarios. Deterministic per prompt (all
    variation is hashed from the prompt text).
    """

    def __init__(self, environment_name: str, quant: float | None = None):
        schemes = {
            "collision-avoidance-2d": (self._collision_edit, COLLISION_SPACE, 0.02),
            "coop-nav": (self._coopnav_edit, COOPNAV_SPACE, 0.05),
        }
        if environment_name not in schemes:
            known = ", ".join(sorted(schemes))
            raise BackendError(
                f"no heuristic scheme for environment {environment_name!r} (known: {known})"
            )
        self._edit, self._space, default_quant = schemes[environment_name]
        self.quant = quant if quant is not None else default_quant
        # coop-nav funnel ring radius range
        self.ring_base = 0.05
        self.ring_span = 0.10

    def _snap(self, value: float, dim: int) -> float:
        lo, hi = self._space.lower[dim], self._space.upper[dim]
        step = (hi - lo) * self.quant
        return _clamp(lo + round((value - lo) / step) * step, lo, hi)

    def complete(self, prompt: str) -> str:
        seed = _extract_seed(prompt, self._space.dims)
        plan, params = self._edit(seed, _hash_units(prompt, 6))
        rendered = "[" + ", ".join(repr(float(v)) for v in params) + "]"
        return (
            "1. Scenario Analysis: the seed leaves the policy a comfortable margin.\n"
            "2. Evolution Prediction: on the current parameters the episode ends safely.\n"
            f"3. Challenge Analysis: {plan}\n"
            "4. Plan Generation: adjust the parameters named above, keep the rest.\n"
            "5. Plan Execution: applying the plan to the seed values.\n"
            f"New Scenario: {rendered}\n"
            "Explanation: the mutation removes the safety margin the policy was relying on.\n"
        )

    # --- environment-specific edits -------------------------------------

    def _collision_edit(self, seed, units):
        """Aim the intruder near the intercept point of the unturned ownship path."""
        x0, y0, _psi, v_own, v_intr = seed
        x = self._snap(_clamp(x0 + (2 * units[0] - 1) * 450.0, 500.0, 5000.0), 0)
        # keep the spawn bearing within 9 degrees of the nose so a true
        # collision-course approach vector stays in the stern blind cone
        y_lim = math.tan(math.radians(9.0)) * x
        y = _clamp(y0 * 0.3 + (2 * units[1] - 1) * 0.5 * y_lim, -y_lim, y_lim)
        y = _clamp(self._snap(y, 1), -y_lim, y_lim)
        v_i = _clamp(max(v_intr, v_own) + 30.0 * units[2], 50.0, 200.0)
        v_i = max(self._snap(v_i, 4), min(v_own, 200.0))
        # reciprocal time-to-meet of the exact intercept; a positive root
        # always exists because v_i >= v_own and x > 0
        a = x * x + y * y
        b = -2.0 * v_own * x
        c = v_own * v_own - v_i * v_i
        disc = max(b * b - 4.0 * a * c, 0.0)
        u = (-b + math.sqrt(disc)) / (2.0 * a)
        t_meet = 1.0 / u
        # probe around the intercept: a lateral aim offset grades the edit
        # from direct hit to near-miss, which keeps the corpus supplied with
        # low-reward seeds instead of deleting one on every test
        aim_y = (2.0 * units[3] - 1.0) * 450.0
        heading = self._snap(math.atan2(aim_y - y, v_own * t_meet - x), 2)
        plan = (
            "aim the intruder at the point the ownship's straight path reaches, "
            "approaching from near dead ahead where the policy cannot see it."
        )
        return plan, (x, y, heading, v_own, v_i)

    def _coopnav_edit(self, seed, units):
        """Cluster the landmarks into a tight ring at the point equidistant
        from all three agents, so they arrive simultaneously: the
        pairwise-naive avoidance must juggle two neighbours at once there,
        and the throttled endgame can run out the clock."""
        agents = [(seed[2 * k], seed[2 * k + 1]) for k in range(3)]
        (ax, ay), (bx, by), (cx_, cy_) = agents
        # circumcenter synchronizes arrival times; fall back to the centroid
        # for near-collinear agents whose circumcenter shoots out of the box
        d = 2.0 * (ax * (by - cy_) + bx * (cy_ - ay) + cx_ * (ay - by))
        ccx = (ax + bx + cx_) / 3.0
        ccy = (ay + by + cy_) / 3.0
        if abs(d) > 1e-9:
            ux = ((ax * ax + ay * ay) * (by - cy_) + (bx * bx + by * by) * (cy_ - ay)
                  + (cx_ * cx_ + cy_ * cy_) * (ay - by)) / d
            uy = ((ax * ax + ay * ay) * (cx_ - bx) + (bx * bx + by * by) * (ax - cx_)
                  + (cx_ * cx_ + cy_ * cy_) * (bx - ax)) / d
            if abs(ux) <= 1.0 and abs(uy) <= 1.0:
                ccx, ccy = ux, uy
        ccx = _clamp(ccx + (2 * units[0] - 1) * 0.1, -0.9, 0.9)
        ccy = _clamp(ccy + (2 * units[1] - 1) * 0.1, -0.9, 0.9)
        radius = self.ring_base + self.ring_span * units[2]
        theta = 2.0 * math.pi * units[3]
        landmarks = []
        for k in range(3):
            ang = theta + 2.0 * math.pi * k / 3.0
            lx = self._snap(_clamp(ccx + radius * math.cos(ang), -1.0, 1.0), 6 + 2 * k)
            ly = self._snap(_clamp(ccy + radius * math.sin(ang), -1.0, 1.0), 7 + 2 * k)
            landmarks.extend((lx, ly))
        plan = (
            "pull every landmark into one tight ring at the spot all three "
            "agents reach at the same time, forcing a three-way squeeze."
        )
        return plan, tuple(seed[:6]) + tuple(landmarks)
