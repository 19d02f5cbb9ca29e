"""Request throttling: policy, real-time sliding-window limiter, and a
discrete-event dispatch simulator used to verify the throughput bounds."""

from __future__ import annotations

import heapq
import math
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional

WINDOW_S = 60.0


@dataclass(frozen=True)
class RateLimitPolicy:
    max_requests_per_minute: int = 500
    max_in_flight: int = 32
    max_attempts: int = 3
    backoff_base_s: float = 1.0
    backoff_cap_s: float = 30.0

    def __post_init__(self):
        if self.max_requests_per_minute <= 0 or self.max_in_flight <= 0:
            raise ValueError("rate limits must be positive")
        if self.max_attempts <= 0:
            raise ValueError("max_attempts must be positive")
        if self.backoff_base_s <= 0 or self.backoff_cap_s < self.backoff_base_s:
            raise ValueError("backoff cap must be >= base > 0")

    def backoff(self, attempt: int) -> float:
        return min(self.backoff_base_s * (2 ** attempt), self.backoff_cap_s)


class SlidingWindowLimiter:
    """Blocking limiter for real-clock dispatch; thread-safe."""

    def __init__(self, policy: RateLimitPolicy, clock=time.monotonic, sleep=time.sleep):
        self.policy = policy
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._dispatches = deque()
        self._in_flight = 0
        self._cv = threading.Condition(self._lock)

    def acquire(self):
        with self._cv:
            while True:
                now = self._clock()
                while self._dispatches and self._dispatches[0] <= now - WINDOW_S:
                    self._dispatches.popleft()
                if (
                    self._in_flight < self.policy.max_in_flight
                    and len(self._dispatches) < self.policy.max_requests_per_minute
                ):
                    self._dispatches.append(now)
                    self._in_flight += 1
                    return
                if self._in_flight >= self.policy.max_in_flight:
                    self._cv.wait(timeout=0.05)
                else:
                    wait = self._dispatches[0] + WINDOW_S - now
                    self._cv.wait(timeout=max(wait, 0.001))

    def release(self):
        with self._cv:
            self._in_flight -= 1
            self._cv.notify_all()


@dataclass(frozen=True)
class DispatchEvent:
    index: int
    dispatched_at: float
    completed_at: float


def simulate_dispatch(
    num_requests: int,
    policy: RateLimitPolicy,
    latency_s: float = 2.0,
    latency_fn: Optional[Callable[[int], float]] = None,
) -> List[DispatchEvent]:
    """Discrete-event simulation of batch dispatch under the policy.

    Requests dispatch in order as soon as both the in-flight bound and the
    60-second sliding window allow. Returns the full dispatch trace.
    """
    get_latency = latency_fn or (lambda _i: latency_s)
    trace: List[DispatchEvent] = []
    in_flight: List[float] = []  # heap of completion times
    window: deque = deque()  # dispatch timestamps within the last 60 s
    now = 0.0
    i = 0
    while i < num_requests:
        while in_flight and in_flight[0] <= now:
            heapq.heappop(in_flight)
        while window and window[0] <= now - WINDOW_S:
            window.popleft()
        if (
            len(in_flight) < policy.max_in_flight
            and len(window) < policy.max_requests_per_minute
        ):
            done = now + get_latency(i)
            trace.append(DispatchEvent(index=i, dispatched_at=now, completed_at=done))
            heapq.heappush(in_flight, done)
            window.append(now)
            i += 1
            continue
        # advance to the earliest unblocking instant; the nextafter guard keeps
        # the clock strictly moving when float rounding lands exactly on `now`
        # (e.g. window[0] + 60.0 - 60.0 rounding below window[0])
        candidates = []
        if in_flight and len(in_flight) >= policy.max_in_flight:
            candidates.append(in_flight[0])
        if window and len(window) >= policy.max_requests_per_minute:
            candidates.append(window[0] + WINDOW_S)
        next_t = min(candidates) if candidates else now + 0.001
        now = next_t if next_t > now else math.nextafter(now, math.inf)
    return trace
