import itertools

import pytest

from newslens.ratelimit import (
    DispatchEvent,
    RateLimitPolicy,
    SlidingWindowLimiter,
    simulate_dispatch,
)

from .oracles import check_rate_trace


def test_policy_validation():
    with pytest.raises(ValueError):
        RateLimitPolicy(max_requests_per_minute=0)
    with pytest.raises(ValueError):
        RateLimitPolicy(max_in_flight=0)
    with pytest.raises(ValueError):
        RateLimitPolicy(backoff_base_s=2.0, backoff_cap_s=1.0)


def test_backoff_is_capped_exponential():
    policy = RateLimitPolicy(backoff_base_s=1.0, backoff_cap_s=30.0)
    assert policy.backoff(0) == 1.0
    assert policy.backoff(1) == 2.0
    assert policy.backoff(10) == 30.0


def test_simulated_trace_respects_both_bounds():
    policy = RateLimitPolicy(max_requests_per_minute=50, max_in_flight=4)
    trace = simulate_dispatch(200, policy, latency_s=1.5)
    assert len(trace) == 200
    assert check_rate_trace(trace, 50, 4) == []


def test_simulated_trace_with_variable_latency():
    policy = RateLimitPolicy(max_requests_per_minute=30, max_in_flight=8)
    trace = simulate_dispatch(120, policy, latency_fn=lambda i: 0.1 + (i % 7))
    assert check_rate_trace(trace, 30, 8) == []


def test_dispatch_order_is_fifo():
    policy = RateLimitPolicy(max_requests_per_minute=10, max_in_flight=2)
    trace = simulate_dispatch(40, policy)
    assert [e.index for e in trace] == list(range(40))
    for a, b in itertools.pairwise(trace):
        assert a.dispatched_at <= b.dispatched_at


def test_in_flight_one_is_strictly_sequential():
    policy = RateLimitPolicy(max_requests_per_minute=1000, max_in_flight=1)
    trace = simulate_dispatch(20, policy, latency_s=0.5)
    for a, b in itertools.pairwise(trace):
        assert b.dispatched_at >= a.completed_at


def test_window_actually_throttles():
    policy = RateLimitPolicy(max_requests_per_minute=10, max_in_flight=100)
    trace = simulate_dispatch(30, policy, latency_s=0.01)
    # 30 requests at 10/min must take at least two full windows
    assert trace[-1].dispatched_at >= 120.0


def test_oracle_checker_flags_violations():
    bad = [DispatchEvent(i, float(i) * 0.001, float(i) * 0.001 + 1.0) for i in range(5)]
    assert check_rate_trace(bad, max_per_minute=3, max_in_flight=100)
    assert check_rate_trace(bad, max_per_minute=100, max_in_flight=2)
    assert check_rate_trace(bad, max_per_minute=100, max_in_flight=100) == []


def test_real_limiter_blocks_on_in_flight():
    clock = [0.0]
    policy = RateLimitPolicy(max_requests_per_minute=100, max_in_flight=2)
    limiter = SlidingWindowLimiter(policy, clock=lambda: clock[0], sleep=lambda s: None)
    limiter.acquire()
    limiter.acquire()
    assert limiter._in_flight == 2
    limiter.release()
    limiter.acquire()
    assert limiter._in_flight == 2
