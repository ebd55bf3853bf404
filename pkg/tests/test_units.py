from hypothesis import given
from hypothesis import strategies as st

from scoutsim.units import (MS, NS, SEC, US, ns_to_ticks, s_to_ticks,
                            serialization_ticks, ticks_to_ns, ticks_to_s)


def test_tick_is_one_picosecond():
    assert NS == 1_000
    assert US == 1_000 * NS
    assert MS == 1_000 * US
    assert SEC == 1_000 * MS


def test_serialization_known_values():
    # 1500 B at 10 Gb/s is 1.2 us, 64 B is 51.2 ns: both exact in ticks
    assert serialization_ticks(1500, 10_000_000_000) == 1_200_000
    assert serialization_ticks(64, 10_000_000_000) == 51_200
    assert serialization_ticks(1500, 1_000_000_000) == 12_000_000
    assert serialization_ticks(64, 40_000_000_000) == 12_800


def test_serialization_truncates_down():
    # 8e12 / 3e9 is not integral; the remainder is dropped, never rounded up
    t = serialization_ticks(1, 3_000_000_000)
    assert t == 2666


def test_ns_round_trip():
    assert ns_to_ticks(100_000) == 100 * US
    assert ticks_to_ns(51_200) == 51.2
    assert s_to_ticks(1.0) == SEC
    assert ticks_to_s(SEC) == 1.0


@given(st.integers(min_value=0, max_value=10**10))
def test_ns_ticks_inverse_on_integers(n):
    assert ticks_to_ns(ns_to_ticks(n)) == float(n)


@given(size=st.integers(min_value=1, max_value=9000),
       gbps=st.sampled_from([1, 10, 25, 40, 100]))
def test_serialization_positive_and_monotone(size, gbps):
    rate = gbps * 10**9
    t = serialization_ticks(size, rate)
    assert t > 0
    assert serialization_ticks(size + 1, rate) >= t
