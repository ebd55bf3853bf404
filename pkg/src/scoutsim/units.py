"""Time and rate units.

The engine counts integer picoseconds so that packet serialization times
stay exact for every line rate used here (64 B at 10 Gb/s is 51.2 ns,
which has no integer nanosecond representation). Every public interface
(configs, CSV columns, API arguments) speaks nanoseconds; these helpers
convert at the boundary.
"""

# one tick = 1 picosecond
PS = 1
NS = 1_000
US = 1_000_000
MS = 1_000_000_000
SEC = 1_000_000_000_000

BITS_PER_SECOND_TO_BITS_PER_TICK = 1.0 / SEC


def ns_to_ticks(t_ns: float) -> int:
    return round(t_ns * NS)


def ticks_to_ns(t: int) -> float:
    return t / NS


def ticks_to_s(t: int) -> float:
    return t / SEC


def s_to_ticks(t_s: float) -> int:
    return round(t_s * SEC)


def serialization_ticks(size_bytes: int, rate_bps: float) -> int:
    """Wire time of a packet, truncated to the tick below.

    size_bytes * 8 bits at rate_bps bits/s, expressed in picoseconds.
    Exact for the rates used in practice (multiples of 0.1 Gb/s).
    """
    return int(size_bytes * 8 * SEC // int(rate_bps))
