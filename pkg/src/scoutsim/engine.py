"""Deterministic discrete-event calendar.

Events are (time, sequence, callback, argument) entries in a binary heap.
The sequence number is a monotonically increasing insertion counter, so
two events scheduled for the same tick fire in the order they were
scheduled. That tie-break plus the integer time base is what makes two
runs with the same config and seed produce byte-identical traces.
"""

import heapq


class Engine:
    __slots__ = ("now", "_heap", "_seq", "events_processed", "max_events")

    def __init__(self, max_events: int | None = None):
        self.now = 0
        self._heap = []
        self._seq = 0
        self.events_processed = 0
        self.max_events = max_events

    def schedule(self, t: int, fn, arg=None) -> None:
        """Queue fn(arg) at absolute tick t. t must not be in the past."""
        if t < self.now:
            raise ValueError(f"schedule into the past: t={t} now={self.now}")
        self._seq += 1
        heapq.heappush(self._heap, (t, self._seq, fn, arg))

    def schedule_after(self, dt: int, fn, arg=None) -> None:
        self.schedule(self.now + dt, fn, arg)

    def run_until(self, t_end: int) -> bool:
        """Process events with time <= t_end. Returns False if the event
        budget ran out first, True otherwise. Clock lands on t_end when
        the budget holds."""
        heap = self._heap
        pop = heapq.heappop
        budget = self.max_events
        if budget is not None:
            while heap and heap[0][0] <= t_end:
                t, _, fn, arg = pop(heap)
                self.now = t
                fn(arg)
                self.events_processed += 1
                if self.events_processed >= budget:
                    return False
            self.now = t_end
            return True
        # unbudgeted loop counts locally to keep the per-event work minimal
        n = 0
        while heap and heap[0][0] <= t_end:
            t, _, fn, arg = pop(heap)
            self.now = t
            fn(arg)
            n += 1
        self.events_processed += n
        self.now = t_end
        return True

    def run(self) -> bool:
        """Drain the calendar completely."""
        heap = self._heap
        pop = heapq.heappop
        budget = self.max_events
        if budget is not None:
            while heap:
                t, _, fn, arg = pop(heap)
                self.now = t
                fn(arg)
                self.events_processed += 1
                if self.events_processed >= budget:
                    return False
            return True
        n = 0
        while heap:
            t, _, fn, arg = pop(heap)
            self.now = t
            fn(arg)
            n += 1
        self.events_processed += n
        return True

    def pending(self) -> int:
        return len(self._heap)
