"""DCTCP: ECN-fraction EWMA window scaling on top of NewReno plumbing.

Marked bytes are accumulated per congestion window; at each window
boundary the mark fraction F updates ewma <- (1-g)*ewma + g*F, and a
marked window scales w by (1 - ewma/2). Unmarked traffic grows exactly
like NewReno. Loss handling (dupacks, timeouts) is inherited unchanged.
"""

from .base import CONG_AVOID, SLOW_START
from .newreno import NewRenoSender


class DctcpSender(NewRenoSender):
    __slots__ = ("g", "ecn_frac_ewma", "win_end", "bytes_win", "marked_win")

    def __init__(self, *args, g=0.0625, **kwargs):
        super().__init__(*args, **kwargs)
        self.g = g
        self.ecn_frac_ewma = 0.0
        self.win_end = 0
        self.bytes_win = 0
        self.marked_win = 0

    def _on_new_ack(self, newly_acked, ece):
        self.bytes_win += newly_acked
        if ece:
            self.marked_win += newly_acked
        NewRenoSender._on_new_ack(self, newly_acked, ece)
        if self.snd_una >= self.win_end:
            total = self.bytes_win
            if total:
                frac = self.marked_win / total
                self.ecn_frac_ewma = (1.0 - self.g) * self.ecn_frac_ewma \
                    + self.g * frac
                if self.marked_win:
                    self.w = max(self.w * (1.0 - self.ecn_frac_ewma / 2.0),
                                 float(self.seg))
                    if self.phase == SLOW_START:
                        # a marked window ends slow start
                        self.ssthresh = self.w
                        self.phase = CONG_AVOID
            self.bytes_win = 0
            self.marked_win = 0
            self.win_end = self.snd_nxt
