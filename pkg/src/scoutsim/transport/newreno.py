"""TCP NewReno window laws on the shared substrate."""

from .base import CONG_AVOID, SLOW_START, SenderBase


class NewRenoSender(SenderBase):
    __slots__ = ()

    def _on_new_ack(self, newly_acked, ece):
        if self.phase == SLOW_START:
            if self.literal_slowstart:
                self.w = 2.0 * self.w
            else:
                self.w += self.seg
            if self.w >= self.ssthresh:
                self.phase = CONG_AVOID
        else:
            self.w += self.seg * (self.seg / self.w)

    def _on_triple_dup(self):
        self.ssthresh = self.w / 2.0
        self.w = max(self.ssthresh, float(self.seg))
        self.phase = CONG_AVOID

    def _on_timeout_cut(self):
        self.ssthresh = self.w / 2.0
        self.w = float(self.seg)
        self.phase = SLOW_START
