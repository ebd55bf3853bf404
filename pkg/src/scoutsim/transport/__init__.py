from .base import CONG_AVOID, LONG_FLOW, SLOW_START, Receiver, SenderBase
from .dctcp import DctcpSender
from .dwtcp import (DwtcpSender, compute_d_s, compute_d_t, decrease_factor,
                    decrease_factor_ipg)
from .newreno import NewRenoSender

__all__ = [
    "CONG_AVOID", "LONG_FLOW", "SLOW_START", "Receiver", "SenderBase",
    "DctcpSender", "DwtcpSender", "NewRenoSender",
    "compute_d_s", "compute_d_t", "decrease_factor", "decrease_factor_ipg",
]
