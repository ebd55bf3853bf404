"""Packet model.

Four kinds travel the network: data segments and their ACKs ride the
high-priority queue, probe packets (scouts) and their echoes ride the
low-priority queue. A packet carries its precomputed route (a tuple of
egress ports) and a hop index instead of per-switch lookups; routing is
static, so the route is fixed at send time.
"""

from enum import IntEnum


class PacketKind(IntEnum):
    DATA = 0
    DATA_ACK = 1
    SCOUT = 2
    SCOUT_ACK = 3


class Priority(IntEnum):
    HIGH = 0
    LOW = 1


DATA = int(PacketKind.DATA)
DATA_ACK = int(PacketKind.DATA_ACK)
SCOUT = int(PacketKind.SCOUT)
SCOUT_ACK = int(PacketKind.SCOUT_ACK)
HIGH = int(Priority.HIGH)
LOW = int(Priority.LOW)

ACK_BYTES = 64


class Packet:
    __slots__ = (
        "kind", "priority", "size", "flow_id", "channel_id", "scout_id",
        "seq", "ack_seq", "send_ts", "ecn", "ece", "route", "hop", "_q_ts",
    )

    def __init__(self, kind, priority, size, route, flow_id=-1, channel_id=-1,
                 scout_id=-1, seq=0, ack_seq=0, send_ts=0):
        self.kind = kind
        self.priority = priority
        self.size = size
        self.route = route
        self.flow_id = flow_id
        self.channel_id = channel_id
        self.scout_id = scout_id
        self.seq = seq
        self.ack_seq = ack_seq
        self.send_ts = send_ts
        self.ecn = False      # congestion mark applied in the network
        self.ece = False      # mark echoed back on an ACK
        self.hop = 0
        self._q_ts = 0

    def __repr__(self):
        return (f"Packet({PacketKind(self.kind).name}, {self.size}B, "
                f"flow={self.flow_id}, seq={self.seq}, hop={self.hop})")
