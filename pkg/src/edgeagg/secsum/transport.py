"""Message delivery between the coordinator and simulated clients.

Every message is serialized to its wire frame, counted, and parsed back on
the receiving side, so byte totals are exactly the framed lengths. The TCP
variant pushes the same frames through a loopback socket.
"""

from __future__ import annotations

import queue
import socket
import threading
from collections import defaultdict
from dataclasses import dataclass, field

from edgeagg.secsum.messages import RoundMessage, decode_message, encode_message, read_frame

UPLINK = "up"
DOWNLINK = "down"


@dataclass
class ByteAccountant:
    bytes_sent: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    bytes_received: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    keep_log: bool = False
    log: list[tuple[str, int, RoundMessage]] = field(default_factory=list)

    def record(self, direction: str, client: int, nbytes: int, msg: RoundMessage) -> None:
        if direction == UPLINK:
            self.bytes_sent[client] += nbytes
        else:
            self.bytes_received[client] += nbytes
        if self.keep_log:
            self.log.append((direction, client, msg))

    def total(self, client: int) -> int:
        return self.bytes_sent.get(client, 0) + self.bytes_received.get(client, 0)


class InProcessTransport:
    name = "in_process"

    def __init__(self, accountant: ByteAccountant | None = None):
        self.accountant = accountant or ByteAccountant()

    def _carry(self, frame: bytes) -> bytes:
        return frame

    def deliver(self, direction: str, client: int, msg: RoundMessage) -> RoundMessage:
        frame = encode_message(msg)
        self.accountant.record(direction, client, len(frame), msg)
        return decode_message(self._carry(frame))

    def upload(self, client: int, msg: RoundMessage) -> RoundMessage:
        return self.deliver(UPLINK, client, msg)

    def download(self, client: int, msg: RoundMessage) -> RoundMessage:
        return self.deliver(DOWNLINK, client, msg)

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class LoopbackTcpTransport(InProcessTransport):
    """Frames travel over one TCP connection on 127.0.0.1."""

    name = "loopback_tcp"

    def __init__(self, accountant: ByteAccountant | None = None):
        super().__init__(accountant)
        listener = socket.create_server(("127.0.0.1", 0))
        self._tx = socket.create_connection(listener.getsockname())
        self._rx, _ = listener.accept()
        listener.close()
        self._frames: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        try:
            while True:
                self._frames.put(read_frame(self._rx))
        except (ConnectionError, OSError) as exc:
            self._frames.put(exc)

    def _carry(self, frame: bytes) -> bytes:
        self._tx.sendall(frame)
        got = self._frames.get()
        if isinstance(got, Exception):
            raise got
        return got

    def close(self) -> None:
        for s in (self._tx, self._rx):
            try:
                s.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            s.close()


def make_transport(kind: str, accountant: ByteAccountant | None = None) -> InProcessTransport:
    if kind == "in_process":
        return InProcessTransport(accountant)
    if kind == "loopback_tcp":
        return LoopbackTcpTransport(accountant)
    raise ValueError(f"unknown transport {kind!r}")
