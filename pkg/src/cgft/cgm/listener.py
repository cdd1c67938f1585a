"""TCP listener for the line protocol, and a small client to feed it."""

from __future__ import annotations

import socket
import socketserver
import threading
import time
from typing import Callable, Iterable

from .protocol import FrameError, encode_ack, encode_err, parse_frame
from .readings import GlucoseReading
from .store import ReadingStore


class _FrameHandler(socketserver.StreamRequestHandler):
    def handle(self):
        while True:
            line = self.rfile.readline()
            if not line:
                break
            text = line.decode("utf-8", errors="replace").strip()
            if not text:
                continue
            try:
                reading = parse_frame(text)
            except FrameError as exc:
                self.wfile.write((encode_err(exc.reason) + "\n").encode("utf-8"))
                continue
            result = self.server.ingest(reading)  # type: ignore[attr-defined]
            self.wfile.write((encode_ack(reading.seq) + "\n").encode("utf-8"))
            del result


class IngestServer(socketserver.ThreadingTCPServer):
    """Accepts relay connections and writes parsed readings into a store."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(
        self,
        address: tuple[str, int],
        store: ReadingStore,
        on_stored: Callable[[GlucoseReading], None] | None = None,
    ):
        super().__init__(address, _FrameHandler)
        self.store = store
        self.on_stored = on_stored
        self._thread: threading.Thread | None = None

    def ingest(self, reading: GlucoseReading) -> str:
        result = self.store.ingest(reading)
        if result == "stored" and self.on_stored is not None:
            self.on_stored(reading)
        return result

    @property
    def address(self) -> tuple[str, int]:
        host, port = self.server_address[:2]
        return str(host), int(port)

    def start(self) -> "IngestServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)


def send_frames(
    host: str, port: int, frames: Iterable[str], pace_seconds: float = 0.0
) -> list[str]:
    """Stream frames to a listener, returning the per-line acks."""
    acks = []
    with socket.create_connection((host, port)) as sock:
        rfile = sock.makefile("r", encoding="utf-8", newline="\n")
        for frame in frames:
            sock.sendall((frame + "\n").encode("utf-8"))
            ack = rfile.readline().strip()
            acks.append(ack)
            if pace_seconds > 0:
                time.sleep(pace_seconds)
    return acks
