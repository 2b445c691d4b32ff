"""Line protocol for external scorers.

All frames are UTF-8 lines over a byte stream (one TCP connection):

* ``CTX <id> <id> ...``   install the conditioning source sentence
* ``REUSE <iteration>``   hint that a new cascade iteration starts and
  cached activations from the previous one may be reused
* ``SCORE <batch_id> <count>`` followed by ``count`` lines
  ``<m> <l> <id_0> ... <id_m>``
* response ``OK <batch_id> <count>`` followed by ``count`` decimal
  log-potentials, one per line, in request order, or
  ``ERR <batch_id> <message>``.

The client below presents the usual provider interface; wire access is
serialised with a lock so concurrent scoring calls are safe.
"""

from __future__ import annotations

import math
import socket
import socketserver
import threading

from .errors import ProtocolError
from .potentials import NEG_INF, PotentialProvider
from .vocab import Vocabulary


class StreamScorer(PotentialProvider):
    """Client for a remote scorer speaking the line protocol.

    The protocol carries no vocabulary handshake, so the caller supplies
    the vocabulary and maximum order the server was built with.
    """

    def __init__(self, host: str, port: int, vocab: Vocabulary,
                 max_order: int, timeout: float = 30.0):
        self.vocab = vocab
        self.max_order = max_order
        self._lock = threading.Lock()
        self._batch = 0
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._rfile = self._sock.makefile("r", encoding="utf-8", newline="\n")
        self._wfile = self._sock.makefile("w", encoding="utf-8", newline="\n")

    def close(self):
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _readline(self) -> str:
        line = self._rfile.readline()
        if not line:
            raise ProtocolError("connection closed by scorer")
        return line.rstrip("\n")

    def set_context(self, source_ids):
        with self._lock:
            self._wfile.write("CTX " + " ".join(map(str, source_ids)) + "\n")
            self._wfile.flush()

    def reuse_hint(self, iteration: int):
        with self._lock:
            self._wfile.write(f"REUSE {iteration}\n")
            self._wfile.flush()

    def score(self, m, l, span):
        return self.score_many([(m, l, span)])[0]

    def score_many(self, queries):
        queries = list(queries)
        if not queries:
            return []
        with self._lock:
            self._batch += 1
            batch_id = self._batch
            out = [f"SCORE {batch_id} {len(queries)}"]
            for m, l, span in queries:
                out.append(f"{m} {l} " + " ".join(map(str, span)))
            self._wfile.write("\n".join(out) + "\n")
            self._wfile.flush()

            header = self._readline().split()
            if header[:1] == ["ERR"]:
                raise ProtocolError(" ".join(header[2:]) or "scorer error")
            if len(header) != 3 or header[0] != "OK":
                raise ProtocolError(f"bad response header {header!r}")
            if int(header[1]) != batch_id or int(header[2]) != len(queries):
                raise ProtocolError("response does not match request")
            values = []
            for _ in queries:
                text = self._readline()
                try:
                    val = NEG_INF if text == "-inf" else float(text)
                except ValueError:
                    raise ProtocolError(f"non-numeric potential {text!r}")
                if math.isnan(val) or val == float("inf"):
                    raise ProtocolError(f"invalid potential {text!r}")
                values.append(val)
            return values


class _ProviderHandler(socketserver.StreamRequestHandler):
    def handle(self):
        provider = self.server.provider  # type: ignore[attr-defined]
        while True:
            raw = self.rfile.readline()
            if not raw:
                return
            parts = raw.decode("utf-8").split()
            if not parts:
                continue
            if parts[0] == "CTX":
                provider.set_context([int(x) for x in parts[1:]])
            elif parts[0] == "REUSE":
                provider.reuse_hint(int(parts[1]))
            elif parts[0] == "SCORE":
                batch_id, count = parts[1], int(parts[2])
                queries = []
                try:
                    for _ in range(count):
                        fields = self.rfile.readline().decode("utf-8").split()
                        m, l = int(fields[0]), int(fields[1])
                        span = tuple(int(x) for x in fields[2:])
                        if len(span) != m + 1:
                            raise ValueError(f"span length != m + 1 in {fields}")
                        queries.append((m, l, span))
                    values = provider.score_many(queries)
                except Exception as exc:  # noqa: BLE001 - reported to peer
                    self.wfile.write(f"ERR {batch_id} {exc}\n".encode("utf-8"))
                    continue
                lines = [f"OK {batch_id} {count}"]
                lines += ["-inf" if v == NEG_INF else repr(float(v))
                          for v in values]
                self.wfile.write(("\n".join(lines) + "\n").encode("utf-8"))
            else:
                self.wfile.write(
                    f"ERR 0 unknown frame {parts[0]}\n".encode("utf-8"))


class ProviderServer(socketserver.ThreadingTCPServer):
    """Serve any in-process provider over the line protocol.

    Used for differential testing against external scorers and as the
    reference implementation of the server side.
    """

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, provider: PotentialProvider, host="127.0.0.1", port=0):
        super().__init__((host, port), _ProviderHandler)
        self.provider = provider

    @property
    def endpoint(self) -> tuple[str, int]:
        return self.server_address[:2]

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread
