"""Minimal WebSocket-to-TCP bridge so browsers can speak the gateway protocol.

Implements just enough of RFC 6455 for the console: the upgrade handshake,
masked client text frames (with continuation), ping/pong, and close. Each
WebSocket message is forwarded to the gateway as one envelope line; each
gateway line comes back as one text frame.
"""

from __future__ import annotations

import base64
import hashlib
import socket
import socketserver
import struct
import threading

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def encode_frame(payload: bytes, opcode: int = OP_TEXT) -> bytes:
    """Server-to-client frame: FIN set, unmasked."""
    header = bytes([0x80 | opcode])
    length = len(payload)
    if length < 126:
        header += bytes([length])
    elif length < 1 << 16:
        header += bytes([126]) + struct.pack(">H", length)
    else:
        header += bytes([127]) + struct.pack(">Q", length)
    return header + payload


def read_frame(rfile) -> tuple[int, bool, bytes] | None:
    """Read one frame; returns (opcode, fin, payload) or None at EOF."""
    head = rfile.read(2)
    if len(head) < 2:
        return None
    fin = bool(head[0] & 0x80)
    opcode = head[0] & 0x0F
    masked = bool(head[1] & 0x80)
    length = head[1] & 0x7F
    if length == 126:
        length = struct.unpack(">H", rfile.read(2))[0]
    elif length == 127:
        length = struct.unpack(">Q", rfile.read(8))[0]
    mask = rfile.read(4) if masked else b""
    payload = rfile.read(length) if length else b""
    if len(payload) < length:
        return None
    if masked:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return opcode, fin, payload


class _BridgeHandler(socketserver.StreamRequestHandler):
    def handle(self):
        if not self._handshake():
            return
        bridge: WebSocketBridge = self.server.bridge  # type: ignore[attr-defined]
        try:
            upstream = socket.create_connection(
                (bridge.target_host, bridge.target_port), timeout=10.0
            )
        except OSError:
            self.connection.sendall(encode_frame(b"", OP_CLOSE))
            return
        up_file = upstream.makefile("rwb")
        stop = threading.Event()

        def pump_upstream_to_ws():
            try:
                while not stop.is_set():
                    line = up_file.readline()
                    if not line:
                        break
                    self.connection.sendall(encode_frame(line.rstrip(b"\n")))
            except OSError:
                pass
            finally:
                stop.set()

        pump = threading.Thread(target=pump_upstream_to_ws, daemon=True)
        pump.start()
        try:
            message = bytearray()
            while not stop.is_set():
                frame = read_frame(self.rfile)
                if frame is None:
                    break
                opcode, fin, payload = frame
                if opcode == OP_CLOSE:
                    self.connection.sendall(encode_frame(payload, OP_CLOSE))
                    break
                if opcode == OP_PING:
                    self.connection.sendall(encode_frame(payload, OP_PONG))
                    continue
                if opcode == OP_PONG:
                    continue
                message.extend(payload)
                if not fin:
                    continue
                up_file.write(bytes(message).rstrip(b"\n") + b"\n")
                up_file.flush()
                message.clear()
        except OSError:
            pass
        finally:
            stop.set()
            try:
                upstream.close()
            except OSError:
                pass

    def _handshake(self) -> bool:
        request_line = self.rfile.readline()
        if not request_line.startswith(b"GET "):
            return False
        headers = {}
        while True:
            line = self.rfile.readline()
            if line in (b"\r\n", b"\n", b""):
                break
            name, _, value = line.decode("latin-1").partition(":")
            headers[name.strip().lower()] = value.strip()
        key = headers.get("sec-websocket-key")
        if not key or "websocket" not in headers.get("upgrade", "").lower():
            self.connection.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            return False
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept_key(key)}\r\n"
            "\r\n"
        )
        self.connection.sendall(response.encode("ascii"))
        return True


class _ThreadingServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class WebSocketBridge:
    def __init__(self, listen_host: str, listen_port: int, target_host: str, target_port: int):
        self.listen_host = listen_host
        self.listen_port = listen_port
        self.target_host = target_host
        self.target_port = target_port
        self._server: _ThreadingServer | None = None
        self.port = listen_port

    def start(self) -> "WebSocketBridge":
        self._server = _ThreadingServer((self.listen_host, self.listen_port), _BridgeHandler)
        self._server.bridge = self  # type: ignore[attr-defined]
        self.port = self._server.server_address[1]
        threading.Thread(target=self._server.serve_forever, daemon=True).start()
        return self

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None
