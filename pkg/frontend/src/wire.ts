// Adapter between a WebSocket-like object and the store's line-based wire.

import { SessionStore, Wire } from "./store.js";

// The subset of the WHATWG WebSocket API the console needs; the `ws` npm
// package used in tests implements the same surface. Handler params are
// `any` so both the DOM and the `ws` event types satisfy the interface.
export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((event: any) => void) | null;
  onmessage: ((event: any) => void) | null;
  onclose: ((event: any) => void) | null;
  onerror: ((event: any) => void) | null;
}

export function connectStore(store: SessionStore, socket: WebSocketLike): Wire {
  const wire: Wire = {
    send: (line) => socket.send(line),
    close: () => socket.close(),
  };
  store.attachWire(wire);
  socket.onopen = () => store.handleOpen();
  socket.onmessage = (event) => {
    // One envelope per frame; tolerate bundled lines.
    for (const line of String(event.data).split("\n")) {
      if (line.trim()) store.handleLine(line);
    }
  };
  socket.onclose = () => store.handleClose();
  socket.onerror = () => store.handleClose();
  return wire;
}
