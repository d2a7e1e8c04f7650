// WebSocket client with reconnect that preserves the session id.

import { joinMessage, parseServerMessage, ServerMessage } from "./protocol.js";

export interface NetCallbacks {
  onMessage: (msg: ServerMessage) => void;
  onOpen: () => void;
  onClose: () => void;
}

export class NetClient {
  private ws: WebSocket | null = null;
  private role: "driver" | "spectator" = "driver";
  session: string | null = null;

  constructor(private url: string, private callbacks: NetCallbacks) {}

  connect(role: "driver" | "spectator", session?: string): void {
    this.role = role;
    if (session) this.session = session;
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      this.ws?.send(joinMessage(this.role, this.session ?? undefined));
      this.callbacks.onOpen();
    };
    this.ws.onmessage = (event) => {
      const msg = parseServerMessage(String(event.data));
      if (msg) this.callbacks.onMessage(msg);
    };
    this.ws.onclose = () => this.callbacks.onClose();
  }

  reconnect(): void {
    this.connect(this.role, this.session ?? undefined);
  }

  send(payload: string): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) this.ws.send(payload);
  }

  close(): void {
    this.ws?.close();
    this.ws = null;
  }
}
