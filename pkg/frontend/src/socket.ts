// WebSocket client: applies server events in arrival order, sends
// fire-and-forget commands, reconnects with a banner while down (the
// view stays frozen at its last state).

import type { CommandMessage, CommandName, ServerEvent } from "./types.js";

export interface SocketHooks {
  onEvent: (event: ServerEvent) => void;
  onConnection: (connected: boolean) => void;
}

export class TutorSocket {
  private ws: WebSocket | null = null;
  private url: string;
  private hooks: SocketHooks;
  private retryMs = 500;
  private closed = false;

  constructor(url: string, hooks: SocketHooks) {
    this.url = url;
    this.hooks = hooks;
    this.connect();
  }

  private connect(): void {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.retryMs = 500;
      this.hooks.onConnection(true);
    };
    ws.onmessage = (msg) => {
      this.hooks.onEvent(JSON.parse(msg.data) as ServerEvent);
    };
    ws.onclose = () => {
      this.hooks.onConnection(false);
      if (!this.closed) {
        setTimeout(() => this.connect(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 5000);
      }
    };
    ws.onerror = () => ws.close();
  }

  send(cmd: CommandName, args: Partial<CommandMessage> = {}): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      const message: CommandMessage = { type: "cmd", cmd, ...args };
      this.ws.send(JSON.stringify(message));
    }
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}

export function defaultUrl(): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/ws`;
}
