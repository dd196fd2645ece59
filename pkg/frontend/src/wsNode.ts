/**
 * Minimal RFC 6455 WebSocket client for node, used by the headless
 * protocol tests (this node build ships no WebSocket global). Text
 * frames only, client-side masking, ping/pong and close handled.
 */

import { createConnection, type Socket } from "node:net";
import { randomBytes } from "node:crypto";

const TEXT = 0x1;
const CLOSE = 0x8;
const PING = 0x9;
const PONG = 0xa;

export class NodeWebSocket {
  private buffer = Buffer.alloc(0);
  private fragments: Buffer[] = [];
  private messages: string[] = [];
  private waiters: { resolve: (line: string) => void; reject: (err: Error) => void }[] = [];
  private closed = false;

  private constructor(private readonly socket: Socket) {
    socket.on("data", (chunk) => this.onData(chunk));
    socket.on("close", () => this.onClose());
    socket.on("error", () => this.onClose());
  }

  static connect(url: string, timeoutMs = 5000): Promise<NodeWebSocket> {
    const { hostname, port, pathname } = new URL(url);
    return new Promise((resolve, reject) => {
      const socket = createConnection({ host: hostname, port: Number(port || 80) });
      const timer = setTimeout(() => {
        socket.destroy();
        reject(new Error(`websocket connect timeout to ${url}`));
      }, timeoutMs);
      socket.once("error", (err) => {
        clearTimeout(timer);
        reject(err);
      });
      socket.once("connect", () => {
        const key = randomBytes(16).toString("base64");
        socket.write(
          `GET ${pathname || "/"} HTTP/1.1\r\n` +
            `Host: ${hostname}:${port}\r\n` +
            "Upgrade: websocket\r\n" +
            "Connection: Upgrade\r\n" +
            `Sec-WebSocket-Key: ${key}\r\n` +
            "Sec-WebSocket-Version: 13\r\n\r\n",
        );
        let head = Buffer.alloc(0);
        const onHandshake = (chunk: Buffer) => {
          head = Buffer.concat([head, chunk]);
          const end = head.indexOf("\r\n\r\n");
          if (end === -1) return;
          socket.off("data", onHandshake);
          const response = head.subarray(0, end).toString();
          if (!/^HTTP\/1\.1 101/.test(response)) {
            clearTimeout(timer);
            socket.destroy();
            reject(new Error(`handshake rejected: ${response.split("\r\n")[0]}`));
            return;
          }
          clearTimeout(timer);
          const ws = new NodeWebSocket(socket);
          const rest = head.subarray(end + 4);
          if (rest.length) ws.onData(rest);
          resolve(ws);
        };
        socket.on("data", onHandshake);
      });
    });
  }

  send(text: string): void {
    if (this.closed) throw new Error("websocket is closed");
    this.socket.write(encodeFrame(TEXT, Buffer.from(text, "utf-8")));
  }

  /** Next inbound text message (one server frame per message). */
  next(timeoutMs = 10_000): Promise<string> {
    const queued = this.messages.shift();
    if (queued !== undefined) return Promise.resolve(queued);
    if (this.closed) return Promise.reject(new Error("websocket closed"));
    return new Promise((resolve, reject) => {
      const waiter = {
        resolve: (line: string) => {
          clearTimeout(timer);
          resolve(line);
        },
        reject,
      };
      const timer = setTimeout(() => {
        const idx = this.waiters.indexOf(waiter);
        if (idx >= 0) this.waiters.splice(idx, 1);
        reject(new Error("timed out waiting for frame"));
      }, timeoutMs);
      this.waiters.push(waiter);
    });
  }

  close(): void {
    if (!this.closed) {
      this.socket.write(encodeFrame(CLOSE, Buffer.alloc(0)));
      this.socket.end();
    }
  }

  private onData(chunk: Buffer): void {
    this.buffer = Buffer.concat([this.buffer, chunk]);
    for (;;) {
      const frame = decodeFrame(this.buffer);
      if (frame === null) return;
      this.buffer = this.buffer.subarray(frame.consumed);
      if (frame.opcode === PING) {
        this.socket.write(encodeFrame(PONG, frame.payload));
        continue;
      }
      if (frame.opcode === CLOSE) {
        this.onClose();
        return;
      }
      if (frame.opcode === TEXT || frame.opcode === 0x0) {
        this.fragments.push(frame.payload);
        if (frame.fin) {
          const text = Buffer.concat(this.fragments).toString("utf-8");
          this.fragments = [];
          for (const line of text.split("\n")) {
            if (!line.trim()) continue;
            const waiter = this.waiters.shift();
            if (waiter) waiter.resolve(line);
            else this.messages.push(line);
          }
        }
      }
    }
  }

  private onClose(): void {
    if (this.closed) return;
    this.closed = true;
    this.socket.destroy();
    for (const waiter of this.waiters.splice(0)) {
      waiter.reject(new Error("websocket closed"));
    }
  }
}

function encodeFrame(opcode: number, payload: Buffer): Buffer {
  const mask = randomBytes(4);
  let header: Buffer;
  if (payload.length < 126) {
    header = Buffer.from([0x80 | opcode, 0x80 | payload.length]);
  } else if (payload.length < 65536) {
    header = Buffer.alloc(4);
    header[0] = 0x80 | opcode;
    header[1] = 0x80 | 126;
    header.writeUInt16BE(payload.length, 2);
  } else {
    header = Buffer.alloc(10);
    header[0] = 0x80 | opcode;
    header[1] = 0x80 | 127;
    header.writeBigUInt64BE(BigInt(payload.length), 2);
  }
  const masked = Buffer.from(payload);
  for (let i = 0; i < masked.length; i++) masked[i] ^= mask[i & 3];
  return Buffer.concat([header, mask, masked]);
}

function decodeFrame(
  buf: Buffer,
): { fin: boolean; opcode: number; payload: Buffer; consumed: number } | null {
  if (buf.length < 2) return null;
  const fin = (buf[0] & 0x80) !== 0;
  const opcode = buf[0] & 0x0f;
  const masked = (buf[1] & 0x80) !== 0;
  let len = buf[1] & 0x7f;
  let offset = 2;
  if (len === 126) {
    if (buf.length < 4) return null;
    len = buf.readUInt16BE(2);
    offset = 4;
  } else if (len === 127) {
    if (buf.length < 10) return null;
    len = Number(buf.readBigUInt64BE(2));
    offset = 10;
  }
  const maskKey = masked ? buf.subarray(offset, offset + 4) : null;
  if (masked) offset += 4;
  if (buf.length < offset + len) return null;
  const payload = Buffer.from(buf.subarray(offset, offset + len));
  if (maskKey) {
    for (let i = 0; i < payload.length; i++) payload[i] ^= maskKey[i & 3];
  }
  return { fin, opcode, payload, consumed: offset + len };
}
