"""WebSocket host for demo sessions.

Each connection gets its own GestureSession driven by two asyncio
tasks: a reader that feeds inbound frames (pointer frames land in the
session's bounded queue, so slow pipeline work never blocks ingestion)
and a ticker that advances the pipeline every tick and streams
EVTB/LBL/CTL frames back. Frames are newline-terminated text, one per
WebSocket message.
"""

from __future__ import annotations

import asyncio
import itertools

import websockets

from .model import QuantModel
from .service import GestureSession, ServiceConfig, UartMirror


class DemoServer:
    def __init__(
        self,
        model: QuantModel | None,
        cfg: ServiceConfig = ServiceConfig(),
        max_sessions: int = 16,
        uart_sink=None,
    ):
        self.model = model
        self.cfg = cfg
        self.max_sessions = max_sessions
        self.uart_sink = uart_sink
        self._ids = itertools.count(1)
        self._active = 0

    async def handler(self, websocket) -> None:
        if self._active >= self.max_sessions:
            await websocket.send("ERR BUSY session capacity exceeded\n")
            await websocket.close()
            return
        self._active += 1
        loop = asyncio.get_running_loop()
        t0 = loop.time()
        now_ms = lambda: (loop.time() - t0) * 1000.0
        uart = UartMirror(self.uart_sink) if self.uart_sink is not None else None
        session = GestureSession(f"s{next(self._ids):04d}", self.model, self.cfg, uart)

        async def send_frames(frames: list[str]) -> None:
            for frame in frames:
                await websocket.send(frame + "\n")

        async def ticker() -> None:
            while not session.closed:
                await asyncio.sleep(self.cfg.tick_ms / 1000.0)
                await send_frames(session.tick(now_ms()))

        tick_task = asyncio.create_task(ticker())
        try:
            async for message in websocket:
                if isinstance(message, bytes):
                    message = message.decode("utf-8", errors="replace")
                for line in message.splitlines():
                    if not line.strip():
                        continue
                    await send_frames(session.handle_frame(line, now_ms()))
                if session.closed:
                    break
        except websockets.ConnectionClosed:
            pass
        finally:
            tick_task.cancel()
            self._active -= 1
            try:
                await websocket.close()
            except Exception:
                pass

    async def serve(self, host: str, port: int):
        return await websockets.serve(self.handler, host, port)


async def run_server(
    host: str,
    port: int,
    model: QuantModel | None,
    cfg: ServiceConfig = ServiceConfig(),
    max_sessions: int = 16,
    uart_sink=None,
    ready_event: asyncio.Event | None = None,
) -> None:
    import sys

    server = DemoServer(model, cfg, max_sessions=max_sessions, uart_sink=uart_sink)
    ws_server = await server.serve(host, port)
    bound_port = ws_server.sockets[0].getsockname()[1]
    print(f"listening on ws://{host}:{bound_port}", file=sys.stderr, flush=True)
    if ready_event is not None:
        ready_event.set()
    try:
        await asyncio.Future()
    finally:
        ws_server.close()
        await ws_server.wait_closed()
