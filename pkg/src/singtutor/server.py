"""WebSocket event streaming for the browser UI.

One engine, any number of subscribers. Each subscriber gets an
independent bounded buffer: when a slow client falls behind, its oldest
events are dropped (live feedback favors freshness; the lossless copy
is the engine's own session record). Commands arrive on the same socket
as {"type": "cmd", ...} messages and are acked or rejected inline.
"""

from __future__ import annotations

import asyncio
import json
import logging
import threading
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from singtutor.score import bundled_song, serialize_score
from singtutor.session import CommandRejected, SessionEngine

log = logging.getLogger(__name__)

PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>singtutor</title></head>
<body style="font-family: sans-serif">
<h1>singtutor session service</h1>
<p>No UI bundle found. Events stream at <code>ws://&lt;host&gt;/ws</code>;
build the frontend and pass <code>--ui-dir</code> to serve it here.</p>
</body></html>
"""


class EventHub:
    """Thread-safe fan-out from the engine thread to asyncio queues."""

    def __init__(self, buffer_size: int = 256):
        self.buffer_size = buffer_size
        self._subscribers: set[asyncio.Queue] = set()
        self._loop: asyncio.AbstractEventLoop | None = None
        self._lock = threading.Lock()

    def attach_loop(self, loop: asyncio.AbstractEventLoop) -> None:
        self._loop = loop

    def subscribe(self) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue(maxsize=self.buffer_size)
        with self._lock:
            self._subscribers.add(q)
        return q

    def unsubscribe(self, q: asyncio.Queue) -> None:
        with self._lock:
            self._subscribers.discard(q)

    def publish(self, event: dict) -> None:
        """Callable from any thread (it is the engine sink)."""
        loop = self._loop
        if loop is None or loop.is_closed():
            return
        loop.call_soon_threadsafe(self._fan_out, event)

    def _fan_out(self, event: dict) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            if q.full():
                try:
                    q.get_nowait()  # lossy-latest: drop the oldest event
                except asyncio.QueueEmpty:
                    pass
            q.put_nowait(event)


def _score_doc(engine: SessionEngine) -> dict:
    return json.loads(serialize_score(engine.score))


def handle_command(engine: SessionEngine, msg: dict) -> dict:
    """Execute one {"type": "cmd"} message; returns the ack/error event
    to send back to the requesting client."""
    cmd = msg.get("cmd")
    if not cmd:
        return {"type": "error", "cmd": None, "reason": "missing cmd field"}
    try:
        if cmd == "load":
            song = str(msg.get("song", ""))
            engine.load_score(bundled_song(song), song_id=f"Song {song.upper()}")
        elif cmd == "seek":
            engine.command("seek", measure=int(msg.get("measure", 0)))
        else:
            engine.command(cmd)
    except (CommandRejected, ValueError) as e:
        return {"type": "error", "cmd": cmd, "reason": str(e)}
    return {"type": "ack", "cmd": cmd}


def create_app(engine: SessionEngine, ui_dir: str | None = None,
               hub: EventHub | None = None) -> FastAPI:
    from contextlib import asynccontextmanager

    hub = hub or EventHub()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        hub.attach_loop(asyncio.get_running_loop())
        yield

    app = FastAPI(title="singtutor", lifespan=lifespan)
    engine.add_sink(hub.publish)
    app.state.engine = engine
    app.state.hub = hub

    @app.get("/score")
    async def score():
        return JSONResponse(_score_doc(engine))

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        hub.attach_loop(asyncio.get_running_loop())
        q = hub.subscribe()
        await ws.send_json({"type": "score", "score": _score_doc(engine)})
        await ws.send_json(engine.transport.event())

        async def reader():
            while True:
                msg = await ws.receive_json()
                if msg.get("type") == "cmd":
                    reply = await asyncio.to_thread(handle_command, engine, msg)
                    await ws.send_json(reply)

        async def writer():
            while True:
                event = await q.get()
                await ws.send_json(event)

        tasks = [asyncio.create_task(reader()), asyncio.create_task(writer())]
        try:
            done, pending = await asyncio.wait(tasks, return_when=asyncio.FIRST_EXCEPTION)
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if exc is not None and not isinstance(exc, WebSocketDisconnect):
                    raise exc
        except WebSocketDisconnect:
            pass
        finally:
            for task in tasks:
                task.cancel()
            hub.unsubscribe(q)

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:
        @app.get("/")
        async def index():
            return HTMLResponse(PLACEHOLDER_PAGE)

    return app
