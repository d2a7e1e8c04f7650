"""Realtime human-driven sessions over WebSocket.

One logical sim-loop task per session advances the duel at the sample rate
in wall-clock time; connection handlers only exchange messages with it via
bounded queues, so a slow client can never stall a tick.  The human drives
the opponent with direct (v, omega) commands under zero-order hold; input
older than the staleness threshold decays (speed halves each decision
cycle, turn rate zeroed).  Finished episodes persist exactly like offline
runs, so a session replayed through the recorded input stream reproduces
the same record.
"""

from __future__ import annotations

import asyncio
import itertools
import json
import math
import time
from pathlib import Path
from typing import Dict, Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .sim import EpisodeEngine, LiveExternal, SimConfig

STALE_AFTER_S = 0.5
COUNTDOWN_S = 3.0
CLIENT_QUEUE_LIMIT = 16
PROTOCOL_VERSION = 1

_session_counter = itertools.count(1)


def _round(value: float, digits: int = 4) -> float:
    return round(float(value), digits)


def _round_triples(triples) -> list:
    return [[_round(t, 2), _round(x), _round(y)] for t, x, y in triples]


class ClientHandle:
    def __init__(self, ws: WebSocket, role: str):
        self.ws = ws
        self.role = role
        self.queue: asyncio.Queue = asyncio.Queue(maxsize=CLIENT_QUEUE_LIMIT)
        self.protocol_errors = 0

    def push(self, message: str) -> None:
        # Bounded queue: drop the oldest snapshot when the client lags.
        while True:
            try:
                self.queue.put_nowait(message)
                return
            except asyncio.QueueFull:
                try:
                    self.queue.get_nowait()
                except asyncio.QueueEmpty:
                    pass


class Session:
    """One duel: at most one driver, any number of spectators."""

    def __init__(
        self,
        session_id: str,
        config: SimConfig,
        controller: str,
        seed: int,
        out_dir: Optional[Path],
        time_scale: float,
    ):
        self.id = session_id
        self.config = config
        self.seed = seed
        self.out_dir = out_dir
        self.time_scale = time_scale
        self.phase = "lobby"
        self.live = LiveExternal()
        self.engine = EpisodeEngine(config, controller, self.live, seed)
        self.clients: Dict[int, ClientHandle] = {}
        self.driver: Optional[ClientHandle] = None
        self._held_input = (0.0, 0.0)
        self._held_at: Optional[float] = None
        self._loop_task: Optional[asyncio.Task] = None
        self._client_ids = itertools.count(1)

    # -- membership --------------------------------------------------------- #

    def join(self, ws: WebSocket, wanted_role: str) -> ClientHandle:
        role = "spectator"
        if wanted_role == "driver" and self.driver is None:
            role = "driver"
        handle = ClientHandle(ws, role)
        handle.client_id = next(self._client_ids)
        self.clients[handle.client_id] = handle
        if role == "driver":
            self.driver = handle
        return handle

    def leave(self, handle: ClientHandle) -> None:
        self.clients.pop(handle.client_id, None)
        if self.driver is handle:
            self.driver = None  # input decay takes over

    # -- input -------------------------------------------------------------- #

    def ingest_input(self, handle: ClientHandle, msg: dict) -> Optional[str]:
        """Returns an error code, or None when the input was accepted."""
        if handle.role != "driver":
            return "role"
        if self.phase != "running":
            return "phase"
        try:
            v = float(msg["v"])
            omega = float(msg["omega"])
        except (KeyError, TypeError, ValueError):
            return "malformed"
        if not (math.isfinite(v) and math.isfinite(omega)):
            return "malformed"
        v = min(max(v, 0.0), self.config.opp_v_max)
        omega = min(max(omega, -self.config.omega_max), self.config.omega_max)
        self._held_input = (v, omega)
        self._held_at = time.monotonic()
        return None

    def _applied_input(self, now: float) -> tuple:
        v, omega = self._held_input
        if self._held_at is None:
            return (0.0, 0.0)
        age = now - self._held_at
        if age > STALE_AFTER_S:
            halvings = 1 + int((age - STALE_AFTER_S) // self.config.decision_cycle)
            return (v * 0.5**halvings, 0.0)
        return (v, omega)

    # -- lifecycle ----------------------------------------------------------- #

    def start(self) -> bool:
        if self.phase != "lobby":
            return False
        self.phase = "countdown"
        self._loop_task = asyncio.get_running_loop().create_task(self._run_loop())
        return True

    async def _run_loop(self) -> None:
        tick = self.config.sample_time * self.time_scale
        countdown_ticks = max(1, int(COUNTDOWN_S / self.config.sample_time))
        for remaining in range(countdown_ticks, 0, -1):
            self.broadcast_state(countdown=remaining * self.config.sample_time)
            await asyncio.sleep(tick)
        self.phase = "running"
        while not self.engine.finished:
            started = time.monotonic()
            self.live.current = self._applied_input(started)
            self.engine.step()
            self.broadcast_state()
            elapsed = time.monotonic() - started
            await asyncio.sleep(max(0.0, tick - elapsed))
        self.phase = "finished"
        record = self.engine.record
        if self.out_dir is not None:
            record.write(Path(self.out_dir) / f"hil_{self.id}_{self.seed}.jsonl")
        self.broadcast(
            {
                "type": "result",
                "outcome": record.outcome,
                "collision": record.collision,
            }
        )
        self.broadcast_state()

    # -- outgoing ------------------------------------------------------------ #

    def state_message(self, countdown: Optional[float] = None) -> dict:
        engine = self.engine
        ego, opp = engine.ego, engine.opp
        decision = engine.record.decisions[-1] if engine.record.decisions else None
        beliefs = decision.beliefs if decision else (1 / 3, 1 / 3, 1 / 3)
        msg = {
            "type": "state",
            "version": PROTOCOL_VERSION,
            "session": self.id,
            "phase": self.phase,
            "t": _round(engine.k * self.config.sample_time, 2),
            "ego": [_round(ego.x), _round(ego.y), _round(ego.theta)],
            "opp": [_round(opp.x), _round(opp.y), _round(opp.theta)],
            "beliefs": [_round(b) for b in beliefs],
            "potential": _round(decision.potential) if decision else 0.0,
            "trajectories": {
                "best": _round_triples(decision.best) if decision else [],
                "failsafe": _round_triples(decision.failsafe) if decision else [],
                "mixed": _round_triples(decision.mixed) if decision else [],
            },
            "track": list(self.config.y_track),
            "footprint": self.config.footprint,
            "bounds": {"v_max": self.config.opp_v_max, "omega_max": self.config.omega_max},
        }
        if countdown is not None:
            msg["countdown"] = _round(countdown, 1)
        if self.phase == "finished":
            msg["outcome"] = engine.record.outcome
            msg["collision"] = engine.record.collision
        return msg

    def broadcast(self, obj: dict) -> None:
        message = json.dumps(obj, separators=(",", ":"))
        for handle in list(self.clients.values()):
            handle.push(message)

    def broadcast_state(self, countdown: Optional[float] = None) -> None:
        self.broadcast(self.state_message(countdown=countdown))


class SessionManager:
    def __init__(self, config: SimConfig, controller: str, out_dir: Optional[Path], time_scale: float, seed: int):
        self.config = config
        self.controller = controller
        self.out_dir = out_dir
        self.time_scale = time_scale
        self.base_seed = seed
        self.sessions: Dict[str, Session] = {}

    def get_or_create(self, session_id: Optional[str]) -> Session:
        if session_id and session_id in self.sessions:
            return self.sessions[session_id]
        # a fresh session gets a fresh seed so rematches differ
        index = next(_session_counter)
        new_id = session_id or f"s{index:04d}"
        session = Session(
            new_id,
            self.config,
            self.controller,
            seed=self.base_seed + index,
            out_dir=self.out_dir,
            time_scale=self.time_scale,
        )
        self.sessions[new_id] = session
        return session


def create_app(
    config: Optional[SimConfig] = None,
    controller: str = "mixing",
    out_dir: Optional[Path] = None,
    seed: int = 0,
    time_scale: float = 1.0,
    static_dir: Optional[Path] = None,
) -> FastAPI:
    config = config or SimConfig()
    app = FastAPI(title="raceduel session server")
    manager = SessionManager(config, controller, out_dir, time_scale, seed)
    app.state.manager = manager

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": len(manager.sessions)}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session: Optional[Session] = None
        handle: Optional[ClientHandle] = None
        sender: Optional[asyncio.Task] = None

        async def send_error(code: str, detail: str):
            await ws.send_text(
                json.dumps(
                    {"type": "error", "code": code, "detail": detail},
                    separators=(",", ":"),
                )
            )

        async def pump(h: ClientHandle):
            while True:
                message = await h.queue.get()
                await ws.send_text(message)

        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    kind = msg.get("type")
                except (json.JSONDecodeError, AttributeError):
                    if handle is not None:
                        handle.protocol_errors += 1
                    await send_error("malformed", "message is not a JSON object")
                    continue
                if kind == "join":
                    if session is not None:
                        await send_error("protocol", "already joined")
                        continue
                    session = manager.get_or_create(msg.get("session"))
                    handle = session.join(ws, msg.get("role", "spectator"))
                    sender = asyncio.get_running_loop().create_task(pump(handle))
                    snapshot = session.state_message()
                    snapshot["role"] = handle.role
                    await ws.send_text(json.dumps(snapshot, separators=(",", ":")))
                elif session is None or handle is None:
                    await send_error("protocol", "join first")
                elif kind == "ready":
                    if handle.role != "driver":
                        await send_error("role", "only the driver starts the race")
                    else:
                        session.start()
                elif kind == "input":
                    code = session.ingest_input(handle, msg)
                    if code is not None:
                        handle.protocol_errors += 1
                        await send_error(code, "input rejected")
                else:
                    handle.protocol_errors += 1
                    await send_error("protocol", f"unknown message type {kind!r}")
        except WebSocketDisconnect:
            pass
        finally:
            if sender is not None:
                sender.cancel()
            if session is not None and handle is not None:
                session.leave(handle)

    if static_dir is None:
        static_dir = Path.cwd() / "frontend" / "dist"
    if static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
