"""HTTP runtime service: motion storage, preview, simulation, model access.

Built on the stdlib threading server so the package stays dependency-light.
Every response body is canonical JSON (or CSV for simulation streams), and
every response is a pure function of the request plus the motion store
content, so clients can cache on the returned timestamps.

Endpoints:
    GET  /motions             names and modification timestamps
    GET  /motions/{name}      stored motion document, ETag = mtime_ns
    PUT  /motions/{name}      validate + atomically store; honors If-Match
    POST /preview             {"motion": doc, "t": s} -> frame + link poses
    POST /simulate            {"motion": name, ...}   -> streamed CSV log
    GET  /model               robot description document
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .canonical import canonical_bytes
from .config import RuntimeConfig
from .errors import HopError, InvalidArgumentError, SchemaError, StaleWriteError
from .gait import GaitConfig
from .kinematics import forward_kinematics
from .model import RobotModel, parse_model
from .motions import load_motion, interpolate
from .servo import ServoCalibration
from .sim import Scenario, run_scenario
from .store import MotionStore

log = logging.getLogger("hop.service")

_SIM_CHUNK_ROWS = 200


@dataclass
class ServiceContext:
    """Everything a request handler needs, loaded once at startup."""

    store: MotionStore
    model: RobotModel
    model_doc: dict
    gait_config: GaitConfig
    servo_cal: ServoCalibration
    tick_rate: float


def build_context(config: RuntimeConfig, motions_dir) -> ServiceContext:
    with open(config.model_path) as fh:
        model_doc = json.load(fh)
    with open(config.gait_path) as fh:
        gait_config = GaitConfig.from_dict(json.load(fh))
    with open(config.calibration_path) as fh:
        cal_doc = json.load(fh)
    servo_cal = ServoCalibration.from_dict(cal_doc.get("servos", {}))
    return ServiceContext(
        store=MotionStore(motions_dir),
        model=parse_model(model_doc),
        model_doc=model_doc,
        gait_config=gait_config,
        servo_cal=servo_cal,
        tick_rate=config.tick_rate,
    )


def _transform_doc(tf) -> dict:
    q = tf.orientation
    return {
        "position": list(tf.position),
        "orientation": [q.w, q.x, q.y, q.z],
    }


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    context: ServiceContext  # set on the subclass by make_server

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)

    # -- response helpers ------------------------------------------------

    def _send_json(self, status: int, doc, extra_headers=()):
        body = canonical_bytes(doc)
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        for key, value in extra_headers:
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def _send_raw(self, status: int, body: bytes, content_type: str, extra_headers=()):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for key, value in extra_headers:
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def _send_error_doc(self, status: int, exc: Exception):
        doc = {"error": str(exc)}
        if isinstance(exc, SchemaError) and exc.path:
            doc["path"] = exc.path
        self._send_json(status, doc)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b""
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as e:
            raise SchemaError(f"request body is not valid JSON: {e}") from None
        if not isinstance(doc, dict):
            raise SchemaError("request body must be a JSON object")
        return doc

    # -- routes ----------------------------------------------------------

    def do_GET(self):
        try:
            if self.path == "/motions":
                listing = [
                    {"name": name, "modified_ns": stamp}
                    for name, stamp in sorted(self.context.store.list().items())
                ]
                self._send_json(200, {"motions": listing})
            elif self.path.startswith("/motions/"):
                name = self.path[len("/motions/") :]
                try:
                    data, stamp = self.context.store.load_bytes(name)
                except (KeyError, SchemaError):
                    self._send_json(404, {"error": f"no motion named {name!r}"})
                    return
                self._send_raw(200, data, "application/json", [("ETag", str(stamp))])
            elif self.path == "/model":
                self._send_raw(200, canonical_bytes(self.context.model_doc), "application/json")
            else:
                self._send_json(404, {"error": f"no route {self.path!r}"})
        except Exception as e:  # never leave the socket hanging
            log.exception("GET %s failed", self.path)
            self._send_error_doc(500, e)

    def do_PUT(self):
        if not self.path.startswith("/motions/"):
            self._send_json(404, {"error": f"no route {self.path!r}"})
            return
        name = self.path[len("/motions/") :]
        try:
            doc = self._read_body()
            expected = None
            if "If-Match" in self.headers:
                raw = self.headers["If-Match"].strip().strip('"')
                try:
                    expected = int(raw)
                except ValueError:
                    raise SchemaError(f"If-Match must be an integer timestamp, got {raw!r}") from None
            stamp = self.context.store.save(name, doc, expected_mtime_ns=expected)
        except StaleWriteError as e:
            self._send_error_doc(409, e)
        except SchemaError as e:
            self._send_error_doc(422, e)
        except Exception as e:
            log.exception("PUT %s failed", self.path)
            self._send_error_doc(500, e)
        else:
            self._send_json(200, {"name": name, "modified_ns": stamp}, [("ETag", str(stamp))])

    def do_POST(self):
        try:
            if self.path == "/preview":
                self._preview()
            elif self.path == "/simulate":
                self._simulate()
            else:
                self._send_json(404, {"error": f"no route {self.path!r}"})
        except (SchemaError, InvalidArgumentError) as e:
            self._send_error_doc(422, e)
        except KeyError as e:
            self._send_json(404, {"error": f"no motion named {e.args[0]!r}"})
        except Exception as e:
            log.exception("POST %s failed", self.path)
            self._send_error_doc(500, e)

    def _preview(self):
        body = self._read_body()
        if "motion" not in body or "t" not in body:
            raise SchemaError("preview needs 'motion' and 't'")
        if isinstance(body["t"], bool) or not isinstance(body["t"], (int, float)):
            raise SchemaError("t must be a number", path="t")
        motion = load_motion(body["motion"])
        frame = interpolate(motion, float(body["t"]))
        links = forward_kinematics(self.context.model, frame.positions)
        self._send_json(
            200,
            {
                "frame": {
                    "positions": frame.positions.tolist(),
                    "velocities": frame.velocities.tolist(),
                    "efforts": frame.efforts.tolist(),
                    "support": list(frame.support),
                },
                "links": {name: _transform_doc(tf) for name, tf in links.items()},
            },
        )

    def _simulate(self):
        body = self._read_body()
        if "motion" not in body or not isinstance(body["motion"], str):
            raise SchemaError("simulate needs a motion name", path="motion")
        name = body["motion"]
        motion, _ = self.context.store.load(name)  # KeyError -> 404
        seed = body.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise SchemaError("seed must be an integer", path="seed")
        duration = body.get("duration", motion.duration + 0.5)
        scenario = Scenario(
            name=f"simulate-{name}",
            seed=seed,
            duration=float(duration),
            rate=self.context.tick_rate,
            controller="motion",
            motion=name,
        )
        run = run_scenario(
            scenario,
            self.context.model,
            gait_config=self.context.gait_config,
            motion=motion,
            servo_cal=self.context.servo_cal,
        )
        lines = run.text.splitlines(keepends=True)
        self.send_response(200)
        self.send_header("Content-Type", "text/csv")
        self.send_header("Transfer-Encoding", "chunked")
        self.end_headers()
        for start in range(0, len(lines), _SIM_CHUNK_ROWS):
            chunk = "".join(lines[start : start + _SIM_CHUNK_ROWS]).encode()
            self.wfile.write(b"%x\r\n" % len(chunk) + chunk + b"\r\n")
        self.wfile.write(b"0\r\n\r\n")


def make_server(
    context: ServiceContext,
    bind_address: str = "127.0.0.1",
    port: int = 0,
) -> ThreadingHTTPServer:
    """Bound but not yet serving; call serve_forever() or run it in a thread."""
    handler = type("BoundHandler", (_Handler,), {"context": context})
    server = ThreadingHTTPServer((bind_address, port), handler)
    server.daemon_threads = True
    return server
