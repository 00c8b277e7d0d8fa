"""Command line front end.

Exit codes: 0 on success, 1 for usage problems, 2 for runtime failures
(missing files, invalid documents, numerical trouble).  Configuration is
layered: packaged defaults, then ``--config FILE``, then ``HOP_*``
environment variables.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import RuntimeConfig, load_runtime_config
from .errors import HopError
from .estimator import load_replay_csv, run_replay
from .gait import GaitConfig
from .model import load_model
from .motions import load_motion, play_init, play_tick
from .orientation import FusedAngles, RotationQuat, fused_from_quat, quat_from_fused
from .servo import ServoCalibration, feedforward_offsets, package_commands, write_command_log
from .sim import Scenario, load_scenario_file, run_scenario
from .store import MotionStore

_DEFAULT_MOTIONS_DIR = Path(__file__).resolve().parent / "data" / "motions"


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hop", description="humanoid runtime tools")
    parser.add_argument("--config", metavar="FILE", help="JSON runtime config file")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gait-sim", help="run a walking scenario and write log + figures")
    p.add_argument("scenario", help="scenario JSON file")

    p = sub.add_parser("play-motion", help="play a stored motion")
    p.add_argument("name", help="motion name")
    p.add_argument("--sim", action="store_true", help="run through the physics loop")
    p.add_argument("--motions", metavar="DIR", help="motion store directory")

    p = sub.add_parser("filter-replay", help="run the attitude filter over a raw IMU CSV")
    p.add_argument("csv", help="input CSV: t,gx,gy,gz,ax,ay,az,mx,my,mz")

    p = sub.add_parser("calibrate-camera", help="fit the camera mounting pose")
    p.add_argument("--model", required=True, metavar="FILE", help="calibration JSON")
    p.add_argument("--points", required=True, metavar="CSV", help="world/pixel pairs")
    p.add_argument("--out", required=True, metavar="FILE", help="output calibration JSON")

    p = sub.add_parser("convert-orientation", help="convert between quaternion and fused angles")
    p.add_argument("kind", choices=("quat", "fused"))
    p.add_argument("values", nargs="+", type=float)

    p = sub.add_parser("serve", help="start the HTTP runtime service")
    p.add_argument("--port", type=int, help="override the configured port")
    p.add_argument("--motions", metavar="DIR", help="motion store directory")

    return parser


def _load_runtime(args) -> RuntimeConfig:
    return load_runtime_config(args.config)


def _load_gait_config(cfg: RuntimeConfig) -> GaitConfig:
    with open(cfg.gait_path) as fh:
        return GaitConfig.from_dict(json.load(fh))


def _load_servo_cal(cfg: RuntimeConfig) -> ServoCalibration:
    with open(cfg.calibration_path) as fh:
        return ServoCalibration.from_dict(json.load(fh).get("servos", {}))


def _write_log_and_report(cfg: RuntimeConfig, stem: str, text: str):
    from . import report

    cfg.log_dir.mkdir(parents=True, exist_ok=True)
    log_path = cfg.log_dir / f"{stem}.csv"
    log_path.write_text(text)
    figures = report.write_run_report(text, cfg.log_dir, stem)
    print(log_path)
    for fig in figures:
        print(fig)


def _cmd_gait_sim(args) -> int:
    cfg = _load_runtime(args)
    scenario = load_scenario_file(args.scenario)
    run = run_scenario(
        scenario,
        load_model(cfg.model_path),
        gait_config=_load_gait_config(cfg),
        servo_cal=_load_servo_cal(cfg),
    )
    _write_log_and_report(cfg, scenario.name, run.text)
    return 0


def _cmd_play_motion(args) -> int:
    cfg = _load_runtime(args)
    store = MotionStore(args.motions if args.motions else _DEFAULT_MOTIONS_DIR)
    try:
        motion, _ = store.load(args.name)
    except KeyError:
        raise HopError(f"no motion named {args.name!r} in {store.directory}") from None
    model = load_model(cfg.model_path)
    cal = _load_servo_cal(cfg)

    if args.sim:
        scenario = Scenario(
            name=f"play-{motion.name}",
            seed=0,
            duration=motion.duration + 0.5,
            rate=cfg.tick_rate,
            controller="motion",
            motion=motion.name,
        )
        run = run_scenario(
            scenario,
            model,
            gait_config=_load_gait_config(cfg),
            motion=motion,
            servo_cal=cal,
        )
        _write_log_and_report(cfg, scenario.name, run.text)
        print(f"motion {'finished' if run.motion_done else 'did not finish'}")
        return 0

    # open loop: tick the player with a level trunk and log the servo stream
    dt = 1.0 / cfg.tick_rate
    state = play_init(motion)
    level = FusedAngles.identity()
    rows = []
    t = 0.0
    done = False
    while not done:
        state, frame, done = play_tick(state, level, dt)
        offsets = feedforward_offsets([0.0] * model.dof, cal)
        commands, _ = package_commands(frame.positions, offsets, frame.efforts, cal)
        rows.extend((t, cmd, off) for cmd, off in zip(commands, offsets))
        t += dt
    cfg.log_dir.mkdir(parents=True, exist_ok=True)
    out = cfg.log_dir / f"{motion.name}_commands.csv"
    write_command_log(out, rows)
    print(out)
    return 0


def _cmd_filter_replay(args) -> int:
    cfg = _load_runtime(args)
    from . import report

    samples = load_replay_csv(args.csv)
    estimates = run_replay(samples)
    cfg.log_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.csv).stem + "_fused"
    out = cfg.log_dir / f"{stem}.csv"
    with open(out, "w") as fh:
        fh.write("t,fused_yaw,fused_pitch,fused_roll,hemisphere\n")
        for t, fused in estimates:
            fh.write(
                f"{t!r},{fused.fused_yaw!r},{fused.fused_pitch!r},"
                f"{fused.fused_roll!r},{fused.hemisphere}\n"
            )
    figures = report.write_replay_report(estimates, cfg.log_dir, Path(args.csv).stem)
    print(out)
    for fig in figures:
        print(fig)
    return 0


def _cmd_calibrate_camera(args) -> int:
    cfg = _load_runtime(args)
    from .kinematics import forward_kinematics
    from .vision import CameraModel, ViewState, calibrate_extrinsics, load_correspondences

    with open(args.model) as fh:
        doc = json.load(fh)
    camera_doc = doc["camera"] if isinstance(doc, dict) and "camera" in doc else doc
    camera = CameraModel.from_dict(camera_doc)
    points = load_correspondences(args.points)

    # standing straight: head pose from the zero configuration, trunk level,
    # trunk height read off the sole frame
    model = load_model(cfg.model_path)
    links = forward_kinematics(model, [0.0] * model.dof)
    view = ViewState(
        head=links["head_pitch"],
        trunk=FusedAngles.identity(),
        height=-links["l_sole"].position[2],
    )
    result = calibrate_extrinsics(points, view, camera)
    updated = dataclasses.replace(camera, extrinsic=result.extrinsic)
    if isinstance(doc, dict) and "camera" in doc:
        doc["camera"] = updated.to_dict()
    else:
        doc = updated.to_dict()
    from .canonical import canonical_dumps

    Path(args.out).write_text(canonical_dumps(doc))
    print(f"rms {result.initial_rms:.6g} -> {result.rms:.6g} px")
    print(args.out)
    return 0


def _cmd_convert_orientation(args) -> int:
    if args.kind == "quat":
        if len(args.values) != 4:
            raise HopError("quat takes 4 values: w x y z")
        fused = fused_from_quat(RotationQuat(*args.values))
        print(
            f"{fused.fused_yaw:g} {fused.fused_pitch:g} "
            f"{fused.fused_roll:g} {fused.hemisphere:+d}"
        )
    else:
        if len(args.values) not in (3, 4):
            raise HopError("fused takes 3 or 4 values: yaw pitch roll [hemisphere]")
        hemi = 1
        if len(args.values) == 4:
            hemi = int(args.values[3])
            if hemi != args.values[3]:
                raise HopError(f"hemisphere must be +1 or -1, got {args.values[3]}")
        q = quat_from_fused(FusedAngles(*args.values[:3], hemi))
        print(f"{q.w:g} {q.x:g} {q.y:g} {q.z:g}")
    return 0


def _cmd_serve(args) -> int:
    cfg = _load_runtime(args)
    from .service import build_context, make_server

    context = build_context(cfg, args.motions if args.motions else _DEFAULT_MOTIONS_DIR)
    port = cfg.port if args.port is None else args.port
    server = make_server(context, cfg.bind_address, port)
    host, bound_port = server.server_address[:2]
    print(f"serving on http://{host}:{bound_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


_COMMANDS = {
    "gait-sim": _cmd_gait_sim,
    "play-motion": _cmd_play_motion,
    "filter-replay": _cmd_filter_replay,
    "calibrate-camera": _cmd_calibrate_camera,
    "convert-orientation": _cmd_convert_orientation,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as e:
        name = e.filename if e.filename else e
        print(f"hop: file not found: {name}", file=sys.stderr)
        return 2
    except HopError as e:
        print(f"hop: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
