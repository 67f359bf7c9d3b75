"""Command-line surface: build canals, run scenarios, render reports, serve.

Exit codes: 0 success, 1 error, 2 success with intersection warnings.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .canal import align_end, build_canal, classify_end
from .config import Config, load_config
from .demo_pipeline import preprocess
from .io_formats import (
    FormatError,
    canal_digest,
    load_canal,
    load_demo,
    load_scenario,
    resolve_canal_ref,
    save_canal,
    save_metrics,
    save_pen_trace,
    save_trace,
)
from .protocol import decode_snapshot, quantize
from .simulation import run_scenario


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def build_pipeline(demo_a, demo_b, cfg: Config, align_ends: str = "auto",
                   fraction: float | None = None):
    """Full demo-to-canal pipeline shared by the CLI and the sample maker.

    Returns (canal, summary_lines, warning_states).
    """
    fraction = cfg.align_fraction if fraction is None else fraction
    pair = preprocess(demo_a, demo_b, n_states=cfg.n_states,
                      smoothing_scale=cfg.smoothing_scale)
    canal = build_canal(pair, r_min=cfg.r_min, axis_window=cfg.axis_window)

    arc = float(np.linalg.norm(np.diff(canal.d, axis=0), axis=1).sum())
    summary = [
        f"canal: S={canal.n_states} arc_length={quantize(arc)} "
        f"r_mean={quantize(float(canal.r.mean()))}"
    ]
    warnings_all = []
    if align_ends == "auto":
        for which in ("head", "tail"):
            end = classify_end(canal, which)
            canal, bad = align_end(canal, end, fraction=fraction)
            warnings_all.extend(bad)
            extra = ""
            if bad:
                extra = f" states=[{min(bad)}..{max(bad)}]"
            summary.append(
                f"{which}: {end.target} theta={quantize(end.theta)} "
                f"fraction={quantize(fraction)} warnings={len(bad)}{extra}")
    else:
        summary.append("ends: not aligned")
    return canal, summary, warnings_all


def cmd_build(args) -> int:
    cfg = load_config(args.config) if args.config else Config()
    if args.states:
        cfg.n_states = args.states
    try:
        demo_a = load_demo(args.demo_a)
        demo_b = load_demo(args.demo_b)
        canal, summary, warnings_all = build_pipeline(
            demo_a, demo_b, cfg, align_ends=args.align_ends,
            fraction=args.fraction)
    except (FormatError, ValueError) as exc:
        return _fail(str(exc))
    save_canal(canal, cfg, args.out)
    summary.append(f"wrote: {args.out} digest={canal_digest(canal, cfg)}")
    print("\n".join(summary))
    return 2 if warnings_all else 0


def cmd_sim(args) -> int:
    cfg = load_config(args.config) if args.config else Config()
    try:
        scenario = load_scenario(args.scenario)
        canal_path = args.canal or resolve_canal_ref(args.scenario,
                                                     scenario.canal_ref)
        canal, canal_cfg = load_canal(canal_path)
        digest = canal_digest(canal, canal_cfg)
        result = run_scenario(scenario, canal, cfg, canal_digest=digest)
    except (FormatError, ValueError) as exc:
        return _fail(str(exc))
    save_metrics(result.metrics, args.metrics_out)
    if args.trace_out:
        save_trace(result.trace, args.trace_out)
    if args.pen_out:
        save_pen_trace(result.pen_trace, args.pen_out)
    m = result.metrics
    print(f"completed in {quantize(m.completion_time_s)} s, "
          f"corrections {quantize(m.correction_time_s)} s, "
          f"placed {m.objects_placed}, score {m.score}")
    return 0


def cmd_report(args) -> int:
    from .report import write_report

    try:
        canal, _ = load_canal(args.canal)
        trace = None
        if args.trace:
            lines = Path(args.trace).read_text().splitlines()
            trace = [decode_snapshot(line) for line in lines if line.strip()]
        pen = None
        if args.pen:
            with open(args.pen, newline="") as fh:
                reader = csv.reader(fh)
                next(reader)
                pen = [tuple(float(v) for v in row) for row in reader]
    except (FormatError, ValueError, OSError) as exc:
        return _fail(str(exc))
    written = write_report(canal, args.out_dir, trace=trace, pen=pen)
    for name in written:
        print(f"wrote: {Path(args.out_dir) / name}")
    return 0


def _parse_vec(text: str):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected x,y,z, got {text!r}")
    return parts


def _default_ui_dir():
    """Cockpit assets, when running from a checkout with a built frontend."""
    for candidate in (Path.cwd() / "frontend",
                      Path(__file__).resolve().parents[2] / "frontend"):
        if (candidate / "index.html").is_file():
            return candidate
    return None


def cmd_serve(args) -> int:
    from .bridge import serve_forever
    from .input_mapping import UserFrame

    cfg = load_config(args.config) if args.config else Config()
    try:
        user_pos = _parse_vec(args.user_pos)
        facing = _parse_vec(args.user_facing)
        user = UserFrame.from_facing(user_pos, facing)
        canal, canal_cfg = load_canal(args.canal)
        scenario = load_scenario(args.scenario) if args.scenario else None
    except (FormatError, ValueError) as exc:
        return _fail(str(exc))
    ui_dir = args.ui_dir or _default_ui_dir()
    try:
        serve_forever(canal, canal_cfg, user, cfg, port=args.port, hz=args.hz,
                      scenario=scenario, ui_dir=ui_dir)
    except OSError as exc:
        return _fail(f"cannot bind port {args.port}: {exc}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="canalpilot",
        description="canal-surface shared autonomy: build, simulate, serve")
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="build a canal from two demos")
    p_build.add_argument("--demo-a", required=True)
    p_build.add_argument("--demo-b", required=True)
    p_build.add_argument("--out", required=True)
    p_build.add_argument("--states", type=int, default=None)
    p_build.add_argument("--align-ends", choices=("auto", "off"), default="auto")
    p_build.add_argument("--fraction", type=float, default=None)
    p_build.add_argument("--config", default=None)
    p_build.set_defaults(func=cmd_build)

    p_sim = sub.add_parser("sim", help="run a scripted scenario")
    p_sim.add_argument("--canal", default=None)
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--metrics-out", required=True)
    p_sim.add_argument("--trace-out", default=None)
    p_sim.add_argument("--pen-out", default=None)
    p_sim.add_argument("--config", default=None)
    p_sim.set_defaults(func=cmd_sim)

    p_rep = sub.add_parser("report", help="render figures for a canal or run")
    p_rep.add_argument("--canal", required=True)
    p_rep.add_argument("--trace", default=None)
    p_rep.add_argument("--pen", default=None)
    p_rep.add_argument("--out-dir", required=True)
    p_rep.set_defaults(func=cmd_report)

    p_srv = sub.add_parser("serve", help="serve the live bridge and cockpit")
    p_srv.add_argument("--canal", required=True)
    p_srv.add_argument("--port", type=int, default=8080)
    p_srv.add_argument("--hz", type=float, default=30.0)
    p_srv.add_argument("--user-pos", default="-1,0,0")
    p_srv.add_argument("--user-facing", default="1,0,0")
    p_srv.add_argument("--scenario", default=None)
    p_srv.add_argument("--ui-dir", default=None)
    p_srv.add_argument("--config", default=None)
    p_srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
