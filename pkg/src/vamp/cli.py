"""``vamp`` command line: score, corrupt, experiment, sweep and synth.

Options are resolved as flags > JSON config file > defaults and the
resolved values are echoed into every report.  Worker counts and output
paths are left out of the echo because they never change the results.

Exit codes: 0 success (including a segmentation failure, which is a valid
score of 0), 2 configuration error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .corruption import KINDS, CorruptionSpec, corrupt_clip
from .errors import ConfigError, MediaIOError
from .media import VideoClip, load_frames, save_frames
from .motion import NORMALIZATIONS, MotionWeights
from .pipeline import SamplingConfig, evaluate
from .regions import ObjectTrack, RegionMask, save_masks
from .sampling import SAMPLERS
from .scoring import (PRESET_TUPLES, SCHEMA_VERSION, ScoreBreakdown, csv_row,
                      flat_weights_to_config, fmt, preset, sensitivity_sweep)
from .appearance import SHAPE_MODES
from .synthetic import moving_square_clip

EXIT_CONFIG = 2
EXIT_IO = 3

SCORE_DEFAULTS = {
    "pattern": "*.png",
    "masks": None,
    "sampler": "sift",
    "grid": "1x1",
    "n_random": 8,
    "preset": "sift-default",
    "weights": None,
    "motion_weights": "0.5,0.5",
    "shape_mode": "single_wrap",
    "motion_norm": "frame_diagonal",
    "seed": 0,
}
ECHO_EXCLUDED = {"command", "config", "workers", "out", "changes", "plot", "func"}


# ---------------------------------------------------------------- parsing

def _floats(text, n: int | None = None, name: str = "value") -> list[float]:
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = [p for p in str(text).split(",") if p.strip()]
    try:
        vals = [float(p) for p in parts]
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise ConfigError(f"{name}: expected {n} numbers, got {len(vals)}")
    return vals


def parse_grid(text) -> tuple[int, int]:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        nx, ny = text
    else:
        parts = str(text).lower().split("x")
        if len(parts) != 2:
            raise ConfigError(f"grid must look like NXxNY, got {text!r}")
        nx, ny = parts
    try:
        return int(nx), int(ny)
    except ValueError:
        raise ConfigError(f"grid must look like NXxNY, got {text!r}") from None


def parse_levels(text) -> list[int]:
    """``"1-5"``, ``"2,4"`` or a list, returned sorted and unique."""
    if isinstance(text, (list, tuple)):
        items = [str(x) for x in text]
    else:
        items = [p.strip() for p in str(text).split(",") if p.strip()]
    levels = set()
    try:
        for item in items:
            if "-" in item:
                lo, hi = (int(x) for x in item.split("-", 1))
                levels.update(range(lo, hi + 1))
            else:
                levels.add(int(item))
    except ValueError:
        raise ConfigError(f"levels must look like 1-5 or 1,3,5, got {text!r}") from None
    if not levels or min(levels) < 0 or max(levels) > 5:
        raise ConfigError(f"levels must lie in 0..5, got {text!r}")
    return sorted(levels)


def _read_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise MediaIOError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge defaults, the optional config file and explicit flags."""
    given = vars(args)
    file_opts = _read_config_file(given["config"]) if given.get("config") else {}
    unknown = set(file_opts) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(file_opts)
    merged.update({k: v for k, v in given.items() if k in defaults})
    return merged


def score_config(opts: dict):
    overrides = {"shape_mode": opts["shape_mode"], "motion_normalization": opts["motion_norm"]}
    mw = _floats(opts["motion_weights"], 2, "motion weights")
    overrides["motion_weights"] = MotionWeights(*mw)
    if opts.get("weights") is not None:
        return flat_weights_to_config(_floats(opts["weights"], 4, "weights"), **overrides)
    return preset(opts["preset"], **overrides)


def sampling_config(opts: dict) -> SamplingConfig:
    try:
        seed, n_random = int(opts["seed"]), int(opts["n_random"])
    except (TypeError, ValueError):
        raise ConfigError("seed and n_random must be integers") from None
    return SamplingConfig(sampler=opts["sampler"], seed=seed, n_random=n_random,
                          grid=parse_grid(opts["grid"]))


def _echo(opts: dict) -> dict:
    return {k: v for k, v in sorted(opts.items()) if k not in ECHO_EXCLUDED}


def _write_text(path, text: str) -> None:
    try:
        p = Path(path)
        if p.parent != Path(""):
            p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise MediaIOError(f"cannot write {path}: {exc}") from exc


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _add_scoring_flags(p: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    p.add_argument("input_dir", help="directory of frame images")
    p.add_argument("--config", help="JSON file with default values for these flags")
    p.add_argument("--pattern", default=s, help="frame filename glob (default *.png)")
    p.add_argument("--masks", default=s, help="label-map manifest; overrides the sampler")
    p.add_argument("--sampler", choices=SAMPLERS, default=s, help="region sampler (default sift)")
    p.add_argument("--grid", default=s, help="grid sampler layout NXxNY (default 1x1)")
    p.add_argument("--n-random", type=int, default=s, help="random sampler point count (default 8)")
    p.add_argument("--preset", choices=sorted(PRESET_TUPLES), default=s,
                   help="weight preset (default sift-default)")
    p.add_argument("--weights", default=s, help="color,shape,texture,motion; overrides --preset")
    p.add_argument("--motion-weights", default=s, help="velocity,acceleration (default 0.5,0.5)")
    p.add_argument("--shape-mode", choices=SHAPE_MODES, default=s)
    p.add_argument("--motion-norm", choices=NORMALIZATIONS, default=s)
    p.add_argument("--seed", type=int, default=s, help="seed for random sampling and corruptions")
    p.add_argument("--workers", type=int, default=1, help="worker count; never changes results")


# ---------------------------------------------------------------- score

def _tracks_summary(tracks: list[ObjectTrack]) -> list[dict]:
    return [{"object_id": tr.object_id, "segment": tr.segment, "start": tr.start, "end": tr.end,
             "bboxes": [list(m.bbox) for m in tr.masks]}
            for tr in sorted(tracks, key=lambda tr: (tr.object_id, tr.segment, tr.start))]


def score_report(command: str, opts: dict, b: ScoreBreakdown, tracks, info: dict) -> dict:
    rep = {"schema_version": SCHEMA_VERSION, "command": command, "version": __version__,
           "options": _echo(opts), "score_config": b.config.to_dict(),
           "sampling": info, "tracks": _tracks_summary(tracks)}
    rep.update(b.to_dict())
    return rep


def _load(opts: dict, workers: int) -> VideoClip:
    return load_frames(opts["input_dir"], pattern=opts["pattern"], workers=workers)


def _score(opts: dict, workers: int):
    cfg = score_config(opts)
    sc = sampling_config(opts)
    clip = _load(opts, workers)
    return evaluate(clip, cfg, sc, masks_manifest=opts.get("masks"), workers=workers)


def cmd_score(args) -> int:
    opts = resolve(args, {**SCORE_DEFAULTS, "input_dir": None, "clip_id": None})
    b, tracks, info = _score(opts, args.workers)
    if args.out:
        _write_text(args.out, _dump_json(score_report("score", opts, b, tracks, info)))
    clip_id = opts["clip_id"] or Path(opts["input_dir"]).name
    sys.stdout.write(_csv_text([csv_row(clip_id, b)]))
    return 0


# ---------------------------------------------------------------- corrupt

def write_corruptions(clip: VideoClip, source: str, kind: str, levels, seed: int,
                      out_root, per_frame: bool = False, workers: int = 1) -> list[dict]:
    """Write ``out_root/<kind>/level_<L>/`` frame directories, each with a
    ``corruption.json`` manifest.  Returns the manifest records."""
    records = []
    for level in levels:
        out_dir = Path(out_root) / kind / f"level_{level}"
        spec = CorruptionSpec(kind, level, seed, per_frame)
        corrupted, record = corrupt_clip(clip, spec, workers)
        save_frames(corrupted, out_dir)
        record = dict(record, source=str(source), output=str(out_dir))
        _write_text(out_dir / "corruption.json", _dump_json(record))
        records.append(record)
    return records


def cmd_corrupt(args) -> int:
    defaults = {"input_dir": None, "pattern": "*.png", "kind": None, "levels": "1-5",
                "seed": 0, "out_root": None, "per_frame": False}
    opts = resolve(args, defaults)
    if opts["kind"] not in KINDS:
        raise ConfigError(f"--kind must be one of {KINDS}")
    if not opts["out_root"]:
        raise ConfigError("--out-root is required")
    levels = parse_levels(opts["levels"])
    clip = _load(opts, args.workers)
    records = write_corruptions(clip, opts["input_dir"], opts["kind"], levels, int(opts["seed"]),
                                opts["out_root"], bool(opts["per_frame"]), args.workers)
    for r in records:
        print(r["output"])
    return 0


# ---------------------------------------------------------------- experiment

_WORKER_CLIP: VideoClip | None = None


def _init_worker(frames: np.ndarray, fps: float) -> None:
    global _WORKER_CLIP
    _WORKER_CLIP = VideoClip(frames, fps=fps)


def _variant_job(job) -> tuple[float, float, float, bool]:
    kind, level, seed, opts = job
    clip = _WORKER_CLIP
    if level > 0:
        clip, _ = corrupt_clip(clip, CorruptionSpec(kind, level, seed))
    b, _, _ = evaluate(clip, score_config(opts), sampling_config(opts))
    return b.vamp_a, b.vamp_m, b.vamp, b.segmentation_failed


def run_variants(clip: VideoClip, jobs: list, workers: int = 1) -> list:
    """Score each (kind, level, seed, opts) job; results come back in job order."""
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(clip.frames, clip.fps)) as pool:
            return list(pool.map(_variant_job, jobs))
    _init_worker(clip.frames, clip.fps)
    return [_variant_job(j) for j in jobs]


def percent_change(values: list[float]) -> list[float | None]:
    """100 * (v - v0) / v0 per level; None when the baseline is 0."""
    base = values[0]
    if base == 0:
        return [0.0] + [None] * (len(values) - 1)
    return [100.0 * (v - base) / base for v in values]


METRICS = ("vamp_a", "vamp_m", "vamp")


def experiment_tables(kinds, levels, scores: dict) -> tuple[list[list], dict]:
    """Table-layout CSV rows and the per-kind percent-change data.

    ``scores`` maps ``(kind, level)`` to ``(vamp_a, vamp_m, vamp, failed)``;
    level 0 is stored once under ``(None, 0)``.
    """
    all_levels = [0] + [lv for lv in levels if lv > 0]
    header = ["metric"] + [f"{k}_{lv}" for k in kinds for lv in all_levels]
    rows = [header]
    for m, name in enumerate(METRICS):
        row = [name]
        for k in kinds:
            for lv in all_levels:
                row.append(scores[(None, 0) if lv == 0 else (k, lv)][m])
        rows.append(row)
    changes = {}
    for k in kinds:
        changes[k] = {name: percent_change([scores[(None, 0) if lv == 0 else (k, lv)][m]
                                            for lv in all_levels])
                      for m, name in enumerate(METRICS)}
    return rows, changes


def cmd_experiment(args) -> int:
    defaults = {**SCORE_DEFAULTS, "input_dir": None, "kinds": None, "all_corruptions": False,
                "levels": "1-5", "alphas": None}
    opts = resolve(args, defaults)
    if opts["masks"]:
        raise ConfigError("experiment scores corrupted variants and cannot reuse --masks")
    if opts["kinds"] and not opts["all_corruptions"]:
        kinds = [k.strip() for k in (opts["kinds"] if isinstance(opts["kinds"], list)
                                     else str(opts["kinds"]).split(",")) if k.strip()]
        bad = [k for k in kinds if k not in KINDS]
        if bad:
            raise ConfigError(f"unknown kinds {bad}; choose from {KINDS}")
    else:
        kinds = list(KINDS)
    levels = [lv for lv in parse_levels(opts["levels"]) if lv > 0]
    alphas = None if opts["alphas"] is None else _floats(opts["alphas"], name="alphas")
    score_config(opts)  # validate before any work is done
    sampling_config(opts)
    seed = int(opts["seed"])

    clip = _load(opts, args.workers)
    keys = [(None, 0)] + [(k, lv) for k in kinds for lv in levels]
    jobs = [(k, lv, seed, opts) for k, lv in keys]
    results = run_variants(clip, jobs, args.workers)
    scores = dict(zip(keys, results))

    rows, changes = experiment_tables(kinds, levels, scores)
    _write_text(args.out, _csv_text(rows))
    report = {"schema_version": SCHEMA_VERSION, "command": "experiment", "version": __version__,
              "options": _echo(opts), "score_config": score_config(opts).to_dict(),
              "levels": [0] + levels, "percent_change": changes,
              "segmentation_failed": {f"{k or 'original'}_{lv}": r[3] for (k, lv), r in scores.items()}}
    if alphas is not None:
        for a in alphas:
            if not 0.0 <= a <= 1.0:
                raise ConfigError(f"alpha {a} outside [0, 1]")
        alphas = sorted(alphas)
        report["alphas"] = alphas
        report["alpha_by_level"] = {
            k: [[(0.0 if r[3] else a * r[0] + (1 - a) * r[1])
                 for r in (scores[(None, 0) if lv == 0 else (k, lv)] for lv in [0] + levels)]
                for a in alphas]
            for k in kinds}
    changes_path = args.changes or str(Path(args.out).with_suffix(".json"))
    _write_text(changes_path, _dump_json(report))
    if args.plot:
        from .plotting import plot_alpha_heatmaps, plot_percent_change
        stem = Path(args.out).with_suffix("")
        plot_percent_change(changes, [0] + levels, f"{stem}_change.png")
        if alphas is not None:
            plot_alpha_heatmaps(report["alpha_by_level"], alphas, [0] + levels, f"{stem}_alpha.png")
    print(args.out)
    return 0


# ---------------------------------------------------------------- sweep

def cmd_sweep(args) -> int:
    opts = resolve(args, {**SCORE_DEFAULTS, "input_dir": None, "alphas": "0,0.25,0.5,0.75,1"})
    alphas = _floats(opts["alphas"], name="alphas")
    b, _, _ = _score(opts, args.workers)
    table = sensitivity_sweep(b, alphas)
    rows = [["alpha", "vamp", "vamp_a", "vamp_m"]]
    rows += [[a, v, b.vamp_a, b.vamp_m] for a, v in table]
    text = _csv_text(rows)
    if args.out:
        _write_text(args.out, text)
        if args.plot:
            from .plotting import plot_sweep
            plot_sweep(table, str(Path(args.out).with_suffix(".png")))
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------- synth

def cmd_synth(args) -> int:
    clip, centres = moving_square_clip(n_frames=args.frames, width=args.width, height=args.height,
                                       size=args.size, speed=args.speed, tile=args.tile,
                                       seed=args.seed)
    save_frames(clip, args.out_dir)
    if args.masks_out:
        half = (args.size - 1) / 2.0
        masks = []
        for cx, cy in centres:
            x0, y0 = int(round(cx - half)), int(round(cy - half))
            x1 = min(x0 + args.size, clip.width) - 1
            y1 = min(y0 + args.size, clip.height) - 1
            masks.append(RegionMask.rectangle(max(x0, 0), max(y0, 0), x1, y1))
        save_masks([ObjectTrack(1, 0, masks)], len(clip), clip.width, clip.height, args.masks_out)
    print(args.out_dir)
    return 0


# ---------------------------------------------------------------- entry

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vamp", description="Appearance and motion plausibility scores for video clips.")
    parser.add_argument("--version", action="version", version=f"vamp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score one clip")
    _add_scoring_flags(p)
    p.add_argument("--clip-id", default=argparse.SUPPRESS, help="CSV row label (default: directory name)")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("corrupt", help="write corrupted copies of a clip")
    p.add_argument("input_dir")
    p.add_argument("--config")
    p.add_argument("--pattern", default=argparse.SUPPRESS)
    p.add_argument("--kind", choices=KINDS, default=argparse.SUPPRESS)
    p.add_argument("--levels", default=argparse.SUPPRESS, help="e.g. 1-5 or 1,3 (default 1-5)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out-root", default=argparse.SUPPRESS)
    p.add_argument("--per-frame", action="store_true", default=argparse.SUPPRESS,
                   help="black_shapes: redraw the boxes on every frame")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("experiment", help="score a clip under every corruption kind and level")
    _add_scoring_flags(p)
    p.add_argument("--all-corruptions", action="store_true", default=argparse.SUPPRESS)
    p.add_argument("--kinds", default=argparse.SUPPRESS, help="comma-separated corruption kinds")
    p.add_argument("--levels", default=argparse.SUPPRESS)
    p.add_argument("--alphas", default=argparse.SUPPRESS,
                   help="also tabulate VAMP over these alphas per level")
    p.add_argument("--out", required=True, help="table CSV path")
    p.add_argument("--changes", help="percent-change JSON path (default: --out with .json)")
    p.add_argument("--plot", action="store_true", help="also render PNG heatmaps next to --out")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("sweep", help="VAMP as a function of the appearance weight alpha")
    _add_scoring_flags(p)
    p.add_argument("--alphas", default=argparse.SUPPRESS, help="comma-separated alphas in [0, 1]")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--plot", action="store_true", help="also render a PNG next to --out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write the moving-square test clip")
    p.add_argument("out_dir")
    p.add_argument("--frames", type=int, default=32)
    p.add_argument("--width", type=int, default=320)
    p.add_argument("--height", type=int, default=240)
    p.add_argument("--size", type=int, default=48)
    p.add_argument("--speed", type=int, default=2)
    p.add_argument("--tile", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--masks-out", help="also write ground-truth label maps here")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"vamp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MediaIOError, OSError) as exc:
        print(f"vamp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
