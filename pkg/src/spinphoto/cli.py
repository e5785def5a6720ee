"""Command-line surface: reproducible runs that emit every file artifact.

Commands
--------
synth       image.pbm -> sampled waveform CSV + sidecar
lock-sweep  two-pulse response amplitude vs locking-pulse duration
photograph  image.pbm -> spectrum stack + decode report (+ self check)

All physical quantities in config files carry a _hz or _s suffix. A manifest
JSON recording the config hash, seed, mode, and file-format versions is
written for every run, and identical config + seed produce byte-identical
outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from .codec import DECODE_FORMAT_VERSION, decode, sample_slots
from .engine import save_spectrum
from .errors import (
    NoSeparationError,
    NumericalContractError,
    SpinPhotoError,
    ValidationError,
)
from .experiments import (
    Acquisition,
    GATING_PHASE_CYCLE,
    GATING_RECEIVER_WEIGHTS,
    PhotographyConfig,
    lock_duration_sweep,
    run_photography,
    save_stack,
)
from .spins import SpinSystem, random_couplings
from .waveform import bits_to_harmonics, centered_start, load_pbm, save_pbm, save_waveform, synthesize

logger = logging.getLogger("spinphoto")

EXIT_OK = 0
EXIT_SELF_CHECK = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_NO_SEPARATION = 4

FORMAT_VERSIONS = {
    "waveform_csv": 1,
    "spectrum_csv": 1,
    "fid_csv": 1,
    "stack_index": 1,
    "decode_report": DECODE_FORMAT_VERSION,
    "spin_system": 1,
}

PRESETS: dict[str, dict] = {
    # Full-scale synthesis parameters (32x32 image, 20 Hz slots, 1 s pulse
    # of 50*1024 steps). Synthesis only; propagating a cluster big enough to
    # resolve 1024 slots is out of desk range.
    "fullscale-32x32": {
        "command": "synth",
        "spacing_hz": 20.0,
        "amp_one_hz": 1.2,
        "duration_s": 1.0,
        "n_steps": 51200,
    },
    # Desk-scale end-to-end retrieval: 4x4 image on an 8-spin cluster.
    "desk-4x4": {
        "command": "photograph",
        "n_spins": 8,
        "coupling_bound_hz": 792.0,
        "seed": 1,
        "spacing_hz": 40.0,
        "amp1_hz": 1.2,
        "dur1_s": 1.0,
        "steps1": 4096,
        "amp2_hz": 9.0,
        "dur2_s": 0.1,
        "steps2": 2048,
        "t_acq_s": 0.5,
        "dwell_s": 1.0 / 8192,
        "lb_hz": 12.0,
        "zero_fill": 8192,
        "dead_time_s": 0.05,
        "phase_cycle_rad": list(GATING_PHASE_CYCLE),
        "receiver_weights": list(GATING_RECEIVER_WEIGHTS),
        "self_check": True,
    },
    # Locking-duration sweep on the 8-spin reference cluster.
    "lock-sweep": {
        "command": "lock-sweep",
        "n_spins": 8,
        "coupling_bound_hz": 792.0,
        "f1_hz": 0.0,
        "amp1_hz": 1.0,
        "dur1_s": 1.0,
        "steps1": 51200,
        "amp2_hz": 4.0,
        "dur2_max_s": 0.20,
        "dur2_points": 21,
        "steps2": 40960,
        "t_acq_s": 0.5,
        "dwell_s": 1.0 / 8192,
        "lb_hz": 12.0,
        "zero_fill": 8192,
        "dead_time_s": 0.0,
    },
}


def _canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.preset:
        if args.preset not in PRESETS:
            raise ValidationError(
                f"unknown preset {args.preset!r}; available: {sorted(PRESETS)}"
            )
        cfg.update(PRESETS[args.preset])
    if args.config:
        try:
            user = json.loads(Path(args.config).read_text())
        except FileNotFoundError as exc:
            raise ValidationError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
        cfg.update(user)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.mode:
        cfg["mode"] = args.mode
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    return cfg


def _require(cfg: dict, keys: list[str], command: str) -> None:
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ValidationError(f"{command}: config is missing keys {missing}")


def _build_system(cfg: dict) -> SpinSystem:
    if "couplings_hz" in cfg:
        return SpinSystem(
            n=int(cfg["n_spins"]),
            couplings=cfg["couplings_hz"],
            offsets=cfg.get("offsets_hz"),
        )
    _require(cfg, ["n_spins", "coupling_bound_hz", "seed"], "spin system")
    couplings = random_couplings(
        int(cfg["n_spins"]), float(cfg["coupling_bound_hz"]), int(cfg["seed"])
    )
    return SpinSystem(n=int(cfg["n_spins"]), couplings=couplings, offsets=cfg.get("offsets_hz"))


def _acquisition(cfg: dict) -> Acquisition:
    _require(cfg, ["t_acq_s", "dwell_s", "lb_hz", "zero_fill"], "acquisition")
    return Acquisition(
        t_acq=float(cfg["t_acq_s"]),
        dwell=float(cfg["dwell_s"]),
        lb=float(cfg["lb_hz"]),
        zero_fill=int(cfg["zero_fill"]),
        dead_time=float(cfg.get("dead_time_s", 0.0)),
    )


def _write_manifest(out_dir: Path, command: str, cfg: dict) -> None:
    manifest = {
        "command": command,
        "config_sha256": hashlib.sha256(_canonical_json(cfg).encode()).hexdigest(),
        "config": cfg,
        "seed": cfg.get("seed"),
        "mode": cfg.get("mode", "split"),
        "format_versions": FORMAT_VERSIONS,
        "package_version": __version__,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def cmd_synth(args) -> int:
    cfg = _load_config(args)
    _require(cfg, ["spacing_hz", "amp_one_hz", "duration_s", "n_steps"], "synth")
    img = load_pbm(args.image)
    f_start = cfg.get("f_start_hz")
    if f_start is None:
        f_start = centered_start(img.rows * img.cols, float(cfg["spacing_hz"]))
    hs = bits_to_harmonics(img, f_start, float(cfg["spacing_hz"]), float(cfg["amp_one_hz"]))
    wf = synthesize(hs, float(cfg["duration_s"]), int(cfg["n_steps"]))
    if not np.any(wf.steps):
        logger.warning("image has no set bits; synthesized waveform is identically zero")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_waveform(wf, out_dir / "waveform.csv")
    _write_manifest(out_dir, "synth", cfg)
    print(f"synth: {wf.n_steps} steps over {wf.duration:g} s -> {out_dir / 'waveform.csv'}")
    return EXIT_OK


def cmd_lock_sweep(args) -> int:
    cfg = _load_config(args)
    _require(
        cfg,
        ["seed", "f1_hz", "amp1_hz", "dur1_s", "steps1", "amp2_hz",
         "dur2_max_s", "dur2_points", "steps2"],
        "lock-sweep",
    )
    sys = _build_system(cfg)
    acq = _acquisition(cfg)
    mode = cfg.get("mode", "split")
    result = lock_duration_sweep(
        sys,
        f1=float(cfg["f1_hz"]),
        amp1=float(cfg["amp1_hz"]),
        dur1=float(cfg["dur1_s"]),
        steps1=int(cfg["steps1"]),
        amp2=float(cfg["amp2_hz"]),
        dur2_max=float(cfg["dur2_max_s"]),
        dur2_points=int(cfg["dur2_points"]),
        steps2=int(cfg["steps2"]),
        acq=acq,
        mode=mode,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["duration_s,signed_amplitude"]
    lines += [
        f"{d:.17g},{a:.17g}" for d, a in zip(result.durations, result.amplitudes)
    ]
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    for idx, spec in enumerate(result.spectra):
        save_spectrum(
            spec, out_dir / f"spectrum_{idx:03d}.csv",
            dwell=acq.dwell, lb=acq.lb, zero_fill=acq.zero_fill,
        )
    sys.save(out_dir / "system.json", seed=int(cfg["seed"]))
    _write_manifest(out_dir, "lock-sweep", cfg)
    print(f"lock-sweep: {len(result.durations)} durations -> {out_dir / 'sweep.csv'}")
    return EXIT_OK


def cmd_photograph(args) -> int:
    cfg = _load_config(args)
    _require(
        cfg,
        ["seed", "spacing_hz", "amp1_hz", "dur1_s", "steps1",
         "amp2_hz", "dur2_s", "steps2"],
        "photograph",
    )
    img = load_pbm(args.image)
    sys = _build_system(cfg)
    acq = _acquisition(cfg)
    pcfg = PhotographyConfig(
        spacing=float(cfg["spacing_hz"]),
        amp1=float(cfg["amp1_hz"]),
        dur1=float(cfg["dur1_s"]),
        steps1=int(cfg["steps1"]),
        amp2=float(cfg["amp2_hz"]),
        dur2=float(cfg["dur2_s"]),
        steps2=int(cfg["steps2"]),
        acquisition=acq,
        f_start=cfg.get("f_start_hz"),
        phase_cycle=tuple(cfg.get("phase_cycle_rad", GATING_PHASE_CYCLE)),
        receiver_weights=(
            tuple(cfg["receiver_weights"]) if cfg.get("receiver_weights") else None
        ),
        mode=cfg.get("mode", "split"),
        jobs=cfg.get("jobs"),
    )
    stack = run_photography(img, sys, pcfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_stack(stack, out_dir / "stack", acq)
    table = sample_slots(stack, pcfg.start_frequency(img), pcfg.spacing, img.rows, img.cols)
    self_check = bool(cfg.get("self_check", True))
    report = decode(table, reference=img if self_check else None)
    report.save(out_dir / "decode.json")
    save_pbm(report.recovered, out_dir / "recovered.pbm")
    sys.save(out_dir / "system.json", seed=int(cfg["seed"]))
    _write_manifest(out_dir, "photograph", cfg)
    if self_check:
        print(
            f"photograph: bit_errors={report.bit_errors} margin={report.margin:.3f} "
            f"-> {out_dir / 'decode.json'}"
        )
        if report.bit_errors:
            return EXIT_SELF_CHECK
    else:
        print(f"photograph: decoded {img.rows}x{img.cols} image -> {out_dir / 'decode.json'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinphoto",
        description="Store a bit image in a simulated spin cluster and read it back.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_image: bool):
        if needs_image:
            p.add_argument("image", help="input image (plain PBM, magic P1)")
        p.add_argument("--config", help="JSON config path", default=None)
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="coupling-table seed")
        p.add_argument("--mode", choices=["exact", "split"], default=None)
        p.add_argument("--jobs", type=int, default=None,
                       help="max concurrent rows/branches (default: cpu count)")
        p.add_argument("--preset", default=None, help=f"one of {sorted(PRESETS)}")

    p_synth = sub.add_parser("synth", help="image -> multi-harmonic waveform files")
    common(p_synth, needs_image=True)
    p_synth.set_defaults(func=cmd_synth)

    p_sweep = sub.add_parser("lock-sweep",
                             help="response amplitude vs locking-pulse duration")
    common(p_sweep, needs_image=False)
    p_sweep.set_defaults(func=cmd_lock_sweep)

    p_photo = sub.add_parser("photograph",
                             help="store an image and retrieve it as spectra")
    common(p_photo, needs_image=True)
    p_photo.set_defaults(func=cmd_photograph)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("SPINPHOTO_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_VALIDATION
    except NumericalContractError as exc:
        print(f"numerical contract violated: {exc}", file=_sys.stderr)
        return EXIT_NUMERICAL
    except NoSeparationError as exc:
        print(f"decode failed: {exc}", file=_sys.stderr)
        return EXIT_NO_SEPARATION
    except SpinPhotoError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    _sys.exit(main())
