"""Command-line entry points.

Exit codes: 0 success, 2 validation error, 3 decode error, 4 analysis
mismatch (unmatched or ambiguous sensors).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import voxio
from .analysis import ScenarioResult, report, sensor_targets
from .errors import AmbiguityError, DecodeError, DomainError, RangeAxisError, ValidationError
from .imaging import build_image
from .isolines import cluster_regions, extract_isolines
from .render import render
from .scenario_file import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DECODE = 3
EXIT_MISMATCH = 4

STAGES = ("simulate", "isolines", "analyze", "render")


def _pol(value: str) -> str:
    return value.upper()


def cmd_simulate(scenario: str | Path, seed: int, out: str | Path) -> int:
    sc = load_scenario(scenario)
    image = build_image(sc, seed=seed)
    voxio.write_image(image, out)
    print(f"grid (theta, phi, bins) = {image.grid.shape}")
    print(f"global max VV = {float(image.vv.max()):.2f} dB, VH = {float(image.vh.max()):.2f} dB")
    return EXIT_OK


def cmd_isolines(path: str | Path, pol: str, threshold: float, levels: Sequence[float] = (),
                 out_dir: str | Path | None = None) -> tuple[Path, Path]:
    image = voxio.read_image(path)
    isoset = extract_isolines(image, pol, levels, threshold)
    regions = cluster_regions(isoset, image)
    src = Path(path)
    out_dir = Path(out_dir) if out_dir is not None else src.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    iso_path = out_dir / f"{src.stem}_{pol.lower()}_isolines.csv"
    reg_path = out_dir / f"{src.stem}_{pol.lower()}_regions.csv"
    iso_path.write_text(voxio.isolines_csv(isoset))
    reg_path.write_text(voxio.regions_csv(regions))
    for level, count in isoset.count_by_level().items():
        print(f"level {level:+.1f} dB: {count} isolines")
    print(f"{len(regions)} regions")
    return iso_path, reg_path


def cmd_report(on: str | Path, off: str | Path, scenario: str | Path,
               csv_out: str | Path | None = None, threshold: float = -10.0) -> int:
    sc = load_scenario(scenario)
    targets = sensor_targets(sc)
    rep = report(ScenarioResult(voxio.read_image(on), targets),
                 ScenarioResult(voxio.read_image(off), targets), min_threshold=threshold)
    if csv_out is not None:
        Path(csv_out).write_text(rep.to_csv())
    sys.stdout.write(rep.to_text())
    if rep.unmatched:
        print(f"unmatched sensors: {', '.join(rep.unmatched)}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_render(path: str | Path, out: str | Path, range_bin: int | None = None,
               overlay: str | Path | None = None, pol: str = "VH", scale: int = 4) -> int:
    image = voxio.read_image(path)
    records = voxio.read_isolines_csv(Path(overlay).read_text()) if overlay else ()
    render(image, out, pol, range_bin, records, scale)
    return EXIT_OK


@dataclass
class PipelineRun:
    """Simulate a pair of scenarios and push them through the later stages.

    ``scenario_paths`` is (ON scenario, OFF scenario); a single path is
    enough when ``analyze`` is not requested.
    """

    scenario_paths: tuple[Path, ...]
    output_dir: Path
    seed: int = 0
    stages: tuple[str, ...] = STAGES
    threshold: float = -10.0
    outputs: dict[str, Path] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.scenario_paths = tuple(Path(p) for p in self.scenario_paths)
        self.output_dir = Path(self.output_dir)
        unknown = set(self.stages) - set(STAGES)
        if unknown:
            raise ValidationError(f"unknown stages {sorted(unknown)}")
        order = [STAGES.index(s) for s in self.stages]
        if order != sorted(order):
            raise ValidationError(f"stages out of order: {list(self.stages)}")
        if "simulate" not in self.stages and self.stages:
            raise ValidationError("later stages need the simulate stage")
        if "analyze" in self.stages and len(self.scenario_paths) != 2:
            raise ValidationError("analyze needs an ON and an OFF scenario")

    def run(self) -> int:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        names = ("on", "off") if len(self.scenario_paths) == 2 else ("scene",)
        code = EXIT_OK
        for name, path in zip(names, self.scenario_paths):
            vox = self.output_dir / f"{name}.isc"
            cmd_simulate(path, self.seed, vox)
            self.outputs[f"{name}.isc"] = vox
            if "isolines" in self.stages:
                for pol in ("VV", "VH"):
                    iso, reg = cmd_isolines(vox, pol, self.threshold, out_dir=self.output_dir)
                    self.outputs[iso.name] = iso
                    self.outputs[reg.name] = reg
            if "render" in self.stages:
                for pol in ("VV", "VH"):
                    png = self.output_dir / f"{name}_{pol.lower()}_maxproj.png"
                    overlay = self.outputs.get(f"{name}_{pol.lower()}_isolines.csv")
                    cmd_render(vox, png, None, overlay, pol)
                    self.outputs[png.name] = png
        if "analyze" in self.stages:
            csv_path = self.output_dir / "report.csv"
            code = cmd_report(self.outputs["on.isc"], self.outputs["off.isc"],
                              self.scenario_paths[0], csv_path, self.threshold)
            self.outputs[csv_path.name] = csv_path
        return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isoscan", description="Polarimetric FM-CW scan simulator and isoline analysis")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="scan a scenario into an ISC1 voxel file")
    s.add_argument("--scenario", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    s = sub.add_parser("isolines", help="extract isolines and regions as CSV")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--pol", choices=["vv", "vh"], required=True)
    s.add_argument("--threshold", type=float, default=-10.0)
    s.add_argument("--levels", type=float, nargs="*", default=[])
    s.add_argument("--out-dir")

    s = sub.add_parser("report", help="per-sensor dynamic range report")
    s.add_argument("--on", required=True)
    s.add_argument("--off", required=True)
    s.add_argument("--scenario", required=True)
    s.add_argument("--csv")
    s.add_argument("--threshold", type=float, default=-10.0)

    s = sub.add_parser("render", help="PNG of a range slice or max projection")
    s.add_argument("--in", dest="inp", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--slice", type=int, dest="range_bin")
    g.add_argument("--maxproj", action="store_true")
    s.add_argument("--overlay")
    s.add_argument("--pol", choices=["vv", "vh"], default="vh")
    s.add_argument("--scale", type=int, default=4)
    s.add_argument("--out", required=True)

    s = sub.add_parser("run", help="simulate -> isolines -> analyze -> render")
    s.add_argument("--on", required=True, help="scenario with sensors ON")
    s.add_argument("--off", help="scenario with sensors OFF")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--stages", default=",".join(STAGES))
    s.add_argument("--threshold", type=float, default=-10.0)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.scenario, args.seed, args.out)
        if args.command == "isolines":
            cmd_isolines(args.inp, _pol(args.pol), args.threshold, args.levels, args.out_dir)
            return EXIT_OK
        if args.command == "report":
            return cmd_report(args.on, args.off, args.scenario, args.csv, args.threshold)
        if args.command == "render":
            return cmd_render(args.inp, args.out, args.range_bin, args.overlay, _pol(args.pol), args.scale)
        if args.command == "run":
            paths = [args.on] + ([args.off] if args.off else [])
            stages = tuple(s for s in args.stages.split(",") if s)
            return PipelineRun(paths, args.out_dir, args.seed, stages, args.threshold).run()
    except DecodeError as exc:
        print(f"decode error: {exc}", file=sys.stderr)
        return EXIT_DECODE
    except AmbiguityError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (ScenarioError, ValidationError, RangeAxisError, DomainError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
