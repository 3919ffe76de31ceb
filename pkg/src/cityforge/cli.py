"""Command-line entry points.

Exit codes are a stable contract: 0 success, 1 validation failure,
2 usage error, 3 I/O or external-service error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from .editing import EditError, apply_edit, parse_edit_command
from .executor import (
    ExecutorConfig,
    assemble_scene,
    config_from_file,
    export_scene,
)
from .metrics import report as build_report
from .metrics import write_report
from .programs import (
    ProgramError,
    check_format,
    parse_block_program,
    parse_building_program,
    serialize,
)
from .scoring import (
    DensityBand,
    ExternalScorerUnavailable,
    ExternalSemanticScorer,
    StubSemanticScorer,
    score_spatial,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_IO)


def _load_config(config_path: Optional[str], **overrides) -> ExecutorConfig:
    try:
        if config_path:
            return config_from_file(config_path, **overrides)
        return ExecutorConfig(**overrides)
    except (OSError, ValueError) as exc:
        click.echo(f"bad config: {exc}", err=True)
        sys.exit(EXIT_USAGE)


@click.group()
@click.version_option(package_name="cityforge")
def main() -> None:
    """Block/Building program tooling: validate, score, execute, edit, serve."""


@main.command()
@click.argument("path", type=click.Path())
@click.option("--kind", type=click.Choice(["block", "building"]),
              default="block", show_default=True)
def validate(path: str, kind: str) -> None:
    """Check a program file; exit 0 only when the format verdict passes."""
    verdict = check_format(_read_bytes(path), kind=kind)
    click.echo(json.dumps(verdict.to_jsonable(), indent=2))
    for diag_path, message in verdict.diagnostics:
        click.echo(f"{diag_path}: {message}", err=True)
    sys.exit(EXIT_OK if verdict.overall else EXIT_VALIDATION)


@main.command()
@click.argument("block_path", type=click.Path())
@click.option("--prompt", default="", help="Text the layout should match.")
@click.option("--scorer", default="stub", show_default=True,
              help="'stub' or the URL of an external semantic scorer.")
@click.option("--band", default="0.5,0.8", show_default=True,
              help="Target density band as 'dmin,dmax'.")
@click.option("--allow-stub-fallback", is_flag=True,
              help="Fall back to the stub when the external scorer is down.")
@click.option("--resolution", default=512, show_default=True)
def score(block_path: str, prompt: str, scorer: str, band: str,
          allow_stub_fallback: bool, resolution: int) -> None:
    """Compute the spatial alignment reward for a block program."""
    try:
        d_min, d_max = (float(v) for v in band.split(","))
        density_band = DensityBand(d_min, d_max)
    except ValueError as exc:
        click.echo(f"bad --band: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    try:
        program = parse_block_program(_read_bytes(block_path))
    except ProgramError as exc:
        click.echo(f"invalid block program: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    if scorer == "stub":
        judge = StubSemanticScorer()
    else:
        judge = ExternalSemanticScorer(scorer,
                                       allow_stub_fallback=allow_stub_fallback)
    try:
        result = score_spatial(program, prompt=prompt, scorer=judge,
                               band=density_band, resolution=resolution)
    except ExternalScorerUnavailable as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_IO)
    click.echo(json.dumps(result.to_jsonable(), indent=2))


@main.command()
@click.argument("block_path", type=click.Path())
@click.option("--buildings", "buildings_dir", type=click.Path(),
              help="Directory of <element_id>.json building programs.")
@click.option("--format", "fmt", type=click.Choice(["obj", "glb"]),
              default="glb", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("-o", "--output", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path())
@click.option("--floor-height", type=float, default=None,
              help="Override floor height in meters.")
def execute(block_path: str, buildings_dir: Optional[str], fmt: str,
            seed: int, output: str, config_path: Optional[str],
            floor_height: Optional[float]) -> None:
    """Execute programs into a 3D scene and export it."""
    overrides: dict = {"seed": seed}
    if floor_height is not None:
        overrides["floor_height"] = floor_height
    config = _load_config(config_path, **overrides)
    try:
        program = parse_block_program(_read_bytes(block_path))
    except ProgramError as exc:
        click.echo(f"invalid block program: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    buildings = {}
    if buildings_dir:
        for path in sorted(Path(buildings_dir).glob("*.json")):
            try:
                buildings[path.stem] = parse_building_program(path.read_bytes())
            except ProgramError as exc:
                click.echo(f"invalid building program {path.name}: {exc}",
                           err=True)
                sys.exit(EXIT_VALIDATION)
    scene = assemble_scene(program, buildings, config)
    for warning in scene.warnings:
        click.echo(f"warning: {warning}", err=True)
    try:
        written = export_scene(scene, fmt, output)
    except OSError as exc:
        click.echo(f"cannot write {output}: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(str(written))


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@click.option("-o", "--output-dir", default=".", show_default=True,
              type=click.Path())
@click.option("--with-scenes", is_flag=True,
              help="Also execute each valid program to measure ROS/OTR.")
@click.option("--edge-set", type=click.Choice(["shells", "full"]),
              default="shells", show_default=True)
@click.option("--config", "config_path", type=click.Path())
def metrics(inputs: tuple[str, ...], output_dir: str, with_scenes: bool,
            edge_set: str, config_path: Optional[str]) -> None:
    """Compute quality metrics over program files; write report.json/csv."""
    config = _load_config(config_path)
    programs = [(Path(p).stem, _read_bytes(p)) for p in inputs]
    scenes = {}
    if with_scenes:
        for item_id, text in programs:
            try:
                scenes[item_id] = assemble_scene(
                    parse_block_program(text), {}, config)
            except ProgramError:
                continue
    quality = build_report(programs, scenes, edge_set=edge_set)
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_report(quality, out / "report.json", out / "report.csv")
    except OSError as exc:
        click.echo(f"cannot write report: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(json.dumps(quality.to_jsonable()["summary"], indent=2))


@main.command()
@click.argument("program_path", type=click.Path())
@click.argument("command")
@click.option("--kind", type=click.Choice(["block", "building"]),
              default="block", show_default=True)
@click.option("-o", "--output", type=click.Path(),
              help="Write the edited program here (default: stdout).")
def edit(program_path: str, command: str, kind: str,
         output: Optional[str]) -> None:
    """Apply one edit command to a program file."""
    data = _read_bytes(program_path)
    try:
        program = (parse_block_program(data) if kind == "block"
                   else parse_building_program(data))
    except ProgramError as exc:
        click.echo(f"invalid program: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    try:
        result = apply_edit(program, parse_edit_command(command))
    except EditError as exc:
        click.echo(f"edit failed: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    text = serialize(result.program_after)
    summary = {
        "diff": [{"path": p, "before": b, "after": a}
                 for p, b, a in result.diff],
        "warnings": result.warnings,
    }
    if output:
        try:
            Path(output).write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            click.echo(f"cannot write {output}: {exc}", err=True)
            sys.exit(EXIT_IO)
        click.echo(json.dumps(summary, indent=2))
    else:
        click.echo(text)
        click.echo(json.dumps(summary, indent=2), err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8450, show_default=True)
@click.option("--static", "static_dir", type=click.Path(),
              help="Directory of studio UI assets to serve at /.")
@click.option("--config", "config_path", type=click.Path())
@click.option("--snapshot", "snapshot_path", type=click.Path(),
              help="Write session snapshots here on shutdown.")
def serve(host: str, port: int, static_dir: Optional[str],
          config_path: Optional[str], snapshot_path: Optional[str]) -> None:
    """Run the interactive session service."""
    import uvicorn

    from .service import create_app

    config = _load_config(config_path)
    app = create_app(static_dir=static_dir, config=config,
                     snapshot_path=snapshot_path)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
