"""Local HTTP service hosting interactive scene sessions.

A session holds a block program revision history plus per-element building
programs. Edits target an explicit base revision: the first writer on a
revision wins, later writers get 409 and must refresh. Scene bytes for a
revision are a pure function of (program at that revision, config, seed),
built lazily and cached.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .editing import (
    EditCommand,
    EditError,
    UnknownTarget,
    apply_edit,
    parse_edit_command,
)
from .executor import ExecutorConfig, assemble_scene, scene_to_glb_bytes
from .metrics import report as build_report
from .programs import (
    BlockProgram,
    BuildingProgram,
    ProgramError,
    block_program_to_jsonable,
    building_program_to_jsonable,
    parse_block_program,
    parse_building_program,
    serialize,
)
from .scoring import DEFAULT_BAND, DensityBand, score_spatial


@dataclass
class Revision:
    number: int
    block: BlockProgram
    buildings: dict[str, BuildingProgram]


@dataclass
class SceneSession:
    session_id: str
    revisions: list[Revision]
    config: ExecutorConfig
    prompt: str = ""
    lock: threading.Lock = field(default_factory=threading.Lock)
    _scene_cache: dict[int, bytes] = field(default_factory=dict)

    @property
    def current(self) -> Revision:
        return self.revisions[-1]

    def revision(self, number: int) -> Revision:
        for rev in self.revisions:
            if rev.number == number:
                return rev
        raise KeyError(number)

    def scene_bytes(self, number: int) -> bytes:
        if number not in self._scene_cache:
            rev = self.revision(number)
            scene = assemble_scene(rev.block, rev.buildings, self.config)
            self._scene_cache[number] = scene_to_glb_bytes(scene)
        return self._scene_cache[number]


class CreateSessionRequest(BaseModel):
    block_program: object
    buildings: Optional[dict[str, object]] = None
    prompt: str = ""
    seed: Optional[int] = None
    floor_height: Optional[float] = None


class EditRequest(BaseModel):
    base_revision: int
    command: Optional[str] = None
    verb: Optional[str] = None
    target: Optional[str] = None
    arguments: Optional[dict] = None


def _program_text(value: object) -> str:
    return value if isinstance(value, str) else json.dumps(value)


def _revision_payload(session: SceneSession, rev: Revision) -> dict:
    return {
        "session_id": session.session_id,
        "revision": rev.number,
        "program": block_program_to_jsonable(rev.block),
        "buildings": {eid: building_program_to_jsonable(p)
                      for eid, p in sorted(rev.buildings.items())},
    }


def create_app(static_dir: Optional[str] = None,
               config: ExecutorConfig = ExecutorConfig(),
               snapshot_path: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="cityforge", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    sessions: dict[str, SceneSession] = {}
    store_lock = threading.Lock()
    app.state.sessions = sessions

    def get_session(session_id: str) -> SceneSession:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown session {session_id!r}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(request: CreateSessionRequest) -> dict:
        diagnostics: list = []
        try:
            block = parse_block_program(_program_text(request.block_program),
                                        diagnostics)
            buildings = {
                eid: parse_building_program(_program_text(value))
                for eid, value in sorted((request.buildings or {}).items())}
        except ProgramError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        for eid in buildings:
            try:
                block.element_by_id(eid)
            except KeyError:
                raise HTTPException(
                    status_code=400,
                    detail=f"building program for unknown element {eid!r}")
        session_config = config
        if request.seed is not None:
            session_config = session_config.replace(seed=request.seed)
        if request.floor_height is not None:
            if request.floor_height <= 0:
                raise HTTPException(status_code=400,
                                    detail="floor_height must be positive")
            session_config = session_config.replace(
                floor_height=request.floor_height)
        session = SceneSession(
            session_id=uuid.uuid4().hex[:12],
            revisions=[Revision(0, block, buildings)],
            config=session_config,
            prompt=request.prompt)
        with store_lock:
            sessions[session.session_id] = session
        payload = _revision_payload(session, session.current)
        payload["diagnostics"] = [{"path": p, "message": m}
                                  for p, m in diagnostics]
        return payload

    @app.get("/sessions")
    def list_sessions() -> dict:
        with store_lock:
            return {"sessions": [
                {"session_id": s.session_id, "revision": s.current.number,
                 "elements": len(s.current.block.elements)}
                for s in sessions.values()]}

    @app.get("/sessions/{session_id}/program")
    def get_program(session_id: str, revision: Optional[int] = None) -> dict:
        session = get_session(session_id)
        rev = session.current if revision is None else _find(session, revision)
        return _revision_payload(session, rev)

    def _find(session: SceneSession, number: int) -> Revision:
        try:
            return session.revision(number)
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"unknown revision {number}")

    @app.get("/sessions/{session_id}/scene.glb")
    def get_scene(session_id: str, revision: Optional[int] = None) -> Response:
        session = get_session(session_id)
        rev = session.current if revision is None else _find(session, revision)
        blob = session.scene_bytes(rev.number)
        return Response(content=blob, media_type="model/gltf-binary",
                        headers={"X-Scene-Revision": str(rev.number)})

    @app.get("/sessions/{session_id}/score")
    def get_score(session_id: str, prompt: Optional[str] = None,
                  d_min: float = DEFAULT_BAND.d_min,
                  d_max: float = DEFAULT_BAND.d_max) -> dict:
        session = get_session(session_id)
        try:
            band = DensityBand(d_min, d_max)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        score = score_spatial(session.current.block,
                              prompt=prompt if prompt is not None
                              else session.prompt,
                              band=band)
        payload = score.to_jsonable()
        payload["revision"] = session.current.number
        return payload

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str) -> dict:
        session = get_session(session_id)
        rev = session.current
        scene = assemble_scene(rev.block, rev.buildings, session.config)
        quality = build_report(
            [(session.session_id, serialize(rev.block))],
            {session.session_id: scene})
        payload = quality.to_jsonable()
        payload["revision"] = rev.number
        return payload

    @app.post("/sessions/{session_id}/edits")
    def post_edit(session_id: str, request: EditRequest) -> dict:
        session = get_session(session_id)
        try:
            if request.command is not None:
                command = parse_edit_command(request.command)
            elif request.verb is not None and request.target is not None:
                command = EditCommand(target=request.target, verb=request.verb,
                                      arguments=request.arguments or {})
            else:
                raise HTTPException(
                    status_code=400,
                    detail="provide either 'command' or 'verb'+'target'")
        except EditError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

        with session.lock:
            current = session.current
            if request.base_revision != current.number:
                raise HTTPException(
                    status_code=409,
                    detail={"message": "revision conflict",
                            "current_revision": current.number})
            try:
                new_rev, diff_payload, warnings = _apply_session_edit(
                    current, command)
            except (EditError, ProgramError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            session.revisions.append(new_rev)
        payload = _revision_payload(session, new_rev)
        payload["base_revision"] = current.number
        payload["diff"] = diff_payload
        payload["warnings"] = warnings
        return payload

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="studio")

    if snapshot_path is not None:
        @app.on_event("shutdown")
        def snapshot() -> None:
            dump = {
                sid: {
                    "prompt": s.prompt,
                    "seed": s.config.seed,
                    "floor_height": s.config.floor_height,
                    "revisions": [
                        {"number": r.number,
                         "block": json.loads(serialize(r.block)),
                         "buildings": {
                             eid: json.loads(serialize(p))
                             for eid, p in sorted(r.buildings.items())}}
                        for r in s.revisions],
                }
                for sid, s in sorted(sessions.items())}
            Path(snapshot_path).write_text(json.dumps(dump, indent=2),
                                           encoding="utf-8")

    return app


def _apply_session_edit(current: Revision,
                        command: EditCommand) -> tuple[Revision, dict, list[str]]:
    """Route a command to the block program or an element's building program."""
    block = current.block
    buildings = dict(current.buildings)
    diff_payload: dict = {}
    warnings: list[str] = []

    if command.verb == "set_component":
        eid = command.target
        try:
            block.element_by_id(eid)
        except KeyError:
            raise UnknownTarget(f"no element with id {eid!r}")
        program = buildings.get(eid, BuildingProgram(components=()))
        result = apply_edit(program, command)
        buildings[eid] = result.program_after
        diff_payload = {"buildings": {eid: _diff_jsonable(result.diff)}}
        warnings = result.warnings
    elif command.verb == "set_style":
        result = apply_edit(block, command)
        block = result.program_after
        diff_payload = {"block": _diff_jsonable(result.diff)}
        warnings = list(result.warnings)
        # Restyle the affected building programs too, so window/door/roof
        # descriptions follow the block-level style change.
        if command.target == "block":
            styled = sorted(buildings)
        else:
            styled = [command.target] if command.target in buildings else []
        building_diffs = {}
        for eid in styled:
            sub = apply_edit(buildings[eid], command)
            if sub.diff:
                buildings[eid] = sub.program_after
                building_diffs[eid] = _diff_jsonable(sub.diff)
            warnings.extend(sub.warnings)
        if building_diffs:
            diff_payload["buildings"] = building_diffs
    else:
        result = apply_edit(block, command)
        block = result.program_after
        diff_payload = {"block": _diff_jsonable(result.diff)}
        warnings = list(result.warnings)
        if command.verb == "remove_element" and command.target in buildings:
            del buildings[command.target]
            warnings.append(
                f"dropped building program of removed element {command.target!r}")

    return Revision(current.number + 1, block, buildings), diff_payload, warnings


def _diff_jsonable(diff) -> list[dict]:
    return [{"path": path, "before": before, "after": after}
            for path, before, after in diff]
