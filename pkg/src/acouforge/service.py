"""HTTP facade: designs, spectra, STL export, optimize jobs, modal models.

Bodies are hand-validated JSON; errors always come back as
{"code", "message", "violations": [...]} with 400 for malformed documents,
404 for unknown ids, 409 for a job result requested too early, and 422 for
domain validation failures. Designs and models persist content-addressed in
the store directory; jobs are in-memory and lost on restart (reproducible
by seed). At most one optimize job runs at a time so timing stays stable.
"""

import functools
import json
import os
import queue
import re
import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .core import FrequencyGrid, Spectrum
from .design import (
    design_transmission_loss,
    document_to_design,
    parse,
    serialize,
    validate,
)
from .errors import AcouforgeError, ParseError, ValidationFailed
from .formats import spectrum_to_csv, wav_bytes
from .modal import (
    EnvelopeSpline,
    Impact,
    apply_envelope,
    build_lattice,
    document_to_model,
    eigenmodes,
    material_from_document,
    parse_model,
    retune,
    serialize_model,
    synthesize,
)
from .optimize import (
    CurveTarget,
    NotchTargets,
    PitchTargets,
    SearchConfig,
    search,
)
from .store import DocumentStore
from .voxel import document_to_grid, export_stl, voxelize


# ---------------------------------------------------------------------------
# Error envelope


def _code_of(exc: Exception) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "_", type(exc).__name__).upper()


def _error(status: int, code: str, message: str, violations=()):
    return JSONResponse(status_code=status, content={
        "code": code,
        "message": message,
        "violations": [v.as_dict() if hasattr(v, "as_dict") else dict(v)
                       for v in violations],
    })


class NotFound(Exception):
    def __init__(self, what: str):
        super().__init__(f"no such {what}")


class JobNotDone(Exception):
    pass


def guarded(fn):
    """Translate domain exceptions into the error envelope."""

    @functools.wraps(fn)
    async def wrapper(*args, **kwargs):
        try:
            return await fn(*args, **kwargs)
        except NotFound as exc:
            return _error(404, "NOT_FOUND", str(exc))
        except JobNotDone as exc:
            return _error(409, "JOB_NOT_DONE", str(exc))
        except ParseError as exc:
            return _error(400, "PARSE_ERROR", str(exc))
        except ValidationFailed as exc:
            return _error(422, "VALIDATION_FAILED", str(exc), exc.violations)
        except AcouforgeError as exc:
            return _error(422, _code_of(exc), str(exc))
    return wrapper


async def _json_body(request: Request):
    try:
        return json.loads(await request.body())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None


def _body_number(doc: dict, key: str, default=None) -> float:
    if key not in doc:
        if default is None:
            raise ParseError(f"missing required field {key!r}", path=f"$.{key}")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", path=f"$.{key}")
    return float(value)


def _grid_from_document(doc: dict) -> FrequencyGrid:
    spacing = doc.get("spacing", "linear")
    if not isinstance(spacing, str):
        raise ParseError("spacing must be a string", path="$.spacing")
    return FrequencyGrid(
        _body_number(doc, "f_min"),
        _body_number(doc, "f_max"),
        int(_body_number(doc, "count")),
        spacing,
    )


def _target_from_document(doc) -> object:
    if not isinstance(doc, dict):
        raise ParseError("expected a target object", path="$.target")
    kind = doc.get("kind")
    if kind == "pitches":
        midi = doc.get("midi")
        if (not isinstance(midi, list) or not midi
                or any(isinstance(n, bool) or not isinstance(n, int)
                       for n in midi)):
            raise ParseError("midi must be a nonempty integer array",
                             path="$.target.midi")
        return PitchTargets.from_midi(
            midi, _body_number(doc, "tolerance_cents", 10.0))
    if kind == "notches":
        freqs = doc.get("frequencies_hz")
        if not isinstance(freqs, list) or not freqs:
            raise ParseError("frequencies_hz must be a nonempty array",
                             path="$.target.frequencies_hz")
        return NotchTargets(tuple(float(f) for f in freqs),
                            _body_number(doc, "min_depth_db", 10.0))
    if kind == "curve":
        freqs = doc.get("frequencies_hz")
        values = doc.get("values_db")
        weights = doc.get("weights")
        if not isinstance(freqs, list) or not isinstance(values, list):
            raise ParseError("curve needs frequencies_hz and values_db "
                             "arrays", path="$.target")
        try:
            spectrum = Spectrum(np.asarray(freqs, dtype=float),
                                np.asarray(values, dtype=float),
                                "transmission_loss_dB")
            weight_array = (None if weights is None
                            else np.asarray(weights, dtype=float))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad curve target: {exc}",
                             path="$.target") from None
        return CurveTarget(spectrum, weight_array,
                           _body_number(doc, "rms_tolerance_db", 1.0))
    raise ParseError("target kind must be pitches, notches or curve",
                     path="$.target.kind")


def _config_from_document(doc) -> SearchConfig:
    if not isinstance(doc, dict):
        raise ParseError("expected a config object", path="$.config")
    return SearchConfig(
        grid=_grid_from_document(doc),
        seed=int(_body_number(doc, "seed", 0.0)),
        max_iterations=int(_body_number(doc, "max_iterations", 2000.0)),
        initial_temperature=_body_number(doc, "initial_temperature", 100.0),
        cooling=_body_number(doc, "cooling", 0.95),
        max_branches=int(_body_number(doc, "max_branches", 4.0)),
        refine_max_evals=int(_body_number(doc, "refine_max_evals", 400.0)),
        losses=bool(doc.get("losses", False)),
    )


# ---------------------------------------------------------------------------
# Jobs


class Job:
    def __init__(self, job_id: str):
        self.id = job_id
        self.kind = "optimize"
        self.state = "queued"
        self.progress = 0.0
        self.result = None
        self.error = None
        self.created_at = time.time()
        self.updated_at = self.created_at

    def snapshot(self) -> dict:
        doc = {
            "id": self.id,
            "kind": self.kind,
            "state": self.state,
            "progress": self.progress,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }
        if self.result is not None:
            doc["result"] = self.result
        if self.error is not None:
            doc["error"] = self.error
        return doc


class JobRunner:
    """FIFO worker: one optimize job at a time."""

    def __init__(self, designs: DocumentStore):
        self.designs = designs
        self._jobs = {}
        self._lock = threading.Lock()
        self._queue = queue.Queue()
        self._thread = threading.Thread(target=self._run, daemon=True,
                                        name="acouforge-optimize")
        self._thread.start()

    def submit(self, initial, target, config) -> Job:
        job = Job(uuid.uuid4().hex[:16])
        with self._lock:
            self._jobs[job.id] = job
        self._queue.put((job, initial, target, config))
        return job

    def get(self, job_id: str):
        with self._lock:
            return self._jobs.get(job_id)

    def _update(self, job: Job, **fields):
        with self._lock:
            for name, value in fields.items():
                if name == "progress":
                    value = max(job.progress, min(1.0, value))
                setattr(job, name, value)
            job.updated_at = time.time()

    def _run(self):
        while True:
            job, initial, target, config = self._queue.get()
            self._update(job, state="running")
            try:
                result = search(initial, target, config,
                                progress=lambda f: self._update(job,
                                                                progress=f))
                design_id = self.designs.put(serialize(result.design))
                self._update(job, state="done", progress=1.0, result={
                    "design_id": design_id,
                    "objective": result.objective,
                    "residuals": list(result.residuals),
                    "evaluations": result.evaluations,
                    "wall_time_s": result.wall_time_s,
                    "success": result.success,
                })
            except AcouforgeError as exc:
                self._update(job, state="failed", error=str(exc))
            finally:
                self._queue.task_done()


# ---------------------------------------------------------------------------
# Application


def create_app(store_dir: str) -> FastAPI:
    designs = DocumentStore(os.path.join(store_dir, "designs"))
    models = DocumentStore(os.path.join(store_dir, "models"))
    designs.ids()  # logs a warning per corrupt file, service still starts
    models.ids()
    jobs = JobRunner(designs)

    app = FastAPI(title="acouforge", docs_url=None, redoc_url=None)

    def _design_text(design_id: str) -> str:
        text = designs.get(design_id)
        if text is None:
            raise NotFound(f"design {design_id}")
        return text

    def _model(model_id: str):
        text = models.get(model_id)
        if text is None:
            raise NotFound(f"model {model_id}")
        return parse_model(text)

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.post("/designs")
    @guarded
    async def create_design(request: Request):
        design = document_to_design(await _json_body(request))
        violations = validate(design)
        if violations:
            raise ValidationFailed(violations)
        return {"id": designs.put(serialize(design))}

    @app.get("/designs/{design_id}")
    @guarded
    async def get_design(design_id: str):
        return Response(content=_design_text(design_id),
                        media_type="application/json")

    @app.put("/designs/{design_id}")
    @guarded
    async def put_design(design_id: str, request: Request):
        _design_text(design_id)  # 404 on unknown base revision
        design = document_to_design(await _json_body(request))
        violations = validate(design)
        if violations:
            raise ValidationFailed(violations)
        return {"id": designs.put(serialize(design)),
                "previous_id": design_id}

    @app.post("/designs/{design_id}/spectrum")
    @guarded
    async def design_spectrum(design_id: str, request: Request):
        design = parse(_design_text(design_id))
        body = await _json_body(request)
        if not isinstance(body, dict):
            raise ParseError("expected an object", path="$")
        grid = _grid_from_document(body)
        losses = bool(body.get("losses", False))
        csv = spectrum_to_csv(design_transmission_loss(design, grid,
                                                       losses=losses))
        return Response(content=csv, media_type="text/csv")

    @app.post("/designs/{design_id}/stl")
    @guarded
    async def design_stl(design_id: str, request: Request):
        design = parse(_design_text(design_id))
        body = await _json_body(request)
        if not isinstance(body, dict):
            raise ParseError("expected an object", path="$")
        cell = _body_number(body, "cell_size_m", 0.01)
        wall = _body_number(body, "wall_m", cell)
        grid = voxelize(design, cell)
        return Response(content=export_stl(grid, wall),
                        media_type="model/stl")

    @app.post("/jobs/optimize")
    @guarded
    async def submit_optimize(request: Request):
        body = await _json_body(request)
        if not isinstance(body, dict):
            raise ParseError("expected an object", path="$")
        design_id = body.get("design_id")
        if not isinstance(design_id, str):
            raise ParseError("design_id must be a string", path="$.design_id")
        initial = parse(_design_text(design_id))
        target = _target_from_document(body.get("target"))
        config = _config_from_document(body.get("config"))
        job = jobs.submit(initial, target, config)
        return {"id": job.id}

    @app.get("/jobs/{job_id}")
    @guarded
    async def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise NotFound(f"job {job_id}")
        return job.snapshot()

    @app.get("/jobs/{job_id}/result")
    @guarded
    async def get_job_result(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise NotFound(f"job {job_id}")
        if job.state != "done":
            raise JobNotDone(f"job {job_id} is {job.state}")
        return job.result

    @app.post("/modal/models")
    @guarded
    async def create_model(request: Request):
        body = await _json_body(request)
        if not isinstance(body, dict):
            raise ParseError("expected an object", path="$")
        grid = document_to_grid(body.get("grid"))
        material = material_from_document(body.get("material",
                                                   {"name": "pla"}))
        max_modes = int(_body_number(body, "max_modes", 64.0))
        model = eigenmodes(build_lattice(grid, material), max_modes=max_modes)
        model_id = models.put(serialize_model(model))
        return {
            "id": model_id,
            "mode_count": model.mode_count,
            "node_count": model.node_count,
            "frequencies_hz": model.frequencies_hz().tolist(),
        }

    def _dominant_hz(model) -> float:
        audible = model.frequencies_hz()[~model.rigid]
        return float(audible[0]) if audible.size else 0.0

    @app.post("/modal/models/{model_id}/retune")
    @guarded
    async def retune_model(model_id: str, request: Request):
        body = await _json_body(request)
        if not isinstance(body, dict):
            raise ParseError("expected an object", path="$")
        material = material_from_document(body.get("material"))
        tuned = retune(_model(model_id), material)
        return {
            "frequencies_hz": tuned.frequencies_hz().tolist(),
            "dominant_frequency_hz": _dominant_hz(tuned),
        }

    @app.post("/modal/models/{model_id}/synthesize")
    @guarded
    async def synthesize_model(model_id: str, request: Request):
        body = await _json_body(request)
        if not isinstance(body, dict):
            raise ParseError("expected an object", path="$")
        model = _model(model_id)
        material = material_from_document(body.get("material"))
        impact = Impact(
            node=int(_body_number(body, "node", 0.0)),
            impulse=_body_number(body, "impulse", 1.0),
            listener_distance=_body_number(body, "listener_distance", 1.0))
        duration = _body_number(body, "duration_s", 1.0)
        rate = _body_number(body, "sample_rate_hz", 44100.0)
        result = synthesize(model, material, impact, duration_s=duration,
                            sample_rate_hz=rate)
        samples = result.samples
        envelope_doc = body.get("envelope")
        if envelope_doc is not None:
            if not isinstance(envelope_doc, dict):
                raise ParseError("envelope must be an object",
                                 path="$.envelope")
            try:
                spline = EnvelopeSpline(
                    gain=tuple(
                        (float(t), float(v))
                        for t, v in envelope_doc.get("gain", [[0.0, 1.0]])),
                    pitch_ratio=tuple(
                        (float(t), float(v))
                        for t, v in envelope_doc.get("pitch_ratio",
                                                     [[0.0, 1.0]])))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"bad envelope: {exc}",
                                 path="$.envelope") from None
            samples = apply_envelope(samples, spline, result.sample_rate)
        return Response(content=wav_bytes(samples, result.sample_rate),
                        media_type="audio/wav")

    return app
