"""Search over filter designs: simulated annealing plus simplex refinement.

The discrete moves (swap a primitive variant, add or remove a branch) are
handled by the annealer; the surviving continuous dimensions are then
polished with a bounded Nelder-Mead pass. All randomness flows from one
seeded splitmix64 stream, so a (seed, initial design, target, config)
quadruple reproduces its trace bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import FrequencyGrid, Spectrum, as_frequencies
from .design import (
    Chamber,
    FilterDesign,
    HelmholtzBranch,
    QuarterWaveBranch,
    Tube,
    design_resonances,
    design_transmission_loss,
    validate,
)
from .errors import InvalidArgument, ValidationFailed
from .rng import SplitMix64

UNMATCHED_PITCH_PENALTY = 1e6  # cents^2, per target note without any resonance


def note_to_frequency(midi_note: int) -> float:
    """Equal-tempered frequency of a MIDI note, A4 = 69 = 440 Hz."""
    if not 0 <= midi_note <= 127:
        raise InvalidArgument(f"MIDI note {midi_note} outside [0, 127]")
    return 440.0 * 2.0 ** ((midi_note - 69) / 12.0)


def cents(found_hz: float, target_hz: float) -> float:
    """Signed pitch error of found vs target, 1200*log2(f/f0)."""
    if found_hz <= 0 or target_hz <= 0:
        raise InvalidArgument("frequencies must be positive")
    return 1200.0 * math.log2(found_hz / target_hz)


@dataclass(frozen=True)
class PitchTarget:
    frequency_hz: float
    tolerance_cents: float = 10.0

    def __post_init__(self):
        if self.frequency_hz <= 0:
            raise InvalidArgument("target frequency must be positive")
        if self.tolerance_cents <= 0:
            raise InvalidArgument("tolerance must be positive")


@dataclass(frozen=True)
class PitchTargets:
    """Playable pitches the design's admittance peaks must hit."""

    notes: tuple

    def __post_init__(self):
        if len(self.notes) == 0:
            raise InvalidArgument("need at least one pitch target")

    @staticmethod
    def from_midi(midi_notes, tolerance_cents: float = 10.0) -> "PitchTargets":
        return PitchTargets(tuple(
            PitchTarget(note_to_frequency(n), tolerance_cents) for n in midi_notes))

    def frequencies(self):
        return [n.frequency_hz for n in self.notes]


@dataclass(frozen=True)
class NotchTargets:
    """Frequencies where transmission loss must reach a floor depth."""

    frequencies: tuple
    min_depth_db: float = 10.0

    def __post_init__(self):
        if len(self.frequencies) == 0:
            raise InvalidArgument("need at least one notch frequency")
        if any(f <= 0 for f in self.frequencies):
            raise InvalidArgument("notch frequencies must be positive")
        if self.min_depth_db <= 0:
            raise InvalidArgument("min_depth_db must be positive")


@dataclass(frozen=True)
class CurveTarget:
    """Full transmission-loss curve to approach in weighted least squares."""

    spectrum: Spectrum
    weights: Optional[np.ndarray] = None
    rms_tolerance_db: float = 1.0

    def __post_init__(self):
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != self.spectrum.frequencies.shape:
                raise InvalidArgument("weights must match the target grid")
            if np.any(w < 0) or not np.any(w > 0):
                raise InvalidArgument("weights must be >= 0 with at least one > 0")


def _check_inside_grid(freqs, grid_freqs):
    lo, hi = grid_freqs[0], grid_freqs[-1]
    for f in freqs:
        if not lo <= f <= hi:
            raise InvalidArgument(
                f"target frequency {f} Hz outside the evaluation grid "
                f"[{lo}, {hi}] Hz")


def residuals(design: FilterDesign, target, grid, losses: bool = False) -> np.ndarray:
    """Per-target errors: cents for pitches, shortfall dB for notches,
    signed dB errors for curves."""
    freqs = as_frequencies(grid)
    if isinstance(target, PitchTargets):
        _check_inside_grid(target.frequencies(), freqs)
        found = design_resonances(design, freqs, max_count=24, losses=losses)
        out = np.empty(len(target.notes))
        for i, note in enumerate(target.notes):
            if not found:
                out[i] = math.sqrt(UNMATCHED_PITCH_PENALTY)
                continue
            errors = [cents(r.frequency, note.frequency_hz) for r in found]
            out[i] = min(errors, key=abs)
        return out
    if isinstance(target, NotchTargets):
        _check_inside_grid(target.frequencies, freqs)
        tl = design_transmission_loss(design, freqs, losses=losses)
        depth = np.interp(np.asarray(target.frequencies), freqs, tl.values)
        return np.maximum(0.0, target.min_depth_db - depth)
    if isinstance(target, CurveTarget):
        _check_inside_grid(
            [target.spectrum.frequencies[0], target.spectrum.frequencies[-1]], freqs)
        tl = design_transmission_loss(design, freqs, losses=losses)
        sampled = np.interp(target.spectrum.frequencies, freqs, tl.values)
        return sampled - target.spectrum.values
    raise InvalidArgument(f"unknown target type {type(target).__name__}")


def objective(design: FilterDesign, target, grid, losses: bool = False) -> float:
    """Scalar cost; zero means every requirement is met exactly."""
    r = residuals(design, target, grid, losses)
    if isinstance(target, CurveTarget):
        w = (np.ones_like(r) if target.weights is None
             else np.asarray(target.weights, dtype=float))
        return float(np.sum(w * r**2) / np.sum(w))
    return float(np.sum(r**2))


def target_met(target, resid: np.ndarray) -> bool:
    if isinstance(target, PitchTargets):
        return all(abs(r) <= n.tolerance_cents
                   for r, n in zip(resid, target.notes))
    if isinstance(target, NotchTargets):
        return bool(np.all(resid == 0.0))
    if isinstance(target, CurveTarget):
        w = (np.ones_like(resid) if target.weights is None
             else np.asarray(target.weights, dtype=float))
        rms = math.sqrt(float(np.sum(w * resid**2) / np.sum(w)))
        return rms <= target.rms_tolerance_db
    return False


# ---------------------------------------------------------------------------
# Search space


@dataclass(frozen=True)
class DimensionRange:
    lower: float
    upper: float
    step: float

    def __post_init__(self):
        if not (0 < self.lower <= self.upper):
            raise InvalidArgument("need 0 < lower <= upper")
        if self.step <= 0:
            raise InvalidArgument("step must be positive")

    def clamp(self, value: float) -> float:
        return min(self.upper, max(self.lower, value))


def default_catalog() -> dict:
    return {
        "tube": {
            "length": DimensionRange(0.02, 0.8, 0.01),
            "radius": DimensionRange(0.005, 0.03, 0.002),
        },
        "chamber": {
            "length": DimensionRange(0.02, 0.3, 0.01),
            "radius": DimensionRange(0.01, 0.06, 0.003),
        },
        "quarter_wave": {
            "length": DimensionRange(0.02, 0.6, 0.005),
            "radius": DimensionRange(0.004, 0.012, 0.001),
        },
        "helmholtz": {
            "neck_length": DimensionRange(0.005, 0.05, 0.002),
            "neck_radius": DimensionRange(0.003, 0.01, 0.001),
            "cavity_volume": DimensionRange(2e-5, 5e-4, 2e-5),
        },
    }


_VARIANT_NAMES = {
    Tube: "tube",
    Chamber: "chamber",
    QuarterWaveBranch: "quarter_wave",
    HelmholtzBranch: "helmholtz",
}
_SWAP_PARTNER = {"tube": Chamber, "chamber": Tube}


@dataclass(frozen=True)
class SearchConfig:
    grid: FrequencyGrid
    seed: int = 0
    max_iterations: int = 2000
    initial_temperature: float = 100.0
    cooling: float = 0.95
    max_branches: int = 4
    catalog: Optional[dict] = None
    refine_max_evals: int = 400
    losses: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidArgument("max_iterations must be >= 1")
        if not 0 < self.cooling < 1:
            raise InvalidArgument("cooling must be in (0, 1)")
        if self.initial_temperature <= 0:
            raise InvalidArgument("initial_temperature must be positive")
        if self.max_branches < 0:
            raise InvalidArgument("max_branches must be >= 0")
        if self.refine_max_evals < 0:
            raise InvalidArgument("refine_max_evals must be >= 0")

    def catalog_or_default(self) -> dict:
        return self.catalog if self.catalog is not None else default_catalog()


def _tunable_dimensions(design: FilterDesign, catalog: dict):
    """Deterministic enumeration of (slot, index, field, range) handles."""
    handles = []
    for i, prim in enumerate(design.chain):
        variant = _VARIANT_NAMES[type(prim)]
        for field, dim in catalog.get(variant, {}).items():
            handles.append(("chain", i, field, dim))
    for i, prim in enumerate(design.branches):
        variant = _VARIANT_NAMES[type(prim)]
        for field, dim in catalog.get(variant, {}).items():
            handles.append(("branches", i, field, dim))
    return handles


def _with_dimension(design: FilterDesign, handle, value: float) -> FilterDesign:
    slot, index, field, dim = handle
    items = list(getattr(design, slot))
    items[index] = replace(items[index], **{field: dim.clamp(value)})
    return replace(design, **{slot: tuple(items)})


def _sample_branch(rng: SplitMix64, variant: str, catalog: dict, chain_len: int):
    dims = {field: rng.uniform_in(d.lower, d.upper)
            for field, d in catalog[variant].items()}
    attach = rng.randint(chain_len + 1)
    if variant == "quarter_wave":
        return QuarterWaveBranch(dims["length"], dims["radius"], attach)
    return HelmholtzBranch(dims["neck_length"], dims["neck_radius"],
                           dims["cavity_volume"], attach)


def _propose(design: FilterDesign, rng: SplitMix64,
             config: SearchConfig) -> FilterDesign:
    """One neighbour move, chosen uniformly among the applicable kinds."""
    catalog = config.catalog_or_default()
    handles = _tunable_dimensions(design, catalog)
    swappable = [i for i, p in enumerate(design.chain)
                 if _VARIANT_NAMES[type(p)] in _SWAP_PARTNER
                 and _VARIANT_NAMES[(_SWAP_PARTNER[_VARIANT_NAMES[type(p)]])] in catalog]
    branch_variants = [v for v in ("quarter_wave", "helmholtz") if v in catalog]
    moves = []
    if handles:
        moves.append("perturb")
    if swappable:
        moves.append("swap")
    if branch_variants and len(design.branches) < config.max_branches:
        moves.append("add_branch")
    if design.branches:
        moves.append("remove_branch")
    if not moves:
        return design
    move = rng.choice(moves)
    if move == "perturb":
        slot, index, field, dim = handle = rng.choice(handles)
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        current = getattr(getattr(design, slot)[index], field)
        return _with_dimension(design, handle, current + sign * dim.step)
    if move == "swap":
        i = rng.choice(swappable)
        prim = design.chain[i]
        new_variant = _SWAP_PARTNER[_VARIANT_NAMES[type(prim)]]
        ranges = catalog[_VARIANT_NAMES[new_variant]]
        swapped = new_variant(ranges["length"].clamp(prim.length),
                              ranges["radius"].clamp(prim.radius))
        chain = list(design.chain)
        chain[i] = swapped
        return replace(design, chain=tuple(chain))
    if move == "add_branch":
        branch = _sample_branch(rng, rng.choice(branch_variants), catalog,
                                len(design.chain))
        return replace(design, branches=design.branches + (branch,))
    keep = rng.randint(len(design.branches))
    branches = tuple(b for i, b in enumerate(design.branches) if i != keep)
    return replace(design, branches=branches)


# ---------------------------------------------------------------------------
# Drivers


@dataclass(frozen=True)
class OptimizationResult:
    design: FilterDesign
    objective: float
    residuals: tuple
    trace: tuple  # best objective after each evaluation; non-increasing
    evaluations: int
    wall_time_s: float
    success: bool


def _evaluate(design, target, config):
    """(objective, residuals); invalid candidates cost infinity."""
    try:
        r = residuals(design, target, config.grid, config.losses)
    except ValidationFailed:
        return math.inf, None
    if isinstance(target, CurveTarget):
        w = (np.ones_like(r) if target.weights is None
             else np.asarray(target.weights, dtype=float))
        return float(np.sum(w * r**2) / np.sum(w)), r
    return float(np.sum(r**2)), r


def anneal(initial: FilterDesign, target, config: SearchConfig,
           progress=None) -> OptimizationResult:
    """Metropolis search over the neighbour moves with geometric cooling.

    Accepts uphill moves with probability exp(-delta/T), T multiplied by
    the cooling ratio each iteration. Stops early once the target is met.
    progress, when given, is called with a fraction in [0, 1] after each
    iteration; it must not influence the search.
    """
    violations = validate(initial)
    if violations:
        raise ValidationFailed(violations)
    start = time.perf_counter()
    rng = SplitMix64(config.seed)
    current = best = initial
    current_obj, current_resid = _evaluate(initial, target, config)
    best_obj, best_resid = current_obj, current_resid
    evaluations = 1
    trace = [best_obj]
    temperature = config.initial_temperature
    for iteration in range(config.max_iterations):
        if best_resid is not None and target_met(target, best_resid):
            break
        candidate = _propose(current, rng, config)
        cand_obj, cand_resid = _evaluate(candidate, target, config)
        evaluations += 1
        delta = cand_obj - current_obj
        if delta <= 0 or rng.uniform() < math.exp(-delta / max(temperature, 1e-300)):
            current, current_obj = candidate, cand_obj
        if cand_obj < best_obj:
            best, best_obj, best_resid = candidate, cand_obj, cand_resid
        trace.append(best_obj)
        temperature *= config.cooling
        if progress is not None:
            progress((iteration + 1) / config.max_iterations)
    if progress is not None:
        progress(1.0)
    met = best_resid is not None and target_met(target, best_resid)
    return OptimizationResult(
        design=best, objective=best_obj,
        residuals=tuple(float(x) for x in best_resid) if best_resid is not None else (),
        trace=tuple(trace), evaluations=evaluations,
        wall_time_s=time.perf_counter() - start, success=met)


def refine(initial: FilterDesign, target, config: SearchConfig,
           progress=None) -> OptimizationResult:
    """Nelder-Mead polish of the continuous dimensions, bounds-clamped.

    Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
    Stops when the simplex diameter falls below 1e-6 or the evaluation
    budget runs out. The discrete structure (chain variants, branch set)
    is frozen here.
    """
    violations = validate(initial)
    if violations:
        raise ValidationFailed(violations)
    start = time.perf_counter()
    catalog = config.catalog_or_default()
    handles = _tunable_dimensions(initial, catalog)
    state = {"evals": 0, "best": None, "best_obj": math.inf, "best_resid": None,
             "trace": []}

    def build(x):
        design = initial
        for handle, value in zip(handles, x):
            design = _with_dimension(design, handle, float(value))
        return design

    def clamp(x):
        return np.array([h[3].clamp(float(v)) for h, v in zip(handles, x)])

    def evaluate(x):
        design = build(x)
        obj, resid = _evaluate(design, target, config)
        state["evals"] += 1
        if obj < state["best_obj"]:
            state["best"], state["best_obj"] = design, obj
            state["best_resid"] = resid
        state["trace"].append(state["best_obj"])
        if progress is not None:
            progress(min(1.0, state["evals"] / config.refine_max_evals))
        return obj

    def finish():
        met = (state["best_resid"] is not None
               and target_met(target, state["best_resid"]))
        resid = (tuple(float(v) for v in state["best_resid"])
                 if state["best_resid"] is not None else ())
        return OptimizationResult(
            design=state["best"], objective=state["best_obj"], residuals=resid,
            trace=tuple(state["trace"]), evaluations=state["evals"],
            wall_time_s=time.perf_counter() - start, success=met)

    x0 = np.array([getattr(getattr(initial, slot)[i], field)
                   for slot, i, field, _ in handles])
    if len(handles) == 0 or config.refine_max_evals < 1:
        state["evals"] = 1
        obj, resid = _evaluate(initial, target, config)
        state.update(best=initial, best_obj=obj, best_resid=resid, trace=[obj])
        return finish()

    n = len(x0)
    simplex = [clamp(x0)]
    for i in range(n):
        dim = handles[i][3]
        step = dim.step
        vertex = simplex[0].copy()
        if vertex[i] + step > dim.upper:
            vertex[i] -= step
        else:
            vertex[i] += step
        simplex.append(clamp(vertex))
    values = [evaluate(v) for v in simplex]

    while state["evals"] < config.refine_max_evals:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        diameter = max(np.max(np.abs(v - simplex[0])) for v in simplex[1:])
        if diameter < 1e-6:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        reflected = clamp(centroid + (centroid - simplex[-1]))
        f_reflected = evaluate(reflected)
        if f_reflected < values[0]:
            expanded = clamp(centroid + 2.0 * (centroid - simplex[-1]))
            f_expanded = evaluate(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
        else:
            contracted = clamp(centroid + 0.5 * (simplex[-1] - centroid))
            f_contracted = evaluate(contracted)
            if f_contracted < values[-1]:
                simplex[-1], values[-1] = contracted, f_contracted
            else:
                for i in range(1, len(simplex)):
                    simplex[i] = clamp(simplex[0] + 0.5 * (simplex[i] - simplex[0]))
                    values[i] = evaluate(simplex[i])
    if progress is not None:
        progress(1.0)
    return finish()


def search(initial: FilterDesign, target, config: SearchConfig,
           progress=None) -> OptimizationResult:
    """Anneal, then refine the winner; traces are concatenated.

    progress (optional) receives a monotone fraction in [0, 1]: the anneal
    stage spans [0, 0.8] and the refine stage [0.8, 1].
    """
    coarse = anneal(initial, target, config,
                    None if progress is None
                    else lambda f: progress(0.8 * f))
    fine = refine(coarse.design, target, config,
                  None if progress is None
                  else lambda f: progress(0.8 + 0.2 * f))
    better = fine if fine.objective <= coarse.objective else coarse
    return OptimizationResult(
        design=better.design, objective=better.objective,
        residuals=better.residuals, trace=coarse.trace + fine.trace,
        evaluations=coarse.evaluations + fine.evaluations,
        wall_time_s=coarse.wall_time_s + fine.wall_time_s,
        success=better.success)
