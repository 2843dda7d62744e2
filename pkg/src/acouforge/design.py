"""Filter designs: an ordered main chain of primitives with side branches.

A design document is the unit of persistence and exchange. Parsing is strict
about structure (unknown fields are rejected with their JSON path, malformed
text with line/column) but deliberately does not enforce geometric
invariants: ``parse`` always yields a design and ``validate`` reports
violations, so a file with a negative radius can be loaded, inspected and
fixed. Reduction to a transfer matrix refuses invalid designs.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import (
    FrequencyGrid,
    Medium,
    OpenEnd,
    Spectrum,
    TransferMatrixSpectrum,
    as_frequencies,
    cascade,
    find_resonances,
    first_cutoff_frequency,
    helmholtz_impedance,
    input_impedance,
    quarter_wave_impedance,
    shunt_matrix,
    transmission_loss,
    tube_matrix,
)
from .errors import ParseError, PlaneWaveBandWarning, ValidationFailed

FORMAT_VERSION = 1
DEFAULT_MAX_TOTAL_LENGTH = 2.0  # printability guard, metres


@dataclass(frozen=True)
class Tube:
    """Uniform duct section in the main chain."""

    length: float
    radius: float


@dataclass(frozen=True)
class Chamber:
    """Expansion section in the main chain (same model as Tube, wider bore)."""

    length: float
    radius: float


@dataclass(frozen=True)
class QuarterWaveBranch:
    """Closed side tube; notch near (2n-1)*c/(4L)."""

    length: float
    radius: float
    attach_after: int


@dataclass(frozen=True)
class HelmholtzBranch:
    """Neck-plus-cavity side resonator."""

    neck_length: float
    neck_radius: float
    cavity_volume: float
    attach_after: int


CHAIN_VARIANTS = (Tube, Chamber)
BRANCH_VARIANTS = (QuarterWaveBranch, HelmholtzBranch)

# Registry: document type tag -> (class, ordered document fields -> attributes)
PRIMITIVE_TYPES = {
    "tube": (Tube, {"length_m": "length", "radius_m": "radius"}),
    "chamber": (Chamber, {"length_m": "length", "radius_m": "radius"}),
    "quarter_wave": (
        QuarterWaveBranch,
        {"length_m": "length", "radius_m": "radius", "attach_after": "attach_after"},
    ),
    "helmholtz": (
        HelmholtzBranch,
        {
            "neck_length_m": "neck_length",
            "neck_radius_m": "neck_radius",
            "cavity_volume_m3": "cavity_volume",
            "attach_after": "attach_after",
        },
    ),
}
_TYPE_TAGS = {cls: tag for tag, (cls, _) in PRIMITIVE_TYPES.items()}


@dataclass(frozen=True)
class FilterDesign:
    name: str
    port_radius: float
    chain: tuple
    branches: tuple = ()
    medium: Medium = Medium()
    metadata: dict = field(default_factory=dict)

    def total_length(self) -> float:
        """Main-chain axial extent in metres."""
        return sum(p.length for p in self.chain)

    def max_radius(self) -> float:
        radii = [self.port_radius] + [p.radius for p in self.chain]
        return max(radii)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def as_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


def _dimensions_of(primitive) -> dict:
    if isinstance(primitive, (Tube, Chamber)):
        return {"length": primitive.length, "radius": primitive.radius}
    if isinstance(primitive, QuarterWaveBranch):
        return {"length": primitive.length, "radius": primitive.radius}
    return {
        "neck_length": primitive.neck_length,
        "neck_radius": primitive.neck_radius,
        "cavity_volume": primitive.cavity_volume,
    }


def validate(design: FilterDesign,
             max_total_length: float = DEFAULT_MAX_TOTAL_LENGTH) -> list[Violation]:
    """Check all design invariants; returns an empty list iff the design is sound.

    Validation never raises: every problem becomes a Violation with a
    machine-readable code.
    """
    violations: list[Violation] = []
    if len(design.chain) == 0:
        violations.append(Violation("EMPTY_CHAIN", "design chain has no elements"))
    for i, prim in enumerate(design.chain):
        if not isinstance(prim, CHAIN_VARIANTS):
            violations.append(Violation(
                "CHAIN_VARIANT_INVALID",
                f"chain[{i}] is {type(prim).__name__}; only Tube/Chamber may appear in the chain"))
            continue
        violations.extend(_dimension_violations(f"chain[{i}]", prim))
    for i, prim in enumerate(design.branches):
        if not isinstance(prim, BRANCH_VARIANTS):
            violations.append(Violation(
                "BRANCH_VARIANT_INVALID",
                f"branches[{i}] is {type(prim).__name__}; only branch variants may appear here"))
            continue
        violations.extend(_dimension_violations(f"branches[{i}]", prim))
        if not (0 <= prim.attach_after <= len(design.chain)):
            violations.append(Violation(
                "BRANCH_INDEX_OUT_OF_RANGE",
                f"branches[{i}].attach_after = {prim.attach_after} is outside "
                f"[0, {len(design.chain)}]"))
    if not design.port_radius > 0:
        violations.append(Violation(
            "NON_POSITIVE_PORT_RADIUS",
            f"port_radius must be positive, got {design.port_radius}"))
    total = design.total_length()
    if total > max_total_length:
        violations.append(Violation(
            "TOTAL_LENGTH_EXCEEDED",
            f"chain length {total:.3f} m exceeds the {max_total_length} m guard"))
    return violations


def _dimension_violations(label: str, prim) -> list[Violation]:
    out = []
    for name, value in _dimensions_of(prim).items():
        if not value > 0:
            out.append(Violation(
                "NEGATIVE_DIMENSION",
                f"{label}.{name} must be positive, got {value}"))
    return out


def _branch_impedance(prim, medium: Medium, freqs):
    if isinstance(prim, QuarterWaveBranch):
        return quarter_wave_impedance(prim.length, prim.radius, medium, freqs)
    return helmholtz_impedance(prim.neck_length, prim.neck_radius,
                               prim.cavity_volume, medium, freqs)


def to_transfer_matrix(design: FilterDesign, grid,
                       losses: bool = False) -> TransferMatrixSpectrum:
    """Reduce a design to its four-pole matrix on the given grid.

    The result is the cascade of chain-element matrices with shunt matrices
    inserted at the branch attachment points, in chain order. Evaluation is
    matrix lookup and products only; raises ValidationFailed for an invalid
    design and warns (non-fatally) when the grid extends above the design's
    first non-planar cutoff.
    """
    violations = validate(design)
    if violations:
        raise ValidationFailed(violations)
    freqs = as_frequencies(grid)
    cutoff = first_cutoff_frequency(design.max_radius(), design.medium)
    if freqs[-1] > cutoff:
        warnings.warn(
            f"grid extends to {freqs[-1]:.0f} Hz, above the plane-wave cutoff "
            f"{cutoff:.0f} Hz; results are extrapolations of the 1-D model",
            PlaneWaveBandWarning, stacklevel=2)
    by_position: dict[int, list] = {}
    for prim in design.branches:
        by_position.setdefault(prim.attach_after, []).append(prim)
    elements = []
    for pos in range(len(design.chain) + 1):
        for branch in by_position.get(pos, ()):
            elements.append(shunt_matrix(
                _branch_impedance(branch, design.medium, freqs), freqs))
        if pos < len(design.chain):
            prim = design.chain[pos]
            elements.append(tube_matrix(prim.length, prim.radius,
                                        design.medium, freqs, losses=losses))
    return cascade(elements)


def design_transmission_loss(design: FilterDesign, grid, losses: bool = False) -> Spectrum:
    t = to_transfer_matrix(design, grid, losses=losses)
    return transmission_loss(t, design.port_radius, design.medium)


def design_input_impedance(design: FilterDesign, grid, termination=None,
                           losses: bool = False):
    if termination is None:
        termination = OpenEnd(design.port_radius)
    t = to_transfer_matrix(design, grid, losses=losses)
    return input_impedance(t, termination, design.medium)


def design_resonances(design: FilterDesign, grid, max_count: int = 16,
                      termination=None, losses: bool = False):
    """Playable pitches: peaks of the inlet admittance under an open end."""
    freqs = as_frequencies(grid)
    z_in = design_input_impedance(design, freqs, termination, losses=losses)
    admittance = Spectrum(freqs, np.abs(1.0 / z_in), "admittance_magnitude")
    return find_resonances(admittance, max_count)


# ---------------------------------------------------------------------------
# Document serialization (format_version 1)


def design_to_document(design: FilterDesign) -> dict:
    def prim_doc(prim):
        tag = _TYPE_TAGS[type(prim)]
        _, fields = PRIMITIVE_TYPES[tag]
        doc = {"type": tag}
        for doc_name, attr in fields.items():
            doc[doc_name] = getattr(prim, attr)
        return doc

    return {
        "format_version": FORMAT_VERSION,
        "name": design.name,
        "medium": {
            "sound_speed_mps": design.medium.sound_speed,
            "density_kgpm3": design.medium.density,
        },
        "port_radius_m": design.port_radius,
        "chain": [prim_doc(p) for p in design.chain],
        "branches": [prim_doc(p) for p in design.branches],
        "metadata": dict(design.metadata),
    }


def serialize(design: FilterDesign) -> str:
    return json.dumps(design_to_document(design), indent=2) + "\n"


def _expect(mapping: Any, path: str) -> dict:
    if not isinstance(mapping, dict):
        raise ParseError(f"expected an object, got {type(mapping).__name__}", path=path)
    return mapping


def _take(mapping: dict, key: str, path: str, *, required=True, default=None):
    if key not in mapping:
        if required:
            raise ParseError(f"missing required field '{key}'", path=path)
        return default
    return mapping.pop(key)


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", path=path)
    return float(value)


def _reject_unknown(mapping: dict, path: str):
    if mapping:
        key = sorted(mapping)[0]
        raise ParseError(f"unknown field '{key}'", path=f"{path}.{key}")


def _parse_primitive(doc: Any, path: str):
    doc = dict(_expect(doc, path))
    tag = _take(doc, "type", path)
    if tag not in PRIMITIVE_TYPES:
        raise ParseError(f"unknown primitive type {tag!r}", path=f"{path}.type")
    cls, fields = PRIMITIVE_TYPES[tag]
    kwargs = {}
    for doc_name, attr in fields.items():
        raw = _take(doc, doc_name, path)
        if attr == "attach_after":
            if isinstance(raw, bool) or not isinstance(raw, int):
                raise ParseError(f"expected an integer, got {raw!r}",
                                 path=f"{path}.{doc_name}")
            kwargs[attr] = raw
        else:
            kwargs[attr] = _number(raw, f"{path}.{doc_name}")
    _reject_unknown(doc, path)
    return cls(**kwargs)


def document_to_design(doc: Any) -> FilterDesign:
    doc = dict(_expect(doc, "$"))
    version = _take(doc, "format_version", "$")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {version!r}", path="$.format_version")
    name = _take(doc, "name", "$")
    if not isinstance(name, str):
        raise ParseError("name must be a string", path="$.name")
    medium_doc = _take(doc, "medium", "$", required=False)
    if medium_doc is None:
        medium = Medium()
    else:
        medium_doc = dict(_expect(medium_doc, "$.medium"))
        c = _number(_take(medium_doc, "sound_speed_mps", "$.medium"), "$.medium.sound_speed_mps")
        rho = _number(_take(medium_doc, "density_kgpm3", "$.medium"), "$.medium.density_kgpm3")
        _reject_unknown(medium_doc, "$.medium")
        if c <= 0 or rho <= 0:
            raise ParseError("medium parameters must be positive", path="$.medium")
        medium = Medium(c, rho)
    port_radius = _number(_take(doc, "port_radius_m", "$"), "$.port_radius_m")
    chain_doc = _take(doc, "chain", "$")
    if not isinstance(chain_doc, list):
        raise ParseError("chain must be an array", path="$.chain")
    chain = tuple(_parse_primitive(p, f"$.chain[{i}]") for i, p in enumerate(chain_doc))
    branches_doc = _take(doc, "branches", "$", required=False, default=[])
    if not isinstance(branches_doc, list):
        raise ParseError("branches must be an array", path="$.branches")
    branches = tuple(_parse_primitive(p, f"$.branches[{i}]")
                     for i, p in enumerate(branches_doc))
    metadata = _take(doc, "metadata", "$", required=False, default={})
    if not isinstance(metadata, dict):
        raise ParseError("metadata must be an object", path="$.metadata")
    _reject_unknown(doc, "$")
    return FilterDesign(name=name, port_radius=port_radius, chain=chain,
                        branches=branches, medium=medium, metadata=dict(metadata))


def parse(text: str) -> FilterDesign:
    """Parse a design document; raises ParseError with line/column or path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    return document_to_design(doc)


def demo_design() -> FilterDesign:
    """Three-element expansion-chamber demo used by docs and tests."""
    return FilterDesign(
        name="chamber-demo",
        port_radius=0.02,
        chain=(Tube(0.05, 0.02), Chamber(0.1, 0.04), Tube(0.05, 0.02)),
        metadata={"comment": "expansion chamber, area ratio 4"},
    )
