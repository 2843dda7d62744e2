"""Modal sound: spring-mass lattices, eigenmodes, retuning and synthesis.

A voxel grid becomes a scalar 1-DOF-per-node lattice: each occupied cell is
a lumped mass rho*h^3, each 6-neighbour pair a spring E*h, so the stiffness
matrix is E*h times the graph Laplacian of the occupancy. The point of this
model is the material shortcut: eigenvectors do not depend on (E, rho), so
a material change rescales frequencies in O(#modes) instead of re-solving.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    AcouforgeError,
    DisconnectedLattice,
    InvalidArgument,
    ModelTooLarge,
    ParseError,
    SilentModelWarning,
)
from .voxel import VoxelGrid

MAX_NODES = 2000
AUDIBLE_MIN_HZ = 20.0
NYQUIST_GUARD = 0.45  # retained modes stay below this fraction of the rate
RIGID_EIGENVALUE_RATIO = 1e-8


@dataclass(frozen=True)
class Material:
    """Isotropic material with Rayleigh damping d_i = (alpha + beta*w_i^2)/2."""

    name: str
    youngs_modulus: float  # Pa
    density: float  # kg/m^3
    rayleigh_alpha: float = 0.0  # 1/s
    rayleigh_beta: float = 0.0  # s

    def __post_init__(self):
        if self.youngs_modulus <= 0 or self.density <= 0:
            raise InvalidArgument("material modulus and density must be positive")
        if self.rayleigh_alpha < 0 or self.rayleigh_beta < 0:
            raise InvalidArgument("Rayleigh coefficients must be >= 0")


MATERIALS = {
    "pla": Material("pla", 3.5e9, 1240.0, 6.0, 2e-7),
    "abs": Material("abs", 2.3e9, 1040.0, 8.0, 3e-7),
    "aluminum": Material("aluminum", 69e9, 2700.0, 0.5, 3e-9),
    "steel": Material("steel", 200e9, 7850.0, 0.5, 2e-9),
    "glass": Material("glass", 70e9, 2500.0, 1.0, 1e-9),
}


@dataclass(frozen=True)
class LatticeAssembly:
    stiffness: np.ndarray  # (n, n), symmetric positive semidefinite
    masses: np.ndarray  # (n,)
    node_positions: np.ndarray  # (n, 3) cell centres, world coordinates
    cell_size: float
    material: Material

    @property
    def node_count(self) -> int:
        return self.masses.shape[0]


def build_lattice(grid: VoxelGrid, material: Material) -> LatticeAssembly:
    """Assemble the spring-mass system for an occupied, 6-connected grid."""
    if grid.count == 0 or not grid.is_six_connected():
        raise DisconnectedLattice(
            "voxel grid must be nonempty and 6-connected to form one body")
    occ = grid.occupancy
    indices = grid.occupied_indices()
    n = indices.shape[0]
    ids = np.full(occ.shape, -1, dtype=np.int64)
    ids[tuple(indices.T)] = np.arange(n)
    h = grid.cell_size
    spring = material.youngs_modulus * h
    stiffness = np.zeros((n, n))
    for axis in range(3):
        src = [slice(None)] * 3
        dst = [slice(None)] * 3
        src[axis] = slice(None, -1)
        dst[axis] = slice(1, None)
        both = occ[tuple(src)] & occ[tuple(dst)]
        ii = ids[tuple(src)][both]
        jj = ids[tuple(dst)][both]
        np.add.at(stiffness, (ii, ii), spring)
        np.add.at(stiffness, (jj, jj), spring)
        stiffness[ii, jj] -= spring
        stiffness[jj, ii] -= spring
    masses = np.full(n, material.density * h**3)
    return LatticeAssembly(stiffness, masses, grid.cell_centers(indices), h, material)


def jacobi_eigh(matrix: np.ndarray, rel_tol: float = 1e-10,
                max_sweeps: int = 60):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Sweeps row-major over the upper triangle, rotating away any entry above
    rel_tol * ||A||_F / (2n), until the off-diagonal Frobenius norm falls
    below rel_tol * ||A||_F. Returns (eigenvalues, eigenvectors-as-columns),
    unsorted. Deterministic: no pivot search, no randomness.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape != (n, n):
        raise InvalidArgument("matrix must be square")
    a = 0.5 * (a + a.T)
    vectors = np.eye(n)
    if n == 1:
        return np.diag(a).copy(), vectors
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return np.zeros(n), vectors
    skip = rel_tol * norm / (2.0 * n)
    for _ in range(max_sweeps):
        # norm of the strictly off-diagonal part; summing the small entries
        # directly avoids the cancellation that a.sum-minus-diagonal has
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= rel_tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vec_p = vectors[:, p].copy()
                vec_q = vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q
    else:
        raise AcouforgeError("Jacobi eigensolver did not converge")
    return np.diag(a).copy(), vectors


@dataclass(frozen=True)
class ModalModel:
    """Mass-orthonormal modes of a lattice under a reference material.

    shapes holds the reference-material eigenvectors; shape_scale carries
    the density rescaling applied by retune so that shapes * shape_scale
    stays mass-orthonormal without copying the matrix.
    """

    angular_frequencies: np.ndarray  # (m,) rad/s, ascending
    shapes: np.ndarray  # (n, m), columns are modes
    rigid: np.ndarray  # (m,) bool, near-zero eigenvalue flags
    node_positions: np.ndarray
    cell_size: float
    material: Material  # material the model is currently tuned to
    reference_material: Material
    shape_scale: float = 1.0

    @property
    def mode_count(self) -> int:
        return self.angular_frequencies.shape[0]

    @property
    def node_count(self) -> int:
        return self.shapes.shape[0]

    def frequencies_hz(self) -> np.ndarray:
        return self.angular_frequencies / (2.0 * math.pi)


def eigenmodes(assembly: LatticeAssembly, max_modes: int = 64) -> ModalModel:
    """Solve the generalized problem K phi = w^2 M phi for the lowest modes.

    Works on the symmetric form M^-1/2 K M^-1/2 via the Jacobi solver.
    Near-zero eigenvalues (lambda < 1e-8 * lambda_max) are kept but flagged
    rigid; shapes are mass-orthonormal (phi^T M phi = I).
    """
    n = assembly.node_count
    if n > MAX_NODES:
        raise ModelTooLarge(f"{n} nodes exceeds the {MAX_NODES}-node dense limit")
    if max_modes < 1:
        raise InvalidArgument("max_modes must be >= 1")
    inv_sqrt_m = 1.0 / np.sqrt(assembly.masses)
    symmetric = assembly.stiffness * inv_sqrt_m[:, None] * inv_sqrt_m[None, :]
    eigenvalues, vectors = jacobi_eigh(symmetric)
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]
    keep = min(max_modes, n)
    eigenvalues = eigenvalues[:keep]
    vectors = vectors[:, :keep]
    lam_max = float(eigenvalues.max(initial=0.0))
    if lam_max > 0:
        rigid = eigenvalues < RIGID_EIGENVALUE_RATIO * lam_max
    else:
        rigid = np.ones(keep, dtype=bool)
    omega = np.sqrt(np.clip(eigenvalues, 0.0, None))
    shapes = vectors * inv_sqrt_m[:, None]
    return ModalModel(
        angular_frequencies=omega,
        shapes=shapes,
        rigid=rigid,
        node_positions=assembly.node_positions,
        cell_size=assembly.cell_size,
        material=assembly.material,
        reference_material=assembly.material,
    )


def retune(model: ModalModel, material: Material) -> ModalModel:
    """Material swap without re-solving: w' = w * sqrt((E'/E) * (rho/rho')).

    Eigenvectors of the uniform lattice are material-independent, so only
    the frequency vector and a scalar mass-normalization factor change.
    The shape matrix is shared, not copied.
    """
    current = model.material
    freq_ratio = math.sqrt(
        (material.youngs_modulus / current.youngs_modulus)
        * (current.density / material.density))
    return replace(
        model,
        angular_frequencies=model.angular_frequencies * freq_ratio,
        material=material,
        shape_scale=model.shape_scale * math.sqrt(current.density / material.density),
    )


@dataclass(frozen=True)
class Impact:
    """Unit impulse excitation at one lattice node."""

    node: int
    impulse: float = 1.0  # N*s
    listener_distance: float = 1.0  # m

    def __post_init__(self):
        if self.impulse <= 0:
            raise InvalidArgument("impulse must be positive")
        if self.listener_distance <= 0:
            raise InvalidArgument("listener_distance must be positive")


@dataclass(frozen=True)
class SynthResult:
    samples: np.ndarray  # float64, peak-normalized to 0.9
    sample_rate: float
    gain: float  # factor applied to reach the 0.9 peak
    active_modes: int


def synthesize(model: ModalModel, material: Material, impact: Impact,
               duration_s: float = 1.0, sample_rate_hz: float = 44100.0) -> SynthResult:
    """Impulse response at the listener: s(t) = sum a_i e^{-d_i t} sin(w_d_i t).

    The model is retuned to the requested material first. Per mode,
    d_i = (alpha + beta*w_i^2)/2 and w_d = sqrt(w^2 - d^2); amplitudes are
    a_i = phi_i[node] * J / w_d, scaled by 1/listener_distance. Dropped from
    the sum: rigid modes, overdamped modes, and modes outside
    [20 Hz, 0.45 * sample_rate]. Output is peak-normalized to 0.9 and the
    applied gain reported.
    """
    if duration_s <= 0 or sample_rate_hz <= 0:
        raise InvalidArgument("duration and sample rate must be positive")
    if not 0 <= impact.node < model.node_count:
        raise InvalidArgument(
            f"impact node {impact.node} outside [0, {model.node_count})")
    tuned = retune(model, material)
    omega = tuned.angular_frequencies
    damping = 0.5 * (material.rayleigh_alpha
                     + material.rayleigh_beta * omega**2)
    underdamped = damping < omega
    omega_d = np.sqrt(np.where(underdamped, omega**2 - damping**2, 1.0))
    f_d = omega_d / (2.0 * math.pi)
    keep = (
        ~tuned.rigid
        & underdamped
        & (f_d >= AUDIBLE_MIN_HZ)
        & (f_d <= NYQUIST_GUARD * sample_rate_hz)
    )
    n_samples = int(round(duration_s * sample_rate_hz))
    if not np.any(keep):
        warnings.warn("all modes dropped; synthesizing silence",
                      SilentModelWarning, stacklevel=2)
        return SynthResult(np.zeros(n_samples), sample_rate_hz, 1.0, 0)
    omega_d = omega_d[keep]
    damping = damping[keep]
    displacement = tuned.shapes[impact.node, keep] * tuned.shape_scale
    amplitudes = displacement * impact.impulse / omega_d / impact.listener_distance
    t = np.arange(n_samples) / sample_rate_hz
    signal = np.einsum(
        "m,mt->t", amplitudes,
        np.exp(-damping[:, None] * t[None, :]) * np.sin(omega_d[:, None] * t[None, :]))
    peak = float(np.max(np.abs(signal)))
    if peak == 0.0:
        warnings.warn("excitation point is a node of every retained mode",
                      SilentModelWarning, stacklevel=2)
        return SynthResult(signal, sample_rate_hz, 1.0, int(keep.sum()))
    gain = 0.9 / peak
    return SynthResult(signal * gain, sample_rate_hz, gain, int(keep.sum()))


# ---------------------------------------------------------------------------
# Envelopes


@dataclass(frozen=True)
class EnvelopeSpline:
    """Gain and pitch-ratio automation over time.

    Each channel is a tuple of (time_s, value) control points with strictly
    increasing times; values are interpolated with a Catmull-Rom spline and
    held constant beyond the first/last point. Gains must be >= 0, pitch
    ratios > 0.
    """

    gain: tuple = ((0.0, 1.0),)
    pitch_ratio: tuple = ((0.0, 1.0),)

    def __post_init__(self):
        for label, points, lower_ok in (("gain", self.gain, 0.0),
                                        ("pitch_ratio", self.pitch_ratio, None)):
            if len(points) == 0:
                raise InvalidArgument(f"{label} needs at least one control point")
            times = [t for t, _ in points]
            if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
                raise InvalidArgument(f"{label} times must be strictly increasing")
            for _, value in points:
                if label == "gain" and value < 0:
                    raise InvalidArgument("gain values must be >= 0")
                if label == "pitch_ratio" and value <= 0:
                    raise InvalidArgument("pitch ratios must be > 0")


def catmull_rom(points, query: np.ndarray) -> np.ndarray:
    """Evaluate a centripetal-free (uniform-tangent) Catmull-Rom spline.

    Tangents are central differences over the non-uniform knot spacing with
    one-sided differences at the ends; outside the knot span the curve is
    clamped to the end values. Two points degenerate to linear interpolation.
    """
    ts = np.array([t for t, _ in points], dtype=float)
    vs = np.array([v for _, v in points], dtype=float)
    query = np.asarray(query, dtype=float)
    if ts.size == 1:
        return np.full(query.shape, vs[0])
    tangents = np.empty_like(vs)
    tangents[0] = (vs[1] - vs[0]) / (ts[1] - ts[0])
    tangents[-1] = (vs[-1] - vs[-2]) / (ts[-1] - ts[-2])
    if ts.size > 2:
        tangents[1:-1] = (vs[2:] - vs[:-2]) / (ts[2:] - ts[:-2])
    seg = np.clip(np.searchsorted(ts, query, side="right") - 1, 0, ts.size - 2)
    t0 = ts[seg]
    dt = ts[seg + 1] - t0
    s = np.clip((query - t0) / dt, 0.0, 1.0)
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return (h00 * vs[seg] + h10 * dt * tangents[seg]
            + h01 * vs[seg + 1] + h11 * dt * tangents[seg + 1])


def apply_envelope(samples: np.ndarray, spline: EnvelopeSpline,
                   sample_rate_hz: float) -> np.ndarray:
    """Pitch-shift by time-remapping, then apply the gain curve.

    The read position advances by the instantaneous pitch ratio each output
    sample (linear-interpolated reads, zero beyond the source); gain is then
    applied at output time. An identity spline returns the input unchanged.
    """
    if sample_rate_hz <= 0:
        raise InvalidArgument("sample rate must be positive")
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if n == 0:
        return samples.copy()
    t_out = np.arange(n) / sample_rate_hz
    ratio = catmull_rom(spline.pitch_ratio, t_out)
    read_pos = np.concatenate(([0.0], np.cumsum(ratio[:-1])))
    shifted = np.interp(read_pos, np.arange(n), samples, left=0.0, right=0.0)
    return shifted * catmull_rom(spline.gain, t_out)


# ---------------------------------------------------------------------------
# Document serialization (format_version 1)


def material_to_document(material: Material) -> dict:
    return {
        "name": material.name,
        "youngs_modulus_pa": material.youngs_modulus,
        "density_kgpm3": material.density,
        "rayleigh_alpha": material.rayleigh_alpha,
        "rayleigh_beta": material.rayleigh_beta,
    }


def material_from_document(doc) -> Material:
    """Full parameter set, or just {"name": ...} for a catalog material."""
    if not isinstance(doc, dict):
        raise ParseError("expected a material object", path="$.material")
    doc = dict(doc)
    if set(doc) == {"name"}:
        name = doc["name"]
        if name not in MATERIALS:
            raise ParseError(f"unknown material {name!r}; catalog: "
                             f"{', '.join(sorted(MATERIALS))}",
                             path="$.material.name")
        return MATERIALS[name]
    try:
        material = Material(
            name=str(doc.pop("name", "custom")),
            youngs_modulus=float(doc.pop("youngs_modulus_pa")),
            density=float(doc.pop("density_kgpm3")),
            rayleigh_alpha=float(doc.pop("rayleigh_alpha", 0.0)),
            rayleigh_beta=float(doc.pop("rayleigh_beta", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad material document: {exc}",
                         path="$.material") from None
    except InvalidArgument as exc:
        raise ParseError(str(exc), path="$.material") from None
    if doc:
        raise ParseError(f"unknown field {sorted(doc)[0]!r}", path="$.material")
    return material


def model_to_document(model: ModalModel) -> dict:
    return {
        "format_version": 1,
        "kind": "modal_model",
        "angular_frequencies_rad_s": model.angular_frequencies.tolist(),
        "shapes": model.shapes.tolist(),
        "rigid": [bool(r) for r in model.rigid],
        "node_positions_m": model.node_positions.tolist(),
        "cell_size_m": model.cell_size,
        "material": material_to_document(model.material),
        "reference_material": material_to_document(model.reference_material),
        "shape_scale": model.shape_scale,
    }


def document_to_model(doc) -> ModalModel:
    if not isinstance(doc, dict):
        raise ParseError("expected an object", path="$")
    doc = dict(doc)
    if doc.pop("format_version", None) != 1:
        raise ParseError("unsupported format_version", path="$.format_version")
    if doc.pop("kind", None) != "modal_model":
        raise ParseError("kind must be 'modal_model'", path="$.kind")
    try:
        omega = np.asarray(doc.pop("angular_frequencies_rad_s"), dtype=float)
        shapes = np.asarray(doc.pop("shapes"), dtype=float)
        rigid = np.asarray(doc.pop("rigid"), dtype=bool)
        positions = np.asarray(doc.pop("node_positions_m"), dtype=float)
        cell_size = float(doc.pop("cell_size_m"))
        material = material_from_document(doc.pop("material"))
        reference = material_from_document(doc.pop("reference_material"))
        shape_scale = float(doc.pop("shape_scale"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad modal model document: {exc}", path="$") from None
    if doc:
        raise ParseError(f"unknown field {sorted(doc)[0]!r}", path="$")
    if (omega.ndim != 1 or shapes.ndim != 2 or positions.ndim != 2
            or rigid.shape != omega.shape
            or shapes.shape[1] != omega.shape[0]
            or positions.shape != (shapes.shape[0], 3)):
        raise ParseError("model arrays have inconsistent shapes", path="$")
    return ModalModel(
        angular_frequencies=omega, shapes=shapes, rigid=rigid,
        node_positions=positions, cell_size=cell_size, material=material,
        reference_material=reference, shape_scale=shape_scale)


def serialize_model(model: ModalModel) -> str:
    return json.dumps(model_to_document(model), indent=2) + "\n"


def parse_model(text: str) -> ModalModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    return document_to_model(doc)
