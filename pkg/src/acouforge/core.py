"""Plane-wave transmission-line acoustics.

Every duct element is reduced to a frequency-dependent 2x2 four-pole matrix
relating the acoustic state (pressure p [Pa], volume velocity U [m^3/s]) at
its inlet to the state at its outlet:

    [p_in, U_in]^T = T(f) . [p_out, U_out]^T

Series assemblies compose by the per-frequency matrix product in chain order;
side branches enter as shunt elements. All impedances are acoustic impedances
rho*c/S. Functions here are pure; results are safe to share across threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.signal import find_peaks

from .errors import IncompatibleGrids, InvalidArgument, NotchClampWarning

# Thermo-viscous loss constants for air (used only when losses are enabled).
AIR_VISCOSITY = 1.81e-5  # Pa.s
GAMMA = 1.4
PRANDTL = 0.71

# First non-planar duct mode of a circular duct appears at ka = 1.8412.
FIRST_CUTOFF_KA = 1.8412

TL_MAX_DB = 120.0
IMPEDANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class Medium:
    """Propagation medium; defaults are air at 20 degC."""

    sound_speed: float = 343.0  # m/s
    density: float = 1.21  # kg/m^3

    def __post_init__(self):
        if self.sound_speed <= 0 or self.density <= 0:
            raise InvalidArgument("medium sound_speed and density must be positive")

    def characteristic_impedance(self, radius: float) -> float:
        """Acoustic impedance rho*c/S of a circular duct of the given radius."""
        return self.density * self.sound_speed / (math.pi * radius * radius)


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing evaluation frequencies in Hz."""

    f_min: float
    f_max: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if not (0 < self.f_min < self.f_max):
            raise InvalidArgument("need 0 < f_min < f_max")
        if self.count < 2:
            raise InvalidArgument("grid count must be >= 2")
        if self.spacing not in ("linear", "logarithmic"):
            raise InvalidArgument(f"unknown grid spacing {self.spacing!r}")

    @cached_property
    def frequencies(self) -> np.ndarray:
        if self.spacing == "linear":
            f = np.linspace(self.f_min, self.f_max, self.count)
        else:
            f = np.geomspace(self.f_min, self.f_max, self.count)
        f.flags.writeable = False
        return f


def as_frequencies(grid) -> np.ndarray:
    """Accept a FrequencyGrid or a plain array of frequencies in Hz."""
    if isinstance(grid, FrequencyGrid):
        return grid.frequencies
    f = np.atleast_1d(np.asarray(grid, dtype=float))
    if f.ndim != 1 or f.size == 0:
        raise InvalidArgument("frequency array must be 1-D and nonempty")
    if f.size > 1 and np.any(np.diff(f) <= 0):
        raise InvalidArgument("frequencies must be strictly increasing")
    return f


def first_cutoff_frequency(radius: float, medium: Medium) -> float:
    """Frequency of the first non-planar mode, 1.8412*c/(2*pi*r)."""
    return FIRST_CUTOFF_KA * medium.sound_speed / (2.0 * math.pi * radius)


# ---------------------------------------------------------------------------
# Transfer matrices


@dataclass(frozen=True)
class TransferMatrixSpectrum:
    """Per-frequency four-pole matrix entries (A, B, C, D)."""

    frequencies: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        n = self.frequencies.shape[0]
        for entry in (self.a, self.b, self.c, self.d):
            if entry.shape != (n,):
                raise InvalidArgument("matrix entries must match the grid length")

    @staticmethod
    def identity(grid) -> "TransferMatrixSpectrum":
        f = as_frequencies(grid)
        one = np.ones_like(f, dtype=complex)
        zero = np.zeros_like(f, dtype=complex)
        return TransferMatrixSpectrum(f, one, zero, zero, one.copy())

    def det(self) -> np.ndarray:
        return self.a * self.d - self.b * self.c

    def matmul(self, other: "TransferMatrixSpectrum") -> "TransferMatrixSpectrum":
        """Per-frequency product self @ other (self closer to the inlet)."""
        _check_same_grid(self, other)
        return TransferMatrixSpectrum(
            self.frequencies,
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )


def _check_same_grid(t1: TransferMatrixSpectrum, t2: TransferMatrixSpectrum):
    f1, f2 = t1.frequencies, t2.frequencies
    if f1.shape != f2.shape or not np.array_equal(f1, f2):
        raise IncompatibleGrids("transfer matrices are on different frequency grids")


@dataclass(frozen=True)
class Spectrum:
    """Real-valued per-frequency quantity."""

    frequencies: np.ndarray
    values: np.ndarray
    kind: str  # transmission_loss_dB | impedance_magnitude | admittance_magnitude

    def __post_init__(self):
        if self.values.shape != self.frequencies.shape:
            raise InvalidArgument("value count must equal grid count")


def _require_positive(**dims):
    for name, value in dims.items():
        if not value > 0:
            raise InvalidArgument(f"{name} must be positive, got {value}")


def _floor_magnitude(values: np.ndarray, floor: float) -> np.ndarray:
    """Clamp |values| from below, preserving phase where one exists."""
    mag = np.abs(values)
    small = mag < floor
    if not np.any(small):
        return values
    safe = np.where(mag > 0, mag, 1.0)
    unit = np.where(mag > 0, values / safe, 1.0)
    return np.where(small, floor * unit, values)


def viscous_attenuation(radius: float, omega: np.ndarray, medium: Medium) -> np.ndarray:
    """Thermo-viscous boundary-layer attenuation per unit length.

    alpha = (1/(r*c)) * sqrt(mu*omega/(2*rho)) * (1 + (gamma-1)/sqrt(Pr))
    """
    return (
        (1.0 / (radius * medium.sound_speed))
        * np.sqrt(AIR_VISCOSITY * omega / (2.0 * medium.density))
        * (1.0 + (GAMMA - 1.0) / math.sqrt(PRANDTL))
    )


def _wavenumber(freqs: np.ndarray, radius: float, medium: Medium, losses: bool) -> np.ndarray:
    omega = 2.0 * math.pi * freqs
    k = omega / medium.sound_speed
    if losses:
        k = k - 1j * viscous_attenuation(radius, omega, medium)
    return k


def tube_matrix(length: float, radius: float, medium: Medium, grid,
                losses: bool = False) -> TransferMatrixSpectrum:
    """Four-pole matrix of a uniform circular duct section.

    With k = 2*pi*f/c (minus i*alpha_visc when losses are on), S = pi*r^2
    and Z = rho*c/S:

        A = cos(kL)      B = i*Z*sin(kL)
        C = i*sin(kL)/Z  D = cos(kL)

    A zero length is the identity at all frequencies. det(T) = 1 exactly
    when losses are off (cos^2 + sin^2 = 1).
    """
    if length < 0:
        raise InvalidArgument(f"length must be >= 0, got {length}")
    _require_positive(radius=radius)
    f = as_frequencies(grid)
    if length == 0.0:
        return TransferMatrixSpectrum.identity(f)
    k = _wavenumber(f, radius, medium, losses)
    z = medium.characteristic_impedance(radius)
    kl = k * length
    cos_kl = np.cos(kl).astype(complex)
    sin_kl = np.sin(kl).astype(complex)
    return TransferMatrixSpectrum(f, cos_kl, 1j * z * sin_kl, 1j * sin_kl / z, cos_kl.copy())


def shunt_matrix(branch_impedance: np.ndarray, grid) -> TransferMatrixSpectrum:
    """Shunt element [[1, 0], [1/Z_b, 1]] for a side branch of impedance Z_b.

    |Z_b| below 1e-12 is regularized to 1e-12 (exact notch clamp); an absent
    branch corresponds to Z_b = inf and yields the identity. det = 1 exactly.
    """
    f = as_frequencies(grid)
    zb = np.asarray(branch_impedance, dtype=complex)
    if zb.shape != f.shape:
        raise InvalidArgument("branch impedance must match the grid length")
    mag = np.abs(zb)
    small = mag < IMPEDANCE_FLOOR  # infinite impedances compare False
    if np.any(small):
        warnings.warn("branch impedance clamped at exact notch", NotchClampWarning,
                      stacklevel=2)
        zb = zb.copy()
        submag = mag[small]
        unit = np.where(submag > 0, zb[small] / np.where(submag > 0, submag, 1.0), 1.0)
        zb[small] = IMPEDANCE_FLOOR * unit
    admittance = np.zeros_like(zb)
    finite = np.isfinite(zb)
    admittance[finite] = 1.0 / zb[finite]
    one = np.ones_like(f, dtype=complex)
    zero = np.zeros_like(f, dtype=complex)
    return TransferMatrixSpectrum(f, one, zero, admittance, one.copy())


def quarter_wave_impedance(length: float, radius: float, medium: Medium, grid) -> np.ndarray:
    """Input impedance of a closed side tube, Z_b = -i*(rho*c/S_b)*cot(kL).

    Z_b passes through zero at f = (2n-1)*c/(4L): the branch shorts the main
    line there and produces a transmission-loss notch.
    """
    _require_positive(length=length, radius=radius)
    f = as_frequencies(grid)
    zb0 = medium.characteristic_impedance(radius)
    kl = 2.0 * math.pi * f * length / medium.sound_speed
    with np.errstate(divide="ignore"):
        cot = np.cos(kl) / np.sin(kl)
    return -1j * zb0 * cot


def helmholtz_impedance(neck_length: float, neck_radius: float, cavity_volume: float,
                        medium: Medium, grid) -> np.ndarray:
    """Series neck-mass / cavity-compliance branch impedance.

    Z_b = i*(rho*omega*L_eff/S_n - rho*c^2/(omega*V)) with the flanged end
    correction L_eff = L_n + 1.7*r_n. Zero crossing (resonance) at
    f0 = (c/2pi)*sqrt(S_n/(L_eff*V)).
    """
    _require_positive(neck_length=neck_length, neck_radius=neck_radius,
                      cavity_volume=cavity_volume)
    f = as_frequencies(grid)
    omega = 2.0 * math.pi * f
    s_n = math.pi * neck_radius * neck_radius
    l_eff = neck_length + 1.7 * neck_radius
    rho, c = medium.density, medium.sound_speed
    with np.errstate(divide="ignore"):
        return 1j * (rho * omega * l_eff / s_n - rho * c * c / (omega * cavity_volume))


def helmholtz_resonance(neck_length: float, neck_radius: float, cavity_volume: float,
                        medium: Medium) -> float:
    """Closed-form zero of helmholtz_impedance, (c/2pi)*sqrt(S_n/(L_eff*V))."""
    s_n = math.pi * neck_radius * neck_radius
    l_eff = neck_length + 1.7 * neck_radius
    return medium.sound_speed / (2.0 * math.pi) * math.sqrt(s_n / (l_eff * cavity_volume))


def cascade(elements) -> TransferMatrixSpectrum:
    """Per-frequency matrix product of elements in inlet-to-outlet order."""
    elements = list(elements)
    if not elements:
        raise InvalidArgument("cascade needs at least one element")
    result = elements[0]
    for element in elements[1:]:
        result = result.matmul(element)
    return result


def transmission_loss(t: TransferMatrixSpectrum, port_radius: float,
                      medium: Medium) -> Spectrum:
    """Transmission loss between matched ports of equal radius.

    With Z0 = rho*c/(pi*r^2):

        TL = 20*log10(|A + B/Z0 + C*Z0 + D| / 2)

    clamped to [0, 120] dB. A matched uniform duct gives identically 0 dB.
    """
    _require_positive(port_radius=port_radius)
    z0 = medium.characteristic_impedance(port_radius)
    magnitude = np.abs(t.a + t.b / z0 + t.c * z0 + t.d) / 2.0
    with np.errstate(divide="ignore"):
        tl = 20.0 * np.log10(magnitude)
    tl = np.clip(tl, 0.0, TL_MAX_DB)
    return Spectrum(t.frequencies, tl, "transmission_loss_dB")


@dataclass(frozen=True)
class OpenEnd:
    """Unflanged open termination; Levine-Schwinger low-ka load.

    Z_L = Z0 * ((ka)^2/4 + i*0.6133*ka) with Z0 = rho*c/(pi*a^2).
    """

    radius: float


@dataclass(frozen=True)
class Closed:
    """Rigid termination, Z_L = inf (Z_in reduces to A/C)."""


@dataclass(frozen=True)
class Anechoic:
    """Reflection-free termination with the given acoustic impedance."""

    impedance: float


def input_impedance(t: TransferMatrixSpectrum, termination, medium: Medium) -> np.ndarray:
    """Impedance seen at the inlet, Z_in = (A*Z_L + B)/(C*Z_L + D).

    The denominator magnitude is floored at 1e-12 so values stay finite at
    exact resonances.
    """
    f = t.frequencies
    if isinstance(termination, Closed):
        num, den = t.a, t.c
    else:
        if isinstance(termination, OpenEnd):
            a = termination.radius
            _require_positive(radius=a)
            ka = 2.0 * math.pi * f * a / medium.sound_speed
            z0 = medium.characteristic_impedance(a)
            z_load = z0 * (0.25 * ka**2 + 1j * 0.6133 * ka)
        elif isinstance(termination, Anechoic):
            z_load = np.full(f.shape, termination.impedance, dtype=complex)
        else:
            raise InvalidArgument(f"unknown termination {termination!r}")
        num = t.a * z_load + t.b
        den = t.c * z_load + t.d
    return num / _floor_magnitude(den, IMPEDANCE_FLOOR)


@dataclass(frozen=True)
class Resonance:
    frequency: float
    prominence: float


def find_resonances(spec: Spectrum, max_count: int = 16) -> list[Resonance]:
    """Locate spectral peaks, strongest first, reported in frequency order.

    Interior local maxima of the log-magnitude are refined by 3-point
    parabolic interpolation; peaks are ranked by prominence (ties broken
    toward the lower frequency) and the top max_count survive. A flat or
    monotone spectrum has no interior maximum and yields an empty list.
    """
    if spec.frequencies.size == 0:
        raise InvalidArgument("spectrum is empty")
    if max_count <= 0:
        return []
    if spec.kind.endswith("_dB"):
        y = spec.values
    else:
        y = 20.0 * np.log10(np.maximum(spec.values, 1e-300))
    peaks, props = find_peaks(y, prominence=0.0)
    if peaks.size == 0:
        return []
    f = spec.frequencies
    refined = []
    for idx, prom in zip(peaks, props["prominences"]):
        y0, y1, y2 = y[idx - 1], y[idx], y[idx + 1]
        denom = y0 - 2.0 * y1 + y2
        delta = 0.5 * (y0 - y2) / denom if denom < 0 else 0.0
        delta = float(np.clip(delta, -0.5, 0.5))
        freq = f[idx] + delta * 0.5 * (f[idx + 1] - f[idx - 1])
        refined.append(Resonance(float(freq), float(prom)))
    refined.sort(key=lambda r: (-r.prominence, r.frequency))
    kept = refined[:max_count]
    kept.sort(key=lambda r: r.frequency)
    return kept
