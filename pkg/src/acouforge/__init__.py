"""Acouforge: design studio for printable acoustic filters and modal sound."""

from .coding import (
    BandPlan,
    EncodeConfig,
    ProbeSignal,
    TagPayload,
    Waveform,
    decode,
    encode,
    estimate_spectrum,
    probe_burst,
    probe_transmission_loss,
    simulate_response,
)
from .core import (
    Anechoic,
    Closed,
    FrequencyGrid,
    Medium,
    OpenEnd,
    Resonance,
    Spectrum,
    TransferMatrixSpectrum,
    cascade,
    find_resonances,
    first_cutoff_frequency,
    helmholtz_resonance,
    input_impedance,
    shunt_matrix,
    transmission_loss,
    tube_matrix,
)
from .design import (
    Chamber,
    FilterDesign,
    HelmholtzBranch,
    QuarterWaveBranch,
    Tube,
    Violation,
    demo_design,
    design_input_impedance,
    design_resonances,
    design_to_document,
    design_transmission_loss,
    document_to_design,
    parse,
    serialize,
    to_transfer_matrix,
    validate,
)
from .errors import (
    AcouforgeError,
    AliasingError,
    BandOutOfRange,
    DisconnectedLattice,
    IncompatibleGrids,
    InvalidArgument,
    InvalidBandPlan,
    ModelTooLarge,
    NotchClampWarning,
    NothingToExport,
    ParseError,
    PlaneWaveBandWarning,
    ReferenceTooQuiet,
    SilentModelWarning,
    StoreUnavailable,
    ValidationFailed,
    VoxelizationTooCoarse,
)
from .formats import (
    CSV_HEADER,
    parse_spectrum_csv,
    parse_wav,
    spectrum_to_csv,
    wav_bytes,
)
from .meshplan import (
    PlanRow,
    SimplificationPlan,
    SurfaceMesh,
    cluster_decimate,
    format_off,
    parse_off,
    plan,
    read_off,
    target_edge_length,
    write_off,
)
from .modal import (
    MATERIALS,
    EnvelopeSpline,
    Impact,
    LatticeAssembly,
    Material,
    ModalModel,
    SynthResult,
    apply_envelope,
    build_lattice,
    document_to_model,
    eigenmodes,
    jacobi_eigh,
    material_from_document,
    material_to_document,
    model_to_document,
    parse_model,
    retune,
    serialize_model,
    synthesize,
)
from .optimize import (
    CurveTarget,
    DimensionRange,
    NotchTargets,
    OptimizationResult,
    PitchTargets,
    SearchConfig,
    anneal,
    cents,
    default_catalog,
    note_to_frequency,
    objective,
    refine,
    residuals,
    search,
    target_met,
)
from .store import DocumentStore, content_id
from .voxel import (
    VoxelGrid,
    document_to_grid,
    export_stl,
    grid_to_document,
    read_stl,
    stl_signed_volume,
    voxelize,
)

__version__ = "0.1.0"
