"""Command-line interface.

Exit codes: 0 success, 1 computation or validation error, 2 usage error.
Given the same inputs and --seed, every output file is byte-identical
across runs and matches the HTTP service's output for the same request.
"""

import argparse
import os
import sys

from .coding import BandPlan, ProbeSignal, TagPayload, decode, encode, \
    probe_transmission_loss
from .core import FrequencyGrid
from .design import design_resonances, design_transmission_loss, parse, \
    serialize, validate
from .errors import AcouforgeError, ValidationFailed
from .formats import CSV_HEADER, spectrum_to_csv, wav_bytes
from .meshplan import plan, read_off
from .modal import MATERIALS, Impact, Material, build_lattice, eigenmodes, \
    synthesize
from .optimize import NotchTargets, PitchTargets, SearchConfig, search
from .voxel import export_stl, voxelize

DEFAULT_STORE_DIR = "acouforge-store"


# ---------------------------------------------------------------------------
# Shared helpers


def _load_design(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise AcouforgeError(f"cannot read {path}: {exc.strerror or exc}") \
            from None
    design = parse(text)
    violations = validate(design)
    if violations:
        raise ValidationFailed(violations)
    return design


def _write_text(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_bytes(path: str, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


def _grid(args) -> FrequencyGrid:
    return FrequencyGrid(args.fmin, args.fmax, args.n, args.spacing)


def _float_list(text: str) -> list:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float "
                                         f"list: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer "
                                         f"list: {text!r}") from None


def _material(text: str) -> Material:
    """Catalog name, or E:RHO[:ALPHA[:BETA]] in SI units."""
    if text in MATERIALS:
        return MATERIALS[text]
    parts = text.split(":")
    if len(parts) in (2, 3, 4):
        try:
            numbers = [float(p) for p in parts]
        except ValueError:
            numbers = None
        if numbers is not None:
            alpha = numbers[2] if len(numbers) > 2 else 0.0
            beta = numbers[3] if len(numbers) > 3 else 0.0
            return Material("custom", numbers[0], numbers[1], alpha, beta)
    raise argparse.ArgumentTypeError(
        f"unknown material {text!r}; use one of "
        f"{', '.join(sorted(MATERIALS))} or E:RHO[:ALPHA[:BETA]]")


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_spectrum(args) -> int:
    design = _load_design(args.design)
    spectrum = design_transmission_loss(design, _grid(args), losses=args.losses)
    _write_text(args.output, spectrum_to_csv(spectrum))
    return 0


def _cmd_resonances(args) -> int:
    design = _load_design(args.design)
    peaks = design_resonances(design, _grid(args), max_count=args.max_count,
                              losses=args.losses)
    rows = [CSV_HEADER]
    rows += [f"{peak.frequency!r},{peak.prominence!r}" for peak in peaks]
    _write_text(args.output, "\n".join(rows) + "\n")
    return 0


def _cmd_optimize(args) -> int:
    design = _load_design(args.design)
    if args.midi is not None:
        target = PitchTargets.from_midi(args.midi, args.tolerance_cents)
    else:
        target = NotchTargets(tuple(args.notch_hz), args.depth_db)
    config = SearchConfig(
        grid=_grid(args), seed=args.seed, max_iterations=args.iterations,
        initial_temperature=args.temperature, cooling=args.cooling,
        max_branches=args.max_branches, refine_max_evals=args.refine_evals,
        losses=args.losses)
    result = search(design, target, config)
    _write_text(args.output, serialize(result.design))
    print(f"objective: {result.objective!r}", file=sys.stderr)
    print(f"residuals: {' '.join(repr(r) for r in result.residuals)}",
          file=sys.stderr)
    print(f"evaluations: {result.evaluations}", file=sys.stderr)
    print(f"wall_time_s: {result.wall_time_s:.3f}", file=sys.stderr)
    print(f"success: {str(result.success).lower()}", file=sys.stderr)
    return 0


def _cmd_encode(args) -> int:
    payload = TagPayload.from_string(
        args.bits, BandPlan(args.base, args.step), args.threshold)
    design = encode(payload)
    _write_text(args.output, serialize(design))
    return 0


def _cmd_decode_sim(args) -> int:
    design = _load_design(args.design)
    meta = design.metadata
    base = args.base if args.base is not None \
        else meta.get("band_plan_base_hz")
    step = args.step if args.step is not None \
        else meta.get("band_plan_step_hz")
    bits = args.bits if args.bits is not None else meta.get("bit_count")
    threshold = args.threshold if args.threshold is not None \
        else meta.get("threshold_db", 10.0)
    if base is None or step is None or bits is None:
        raise AcouforgeError(
            "design metadata lacks a band plan; pass --base, --step and "
            "--bits explicitly")
    band_plan = BandPlan(float(base), float(step))
    grid = band_plan.analysis_grid(int(bits), resolution_hz=args.resolution)
    probe = ProbeSignal(seed=args.probe_seed)
    spectrum = probe_transmission_loss(design, probe, grid)
    decoded = decode(spectrum, band_plan, int(bits), float(threshold))
    print("".join("1" if b else "0" for b in decoded))
    return 0


def _cmd_synth(args) -> int:
    design = _load_design(args.design)
    grid = voxelize(design, args.cell_size)
    model = eigenmodes(build_lattice(grid, args.material),
                       max_modes=args.max_modes)
    impact = Impact(node=args.node, impulse=args.impulse,
                    listener_distance=args.distance)
    result = synthesize(model, args.material, impact,
                        duration_s=args.duration,
                        sample_rate_hz=args.rate)
    _write_bytes(args.output, wav_bytes(result.samples, result.sample_rate))
    print(f"active_modes: {result.active_modes}", file=sys.stderr)
    print(f"gain: {result.gain!r}", file=sys.stderr)
    return 0


def _cmd_plan_mesh(args) -> int:
    if args.frequencies is not None:
        frequencies = args.frequencies
    else:
        frequencies = list(_grid(args).frequencies)
    if args.mesh is not None:
        area_source = read_off(args.mesh)
    else:
        area_source = args.area
    result = plan(frequencies, area_source,
                  elements_per_wavelength=args.per_wavelength,
                  cost_exponent=args.exponent)
    rows = ["frequency_hz,target_edge_length_m,element_count"]
    for row in result.rows:
        rows.append(f"{row.frequency_hz!r},{row.target_edge_length_m!r},"
                    f"{row.element_count}")
    _write_text(args.output, "\n".join(rows) + "\n")
    # summary on stderr keeps stdout machine-readable
    print(f"speedup: {result.speedup!r} (naive {result.naive_cost!r}, "
          f"adaptive {result.adaptive_cost!r})", file=sys.stderr)
    return 0


def _cmd_export_stl(args) -> int:
    design = _load_design(args.design)
    grid = voxelize(design, args.cell_size)
    wall = args.wall if args.wall is not None else args.cell_size
    _write_bytes(args.output, export_stl(grid, wall))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store_dir = os.environ.get("ACOUFORGE_STORE") or args.store
    app = create_app(store_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_grid_flags(sub, fmin=100.0, fmax=4000.0, n=512):
    sub.add_argument("--fmin", type=float, default=fmin,
                     help="grid start in Hz (default %(default)s)")
    sub.add_argument("--fmax", type=float, default=fmax,
                     help="grid end in Hz (default %(default)s)")
    sub.add_argument("--n", type=int, default=n,
                     help="grid point count (default %(default)s)")
    sub.add_argument("--spacing", choices=("linear", "logarithmic"),
                     default="linear", help="grid spacing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acouforge",
        description="Acoustic filter design, encoding, and modal sound tools")
    commands = parser.add_subparsers(dest="command", required=True)

    spectrum = commands.add_parser(
        "spectrum", help="transmission-loss CSV for a design")
    spectrum.add_argument("design", help="design document path")
    _add_grid_flags(spectrum)
    spectrum.add_argument("--losses", action="store_true",
                          help="include thermoviscous wall losses")
    spectrum.add_argument("-o", "--output", help="CSV path (default stdout)")
    spectrum.set_defaults(func=_cmd_spectrum)

    resonances = commands.add_parser(
        "resonances", help="admittance peaks (playable pitches) as CSV")
    resonances.add_argument("design")
    _add_grid_flags(resonances)
    resonances.add_argument("--max-count", type=int, default=16)
    resonances.add_argument("--losses", action="store_true")
    resonances.add_argument("-o", "--output")
    resonances.set_defaults(func=_cmd_resonances)

    optimize = commands.add_parser(
        "optimize", help="anneal+refine a design toward pitch or notch targets")
    optimize.add_argument("design", help="starting design document")
    group = optimize.add_mutually_exclusive_group(required=True)
    group.add_argument("--midi", type=_int_list,
                       help="comma-separated MIDI pitch targets")
    group.add_argument("--notch-hz", type=_float_list,
                       help="comma-separated notch frequencies in Hz")
    optimize.add_argument("--tolerance-cents", type=float, default=10.0)
    optimize.add_argument("--depth-db", type=float, default=10.0,
                          help="required notch depth (with --notch-hz)")
    _add_grid_flags(optimize)
    optimize.add_argument("--seed", type=int, default=0)
    optimize.add_argument("--iterations", type=int, default=2000)
    optimize.add_argument("--temperature", type=float, default=100.0)
    optimize.add_argument("--cooling", type=float, default=0.95)
    optimize.add_argument("--max-branches", type=int, default=4)
    optimize.add_argument("--refine-evals", type=int, default=400)
    optimize.add_argument("--losses", action="store_true")
    optimize.add_argument("-o", "--output",
                          help="optimized design path (default stdout); "
                               "the run summary goes to stderr")
    optimize.set_defaults(func=_cmd_optimize)

    encode_cmd = commands.add_parser(
        "encode", help="design whose notches encode a bit string")
    encode_cmd.add_argument("--bits", required=True,
                            help="payload, e.g. 1011 (1 to 16 bits)")
    encode_cmd.add_argument("--base", type=float, default=800.0,
                            help="bit 0 band centre in Hz")
    encode_cmd.add_argument("--step", type=float, default=400.0,
                            help="band spacing in Hz")
    encode_cmd.add_argument("--threshold", type=float, default=10.0,
                            help="decode threshold in dB")
    encode_cmd.add_argument("-o", "--output")
    encode_cmd.set_defaults(func=_cmd_encode)

    decode_cmd = commands.add_parser(
        "decode-sim", help="probe a design acoustically and print its bits")
    decode_cmd.add_argument("design")
    decode_cmd.add_argument("--bits", type=int,
                            help="bit count (default: design metadata)")
    decode_cmd.add_argument("--base", type=float,
                            help="band base in Hz (default: design metadata)")
    decode_cmd.add_argument("--step", type=float,
                            help="band step in Hz (default: design metadata)")
    decode_cmd.add_argument("--threshold", type=float,
                            help="decode threshold in dB")
    decode_cmd.add_argument("--resolution", type=float, default=5.0,
                            help="analysis grid resolution in Hz")
    decode_cmd.add_argument("--probe-seed", type=int, default=0)
    decode_cmd.set_defaults(func=_cmd_decode_sim)

    synth = commands.add_parser(
        "synth", help="impact sound of the voxelized design as WAV")
    synth.add_argument("design")
    synth.add_argument("--material", type=_material, default=MATERIALS["pla"],
                       help="catalog name or E:RHO[:ALPHA[:BETA]]")
    synth.add_argument("--cell-size", type=float, default=0.01,
                       help="voxel size in m (default %(default)s)")
    synth.add_argument("--max-modes", type=int, default=64)
    synth.add_argument("--node", type=int, default=0,
                       help="struck lattice node index")
    synth.add_argument("--impulse", type=float, default=1.0)
    synth.add_argument("--distance", type=float, default=1.0)
    synth.add_argument("--duration", type=float, default=1.0)
    synth.add_argument("--rate", type=float, default=44100.0)
    synth.add_argument("-o", "--output", required=True, help="WAV path")
    synth.set_defaults(func=_cmd_synth)

    plan_mesh = commands.add_parser(
        "plan-mesh", help="per-frequency element budgets and speedup")
    plan_mesh.add_argument("--frequencies", type=_float_list,
                           help="explicit comma-separated list; otherwise "
                                "the grid flags below are used")
    _add_grid_flags(plan_mesh, n=20)
    source = plan_mesh.add_mutually_exclusive_group(required=True)
    source.add_argument("--mesh", help="OFF mesh whose area to use")
    source.add_argument("--area", type=float, help="surface area in m^2")
    plan_mesh.add_argument("--per-wavelength", type=float, default=6.0)
    plan_mesh.add_argument("--exponent", type=float, default=3.0,
                           help="solver cost exponent")
    plan_mesh.add_argument("-o", "--output",
                           help="CSV path (default stdout); the speedup "
                                "summary goes to stderr")
    plan_mesh.set_defaults(func=_cmd_plan_mesh)

    export = commands.add_parser(
        "export-stl", help="watertight printable shell of a design")
    export.add_argument("design")
    export.add_argument("--cell-size", type=float, default=0.01)
    export.add_argument("--wall", type=float,
                        help="shell wall thickness in m (default: one cell)")
    export.add_argument("-o", "--output", required=True, help="STL path")
    export.set_defaults(func=_cmd_export_stl)

    serve = commands.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8077)
    serve.add_argument("--store", default=DEFAULT_STORE_DIR,
                       help="persistence directory; the ACOUFORGE_STORE "
                            "environment variable overrides this flag")
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except AcouforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
