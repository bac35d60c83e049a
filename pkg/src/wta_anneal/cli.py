"""Command-line driver for the full pipeline.

Subcommands: generate, compile, solve, simulate, spectrum, and
reproduce-paper (the three 12-qubit benchmark shapes end to end).
Option precedence is flags > config file (``--config``) > defaults; the
``WTA_ANNEAL_OUTPUT_DIR`` environment variable sets the default output
directory.  Data files are written atomically (temp file + rename).
"""

from __future__ import annotations

import functools
import json
import os
import sys
import tempfile
from pathlib import Path

import click
import numpy as np

from . import svg
from .errors import (
    EigensolverError,
    IntegrationError,
    ParseError,
    SizeLimitError,
    ValidationError,
    WtaAnnealError,
)
from .evolution import (
    Schedule,
    build_final_hamiltonian_exact,
    build_final_hamiltonian_quadratic,
    build_initial_hamiltonian,
    evolve,
    measure_distribution,
    spectrum as compute_spectrum,
)
from .instance import (
    GeneratorConfig,
    WtaInstance,
    decode_index,
    encode_assignment,
    evaluate_objective,
    generate_instance,
    is_feasible,
    parse_instance,
    serialize_instance,
)
from .solvers import CeParams, brute_force_ising, brute_force_wta, cross_entropy_wta
from .spin_model import (
    compile_instance,
    default_penalty,
    export_coefficients,
    to_ising,
)

_ERROR_CATEGORIES = {
    ParseError: "parse",
    ValidationError: "validation",
    SizeLimitError: "size-limit",
    IntegrationError: "integration",
    EigensolverError: "eigensolver",
    WtaAnnealError: "internal",
    FileNotFoundError: "missing-file",
}


def _category(exc: BaseException) -> str:
    for klass, name in _ERROR_CATEGORIES.items():
        if isinstance(exc, klass):
            return name
    return "internal"


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (WtaAnnealError, FileNotFoundError, OSError) as exc:
            click.echo(f"error[{_category(exc)}]: {exc}", err=True)
            sys.exit(1)

    return wrapper


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_instance(path: str) -> WtaInstance:
    return parse_instance(Path(path).read_text())


def _default_outdir() -> str:
    return os.environ.get("WTA_ANNEAL_OUTPUT_DIR", ".")


def _set_config_defaults(ctx, param, value):
    if not value:
        return value
    try:
        defaults = json.loads(Path(value).read_text())
    except json.JSONDecodeError as exc:
        raise click.BadParameter(f"config file is not valid JSON: {exc}")
    if not isinstance(defaults, dict):
        raise click.BadParameter("config file must be a JSON object of command sections")
    ctx.default_map = defaults
    return value


@click.group()
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    callback=_set_config_defaults,
    expose_value=False,
    is_eager=True,
    help="JSON file with per-command option defaults.",
)
def main():
    """Compile assignment problems to spin models and simulate their annealing."""


@main.command()
@click.option("-m", "num_weapons", type=int, required=True, help="Number of weapons.")
@click.option("-n", "num_targets", type=int, required=True, help="Number of targets.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--value-range", type=float, nargs=2, default=(0.5, 1.5), show_default=True)
@click.option("--prob-range", type=float, nargs=2, default=(0.05, 0.9), show_default=True)
@click.option("--high-threshold", type=float, default=0.9, show_default=True,
              help="Minimum for the guaranteed high kill probability per weapon.")
@click.option("-o", "--output", type=click.Path(), required=True)
@handle_errors
def generate(num_weapons, num_targets, seed, value_range, prob_range, high_threshold, output):
    """Write a random instance file and report its register size."""
    config = GeneratorConfig(
        value_range=tuple(value_range),
        prob_range=tuple(prob_range),
        high_prob_threshold=high_threshold,
    )
    inst = generate_instance(num_weapons, num_targets, seed, config)
    atomic_write(Path(output), serialize_instance(inst))
    click.echo(f"wrote {output}: N={inst.num_qubits} qubits, K={inst.dim} basis states")


@main.command("compile")
@click.argument("instance", type=click.Path())
@click.option("--basis", type=click.Choice(["qubo", "ising", "both"]), default="qubo",
              show_default=True)
@click.option("--penalty", type=float, default=None, help="Constraint penalty C.")
@click.option("--normalize-row-linear", is_flag=True, default=False)
@click.option("-o", "--output", type=click.Path(), required=True,
              help="Output path; with --basis both, `.ising` is appended for the second file.")
@handle_errors
def compile_cmd(instance, basis, penalty, normalize_row_linear, output):
    """Compile an instance to a sparse coefficient file."""
    inst = _load_instance(instance)
    model = compile_instance(inst, penalty=penalty, normalize_row_linear=normalize_row_linear)
    outputs = []
    if basis in ("qubo", "both"):
        atomic_write(Path(output), export_coefficients(model))
        outputs.append((output, model))
    if basis in ("ising", "both"):
        ising = to_ising(model)
        path = output if basis == "ising" else f"{output}.ising"
        atomic_write(Path(path), export_coefficients(ising))
        outputs.append((path, ising))
    for path, mdl in outputs:
        click.echo(
            f"wrote {path}: {mdl.num_sites} sites, {len(mdl.linear)} linear, "
            f"{len(mdl.quadratic)} quadratic terms ({mdl.basis.value})"
        )


def _assignment_doc(inst, bits):
    return {
        "assignment": np.asarray(bits).astype(int).tolist(),
        "index": encode_assignment(bits),
        "objective": evaluate_objective(inst, bits),
        "feasible": is_feasible(bits),
    }


@main.command()
@click.argument("instance", type=click.Path())
@click.option("--method", "methods", multiple=True,
              type=click.Choice(["brute-force", "ising", "ce", "all"]), default=("all",),
              show_default=True)
@click.option("--penalty", type=float, default=None)
@click.option("--ce-samples", type=int, default=500, show_default=True)
@click.option("--ce-elite", type=float, default=0.1, show_default=True)
@click.option("--ce-smoothing", type=float, default=0.7, show_default=True)
@click.option("--ce-max-iterations", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Result JSON path (default: print to stdout).")
@handle_errors
def solve(instance, methods, penalty, ce_samples, ce_elite, ce_smoothing,
          ce_max_iterations, seed, output):
    """Run the classical solvers and report their agreement."""
    inst = _load_instance(instance)
    if "all" in methods:
        methods = ("brute-force", "ising", "ce")
    result = {"instance": str(instance), "m": inst.m, "n": inst.n}
    if "brute-force" in methods:
        bits, value = brute_force_wta(inst)
        result["brute_force_wta"] = _assignment_doc(inst, bits)
    if "ising" in methods:
        C = penalty if penalty is not None else default_penalty(inst)
        model = compile_instance(inst, penalty=C)
        flat, e = brute_force_ising(model)
        ib = flat.reshape((inst.m, inst.n), order="F")
        doc = _assignment_doc(inst, ib)
        doc["energy"] = e
        doc["penalty"] = C
        result["brute_force_ising"] = doc
    if "ce" in methods:
        ce = cross_entropy_wta(
            inst,
            CeParams(
                sample_count=ce_samples,
                elite_fraction=ce_elite,
                smoothing=ce_smoothing,
                max_iterations=ce_max_iterations,
                seed=seed,
            ),
        )
        doc = _assignment_doc(inst, ce.assignment)
        doc["iterations"] = ce.iterations
        doc["converged"] = ce.converged
        doc["sample_count"] = ce_samples
        result["cross_entropy"] = doc
    agreement = {}
    if "brute_force_wta" in result:
        ref = result["brute_force_wta"]["index"]
        if "brute_force_ising" in result:
            agreement["ising_matches_wta"] = result["brute_force_ising"]["index"] == ref
        if "cross_entropy" in result:
            agreement["ce_matches_wta"] = result["cross_entropy"]["index"] == ref
    result["agreement"] = agreement
    text = json.dumps(result, indent=2) + "\n"
    if output:
        atomic_write(Path(output), text)
        click.echo(f"wrote {output}")
    else:
        click.echo(text, nl=False)
    for key, ok in agreement.items():
        click.echo(f"{key}: {str(ok).lower()}")


def _final_hamiltonian(inst, kind, penalty, normalize_row_linear):
    if kind == "quadratic":
        model = compile_instance(inst, penalty=penalty,
                                 normalize_row_linear=normalize_row_linear)
        return build_final_hamiltonian_quadratic(model)
    return build_final_hamiltonian_exact(inst, penalty)


@main.command()
@click.argument("instance", type=click.Path())
@click.option("--final", "finals", multiple=True,
              type=click.Choice(["quadratic", "exact", "both"]), default=("quadratic",),
              show_default=True)
@click.option("--total-time", type=float, default=80.0, show_default=True)
@click.option("--sweep", type=float, multiple=True,
              help="Run a sweep over these durations instead of a single --total-time.")
@click.option("--steps", type=int, default=None, help="Integrator steps (default: auto).")
@click.option("--samples", type=int, default=25, show_default=True)
@click.option("--penalty", type=float, default=None)
@click.option("--normalize-row-linear", is_flag=True, default=False)
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.option("--top-m", type=int, default=32, show_default=True,
              help="Population columns kept in the trace CSV.")
@click.option("--full-trace", is_flag=True, default=False)
@click.option("-o", "--outdir", type=click.Path(), default=_default_outdir)
@handle_errors
def simulate(instance, finals, total_time, sweep, steps, samples, penalty,
             normalize_row_linear, tol, top_m, full_trace, outdir):
    """Simulate the annealing evolution and compare against brute force."""
    inst = _load_instance(instance)
    C = penalty if penalty is not None else default_penalty(inst)
    if "both" in finals:
        finals = ("quadratic", "exact")
    durations = list(sweep) if sweep else [total_time]
    hb = build_initial_hamiltonian(inst.num_qubits)
    outdir = Path(outdir)
    summary = {
        "instance": str(instance), "m": inst.m, "n": inst.n,
        "penalty": C, "runs": [],
    }
    for kind in finals:
        hf = _final_hamiltonian(inst, kind, C, normalize_row_linear)
        ground_index = int(np.argmin(hf.diagonal))
        for T in durations:
            schedule = Schedule(
                total_time=T, num_steps=steps,
                sample_times=tuple(np.linspace(0.0, T, samples)),
            )
            state, trace = evolve(hb, hf, schedule, tol=tol)
            probs = measure_distribution(state)
            argmax = int(np.argmax(probs))
            bits = decode_index(argmax, inst.m, inst.n)
            tag = f"{kind}_T{T:g}"
            atomic_write(
                outdir / f"trace_{tag}.csv",
                trace.to_csv(top_m=None if full_trace else top_m, include=(ground_index,)),
            )
            dist_lines = ["index,population"] + [
                f"{k},{p:.12g}" for k, p in enumerate(probs)
            ]
            atomic_write(outdir / f"distribution_{tag}.csv", "\n".join(dist_lines) + "\n")
            run = {
                "final": kind,
                "total_time": T,
                "argmax_index": argmax,
                "argmax_assignment": bits.astype(int).tolist(),
                "argmax_feasible": is_feasible(bits),
                "objective": evaluate_objective(inst, bits),
                "ground_index": ground_index,
                "ground_population": float(probs[ground_index]),
                "argmax_matches_ground": argmax == ground_index,
                "max_norm_drift": float(np.abs(trace.norms - 1.0).max()),
            }
            summary["runs"].append(run)
            click.echo(
                f"[{tag}] argmax matches ground state: "
                f"{str(run['argmax_matches_ground']).lower()} "
                f"(ground population {run['ground_population']:.4f})"
            )
    if sweep:
        for kind in finals:
            pops = [r["ground_population"] for r in summary["runs"] if r["final"] == kind]
            diffs = np.diff(pops)
            summary[f"sweep_monotone_{kind}"] = bool((diffs >= -0.02).all())
            click.echo(
                f"[{kind}] ground-population sweep "
                + " -> ".join(f"{p:.3f}" for p in pops)
                + f" (non-decreasing within 0.02: {summary[f'sweep_monotone_{kind}']})"
            )
    atomic_write(outdir / "simulate_summary.json", json.dumps(summary, indent=2) + "\n")
    click.echo(f"wrote {outdir / 'simulate_summary.json'}")


@main.command("spectrum")
@click.argument("instance", type=click.Path())
@click.option("--levels", "k", type=int, default=8, show_default=True,
              help="Number of lowest eigenvalues to track (>= 2).")
@click.option("--samples", type=int, default=25, show_default=True)
@click.option("--total-time", type=float, default=80.0, show_default=True)
@click.option("--penalty", type=float, default=None)
@click.option("--normalize-row-linear", is_flag=True, default=False)
@click.option("--final", type=click.Choice(["quadratic", "exact"]), default="quadratic",
              show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True, help="Spectrum CSV path.")
@click.option("--svg", "svg_path", type=click.Path(), default=None,
              help="Optional SVG line plot.")
@handle_errors
def spectrum_cmd(instance, k, samples, total_time, penalty, normalize_row_linear,
                 final, output, svg_path):
    """Track the low-lying spectrum of H(t) and report the minimum gap."""
    inst = _load_instance(instance)
    C = penalty if penalty is not None else default_penalty(inst)
    hb = build_initial_hamiltonian(inst.num_qubits)
    hf = _final_hamiltonian(inst, final, C, normalize_row_linear)
    times = np.linspace(0.0, total_time, samples)
    trace = compute_spectrum(hb, hf, times, total_time, k=k)
    atomic_write(Path(output), trace.to_csv())
    gap, at = trace.min_gap()
    click.echo(f"wrote {output}")
    click.echo(f"minimum gap {gap:.6g} at t={at:.6g}")
    if svg_path:
        series = {
            f"lambda_{i}": trace.eigenvalues[:, i] for i in range(trace.eigenvalues.shape[1])
        }
        atomic_write(
            Path(svg_path),
            svg.line_chart(trace.times, series, title="Low-lying spectrum of H(t)",
                           x_label="t", y_label="energy"),
        )
        click.echo(f"wrote {svg_path}")


BENCHMARK_SHAPES = ((4, 3), (6, 2), (2, 6))
BENCHMARK_SEED = 5
DEFAULT_SWEEP = (10.0, 20.0, 40.0, 80.0, 160.0)


@main.command("reproduce-paper")
@click.option("--seed", type=int, default=BENCHMARK_SEED, show_default=True)
@click.option("--sweep", type=float, multiple=True, default=DEFAULT_SWEEP, show_default=True)
@click.option("--samples", type=int, default=25, show_default=True)
@click.option("-o", "--outdir", type=click.Path(), default=_default_outdir)
@click.pass_context
@handle_errors
def reproduce_paper(ctx, seed, sweep, samples, outdir):
    """Run the three 12-qubit benchmark shapes end to end.

    For each shape: generate a seeded instance, compile both bases, run
    all classical solvers, track the spectrum, and sweep the annealing
    duration; prints one pass/fail line per check.
    """
    outdir = Path(outdir)
    checks = []

    def check(name, ok):
        checks.append({"name": name, "passed": bool(ok)})
        click.echo(f"[{'PASS' if ok else 'FAIL'}] {name}")

    for m, n in BENCHMARK_SHAPES:
        shape_dir = outdir / f"{m}x{n}"
        inst_path = shape_dir / "instance.json"
        ctx.invoke(generate, num_weapons=m, num_targets=n, seed=seed,
                   value_range=(0.5, 1.5), prob_range=(0.05, 0.9),
                   high_threshold=0.9, output=str(inst_path))
        ctx.invoke(compile_cmd, instance=str(inst_path), basis="both", penalty=None,
                   normalize_row_linear=False, output=str(shape_dir / "coefficients.json"))
        ctx.invoke(solve, instance=str(inst_path), methods=("all",), penalty=None,
                   ce_samples=500, ce_elite=0.1, ce_smoothing=0.7,
                   ce_max_iterations=200, seed=seed,
                   output=str(shape_dir / "solvers.json"))
        ctx.invoke(spectrum_cmd, instance=str(inst_path), k=8, samples=samples,
                   total_time=max(sweep), penalty=None, normalize_row_linear=False,
                   final="quadratic", output=str(shape_dir / "spectrum.csv"),
                   svg_path=str(shape_dir / "spectrum.svg"))
        ctx.invoke(simulate, instance=str(inst_path), finals=("quadratic",),
                   total_time=max(sweep), sweep=tuple(sweep), steps=None,
                   samples=samples, penalty=None, normalize_row_linear=False,
                   tol=1e-6, top_m=32, full_trace=False, outdir=str(shape_dir))

        solvers_doc = json.loads((shape_dir / "solvers.json").read_text())
        sim_doc = json.loads((shape_dir / "simulate_summary.json").read_text())
        spec_lines = (shape_dir / "spectrum.csv").read_text().strip().splitlines()[1:]
        gaps = [
            float(line.split(",")[2]) - float(line.split(",")[1]) for line in spec_lines
        ]
        check(f"{m}x{n}: Ising ground state matches exact optimum",
              solvers_doc["agreement"].get("ising_matches_wta", False))
        check(f"{m}x{n}: cross-entropy matches exact optimum",
              solvers_doc["agreement"].get("ce_matches_wta", False))
        check(f"{m}x{n}: spectral gap positive at all sample times", min(gaps) > 0)
        best = max(sim_doc["runs"], key=lambda r: r["ground_population"])
        check(f"{m}x{n}: some duration reaches the ground state with population > 0.5",
              best["argmax_matches_ground"] and best["ground_population"] > 0.5)
        check(f"{m}x{n}: ground population non-decreasing over the sweep",
              sim_doc.get("sweep_monotone_quadratic", False))
        check(f"{m}x{n}: decoded argmax is feasible",
              best["argmax_feasible"])

    passed = sum(c["passed"] for c in checks)
    atomic_write(outdir / "reproduce_summary.json",
                 json.dumps({"seed": seed, "checks": checks}, indent=2) + "\n")
    click.echo(f"{passed}/{len(checks)} checks passed")
    if passed != len(checks):
        sys.exit(1)


if __name__ == "__main__":
    main()
