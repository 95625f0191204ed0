"""Typer CLI for the higher-order staircase code toolkit."""

import functools
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, Optional, TypeVar

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from app import __version__
from app.core.config import get_settings
from app.core.errors import (
    EXIT_INVALID_CONFIG,
    EXIT_STRUCTURAL_FAILURE,
    HoscError,
    InvalidArgumentError,
)
from app.models.code import HoscSpec
from app.models.dts import DifferenceTriangleSet, SearchObjective
from app.models.net import NetSpec
from app.models.simulation import SimConfig
from app.repositories.dts_repo import DtsRepository, format_certificate
from app.repositories.results_repo import ResultsRepository, format_plotdata
from app.repositories.spec_repo import SpecRepository, spec_hash
from app.repositories.stream_repo import StreamRepository
from app.services import dts as dts_service
from app.services.channel import bsc, make_rng
from app.services.codec import DecoderWindow, StreamEncoder, info_shape, rectangle_shape
from app.services.construction import build_spec, named_family, verify_structure
from app.services.net import check_all_pairs, example_involution_net, example_shift_net, verify_net
from app.workflows.simulate import SimulationWorkflow

app = typer.Typer(
    name="hosc",
    help="Construct, verify, encode, decode and simulate higher-order staircase codes",
    no_args_is_help=True,
)
console = Console()
err_console = Console(stderr=True)

F = TypeVar("F", bound=Callable[..., Any])


def handle_errors(command: F) -> F:
    """Turn toolkit errors into a red message and the error's exit code."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except HoscError as e:
            err_console.print(f"[red]Error: {escape(str(e))}[/red]")
            raise typer.Exit(code=e.exit_code) from e
        except ValidationError as e:
            err_console.print(f"[red]Invalid configuration: {escape(str(e))}[/red]")
            raise typer.Exit(code=EXIT_INVALID_CONFIG) from e

    return wrapper  # type: ignore[return-value]


def _net(family: str, M: int, block_side: int, net_file: Path | None) -> NetSpec:  # noqa: N803
    if net_file is not None:
        return DtsRepository().load_net(net_file)
    if family == "involution":
        return example_involution_net(M, block_side)
    return example_shift_net(M, block_side)


def _dts(L: int, M: int, dts_file: Path | None) -> DifferenceTriangleSet:  # noqa: N803
    if dts_file is not None:
        return DtsRepository().load_dts(dts_file)
    result = dts_service.search_optimal(L, M, SearchObjective.MIN_SCOPE, find_all=False)
    if result.dtss:
        return result.dtss[0]
    console.print(f"[yellow]No scope-optimal ({L},{M})-DTS found in budget; using greedy[/yellow]")
    return dts_service.greedy_dts(L, M)


def _spec(
    spec_file: Path | None,
    L: int | None,  # noqa: N803
    M: int | None,  # noqa: N803
    block_side: int | None,
    chains: int,
    r: int | None,
    dts_file: Path | None,
    net_family: str,
    net_file: Path | None,
    structure_only: bool = False,
) -> HoscSpec:
    if spec_file is not None:
        return SpecRepository().load(spec_file)
    if L is None or M is None or block_side is None:
        raise InvalidArgumentError("give --spec or all of --L, --M and --block-side")
    dts = _dts(L, M, dts_file)
    net = _net(net_family, M, block_side, net_file)
    return build_spec(L, M, block_side, chains, dts, net, r=r, structure_only=structure_only)


def _spec_table(spec: HoscSpec) -> Table:
    table = Table(title="Higher-order staircase code")
    table.add_column("Parameter", style="cyan")
    table.add_column("Value", style="green")
    metrics = dts_service.memory_metrics(spec.dts, spec.block_side)
    rows = [
        ("(L, M, S/L, C)", f"({spec.L}, {spec.M}, {spec.block_side}, {spec.chains})"),
        ("S", str(spec.S)),
        ("family", named_family(spec)),
        ("DTS", str(spec.dts)),
        ("net", str(spec.net)),
        ("combined ruler", " ".join(map(str, spec.combined_ruler))),
        ("permutation tags", " ".join(map(str, spec.perm_assignment))),
        ("encode memory (bits)", str(metrics.encode_mem)),
        ("decode memory (bits)", str(metrics.decode_mem)),
    ]
    if metrics.ratio_vs_L1 is not None:
        rows.append(("memory vs L=1", f"{metrics.ratio_vs_L1} ({float(metrics.ratio_vs_L1):.4f})"))
    if spec.component is not None:
        c = spec.component
        rows.append(("component", f"({c.n}, {c.k}) extended Hamming, shortened by {c.shorten}"))
        rows.append(("rate 1 - r/S", f"{spec.rate:.6f}"))
    for name, value in rows:
        table.add_row(name, value)
    return table


_L = typer.Option(None, "--L", help="Number of rulers L")
_M = typer.Option(None, "--M", help="Ruler order minus one M")
_BLOCK = typer.Option(None, "--block-side", help="Block side S/L")
_C = typer.Option(1, "--C", help="Number of chained copies C")
_R = typer.Option(None, "--r", help="Component parity bits (smallest code if omitted)")
_SPEC = typer.Option(None, "--spec", help="Spec JSON written by 'construct'")
_DTS = typer.Option(None, "--dts", help="DTS file (scope-optimal search if omitted)")
_NET = typer.Option("shift", "--net", help="Net family: shift or involution")
_NET_FILE = typer.Option(None, "--net-file", help="Net file overriding --net")


@app.command()
@handle_errors
def construct(
    L: Optional[int] = _L,  # noqa: N803
    M: Optional[int] = _M,  # noqa: N803
    block_side: Optional[int] = _BLOCK,
    chains: int = _C,
    r: Optional[int] = _R,
    dts_file: Optional[Path] = _DTS,
    net_family: str = _NET,
    net_file: Optional[Path] = _NET_FILE,
    structure_only: bool = typer.Option(False, "--structure-only", help="No component code"),
    horizon: Optional[int] = typer.Option(None, "--horizon", help="Structure check horizon"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the spec JSON here"),
) -> None:
    """Build a spec, verify degree and overlap, and optionally save it."""
    spec = _spec(None, L, M, block_side, chains, r, dts_file, net_family, net_file, structure_only)
    console.print(_spec_table(spec))
    span = max(40, 2 * -(-spec.d_max // spec.L), spec.dts.scope + 1)
    report = verify_structure(spec, horizon or span)
    console.print(
        f"Structure over {report.horizon} periods: {report.positions_checked} positions, "
        f"{report.constraints_checked} constraints, max overlap {report.max_overlap}"
    )
    report.raise_for_failure()
    console.print("[green]Degree M+1 and pairwise overlap <= 1 hold[/green]")
    if out is not None:
        SpecRepository().save(out, spec)
        console.print(f"Spec {spec_hash(spec)[:12]} written to {out}")


@app.command("dts-search")
@handle_errors
def dts_search(
    L: int = typer.Option(..., "--L", help="Number of rulers L"),  # noqa: N803
    M: int = typer.Option(..., "--M", help="Ruler order minus one M"),  # noqa: N803
    objective: SearchObjective = typer.Option(SearchObjective.MIN_SCOPE, "--objective"),
    scope_cap: Optional[int] = typer.Option(None, "--scope-cap", help="Largest scope explored"),
    time_budget: Optional[float] = typer.Option(None, "--time-budget", help="Seconds"),
    first: bool = typer.Option(False, "--first", help="Stop at the first optimal DTS"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker processes"),
    show: int = typer.Option(10, "--show", help="DTSs to print"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the first optimal DTS here"),
) -> None:
    """Search optimal difference triangle sets by branch and bound."""
    result = dts_service.search_optimal(
        L, M, objective, scope_cap, time_budget, find_all=not first, workers=workers
    )
    console.print(
        f"[bold cyan]({L},{M})-DTS search[/bold cyan]: {len(result.dtss)} found, "
        f"{result.nodes} nodes, scope cap {result.scope_cap}"
    )
    console.print(
        f"Bounds: scope >= {dts_service.scope_lower_bound(L, M, generic=M > 4)}"
        + (f", sum-of-lengths >= {dts_service.sum_of_lengths_lower_bound(L, M)}" if M <= 4 else "")
    )
    if result.partial:
        console.print("[yellow]Time budget exhausted: results are partial[/yellow]")
    if result.proven_infeasible:
        console.print("[yellow]No DTS exists within the scope cap[/yellow]")
    if result.front:
        table = Table(title="Pareto front")
        table.add_column("Scope", justify="right")
        table.add_column("Sum of lengths", justify="right")
        for point in result.front:
            table.add_row(str(point.scope), str(point.sum_of_lengths))
        console.print(table)
    for dts in result.dtss[:show]:
        console.print(f"  {dts}  scope {dts.scope}  sum-of-lengths {dts.sum_of_lengths}")
    if out is not None and result.dtss:
        DtsRepository().save_dts(out, result.dtss[0], comment=f"{objective.value} search")


@app.command("dts-combine")
@handle_errors
def dts_combine(
    x_file: Path = typer.Argument(..., help="Perfect DTS X"),
    y_file: Path = typer.Argument(..., help="Perfect DTS Y"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the combined DTS here"),
) -> None:
    """Combine two perfect DTSs of equal M into a larger perfect DTS."""
    repo = DtsRepository()
    z = dts_service.combine(repo.load_dts(x_file), repo.load_dts(y_file))
    console.print(f"Perfect ({z.L},{z.M})-DTS, scope {z.scope}, sum-of-lengths {z.sum_of_lengths}")
    if out is not None:
        repo.save_dts(out, z, comment=f"combination of {x_file.name} and {y_file.name}")
    elif z.certificate is not None:
        console.print(format_certificate(z.certificate), end="")


@app.command("dts-family")
@handle_errors
def dts_family(
    seed_file: Path = typer.Argument(..., help="Perfect seed DTS with M in {3, 4}"),
    iterations: int = typer.Option(2, "--iterations", "-n", help="Combination steps"),
    materialize: bool = typer.Option(False, "--materialize", help="Build every member"),
    out_dir: Optional[Path] = typer.Option(None, "--out-dir", help="Write materialized members"),
) -> None:
    """Iterate the self-combination of a perfect seed and report (L_i, S_i)."""
    repo = DtsRepository()
    seed = repo.load_dts(seed_file)
    members = dts_service.generate_family(seed, iterations, materialize=materialize)
    len1 = dts_service.OPTIMAL_RULER_LENGTHS.get(seed.M + 1)

    table = Table(title=f"Family of {seed}")
    table.add_column("i", justify="right")
    table.add_column("L_i", justify="right", style="cyan")
    table.add_column("S_i", justify="right", style="green")
    table.add_column("memory vs L=1", justify="right")
    for member in members:
        ratio = f"{member.sum_of_lengths / (member.L**2 * len1):.6f}" if len1 else "-"
        table.add_row(str(member.index), str(member.L), str(member.sum_of_lengths), ratio)
        if out_dir is not None and member.dts is not None:
            repo.save_dts(out_dir / f"family_{member.index}.dts", member.dts)
    console.print(table)
    limit = dts_service.family_limit_ratio(seed.L, seed.sum_of_lengths, seed.M)
    console.print(f"Limit ratio {limit} ({float(limit):.6f})")


@app.command("net-verify")
@handle_errors
def net_verify(
    M: Optional[int] = _M,  # noqa: N803
    block_side: Optional[int] = _BLOCK,
    net_family: str = _NET,
    net_file: Optional[Path] = _NET_FILE,
) -> None:
    """Check a net exhaustively and by the pairwise determinant condition."""
    if net_file is None and (M is None or block_side is None):
        raise InvalidArgumentError("give --net-file or both --M and --block-side")
    net = _net(net_family, M or 0, block_side or 0, net_file)
    exhaustive = verify_net(net)
    pairwise = check_all_pairs(net)
    console.print(f"{net}: exhaustive {exhaustive}, pairwise condition {pairwise}")
    if not exhaustive:
        err_console.print("[red]Not a net[/red]")
        raise typer.Exit(code=EXIT_STRUCTURAL_FAILURE)
    console.print("[green]Every row pair meets in exactly one cell[/green]")


@app.command()
@handle_errors
def encode(
    spec_file: Path = typer.Option(..., "--spec", help="Spec JSON"),
    rectangles: int = typer.Option(..., "--rectangles", "-n", help="Data rectangles"),
    seed: int = typer.Option(0, "--seed", help="Seed of the random information"),
    terminate: bool = typer.Option(True, "--terminate/--no-terminate", help="Append the tail"),
    info_out: Optional[Path] = typer.Option(None, "--info-out", help="Write the information"),
    out: Optional[Path] = typer.Option(None, "--out", help="Stream file (stdout if omitted)"),
) -> None:
    """Encode random information into a packed rectangle stream."""
    spec = SpecRepository().load(spec_file)
    rng = make_rng(seed, 0)
    info = rng.integers(0, 2, size=(rectangles, *info_shape(spec)), dtype=np.uint8)
    encoder = StreamEncoder(spec)
    coded = [encoder.encode_step(block) for block in info]
    tail = encoder.terminate() if terminate else []
    streams = StreamRepository(rectangle_shape(spec))
    if out is None:
        streams.write(sys.stdout.buffer, coded, tail)
    else:
        streams.save(out, coded, tail)
    if info_out is not None:
        StreamRepository(info_shape(spec)).save(info_out, list(info))


@app.command()
@handle_errors
def channel(
    spec_file: Path = typer.Option(..., "--spec", help="Spec JSON"),
    p: float = typer.Option(..., "--p", help="Crossover probability"),
    seed: int = typer.Option(0, "--seed", help="Channel seed"),
    source: Optional[Path] = typer.Option(None, "--in", help="Stream file (stdin if omitted)"),
    out: Optional[Path] = typer.Option(None, "--out", help="Stream file (stdout if omitted)"),
) -> None:
    """Pass a packed stream through a binary symmetric channel."""
    spec = SpecRepository().load(spec_file)
    streams = StreamRepository(rectangle_shape(spec))
    data, tail = streams.load(source) if source else streams.read(sys.stdin.buffer)
    rng = make_rng(seed, 1)
    noisy = [bsc(rect, p, rng) for rect in data]
    noisy_tail = [bsc(rect, p, rng) for rect in tail]
    if out is None:
        streams.write(sys.stdout.buffer, noisy, noisy_tail)
    else:
        streams.save(out, noisy, noisy_tail)


@app.command()
@handle_errors
def decode(
    spec_file: Path = typer.Option(..., "--spec", help="Spec JSON"),
    window: int = typer.Option(..., "--W", help="Window W in rectangles"),
    iterations: int = typer.Option(3, "--I", help="Passes per advance"),
    source: Optional[Path] = typer.Option(None, "--in", help="Stream file (stdin if omitted)"),
    reference: Optional[Path] = typer.Option(None, "--reference", help="Information to compare"),
    out: Optional[Path] = typer.Option(None, "--out", help="Decided stream file"),
) -> None:
    """Decode a received stream with the sliding-window decoder."""
    spec = SpecRepository().load(spec_file)
    streams = StreamRepository(rectangle_shape(spec))
    data, tail = streams.load(source) if source else streams.read(sys.stdin.buffer)
    decoder = DecoderWindow(spec, window, iterations)
    decided = [rect for rect in map(decoder.decode_advance, data) if rect is not None]
    decided.extend(decoder.flush(tail))
    stats = decoder.stats
    err_console.print(
        f"{len(decided)} rectangles, {stats.flips} flips, {stats.detected} detected, "
        f"{stats.refused} refused, {stats.iterations} passes"
    )
    if reference is not None:
        sent, _ = StreamRepository(info_shape(spec)).load(reference)
        if not decided or len(decided) != len(sent):
            raise InvalidArgumentError(
                f"decoded {len(decided)} data rectangles but the reference holds {len(sent)}"
            )
        cols = info_shape(spec)[1]
        got = np.stack(decided)[:, :, :cols]
        errors = int(np.count_nonzero(got != np.stack(sent)))
        err_console.print(f"Information bit errors: {errors} of {got.size}")
    if out is not None:
        streams.save(out, decided)


@app.command()
@handle_errors
def simulate(
    spec_file: Optional[Path] = _SPEC,
    L: Optional[int] = _L,  # noqa: N803
    M: Optional[int] = _M,  # noqa: N803
    block_side: Optional[int] = _BLOCK,
    chains: int = _C,
    r: Optional[int] = _R,
    dts_file: Optional[Path] = _DTS,
    net_family: str = _NET,
    window: int = typer.Option(..., "--W", help="Window W in rectangles"),
    iterations: int = typer.Option(3, "--I", help="Passes per advance"),
    p: list[float] = typer.Option(..., "--p", help="Crossover probability (repeatable)"),
    seed: int = typer.Option(0, "--seed", help="64-bit master seed"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker processes"),
    min_bit_errors: Optional[int] = typer.Option(None, "--min-bit-errors"),
    max_bits: Optional[int] = typer.Option(None, "--max-bits"),
    target_ber: Optional[float] = typer.Option(None, "--target-ber"),
    frame_rectangles: Optional[int] = typer.Option(None, "--frame-rectangles"),
    streams: Optional[int] = typer.Option(None, "--streams"),
    out: Optional[Path] = typer.Option(None, "--out", help="Result CSV"),
) -> None:
    """Measure output BER over the binary symmetric channel."""
    spec = _spec(spec_file, L, M, block_side, chains, r, dts_file, net_family, None)
    overrides = {
        "min_bit_errors": min_bit_errors,
        "max_bits": max_bits,
        "target_ber": target_ber,
        "frame_rectangles": frame_rectangles,
        "streams": streams,
    }
    config = SimConfig(
        spec=spec,
        window=window,
        iterations=iterations,
        probabilities=tuple(p),
        seed=seed,
        **{k: v for k, v in overrides.items() if v is not None},
    )
    result = SimulationWorkflow(config, workers).sweep()

    table = Table(title=f"({','.join(str(v) for v in result.label)})")
    table.add_column("p", justify="right")
    table.add_column("input BER", justify="right")
    table.add_column("output BER", justify="right", style="green")
    table.add_column("errors / bits", justify="right")
    table.add_column("bit/s", justify="right")
    for point in result.points:
        ber = f"{point.output_ber:.3e}" + (" (zero)" if point.zero_error else "")
        table.add_row(
            f"{point.p:.3e}",
            f"{point.input_ber:.3e}",
            ber,
            f"{point.bit_errors}/{point.bits}",
            f"{point.bits_per_second:.3e}",
        )
    console.print(table)
    if out is not None:
        ResultsRepository().save(out, result)
        console.print(f"Results written to {out}")


@app.command()
@handle_errors
def plotdata(
    results: Path = typer.Argument(..., help="Result CSV from 'simulate'"),
    out: Optional[Path] = typer.Option(None, "--out", help="Plot data file (stdout if omitted)"),
) -> None:
    """Emit gnuplot-ready columns from a result CSV."""
    repo = ResultsRepository()
    result = repo.load(results)
    if out is None:
        sys.stdout.write(format_plotdata(result))
    else:
        repo.save_plotdata(out, result)


@app.command()
def version() -> None:
    """Show version information."""
    console.print("\n[bold cyan]hosc toolkit[/bold cyan]")
    console.print(f"Version: {__version__}")
    console.print(f"Workers: {get_settings().workers}\n")


if __name__ == "__main__":
    app()
