"""Command-line entry point: ``shiftdet``."""

from __future__ import annotations

import csv
import io
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import acceptance
from .amenability import (
    appropriate_spread,
    coset_split,
    folner_lower_bound,
    folner_ratio,
    identity_layers,
    reindex_layers,
    ring_layout,
)
from .codec import encode_moves, invariance_bound_check, random_moves, roundtrip_case
from .games import (
    DEFAULT_BUDGET,
    GameError,
    GameSpec,
    RuleTree,
    SearchExhausted,
    auxiliary_game,
    aux_layout,
    beats_all,
    extend_rules_game,
    parse_game,
    solve,
    transfer_rules_strategy,
    transfer_shift_strategy,
)
from .groups import UsageError, parse_group
from .sft_codec import SFTError, Window, block_schedule, decode_bits, default_eps, sft_encode
from .sft_graph import build_debruijn, classification_json, classify_good, epsilon_max, find_double_loop, to_dot


def game_budget() -> int:
    return int(os.environ.get("SHIFTDET_GAME_BUDGET", DEFAULT_BUDGET))


def emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def report(config: dict, body: dict, output: str | None) -> None:
    emit(json.dumps({"config": config, **body}, indent=2, sort_keys=True) + "\n", output)


def fail(message: str) -> None:
    click.echo(f"FAILED: {message}", err=True)
    sys.exit(1)


def parse_fraction(text: str | None) -> Fraction | None:
    if text is None:
        return None
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"not a rational: {text!r}") from exc


def group_and_layers(name: str):
    G = parse_group(name)
    H = getattr(G, "left", G)
    return G, H


output_option = click.option("-o", "--output", type=click.Path(dir_okay=False), help="Write the report here.")


class _Main(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (UsageError, GameError, SFTError, ValueError) as exc:
            raise click.UsageError(str(exc), ctx) from exc


@click.group(cls=_Main)
@click.option("--seed", type=int, default=acceptance.DEFAULT_SEED, show_default=True)
@click.pass_context
def main(ctx, seed):
    """Finite-scale experiments on shift codecs, subshift codecs and finite games."""
    ctx.obj = {"seed": seed}


# --- wa ----------------------------------------------------------------------------------


@main.group()
def wa():
    """Word-length classes, Folner ratios and ring layouts."""


@wa.command()
@click.option("--group", "group_name", default="Z", show_default=True)
@click.option("--n", "n_max", type=int, default=30, show_default=True)
@click.option("--g", "g_text", default="1", show_default=True, help="Group element, e.g. 2, ab, (1,0).")
@output_option
def folner(group_name, n_max, g_text, output):
    """CSV of Folner ratios with the (n-|g|+1)/(n+1) bound."""
    G = parse_group(group_name)
    g = G.parse(g_text)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "ratio", "bound", "ok"])
    bad = None
    for n in range(n_max + 1):
        r, b = folner_ratio(G, n, g), folner_lower_bound(n, G.word_length(g))
        w.writerow([n, r, b, r >= b])
        if r < b and bad is None:
            bad = n
    emit(buf.getvalue(), output)
    if bad is not None:
        fail(f"folner ratio below the bound at n={bad}")


@wa.command()
@click.option("--group", "group_name", default="F2", show_default=True)
@click.option("--radius", type=int, default=4, show_default=True)
@click.option("--n", "n_max", type=int, default=12, show_default=True)
@output_option
def spread(group_name, radius, n_max, output):
    """CSV of appropriate spreads against 2|g|+2."""
    G = parse_group(group_name)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["g", "n", "spread", "bound", "ok"])
    bad = None
    for g in G.ball(radius):
        for n in range(n_max + 1):
            s = appropriate_spread(G, g, n)
            w.writerow([g, n, s, 2 * len(g) + 2, s <= 2 * len(g) + 2])
            if s > 2 * len(g) + 2 and bad is None:
                bad = (g, n)
    emit(buf.getvalue(), output)
    if bad is not None:
        fail(f"spread above 2|g|+2 at g={bad[0]}, n={bad[1]}")


@wa.command()
@click.option("--group", "group_name", default="F2", show_default=True)
@click.option("--target", default=None, help="Reindex to this ratio, e.g. 9/10; identity layers if omitted.")
@click.option("--layers", "count", type=int, default=4, show_default=True)
@click.option("--n-max", type=int, default=2, show_default=True)
@click.option("--j-max", type=int, default=3, show_default=True)
@output_option
def layout(group_name, target, count, n_max, j_max, output):
    """JSON ring layout."""
    G = parse_group(group_name)
    target = parse_fraction(target)
    layers = identity_layers(G) if target is None else reindex_layers(G, target, count)
    emit(ring_layout(layers).to_json(n_max, j_max) + "\n", output)


# --- codec -------------------------------------------------------------------------------


@main.group()
def codec():
    """Shift codec on finitely generated groups."""


@codec.command()
@click.option("--group", "group_name", default="Z", show_default=True)
@click.option("--cases", type=int, default=200, show_default=True)
@click.option("--J", "J_max", type=int, default=8, show_default=True)
@click.option("--alphabet", type=int, default=3, show_default=True)
@output_option
@click.pass_context
def roundtrip(ctx, group_name, cases, J_max, alphabet, output):
    """Encode then decode seeded random move vectors."""
    seed = ctx.obj["seed"]
    G, H = group_and_layers(group_name)
    layers = identity_layers(H)
    lay, part = ring_layout(layers), coset_split(G, layers)
    rng = random.Random(seed)
    failures = []
    for _ in range(cases):
        moves, J = random_moves(rng, 6, alphabet), rng.randint(0, J_max)
        if not roundtrip_case(moves, J, lay, part):
            failures.append({"moves": list(moves), "J": J})
    config = {"group": group_name, "cases": cases, "J": J_max, "alphabet": alphabet, "seed": seed}
    report(config, {"passed": not failures, "failures": failures}, output)
    if failures:
        fail(f"round trip failed for {failures[0]}")


@codec.command()
@click.option("--group", "group_name", default="F2", show_default=True)
@click.option("--radius", type=int, default=3, show_default=True)
@click.option("--moves", default="1,2,1", show_default=True)
@click.option("--target", default=None, help="Reindex layers to this ratio.")
@output_option
def invariance(group_name, radius, moves, target, output):
    """Check |T_j| against its three-part bound for shifts of radius <= --radius."""
    G, H = group_and_layers(group_name)
    target = parse_fraction(target)
    layers = identity_layers(H) if target is None else reindex_layers(H, target, 3)
    lay, part = ring_layout(layers), coset_split(G, layers)
    mv = tuple(int(m) for m in moves.split(",") if m)
    x = encode_moves(mv, 1, lay, part)
    rows = []
    for g in G.ball(radius):
        for j in (0, 1):
            for rep in invariance_bound_check(x, lay, part, g, 0, j):
                rows.append({"g": str(g), "j": j, "coset": rep.coset, "t_size": rep.t_size,
                             "bound": rep.bound, "passed": rep.passed})
    bad = [r for r in rows if not r["passed"]]
    config = {"group": group_name, "radius": radius, "moves": list(mv), "target": str(target)}
    report(config, {"passed": not bad, "cases": rows}, output)
    if bad:
        fail(f"invariance bound violated at {bad[0]}")


# --- sft -----------------------------------------------------------------------------------


def forbidden_option(f):
    f = click.option("--forbidden", default="11", show_default=True, help="Comma-separated forbidden words.")(f)
    return click.option("--N", "N", type=int, default=2, show_default=True, help="Word length of the vertices.")(f)


def schedule_options(f):
    f = click.option("--K", "K", type=int, default=4, show_default=True)(f)
    f = click.option("--growth", type=click.Choice(["desk", "strict"]), default="desk", show_default=True)(f)
    return click.option("--eps", default=None, help="Rational eps; default epsilon_max/2.")(f)


def sft_setup(forbidden, N):
    words = [w for w in forbidden.split(",") if w]
    return build_debruijn(words, N)


@main.group()
def sft():
    """Subshifts of finite type: graphs, codec, eps."""


@sft.command()
@forbidden_option
@click.option("--dot", type=click.Path(dir_okay=False), help="Also write a DOT drawing.")
@output_option
def graph(forbidden, N, dot, output):
    """Classify vertices and find a double loop."""
    G = sft_setup(forbidden, N)
    emit(classification_json(G) + "\n", output)
    if dot:
        Path(dot).write_text(to_dot(G, find_double_loop(G), classify_good(G)))


@sft.command()
@click.option("--size", type=int, default=3, show_default=True)
@output_option
def eps(size, output):
    """Largest admissible eps for a graph of the given size."""
    e = epsilon_max(size)
    report({"size": size}, {"epsilon_max": str(e), "float": float(e)}, output)


@sft.command()
@forbidden_option
@schedule_options
@click.option("--bits", default="", help="Bit string to encode, e.g. 1011.")
@output_option
def encode(forbidden, N, K, growth, eps, bits, output):
    """Encode bits as a window of the subshift (JSON)."""
    G = sft_setup(forbidden, N)
    if set(bits) - {"0", "1"}:
        raise click.BadParameter("bits must be 0/1", param_hint="--bits")
    S = block_schedule(N, growth=growth, K=K)
    y = sft_encode(tuple(int(b) for b in bits), G, S, eps=parse_fraction(eps))
    emit(y.to_json() + "\n", output)


@sft.command()
@forbidden_option
@schedule_options
@click.argument("window", type=click.File("r"), default="-")
def decode(forbidden, N, K, growth, eps, window):
    """Decode a window (JSON from ``sft encode``) back to bits."""
    G = sft_setup(forbidden, N)
    S = block_schedule(N, growth=growth, K=K)
    y = Window.from_json(window.read())
    click.echo("".join(map(str, decode_bits(y, G, S, eps=parse_fraction(eps)))))


@sft.command()
@forbidden_option
@schedule_options
@click.option("--max-len", type=int, default=8, show_default=True)
@output_option
def check(forbidden, N, K, growth, eps, max_len, output):
    """Round-trip every bit string up to --max-len."""
    G = sft_setup(forbidden, N)
    S = block_schedule(N, growth=growth, K=K)
    e = parse_fraction(eps) or default_eps(G)
    failures, count = [], 0
    for L in range(max_len + 1):
        for k in range(2**L):
            bits = tuple(int(b) for b in format(k, f"0{L}b")) if L else ()
            count += 1
            if decode_bits(sft_encode(bits, G, S, eps=e), G, S, eps=e) != bits:
                failures.append("".join(map(str, bits)))
    config = {"forbidden": forbidden, "N": N, "K": K, "growth": growth, "eps": str(e), "max_len": max_len}
    report(config, {"passed": not failures, "strings": count, "failures": failures}, output)
    if failures:
        fail(f"round trip failed for {failures[0]!r}")


# --- game ----------------------------------------------------------------------------------


@main.group()
def game():
    """Finite games: solving and strategy transfer."""


def load_fixture(path: str) -> GameSpec:
    return parse_game(Path(path).read_text())


@game.command(name="solve")
@click.argument("fixture", type=click.Path(exists=True, dir_okay=False))
@output_option
def solve_cmd(fixture, output):
    """Winner and winning strategy of a fixture game."""
    g = load_fixture(fixture)
    w, s = solve(g, game_budget())
    report({"fixture": fixture}, {"winner": w, "strategy": s.to_json()}, output)


@game.command(name="transfer-rules")
@click.argument("fixture", type=click.Path(exists=True, dir_okay=False))
@output_option
def transfer_rules_cmd(fixture, output):
    """Solve the extended game and retract its strategy into the rules."""
    g = load_fixture(fixture)
    ext = extend_rules_game(g)
    w, sigma = solve(ext, game_budget())
    s = transfer_rules_strategy(sigma, g, ext)
    ok = solve(g, game_budget())[0] == w and beats_all(g, s)
    report({"fixture": fixture}, {"winner": w, "passed": ok, "strategy": s.to_json()}, output)
    if not ok:
        fail("transferred strategy does not win the rules game")


@game.command(name="transfer-shift")
@click.option("--payoff", required=True, help="Bitmap over the base game's leaves, e.g. 0110.")
@click.option("--depth", type=int, default=2, show_default=True)
@click.option("--rings", type=int, default=2, show_default=True)
@output_option
def transfer_shift_cmd(payoff, depth, rings, output):
    """Solve the toy auxiliary game of a binary base game and transfer back."""
    layout = aux_layout(depth, (0, 1), rings)
    base = GameSpec.from_bits(RuleTree.full(depth, (0, 1)), payoff)
    w, tau = solve(auxiliary_game(base, layout), game_budget())
    try:
        s = transfer_shift_strategy(tau, layout)
    except SearchExhausted as exc:
        fail(f"search exhausted: {exc}")
    ok = solve(base)[0] == w and beats_all(base, s)
    config = {"payoff": payoff, "depth": depth, "rings": rings}
    report(config, {"winner": w, "passed": ok, "strategy": s.to_json()}, output)
    if not ok:
        fail("transferred strategy does not win the base game")


# --- accept ----------------------------------------------------------------------------------


@main.command()
@click.option("--all", "run_all", is_flag=True, help="Run every criterion.")
@click.option("--only", type=int, multiple=True, help="Run only these criteria.")
@output_option
@click.pass_context
def accept(ctx, run_all, only, output):
    """Run the acceptance criteria; exit 0 iff all pass."""
    if not run_all and not only:
        raise click.UsageError("pass --all or --only N")
    numbers = [k for k, _, _ in acceptance.CRITERIA] if run_all else list(only)
    outcomes = []
    for k in numbers:
        try:
            o = acceptance.run(k, ctx.obj["seed"])
        except KeyError:
            raise click.UsageError(f"no criterion {k}")
        click.echo(o.line(), err=bool(output))
        outcomes.append(o)
    if output:
        body = {"outcomes": [{"number": o.number, "name": o.name, "passed": o.passed, "detail": o.detail}
                             for o in outcomes]}
        report({"criteria": numbers, "seed": ctx.obj["seed"]}, body, output)
    failed = [o for o in outcomes if not o.passed]
    if failed:
        fail(f"criterion {failed[0].number} ({failed[0].name}): {failed[0].detail}")


def run() -> None:
    main()


if __name__ == "__main__":
    run()
