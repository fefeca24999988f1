"""Command line front end.

Every subcommand prints exactly one machine-readable line (a compact
JSON record, or a graph/spec export) on stdout and keeps the human
summary, including wall-clock timing, on stderr. stdout for a given
input is byte-stable across runs; anything that may vary lives on
stderr.

Exit codes: 0 true / ok, 1 false / violation, 2 inconclusive,
3 verification timeout, 64 unreadable or invalid input, 65 state or
strategy space limits, 69 port already in use, 70 internal error.
"""

import json
import socket
import sys
import time

import click

from .bench import FAMILIES, generate_benchmark
from .bisim import check_a_bisimulation, expand_relation
from .errors import (
    SpecError,
    StateLimitExceeded,
    StrategySpaceExceeded,
    StratcheckError,
    UnknownReference,
    VerificationTimeout,
)
from .model import build_global_model, export_graph
from .por import ReductionParams, build_reduced_model, default_params, mark_reduction
from .spec_lang import parse_relation, parse_spec, validate
from .verify import verify_approx, verify_bruteforce, verify_dfs

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_INCONCLUSIVE = 2
EXIT_TIMEOUT = 3
EXIT_INPUT = 64
EXIT_LIMITS = 65
EXIT_PORT = 69
EXIT_INTERNAL = 70

_ENGINES = {
    "bruteforce": verify_bruteforce,
    "approx": verify_approx,
    "dfs": verify_dfs,
}


def dumps_record(obj):
    """The one serialization used for records by both CLI and service."""
    return json.dumps(obj, ensure_ascii=False, allow_nan=False,
                      separators=(",", ":"))


def _fail(code, message):
    click.echo("error: %s" % message, err=True)
    sys.exit(code)


def _guarded(fn):
    """Run a subcommand body and map failures onto the exit code table."""
    try:
        return fn()
    except VerificationTimeout as e:
        _fail(EXIT_TIMEOUT, "timeout: %s" % e)
    except (StateLimitExceeded, StrategySpaceExceeded) as e:
        _fail(EXIT_LIMITS, str(e))
    except SpecError as e:
        _fail(EXIT_INPUT, str(e))
    except OSError as e:
        _fail(EXIT_INPUT, str(e))
    except ValueError as e:
        _fail(EXIT_INPUT, str(e))
    except StratcheckError as e:
        _fail(EXIT_INTERNAL, str(e))


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load(path):
    doc = parse_spec(_read(path))
    return validate(doc)


def _split_names(value):
    return tuple(x.strip() for x in value.split(",") if x.strip())


def _coalition_option(value):
    if value is None:
        return None
    names = _split_names(value)
    if not names:
        raise click.UsageError("--coalition needs at least one agent name")
    return names


def _reduction_params(amas, coalition, props, c3):
    params = default_params(amas, c3=c3)
    if coalition is not None:
        for name in coalition:
            amas.agent_index(name)
        params = ReductionParams(coalition=coalition, visible=params.visible,
                                 c3=c3)
    if props is not None:
        visible = _split_names(props)  # empty string means: nothing visible
        for p in visible:
            if p not in amas.propositions:
                raise UnknownReference("unknown proposition %r" % p)
        params = ReductionParams(coalition=params.coalition,
                                 visible=frozenset(visible) | amas.persistent,
                                 c3=c3)
    return params


@click.group()
def cli():
    """Model checker for coalition abilities in asynchronous systems."""


@cli.command()
@click.argument("spec")
@click.option("--method", type=click.Choice(sorted(_ENGINES)), default="bruteforce",
              show_default=True, help="verification engine")
@click.option("--por", is_flag=True, help="verify on the reduced model")
@click.option("--coalition", default=None, metavar="A,B",
              help="override the formula's coalition")
@click.option("--props", default=None, metavar="P,Q",
              help="visible propositions for --por (default: formula's)")
@click.option("--c3", type=click.Choice(["safe", "aggressive"]), default="safe",
              show_default=True, help="cycle proviso for --por")
@click.option("--timeout", type=float, default=None, metavar="SECONDS")
def verify(spec, method, por, coalition, props, c3, timeout):
    """Check the spec's formula and print the result record."""

    def body():
        coal = _coalition_option(coalition)
        amas = _load(spec)
        t0 = time.monotonic()
        if por:
            reduced = build_reduced_model(amas, _reduction_params(
                amas, coal, props, c3))
            model = reduced.model
        else:
            model = build_global_model(amas)
        res = _ENGINES[method](model, coalition=coal, timeout=timeout)
        total = time.monotonic() - t0
        click.echo(dumps_record(res.record()))
        status = {True: "true", False: "false"}.get(res.result, str(res.result))
        click.echo("%s: %s  [%s%s, %d states, %.3fs]"
                   % (res.formula, status, method, ", por" if por else "",
                      model.n_states(), total), err=True)
        if res.strategy:
            for agent in res.coalition:
                rows = res.strategy.get(agent, {})
                table = ", ".join("%s -> %s" % (l, a) for l, a in rows.items())
                click.echo("  %s: %s" % (agent, table), err=True)
        sys.exit({True: EXIT_TRUE, False: EXIT_FALSE}.get(
            res.result, EXIT_INCONCLUSIVE))

    _guarded(body)


@cli.command()
@click.argument("spec")
@click.option("--coalition", default=None, metavar="A,B",
              help="override the formula's coalition")
@click.option("--props", default=None, metavar="P,Q",
              help="visible propositions (default: formula's; '' for none)")
@click.option("--c3", type=click.Choice(["safe", "aggressive"]), default="safe",
              show_default=True)
@click.option("--format", "fmt", type=click.Choice(["dot", "json"]),
              default="dot", show_default=True)
@click.option("--out", default=None, metavar="PREFIX",
              help="write PREFIX.full.FMT and PREFIX.reduced.FMT")
def reduce(spec, coalition, props, c3, fmt, out):
    """Reduce the model and print the reduction statistics record."""

    def body():
        coal = _coalition_option(coalition)
        amas = _load(spec)
        t0 = time.monotonic()
        full = build_global_model(amas)
        reduced = build_reduced_model(amas, _reduction_params(
            amas, coal, props, c3))
        mark_reduction(full, reduced.model)
        total = time.monotonic() - t0
        record = {
            "full_states": full.n_states(),
            "full_edges": full.n_edges(),
            "reduced_states": reduced.model.n_states(),
            "reduced_edges": reduced.model.n_edges(),
            "ratio": reduced.model.n_states() / full.n_states(),
            "mode": c3,
        }
        if out:
            for name, graph, highlighted in (
                    ("full", full, True), ("reduced", reduced.model, False)):
                path = "%s.%s.%s" % (out, name, fmt)
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(export_graph(graph, fmt=fmt,
                                           highlight_reduced=highlighted))
                click.echo("wrote %s" % path, err=True)
        click.echo(dumps_record(record))
        click.echo("full: %d states / %d edges; reduced: %d / %d  [%s, %.3fs]"
                   % (full.n_states(), full.n_edges(),
                      reduced.model.n_states(), reduced.model.n_edges(),
                      c3, total), err=True)
        sys.exit(EXIT_TRUE)

    _guarded(body)


@cli.command()
@click.argument("left")
@click.argument("right")
@click.argument("relation")
@click.option("--coalition", default=None, metavar="A,B",
              help="coalition to check (default: left spec's)")
@click.option("--strict-bisim", is_flag=True,
              help="demand one uniform response per local-profile pair")
def bisim(left, right, relation, coalition, strict_bisim):
    """Check a relation file between two specs; print the verdict."""

    def body():
        coal = _coalition_option(coalition)
        left_amas = _load(left)
        right_amas = _load(right)
        relspec = parse_relation(_read(relation), left_amas, right_amas,
                                 coalition=coal)
        t0 = time.monotonic()
        lm = build_global_model(left_amas)
        rm = build_global_model(right_amas)
        pairs = expand_relation(lm, rm, relspec)
        verdict = check_a_bisimulation(lm, rm, pairs, relspec.coalition,
                                       strict=strict_bisim)
        total = time.monotonic() - t0
        click.echo(dumps_record(verdict.record()))
        if verdict.ok:
            click.echo("bisimilar for {%s} over %d pairs  [%.3fs]"
                       % (",".join(relspec.coalition), verdict.pairs_checked,
                          total), err=True)
        else:
            click.echo("violation: %s (%s) at %s ~ %s: %s  [%.3fs]"
                       % (verdict.condition, verdict.direction,
                          verdict.pair[0], verdict.pair[1], verdict.detail,
                          total), err=True)
        sys.exit(EXIT_TRUE if verdict.ok else EXIT_FALSE)

    _guarded(body)


@cli.command()
@click.argument("spec")
@click.option("--format", "fmt", type=click.Choice(["dot", "json"]),
              default="dot", show_default=True)
@click.option("--por", is_flag=True,
              help="flag the reduced submodel in the export")
@click.option("--coalition", default=None, metavar="A,B")
@click.option("--props", default=None, metavar="P,Q")
@click.option("--c3", type=click.Choice(["safe", "aggressive"]), default="safe",
              show_default=True)
@click.option("--out", default=None, metavar="FILE",
              help="write to FILE instead of stdout")
def export(spec, fmt, por, coalition, props, c3, out):
    """Export the full model graph, optionally with reduction flags."""

    def body():
        coal = _coalition_option(coalition)
        amas = _load(spec)
        full = build_global_model(amas)
        if por:
            reduced = build_reduced_model(amas, _reduction_params(
                amas, coal, props, c3))
            mark_reduction(full, reduced.model)
        text = export_graph(full, fmt=fmt, highlight_reduced=por)
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
            click.echo("wrote %s" % out, err=True)
        else:
            click.echo(text, nl=False)
        sys.exit(EXIT_TRUE)

    _guarded(body)


@cli.command()
@click.option("--family", type=click.Choice(FAMILIES), default="tgc",
              show_default=True)
@click.option("--n", type=click.IntRange(min=1), default=2, show_default=True,
              help="number of trains")
@click.option("--out", default=None, metavar="FILE")
def bench(family, n, out):
    """Emit the spec text of a parameterized benchmark instance."""

    def body():
        text = generate_benchmark(family, n)
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
            click.echo("wrote %s" % out, err=True)
        else:
            click.echo(text, nl=False)
        sys.exit(EXIT_TRUE)

    _guarded(body)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service (and the web UI when its build exists)."""
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as e:
        _fail(EXIT_PORT, "cannot bind %s:%d: %s" % (host, port, e))
    finally:
        probe.close()

    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")


def main(argv=None):
    """Entry point that keeps click's own failures inside the code table."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as e:
        sys.exit(e.exit_code)
    except click.Abort:
        sys.exit(130)
    except click.ClickException as e:
        e.show(file=sys.stderr)
        sys.exit(EXIT_INPUT)


if __name__ == "__main__":
    main()
