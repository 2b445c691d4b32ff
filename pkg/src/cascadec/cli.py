"""Command-line surface.

Subcommands: ``train-ngram``, ``decode``, ``sweep``, ``validate``.
Exit codes: 0 on success, 1 on runtime errors, 2 on usage errors.
"""

from __future__ import annotations

import sys

import click

from .analysis import sweep as run_sweep
from .cascade import DecodeConfig, decode
from .errors import CascadecError
from .potentials import NgramModel, load_potentials, train_ngram
from .stream import StreamScorer
from .vocab import Vocabulary


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_scorer(spec: str, stream_vocab=None, stream_max_order=None):
    kind, _, rest = spec.partition(":")
    try:
        if kind == "ngram":
            return NgramModel.load(rest)
        if kind == "file":
            return load_potentials(rest)
        if kind == "stream":
            host, _, port = rest.rpartition(":")
            if not host or not port.isdigit():
                raise click.UsageError(
                    "stream scorer needs the form stream:<host>:<port>")
            if stream_vocab is None or stream_max_order is None:
                raise click.UsageError(
                    "stream scorer needs --stream-vocab and --stream-max-order")
            with open(stream_vocab, encoding="utf-8") as fh:
                tokens = tuple(line.strip() for line in fh if line.strip())
            return StreamScorer(host, int(port), Vocabulary(tokens),
                                stream_max_order)
    except (OSError, CascadecError) as exc:
        _fail(str(exc))
    raise click.UsageError(f"unknown scorer kind {kind!r} in {spec!r}")


def _read_sources(text, input_path):
    if (text is None) == (input_path is None):
        raise click.UsageError("provide exactly one of --text or --input")
    if text is not None:
        return [text.split()]
    try:
        with open(input_path, encoding="utf-8") as fh:
            return [line.split() for line in fh if line.strip()]
    except OSError as exc:
        _fail(str(exc))


@click.group()
def main():
    """Cascaded lattice decoding over pluggable potential scorers."""


@main.command("train-ngram")
@click.argument("corpus", type=click.Path())
@click.argument("out", type=click.Path())
@click.option("--order", type=click.IntRange(min=1), default=3,
              show_default=True, help="Maximum gram length.")
@click.option("--add-k", type=float, default=0.1, show_default=True,
              help="Additive smoothing constant.")
def cmd_train_ngram(corpus, out, order, add_k):
    """Count m-grams over a whitespace-tokenised corpus, one sentence
    per line, and write the model."""
    try:
        with open(corpus, encoding="utf-8") as fh:
            sentences = [line.split() for line in fh if line.strip()]
        model = train_ngram(sentences, order, add_k)
        model.save(out)
    except (OSError, ValueError, CascadecError) as exc:
        _fail(str(exc))
    click.echo(f"vocab={len(model.vocab)} sentences={len(sentences)}")


def _decode_options(fn):
    opts = [
        click.option("--scorer", required=True,
                     help="ngram:<path> | file:<path> | stream:<host>:<port>"),
        click.option("--text", default=None, help="Source sentence."),
        click.option("--input", "input_path", default=None,
                     help="File with one source sentence per line."),
        click.option("--length-slope", type=float, default=1.0,
                     show_default=True),
        click.option("--length-intercept", type=float, default=0.0,
                     show_default=True),
        click.option("--no-relax", is_flag=True,
                     help="Decode at the predicted length exactly, "
                          "without the pad/eos window."),
        click.option("--stream-vocab", default=None,
                     help="Token file for stream scorers, one per line."),
        click.option("--stream-max-order", type=int, default=None),
        click.option("--report", "report_path", default=None,
                     help="Write run reports to this file."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@main.command("decode")
@_decode_options
@click.option("--k", type=click.IntRange(min=1), default=16, show_default=True)
@click.option("--iters", type=click.IntRange(min=1), default=2,
              show_default=True)
@click.option("--delta-l", type=click.IntRange(min=0), default=3,
              show_default=True)
def cmd_decode(scorer, text, input_path, k, iters, delta_l, length_slope,
               length_intercept, no_relax, stream_vocab, stream_max_order,
               report_path):
    """Decode sources and print one 'tokens<TAB>score' line each."""
    provider = _load_scorer(scorer, stream_vocab, stream_max_order)
    sources = _read_sources(text, input_path)
    cfg = DecodeConfig(k=k, iterations=iters, delta_l=delta_l,
                       length_slope=length_slope,
                       length_intercept=length_intercept,
                       length_relax=not no_relax)
    reports = []
    try:
        for src in sources:
            result = decode(src, provider, cfg)
            click.echo(" ".join(result.tokens) + f"\t{result.log_score:.6f}")
            if report_path:
                from .analysis import RunReport

                reports.append(RunReport.from_result(cfg, result).to_line())
    except CascadecError as exc:
        _fail(str(exc))
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(reports) + "\n")


def _int_list(text: str, name: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise click.UsageError(f"--{name} must be comma-separated integers")
    if not values:
        raise click.UsageError(f"--{name} is empty")
    return values


@main.command("sweep")
@_decode_options
@click.option("--k", "k_grid", default="16,32,64", show_default=True)
@click.option("--iters", "iters_grid", default="2,3", show_default=True)
@click.option("--delta-l", "delta_grid", default="0,3", show_default=True)
@click.option("--jobs", type=click.IntRange(min=1), default=1,
              show_default=True)
@click.option("--oracle", is_flag=True,
              help="Add a brute-force optimum column (tiny instances only).")
def cmd_sweep(scorer, text, input_path, k_grid, iters_grid, delta_grid,
              length_slope, length_intercept, no_relax, stream_vocab,
              stream_max_order, jobs, oracle, report_path):
    """Run the decoding grid and print one report line per cell."""
    provider = _load_scorer(scorer, stream_vocab, stream_max_order)
    sources = _read_sources(text, input_path)
    base = DecodeConfig(length_slope=length_slope,
                        length_intercept=length_intercept,
                        length_relax=not no_relax)
    oracle_fn = None
    if oracle:
        from .oracle import window_optimum

        oracle_fn = lambda src, cfg: window_optimum(src, provider, cfg)

    reports = run_sweep(sources, provider,
                        _int_list(k_grid, "k"),
                        _int_list(iters_grid, "iters"),
                        _int_list(delta_grid, "delta-l"),
                        base_cfg=base, jobs=jobs, oracle=oracle_fn)
    lines = [r.to_line() for r in reports]
    for line in lines:
        click.echo(line)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    if all(r.error is not None for r in reports):
        _fail("all sweep cells failed")


@main.command("validate")
@click.argument("path", type=click.Path())
def cmd_validate(path):
    """Check a potential file and print its header summary."""
    try:
        table = load_potentials(path)
    except (OSError, CascadecError) as exc:
        _fail(str(exc))
    click.echo(f"vocab={len(table.vocab)} orders={table.max_order} "
               f"length={table.lattice_len} records={len(table.records)}")


if __name__ == "__main__":
    main()
