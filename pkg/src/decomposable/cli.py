"""Command-line front end: read a CSV, run stepwise selection, write results."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .engine import SelectionConfig, Selection, run
from .errors import (
    DecomposableError,
    DuplicateColumn,
    EmptyFile,
    IngestError,
    InternalInconsistency,
    NotChordal,
    RaggedRow,
    UnknownFormat,
)
from .graph import Graph, is_chordal, members
from .oracle import verify_trajectory
from .scoring import Dataset

log = logging.getLogger(__name__)

FORMATS = ("json", "dot", "tsv-trace")


def ingest(path: str | Path) -> Dataset:
    """Read a comma-separated file whose first row names the columns.

    Every distinct string, including the empty string, is its own category.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise EmptyFile(f"{path} is empty")
    header, body = rows[0], rows[1:]
    seen = set()
    for name in header:
        if name in seen:
            raise DuplicateColumn(name)
        seen.add(name)
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise RaggedRow(lineno, len(header), len(row))
    if not body:
        raise EmptyFile(f"{path} has a header but no data rows")
    return Dataset.from_rows(header, body)


def read_edge_list(path: str | Path, columns: list[str]) -> list[tuple[int, int]]:
    """Edge list with one ``name,name`` pair per line; blank lines are skipped."""
    index = {name: i for i, name in enumerate(columns)}
    edges = []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or not any(cell.strip() for cell in row):
                    continue
                if len(row) != 2:
                    raise RaggedRow(lineno, 2, len(row))
                try:
                    edges.append((index[row[0].strip()], index[row[1].strip()]))
                except KeyError as exc:
                    raise IngestError(f"line {lineno}: unknown column {exc.args[0]!r}") from None
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    return edges


@dataclass
class RunManifest:
    input_path: str
    columns: list[str]
    domain_sizes: list[int]
    config: dict
    steps: list[dict]
    edges: list[list[int]]
    cliques: list[list[int]]
    separators: list[list[int]]
    initial_entropy: float
    model_entropy: float
    step_seconds: list[float] | None = field(default=None)

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.step_seconds is None:
            del out["step_seconds"]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> RunManifest:
        return cls(**d)


def select(
    data: Dataset,
    config: SelectionConfig,
    *,
    init_edges: list[tuple[int, int]] | None = None,
    input_path: str = "",
    timings: bool = False,
    check: bool = False,
) -> RunManifest:
    """Run selection from the null model (forward, alternating) or the saturated one (backward)."""
    if init_edges is not None:
        g0 = Graph(data.n, init_edges)
        if not is_chordal(g0):
            raise NotChordal("initial edge list does not form a chordal graph")
    elif config.mode == "backward":
        g0 = Graph.complete(data.n)
    else:
        g0 = Graph(data.n)
    sel = run(g0, data, config, check=check)
    return _manifest(sel, data, config, input_path, timings)


def _manifest(sel: Selection, data: Dataset, config: SelectionConfig, input_path: str, timings: bool) -> RunManifest:
    steps = [
        {
            "step": r.step,
            "action": r.action,
            "edge": list(r.edge),
            "separator": list(r.separator),
            "delta": r.delta,
            "entropies_computed": r.entropies_computed,
            "evaluations": r.evaluations,
            "model_entropy": r.model_entropy,
        }
        for r in sel.steps
    ]
    return RunManifest(
        input_path=input_path,
        columns=list(data.columns),
        domain_sizes=data.domain_sizes,
        config=asdict(config),
        steps=steps,
        edges=[list(e) for e in sel.graph.edges()],
        cliques=[members(c) for c in sel.cliques],
        separators=[members(s) for s in sel.separators],
        initial_entropy=sel.initial_entropy,
        model_entropy=sel.score.entropy,
        step_seconds=[r.seconds for r in sel.steps] if timings else None,
    )


def _names(manifest: RunManifest, vertices) -> str:
    return "{" + ",".join(manifest.columns[v] for v in vertices) + "}"


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit(manifest: RunManifest, fmt: str) -> bytes:
    """Serialize a manifest as ``json``, ``dot`` or ``tsv-trace``."""
    if fmt == "json":
        return (json.dumps(manifest.to_dict(), indent=2) + "\n").encode()
    if fmt == "dot":
        lines = ["graph model {"]
        lines += [f"  {_dot_id(name)};" for name in manifest.columns]
        for a, b in sorted(tuple(e) for e in manifest.edges):
            lines.append(f"  {_dot_id(manifest.columns[a])} -- {_dot_id(manifest.columns[b])};")
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    if fmt == "tsv-trace":
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
        writer.writerow(["step", "action", "v_a", "v_b", "separator", "delta", "entropies_computed", "H_model"])
        for s in manifest.steps:
            a, b = s["edge"]
            writer.writerow(
                [
                    s["step"],
                    s["action"],
                    manifest.columns[a],
                    manifest.columns[b],
                    _names(manifest, s["separator"]),
                    repr(s["delta"]),
                    s["entropies_computed"],
                    repr(s["model_entropy"]),
                ]
            )
        return buf.getvalue().encode()
    raise UnknownFormat(f"unknown output format {fmt!r}; expected one of {', '.join(FORMATS)}")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decomposable", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", help="learn a decomposable model from a CSV file")
    sel.add_argument("input", help="CSV file with a header row")
    sel.add_argument("--mode", choices=("forward", "backward", "alternating"), default="forward")
    sel.add_argument("--max-steps", type=int, default=1_000_000)
    sel.add_argument("--min-delta", type=float, default=1e-9)
    sel.add_argument("--max-clique-size", type=int, default=None)
    sel.add_argument("--format", choices=FORMATS, default="json")
    sel.add_argument("--out", default=None, help="output file (default: stdout)")
    sel.add_argument("--init-edges", default=None, help="starting edge list, one name,name pair per line")
    sel.add_argument("--timings", action="store_true", help="include per-step wall-clock times in JSON")
    sel.add_argument("--check", action="store_true", help="verify the clique graph after every step")

    ver = sub.add_parser("verify", help="compare incremental structures with the reference oracle")
    ver.add_argument("--seed", type=int, default=1)
    ver.add_argument("--n", type=int, default=6)
    ver.add_argument("--steps", type=int, default=10)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "verify":
            report = verify_trajectory(args.seed, args.n, args.steps)
            print(report.summary())
            return 0 if report.ok else 2
        data = ingest(args.input)
        config = SelectionConfig(
            mode=args.mode,
            max_steps=args.max_steps,
            min_delta=args.min_delta,
            max_clique_size=args.max_clique_size,
        )
        init = read_edge_list(args.init_edges, list(data.columns)) if args.init_edges else None
        manifest = select(data, config, init_edges=init, input_path=args.input, timings=args.timings, check=args.check)
        payload = emit(manifest, args.format)
    except InternalInconsistency as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except (DecomposableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
