"""Command line interface: ``matgibbs eigen|measure|energy|direction|verify``.

Systems come from a preset (``--preset harmonic-gasket``) or a YAML/JSON
config file (``--config path``)::

    dim: 2
    maps:
      - linear: [["3/5", 0], [0, "1/5"]]
        translation: [0, 0]
      - ...

Matrix entries may be numbers or exact strings such as ``"3/5"``,
``"sqrt(3)/10"`` or ``"-sqrt(3)/15"``. Words on the command line and in CSV
output use 1-based letters joined by dots (``1.3.2``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import checks, gibbs, ifs, ruelle
from . import energy as en
from .ifs import IfsError, IfsSystem

log = logging.getLogger("matgibbs")

_NUMBER = re.compile(
    r"""^\s*(?P<sign>[+-])?\s*
    (?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)|sqrt\(\s*(?P<root>\d+(?:\.\d*)?)\s*\))
    \s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$""",
    re.VERBOSE,
)


class ConfigError(ValueError):
    pass


def parse_number(value) -> float:
    """Parse a float, ``"p/q"`` or ``"sqrt(k)/m"`` (optionally signed)."""
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a number, got {value!r}")
    m = _NUMBER.match(value)
    if not m:
        raise ConfigError(f"cannot parse number {value!r}")
    x = float(m["num"]) if m["num"] is not None else math.sqrt(float(m["root"]))
    if m["den"] is not None:
        den = float(m["den"])
        if den == 0:
            raise ConfigError(f"zero denominator in {value!r}")
        x /= den
    return -x if m["sign"] == "-" else x


def parse_config(document) -> IfsSystem:
    """Build a system from a parsed config mapping (or YAML/JSON text)."""
    if isinstance(document, str):
        document = yaml.safe_load(document)
    if not isinstance(document, dict):
        raise ConfigError("config must be a mapping")
    if "preset" in document:
        return ifs.preset(str(document["preset"]))
    for key in ("dim", "maps"):
        if key not in document:
            raise ConfigError(f"missing field {key!r}")
    dim = document["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ConfigError(f"field 'dim' must be a positive integer, got {dim!r}")
    maps = document["maps"]
    if not isinstance(maps, list) or not maps:
        raise ConfigError("field 'maps' must be a nonempty list")
    raw = []
    for k, entry in enumerate(maps, start=1):
        if not isinstance(entry, dict):
            raise ConfigError(f"map {k}: expected a mapping")
        for key in ("linear", "translation"):
            if key not in entry:
                raise ConfigError(f"map {k}: missing field {key!r}")
        rows = entry["linear"]
        if not isinstance(rows, list) or len(rows) != dim:
            raise ConfigError(f"map {k}: field 'linear' must have {dim} rows")
        lin = []
        for r, row in enumerate(rows, start=1):
            if not isinstance(row, list) or len(row) != dim:
                raise ConfigError(f"map {k}: field 'linear' row {r} must have {dim} entries")
            try:
                lin.append([parse_number(v) for v in row])
            except ConfigError as exc:
                raise ConfigError(f"map {k}: field 'linear' row {r}: {exc}") from None
        trans = entry["translation"]
        if not isinstance(trans, list) or len(trans) != dim:
            raise ConfigError(f"map {k}: field 'translation' must have {dim} entries")
        try:
            t = [parse_number(v) for v in trans]
        except ConfigError as exc:
            raise ConfigError(f"map {k}: field 'translation': {exc}") from None
        raw.append((lin, t))
    return ifs.build_system(raw, name=str(document.get("name", "system")))


def load_system(preset: str | None, config: str | None) -> IfsSystem:
    if config:
        return parse_config(yaml.safe_load(Path(config).read_text()))
    return ifs.preset(preset or "harmonic-gasket")


def parse_word(text: str, n: int) -> tuple[int, ...]:
    """``"1.3.2"`` -> (0, 2, 1); the empty string is the empty word."""
    text = text.strip()
    if not text:
        return ()
    try:
        letters = tuple(int(c) - 1 for c in text.split("."))
    except ValueError:
        raise ConfigError(f"bad word {text!r}; expected dot-separated letters like 1.3.2") from None
    for c in letters:
        if not 0 <= c < n:
            raise ConfigError(f"letter {c + 1} out of range 1..{n}")
    return letters


def format_word(w) -> str:
    return ".".join(str(c + 1) for c in w)


@dataclass
class RunConfig:
    system: IfsSystem
    depth: int
    tol: float
    max_iter: int
    seed: int
    out: str | None

    def __post_init__(self):
        if self.depth < 0:
            raise ConfigError("depth must be >= 0")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        ifs.check_cap(self.system.n, self.depth)


# -- commands -----------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.15g}"


def write_measure_csv(table: gibbs.MeasureTable, stream) -> None:
    d = table.tau.shape[1]
    iu = np.triu_indices(d)
    header = ["word", "depth", "kappa"] + [f"tau_{i + 1}{j + 1}" for i, j in zip(*iu)]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for w, tau, kap in table.rows():
        writer.writerow([format_word(w), len(w), _fmt(kap)] + [_fmt(v) for v in tau[iu]])


def cmd_eigen(cfg: RunConfig, args) -> int:
    pair = ruelle.leading_eigenpair(cfg.system, tol=cfg.tol, max_iter=cfg.max_iter)
    d = cfg.system.dim
    lines = [f"beta = {pair.beta:.12f}"]
    for i in range(d):
        for j in range(i, d):
            lines.append(f"q_{i + 1}{j + 1} = {pair.q[i, j]:.15g}")
    lines.append(f"residual = {pair.residual:.3e}")
    lines.append(f"iterations = {pair.iterations}")
    _emit("\n".join(lines) + "\n", cfg.out)
    return 0


def cmd_measure(cfg: RunConfig, args) -> int:
    g = gibbs.gibbs_data(cfg.system, tol=cfg.tol, max_iter=cfg.max_iter)
    table = gibbs.measure_table(g, cfg.depth)
    buf = io.StringIO()
    write_measure_csv(table, buf)
    _emit(buf.getvalue(), cfg.out)
    return 0


def cmd_energy(cfg: RunConfig, args) -> int:
    g = gibbs.gibbs_data(cfg.system, tol=cfg.tol, max_iter=cfg.max_iter)
    ifs.check_cap(cfg.system.n, cfg.depth + 1)
    f, h = en.builtin_pairs(cfg.system.dim)[args.pair]
    e0 = en.energy(g, f, h, cfg.depth)
    e1 = en.energy(g, f, h, cfg.depth + 1)
    lines = [
        f"pair = {args.pair}",
        f"energy[L={cfg.depth}] = {e0:.15g}",
        f"energy[L={cfg.depth + 1}] = {e1:.15g}",
        f"depth_difference = {abs(e1 - e0):.3e}",
        f"self_similarity_residual[L={cfg.depth}] = {en.self_similarity_residual(g, f, h, cfg.depth):.3e}",
    ]
    _emit("\n".join(lines) + "\n", cfg.out)
    return 0


def cmd_direction(cfg: RunConfig, args) -> int:
    g = gibbs.gibbs_data(cfg.system, tol=cfg.tol, max_iter=cfg.max_iter)
    word = parse_word(args.word, cfg.system.n) if args.word else (0,) * max(cfg.depth, 1)
    if not word:
        raise ConfigError("direction needs a word of depth >= 1")
    rows = ["depth,word,residual," + ",".join(f"z_{i + 1}" for i in range(cfg.system.dim))]
    for l in range(1, len(word) + 1):
        z, r = gibbs.direction_field(g, word[:l])
        rows.append(",".join([str(l), format_word(word[:l]), _fmt(r)] + [_fmt(v) for v in z]))
    _emit("\n".join(rows) + "\n", cfg.out)
    return 0


def cmd_verify(cfg: RunConfig, args) -> int:
    results: list[checks.Check] = []
    for key in checks.CRITERIA:
        results.extend(checks.run_criterion(key, seed=cfg.seed))
    results.extend(checks.system_checks(cfg.system, cfg.depth, tol=cfg.tol, max_iter=cfg.max_iter, seed=cfg.seed))
    _emit("\n".join(c.line() for c in results) + "\n", cfg.out)
    failed = [c.name for c in results if not c.passed]
    if failed:
        print(json.dumps({"failed": failed}), file=sys.stderr)
        return 1
    return 0


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


COMMANDS = {
    "eigen": cmd_eigen,
    "measure": cmd_measure,
    "energy": cmd_energy,
    "direction": cmd_direction,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(ifs.PRESETS), help="built-in system (default harmonic-gasket)")
    src.add_argument("--config", help="YAML or JSON system description")
    common.add_argument("--depth", type=int, default=None, help="cylinder depth L")
    common.add_argument("--tol", type=float, default=1e-12)
    common.add_argument("--max-iter", type=int, default=10000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="matgibbs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eigen", parents=[common], help="Perron eigenpair of the Ruelle operator")
    sub.add_parser("measure", parents=[common], help="CSV table of tau and kappa on cylinders")
    p = sub.add_parser("energy", parents=[common], help="energy of a builtin function pair at depths L, L+1")
    p.add_argument("--pair", choices=["linear", "quadratic", "mixed"], default="linear")
    p = sub.add_parser("direction", parents=[common], help="dominant directions along prefixes of a word")
    p.add_argument("--word", default=None, help="dot-separated 1-based letters (default 1 repeated --depth times)")
    sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    return parser


_DEFAULT_DEPTH = {"eigen": 0, "measure": 1, "energy": 3, "direction": 10, "verify": 6}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    depth = _DEFAULT_DEPTH[args.command] if args.depth is None else args.depth
    try:
        system = load_system(args.preset, args.config)
        cfg = RunConfig(system, depth, args.tol, args.max_iter, args.seed, args.out)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, IfsError, ValueError, OSError, yaml.YAMLError, ruelle.ConvergenceError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
