"""Command line front end: ``hortonlab {predict,analyze,simulate,verify,prunecheck}``.

Reports are CSV (default) or JSON.  CSV output starts with ``# key=value``
lines echoing the effective configuration, followed by one or more tables
separated by a blank line.  Reals are written with 17 significant digits so
every cell parses back to the exact library value.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import secrets
import sys

from .errors import HortonError, ValidationError
from .newick import read_trees, write_trees
from .numerics import verify_strong_horton, zeta_by_recursion
from .sampler import DISTRIBUTIONS, POISSON, SamplerConfig, estimate, prune_invariance_check, sample_tree
from .tokunaga import FAMILIES, TokunagaSequence, horton_exponent
from .tree_core import horton_statistics

FAMILY_KEYS = ("family", "a", "c", "T1", "T2", "T")
COMMAND_KEYS = {
    "predict": FAMILY_KEYS + ("K", "exact", "format", "out"),
    "analyze": ("input", "format", "out"),
    "simulate": FAMILY_KEYS + ("K", "samples", "seed", "dist", "format", "out", "emit_trees"),
    "verify": FAMILY_KEYS + ("Kmax", "jmax", "format", "out"),
    "prunecheck": FAMILY_KEYS + ("K", "samples", "seed", "dist", "format", "out"),
}
DEFAULTS = {"format": "csv", "dist": POISSON, "exact": False}


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="hortonlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def common(p):
        p.add_argument("--config", help="JSON file of flat key/value defaults; flags override it")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--out", help="output path (default: stdout)")

    def family(p):
        p.add_argument("--family", choices=FAMILIES)
        p.add_argument("--a", type=float)
        p.add_argument("--c", type=float)
        p.add_argument("--T1", type=float)
        p.add_argument("--T2", type=float)
        p.add_argument("--T", help='comma separated T_1,T_2,... for the explicit family ("" for none)')

    def sampling(p):
        p.add_argument("--K", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--dist", choices=DISTRIBUTIONS)

    p = sub.add_parser("predict", help="theoretical Horton numbers and exponent")
    family(p)
    p.add_argument("--K", type=int)
    p.add_argument("--exact", action="store_const", const=True, help="exact integer arithmetic")
    common(p)

    p = sub.add_parser("analyze", help="Horton-Strahler statistics of Newick trees")
    p.add_argument("--input")
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo Horton statistics")
    family(p)
    sampling(p)
    p.add_argument("--emit-trees", dest="emit_trees", help="write every sampled tree as Newick")
    common(p)

    p = sub.add_parser("verify", help="strong Horton law convergence")
    family(p)
    p.add_argument("--Kmax", type=int)
    p.add_argument("--jmax", type=int)
    common(p)

    p = sub.add_parser("prunecheck", help="Tokunaga coefficients before and after pruning")
    family(p)
    sampling(p)
    common(p)
    return parser


def load_config(path, command) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(COMMAND_KEYS[command]))
    if unknown:
        raise ValidationError(f"unknown config keys for {command}: {', '.join(unknown)}")
    for key, value in data.items():
        if isinstance(value, (dict, list)):
            raise ValidationError(f"config value for {key!r} must be a scalar")
    return data


def effective_config(args) -> dict:
    command = args.command
    file_cfg = load_config(args.config, command) if args.config else {}
    cfg = {}
    for key in COMMAND_KEYS[command]:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
        elif key in file_cfg:
            cfg[key] = file_cfg[key]
        elif key in DEFAULTS:
            cfg[key] = DEFAULTS[key]
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ValidationError(f"missing required option(s): {', '.join('--' + k for k in missing)}")


def _int(cfg, key, minimum=1):
    _require(cfg, key)
    value = cfg[key]
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValidationError(f"--{key} must be an integer >= {minimum}, got {value!r}")
    cfg[key] = int(value)
    return cfg[key]


def sequence_from_config(cfg) -> TokunagaSequence:
    _require(cfg, "family")
    family = cfg["family"]
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}")
    if family in ("geometric", "differentiated"):
        _require(cfg, "a", "c")
        build = TokunagaSequence.geometric if family == "geometric" else TokunagaSequence.differentiated
        return build(float(cfg["a"]), float(cfg["c"]))
    if family == "shallow":
        return TokunagaSequence.shallow(float(cfg.get("T1") or 0.0), float(cfg.get("T2") or 0.0))
    _require(cfg, "T")
    text = str(cfg["T"]).strip()
    try:
        terms = [float(x) for x in text.split(",")] if text else []
    except ValueError as exc:
        raise ValidationError(f"--T must be comma separated numbers: {exc}") from None
    return TokunagaSequence.explicit(terms)


# --------------------------------------------------------------------- #
# report rendering
# --------------------------------------------------------------------- #


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) or hasattr(value, "dtype"):
        if hasattr(value, "dtype") and value.dtype.kind in "iu":
            return str(int(value))
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def _json_value(value):
    if hasattr(value, "dtype"):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class Report:
    def __init__(self, command, config):
        self.command = command
        self.config = config
        self.results = {}
        self.tables = []

    def table(self, name, columns, rows):
        self.tables.append((name, columns, rows))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# command={self.command}\n")
        for key, value in self.config.items():
            buf.write(f"# {key}={format_cell(value)}\n")
        for key, value in self.results.items():
            buf.write(f"# {key}={format_cell(value)}\n")
        for n, (name, columns, rows) in enumerate(self.tables):
            if n:
                buf.write("\n")
            buf.write(f"# table={name}\n")
            buf.write(",".join(columns) + "\n")
            for row in rows:
                buf.write(",".join(format_cell(v) for v in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "config": {k: _json_value(v) for k, v in self.config.items()},
            "results": {k: _json_value(v) for k, v in self.results.items()},
            "tables": {
                name: [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
                for name, columns, rows in self.tables
            },
        }
        return json.dumps(doc, indent=2) + "\n"

    def render(self, fmt) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


# --------------------------------------------------------------------- #
# commands
# --------------------------------------------------------------------- #


def cmd_predict(cfg) -> Report:
    seq = sequence_from_config(cfg)
    K = _int(cfg, "K")
    exact = bool(cfg.get("exact"))
    table = zeta_by_recursion(seq, K, exact=exact)
    exponent = horton_exponent(seq)
    report = Report("predict", cfg)
    report.results.update(R=exponent.R, w0=exponent.w0, method=exponent.method, residual=exponent.residual)
    rows = [
        (k, table.zeta[k - 1], table.xi[k - 1], exponent.R ** (1 - k))
        for k in range(1, K + 1)
    ]
    report.table("zeta", ("k", "zeta_k", "xi_k", "R_pow_1_minus_k"), rows)
    return report


def cmd_analyze(cfg) -> Report:
    _require(cfg, "input")
    trees = read_trees(cfg["input"])
    if not trees:
        raise ValidationError(f"no trees found in {cfg['input']}")
    report = Report("analyze", cfg)
    report.results["trees"] = len(trees)
    branch_rows, side_rows = [], []
    for n, tree in enumerate(trees):
        stats = horton_statistics(tree)
        report.results[f"order_{n}"] = stats.order
        branch_rows.extend((n, k, v) for k, v in stats.branch_counts.items())
        side_rows.extend((n, i, j, v) for (i, j), v in stats.side_branch_counts.items())
    report.table("branches", ("tree", "k", "N_k"), branch_rows)
    report.table("side_branches", ("tree", "i", "j", "N_ij"), side_rows)
    return report


def _sampler_config(cfg) -> SamplerConfig:
    seq = sequence_from_config(cfg)
    K = _int(cfg, "K")
    samples = _int(cfg, "samples")
    if cfg.get("seed") is None:
        cfg["seed"] = secrets.randbits(63)
    seed = _int(cfg, "seed", minimum=0)
    return SamplerConfig(seq, K, distribution=cfg.get("dist", POISSON), seed=seed, samples=samples)


def cmd_simulate(cfg) -> Report:
    config = _sampler_config(cfg)
    print(f"seed={config.seed}", file=sys.stderr)
    result = estimate(config)
    theory = zeta_by_recursion(config.seq, config.K).zeta
    report = Report("simulate", cfg)
    report.table(
        "branches",
        ("k", "mean_Nk", "se_Nk", "theory_Nk"),
        [(k, result.mean_Nk[k], result.se_Nk[k], theory[k - 1]) for k in range(1, config.K + 1)],
    )
    report.table(
        "side_branches",
        ("i", "j", "mean_Nij", "se_Nij", "T_hat_ij", "T_theory"),
        [
            (i, j, result.mean_Nij[i, j], result.se_Nij[i, j], result.tokunaga_hat[i, j], config.seq.term(j - i))
            for i, j in result.pairs()
        ],
    )
    if cfg.get("emit_trees"):
        write_trees(cfg["emit_trees"], (sample_tree(config, i) for i in range(config.samples)))
    return report


def cmd_verify(cfg) -> Report:
    seq = sequence_from_config(cfg)
    Kmax = _int(cfg, "Kmax", minimum=2)
    if cfg.get("jmax") is None:
        cfg["jmax"] = min(6, Kmax)
    jmax = _int(cfg, "jmax", minimum=2)
    conv = verify_strong_horton(seq, Kmax, jmax)
    report = Report("verify", cfg)
    report.results.update(
        R_theory=conv.R_theory,
        R_estimate=conv.R_estimate,
        diverged=conv.diverged,
        tail_fluctuation=conv.tail_fluctuation,
    )
    ref = conv.R_theory if conv.R_theory is not None else conv.R_estimate
    report.table(
        "ratios",
        ("K", "ratio", "R_estimate_error"),
        [(K, r, abs(r - ref)) for K, r in enumerate(conv.ratio_sequence, start=1)],
    )
    report.table(
        "xi",
        ("j", "xi_j", "R_pow_1_minus_j", "abs_error"),
        [(j, conv.xi[j - 1], ref ** (1 - j), err) for j, err in conv.per_j_errors.items()],
    )
    return report


def cmd_prunecheck(cfg) -> Report:
    config = _sampler_config(cfg)
    print(f"seed={config.seed}", file=sys.stderr)
    res = prune_invariance_check(config)
    report = Report("prunecheck", cfg)
    report.results.update(
        identity_violations=res.identity_violations,
        order_violations=res.order_violations,
        max_discrepancy=res.max_discrepancy,
        max_theory_discrepancy=res.max_theory_discrepancy,
    )
    d, p = res.direct, res.pruned
    report.table(
        "tokunaga",
        (
            "i", "j", "T_hat_direct", "se_direct", "T_hat_pruned", "se_pruned",
            "T_theory", "z_pruned_vs_direct", "z_pruned_vs_theory",
        ),
        [
            (
                i, j, d.tokunaga_hat[i, j], d.se_tokunaga[i, j], p.tokunaga_hat[i, j], p.se_tokunaga[i, j],
                res.theory[i, j], res.z_pruned_vs_direct[i, j], res.z_pruned_vs_theory[i, j],
            )
            for i, j in d.pairs()
        ],
    )
    return report


COMMANDS = {
    "predict": cmd_predict,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "prunecheck": cmd_prunecheck,
}


def run(argv=None, stdout=None) -> int:
    """Execute one command; returns the process exit code."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = effective_config(args)
        report = COMMANDS[args.command](cfg)
        text = report.render(cfg.get("format", "csv"))
        if cfg.get("out"):
            with open(cfg["out"], "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            stdout.write(text)
    except ValidationError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except (HortonError, OSError) as exc:
        code = getattr(exc, "code", type(exc).__name__)
        print(f"error: {code}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print(f"error: {ValidationError.code}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
