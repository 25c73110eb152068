"""Command-line experiment driver writing CSV curve data.

Every output starts with ``#`` comment lines that record the tool version,
the subcommand and the full resolved configuration as ``key=value`` pairs
(plus a code description line for coded runs).  Feeding an output file
back through ``--config`` reproduces it byte-for-byte; ``--workers`` is an
execution knob and is deliberately not recorded.

Exit codes: 0 success, 2 validation error, 3 budget/convergence error.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (dmt_coded, dmt_mimo_legacy, dmt_uncoded, high_snr_ser_approx,
                       pep_exact, pep_hypergeometric, pep_quadrature, pep_upper_bound,
                       union_bound_ser)
from .coded import (coded_union_bound_chain, coded_word_error_bound, field_size_rule,
                    simulate_wer, simulate_wer_conditional)
from .core import (InsufficientDataError, estimate_diversity_slope, rate_schedule,
                   simulate_ser, simulate_ser_conditional)
from .gf import BudgetError, MdsCode, prime_power
from .montecarlo import RngSpec
from .selection import selection_report, simulate_selection_gain
from .specfun import ConvergenceError

EXIT_VALIDATION = 2
EXIT_BUDGET = 3


class ValidationError(ValueError):
    pass


# -- value parsing ------------------------------------------------------------

def _float_list(text):
    text = str(text).strip()
    return [float(v) for v in text.split(",") if v.strip()] if text else []


def _code(text):
    parts = [int(v) for v in str(text).split(",")]
    if len(parts) != 3:
        raise ValueError("code must be given as N,K,q")
    return tuple(parts)


def _opt_int(text):
    return None if text in (None, "", "none") else int(text)


def _opt_float(text):
    return None if text in (None, "", "none") else float(text)


def _bool(text):
    if isinstance(text, bool):
        return text
    return str(text).lower() in ("1", "true", "yes", "on")


def _fmt_value(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt_value(x) for x in v)
    return str(v)


COMMON = {
    "nr": (_opt_int, None),
    "n": (_opt_int, None),
    "snr_db_from": (float, 0.0),
    "snr_db_to": (float, 30.0),
    "snr_db_step": (float, 2.0),
    "seed": (int, 1),
}

SCHEMAS = {
    "pep": dict(COMMON),
    "uncoded": {
        **COMMON,
        "m": (int, 16),
        "rate_r": (_opt_float, None),
        "rate_sweep": (_float_list, []),
        "trials": (int, 10000),
        "ensembles": (int, 100),
        "estimator": (str, "direct"),
    },
    "coded": {
        **COMMON,
        "code": (_code, (3, 1, 5)),
        "rate_r": (_opt_float, None),
        "trials": (int, 10000),
        "ensembles": (int, 100),
        "estimator": (str, "auto"),
        "nt": (_opt_int, None),
    },
    "selection": {
        **COMMON,
        "energy_e": (_float_list, [0.25, 0.5, 1.0, 2.0]),
        "simulate": (_bool, False),
        "m": (int, 256),
        "target_ser": (float, 1e-3),
        "trials": (int, 8),
        "ensembles": (int, 12500),
    },
    "dmt": {
        "nr": (_opt_int, None),
        "nt": (_opt_int, None),
        "code": (_code, (64, 57, 64)),
        "r_step": (float, 0.25),
    },
}

DEFAULT_NR = {"pep": 4, "uncoded": 4, "coded": 2, "selection": 2, "dmt": 8}


def read_config(path):
    """Parse ``key=value`` lines; a leading ``#`` is allowed (CSV headers).

    Reading stops at the first line that is neither a comment nor a
    ``key=value`` pair, so a CSV produced by this tool can be used directly.
    """
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        comment = line.startswith("#")
        body = line.lstrip("#").strip()
        key, sep, value = body.partition("=")
        key = key.strip().replace("-", "_")
        if sep and key.isidentifier():
            out[key] = value.strip()
        elif not comment:
            break
    return out


def resolve_config(command, file_cfg, cli_cfg):
    schema = SCHEMAS[command]
    cfg = {k: default for k, (_, default) in schema.items()}
    file_cfg = dict(file_cfg)
    file_command = file_cfg.pop("command", command)
    if file_command != command:
        raise ValidationError(f"config was written by '{file_command}', not '{command}'")
    for source in (file_cfg, cli_cfg):
        for key, value in source.items():
            if key not in schema:
                raise ValidationError(f"unknown option '{key}' for {command}")
            if value is None:
                continue
            try:
                cfg[key] = schema[key][0](value)
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"bad value for {key}: {value!r} ({exc})") from None
    _validate(command, cfg)
    return cfg


def _validate(command, cfg):
    if cfg.get("nr") is not None and cfg.get("n") is not None:
        raise ValidationError("give either --nr or --n, not both")
    if "n" in cfg and cfg["n"] is not None:
        if cfg["n"] < 2 or cfg["n"] % 2:
            raise ValidationError(f"n must be an even integer >= 2, got {cfg['n']}")
        cfg["nr"] = cfg["n"] // 2
    if cfg.get("nr") is None:
        cfg["nr"] = DEFAULT_NR[command]
    if cfg["nr"] < 1:
        raise ValidationError("nr must be >= 1")
    cfg.pop("n", None)
    if "snr_db_step" in cfg and not cfg["snr_db_step"] > 0:
        raise ValidationError("snr-db-step must be positive")
    for key in ("trials", "ensembles"):
        if key in cfg and cfg[key] < 1:
            raise ValidationError(f"{key} must be >= 1")
    if "m" in cfg and cfg["m"] < 2:
        raise ValidationError("m must be >= 2")
    if cfg.get("rate_r") is not None and cfg["rate_r"] < 0:
        raise ValidationError("rate-r must be nonnegative")
    if "rate_sweep" in cfg and any(r < 0 for r in cfg["rate_sweep"]):
        raise ValidationError("rate sweep values must be nonnegative")
    if "estimator" in cfg and cfg["estimator"] not in ("direct", "conditional", "auto"):
        raise ValidationError("estimator must be direct, conditional or auto")
    if "code" in cfg:
        N, K, q = cfg["code"]
        if prime_power(q) is None:
            raise ValidationError(f"field size {q} is not a prime power")
        if not 1 <= K <= N <= q:
            raise ValidationError("code needs 1 <= K <= N <= q")
    if "energy_e" in cfg and any(not e > 0 for e in cfg["energy_e"]):
        raise ValidationError("energy thresholds must be positive")
    if "target_ser" in cfg and not 0 < cfg["target_ser"] < 1:
        raise ValidationError("target-ser must lie in (0, 1)")
    if "r_step" in cfg and not cfg["r_step"] > 0:
        raise ValidationError("r-step must be positive")


def snr_grid(cfg):
    lo, hi, step = cfg["snr_db_from"], cfg["snr_db_to"], cfg["snr_db_step"]
    if lo > hi:
        return []
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 10) for k in range(count)]


# -- output -----------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9g")


def header_lines(command, cfg, extra=()):
    lines = [f"# mbm-dmt {__version__}", f"# command={command}"]
    lines += [f"# {k}={_fmt_value(v)}" for k, v in sorted(cfg.items())]
    lines += [f"# {e}" for e in extra]
    return lines


def write_table(stream, header, columns, rows):
    stream.write("\n".join(header) + "\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(_fmt(v) for v in row) + "\n")


def _companion(out, suffix):
    if out in (None, "-"):
        return None
    p = Path(out)
    return p.with_name(p.stem + suffix + p.suffix)


# -- subcommands ----------------------------------------------------------------

def cmd_pep(cfg, workers):
    n = 2 * cfg["nr"]
    rows = []
    for sdb in snr_grid(cfg):
        snr = 10.0 ** (sdb / 10.0)
        c = snr / 2.0
        rows.append((sdb, c, n, pep_exact(c, n).value, pep_hypergeometric(c, n).value,
                     pep_quadrature(snr, n).value, pep_upper_bound(c, n).value))
    cols = ["snr_db", "c", "n", "pep_exact", "pep_hypergeometric", "pep_quadrature",
            "pep_upper_bound"]
    return [(None, header_lines("pep", cfg), cols, rows)]


def _ser_point(cfg, n, M, snr, rng, workers):
    if cfg["estimator"] == "conditional":
        return simulate_ser_conditional(n, M, snr, cfg["trials"] * cfg["ensembles"], rng,
                                        workers)
    return simulate_ser(n, M, snr, cfg["trials"], cfg["ensembles"], rng, workers)


def cmd_uncoded(cfg, workers):
    n = 2 * cfg["nr"]
    rates = list(cfg["rate_sweep"]) or [cfg["rate_r"]]
    rows = []
    slopes = []
    for ri, r in enumerate(rates):
        curve = []
        for k, sdb in enumerate(snr_grid(cfg)):
            snr = 10.0 ** (sdb / 10.0)
            M = cfg["m"] if r is None else rate_schedule(snr, r)
            est = _ser_point(cfg, n, M, snr, RngSpec(cfg["seed"], 1000 * ri + k), workers)
            R = math.log2(M)
            r_eff = r if r is not None else math.log(M) / math.log(snr) if snr > 1 else 0.0
            approx = high_snr_ser_approx(snr, n, r_eff) if snr > 2 else math.nan
            rows.append((sdb, sdb - 10.0 * math.log10(R), est.error_rate, est.ci95_halfwidth,
                         union_bound_ser(M, snr / 2.0, n), approx, M,
                         math.nan if r is None else r))
            curve.append((snr, est.error_rate))
        if r is not None and cfg["rate_sweep"]:
            try:
                slope = estimate_diversity_slope(curve)
            except InsufficientDataError:
                slope = math.nan
            slopes.append((r, slope, -(cfg["nr"] - r)))
    cols = ["snr_db", "ebn0_db", "ser_sim", "ci95", "union_bound", "high_snr_approx",
            "m_points", "rate_r"]
    header = header_lines("uncoded", cfg)
    tables = [(None, header, cols, rows)]
    if slopes:
        tables.append((".slopes", header, ["rate_r", "slope", "expected_slope"], slopes))
    return tables


def cmd_coded(cfg, workers):
    N, K, q0 = cfg["code"]
    nr = cfg["nr"]
    n = 2 * nr
    base = MdsCode.reed_solomon(q0, N, K)
    tau = base.rate
    rows = []
    for k, sdb in enumerate(snr_grid(cfg)):
        snr = 10.0 ** (sdb / 10.0)
        c = snr / 2.0
        if cfg["rate_r"] is None:
            code = base
        else:
            q, _ = field_size_rule(cfg["rate_r"], tau, snr)
            code = MdsCode.reed_solomon(max(q, q0), N, K)
        rng = RngSpec(cfg["seed"], k)
        use_cond = cfg["estimator"] == "conditional" or (
            cfg["estimator"] == "auto" and code.D == code.N)
        if use_cond:
            est = simulate_wer_conditional(code, n, snr, cfg["trials"] * cfg["ensembles"],
                                           rng, workers)
        else:
            est = simulate_wer(code, n, snr, cfg["trials"], cfg["ensembles"], rng, workers)
        chain = coded_union_bound_chain(code, n, c)
        r_tau = math.log(code.q) / math.log1p(c)
        eq26 = coded_word_error_bound(N, nr, code.D, r_tau * tau, tau, c) \
            if r_tau < nr else math.nan
        rows.append((sdb, est.error_rate, est.ci95_halfwidth, chain.value, chain.dominant,
                     eq26, code.q))
    cols = ["snr_db", "wer_sim", "ci95", "chain_bound", "chain_dominant", "eq26_bound",
            "q_used"]
    header = header_lines("coded", cfg, [f"code: {base.describe()}"])
    dmt_rows = _dmt_rows(nr, cfg["nt"] or nr, base.D, tau, 0.25)
    return [(None, header, cols, rows),
            (".dmt", header, ["r", "d_uncoded", "d_coded", "d_mimo"], dmt_rows)]


def _dmt_rows(nr, nt, D, tau, step):
    rows = []
    rmax = min(nr, nt)
    count = int(math.floor(rmax / step + 1e-9)) + 1
    for k in range(count):
        r = round(k * step, 10)
        d_unc = dmt_uncoded(nr, r).d
        d_cod = dmt_coded(nr, r, D, tau).d if r / tau <= nr else math.nan
        rows.append((r, d_unc, d_cod, dmt_mimo_legacy(nt, nr, r).d))
    return rows


def cmd_dmt(cfg, workers):
    N, K, q = cfg["code"]
    code = MdsCode.reed_solomon(q, N, K)
    nt = cfg["nt"] or cfg["nr"]
    rows = _dmt_rows(cfg["nr"], nt, code.D, code.rate, cfg["r_step"])
    header = header_lines("dmt", cfg, [f"code: {code.describe()}"])
    return [(None, header, ["r", "d_uncoded", "d_coded", "d_mimo"], rows)]


def cmd_selection(cfg, workers):
    n = 2 * cfg["nr"]
    rows = []
    for k, E in enumerate(cfg["energy_e"]):
        rep = selection_report(E, n)
        gain = ci = math.nan
        if cfg["simulate"]:
            res = simulate_selection_gain(n, cfg["m"], E, cfg["target_ser"], snr_grid(cfg),
                                          cfg["trials"], cfg["ensembles"],
                                          RngSpec(cfg["seed"], 10000 * (k + 1)), workers)
            gain, ci = res.gain_db, res.ci_db
        rows.append((E, rep.extra_mirrors, rep.gamma_c_db, rep.removed_fraction, gain, ci))
    cols = ["E", "delta_mirrors", "gamma_c_db", "removed_fraction", "sim_gain_db", "sim_ci"]
    return [(None, header_lines("selection", cfg), cols, rows)]


COMMANDS = {"pep": cmd_pep, "uncoded": cmd_uncoded, "coded": cmd_coded,
            "selection": cmd_selection, "dmt": cmd_dmt}


# -- argument parsing ---------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="mbm-dmt", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"mbm-dmt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS
    for name in COMMANDS:
        p = sub.add_parser(name)
        schema = SCHEMAS[name]
        p.add_argument("--config", default=None, help="key=value file (or a previous CSV)")
        p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
        p.add_argument("--workers", type=int, default=1)
        for key in schema:
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, dest=key, default=S)
    sub.add_parser("selfcheck")
    return parser


def run(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "selfcheck":
        from .checks import run_selfcheck
        return 0 if run_selfcheck(stdout) else 1
    ns = vars(args)
    cli_cfg = {k: v for k, v in ns.items()
               if k in SCHEMAS[args.command]}
    try:
        file_cfg = read_config(args.config) if args.config else {}
        cfg = resolve_config(args.command, file_cfg, cli_cfg)
        if args.workers < 1:
            raise ValidationError("workers must be >= 1")
        tables = COMMANDS[args.command](cfg, args.workers)
    except (BudgetError, ConvergenceError, InsufficientDataError) as exc:
        print(f"mbm-dmt: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, OSError) as exc:
        print(f"mbm-dmt: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for suffix, header, cols, rows in tables:
        target = args.out if suffix is None else _companion(args.out, suffix)
        if target in (None, "-"):
            if suffix is not None:
                stdout.write("\n")
            write_table(stdout, header, cols, rows)
        else:
            buf = io.StringIO()
            write_table(buf, header, cols, rows)
            Path(target).write_text(buf.getvalue())
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
