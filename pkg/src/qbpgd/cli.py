"""Command-line front end: validate codes, decode, run sweeps and exact checks.

Exit status is 0 for any completed run, whatever the decoding outcomes;
2 for bad input or tool failures; 1 when the exact DQML/sampling bounds are
violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from .codes import (
    CodeFormatError,
    CssCode,
    CssValidationError,
    hypergraph_product,
    parse_alist,
    parse_code_file,
    write_code_file,
)
from .decimation import degeneracy_experiment
from .montecarlo import (
    BIT_FLIP,
    DECODERS,
    DEPOLARIZING,
    Decoder,
    DecoderSpec,
    NoiseModel,
    run_trials,
)
from .oracle import sampling_error_rates

SWEEP_COLUMNS = [
    "code", "decoder", "variant", "p", "T", "R", "gamma_prime", "seed", "trials", "block_errors",
    "bler", "bler_ci_lo", "bler_ci_hi", "nonconv_frac", "r_avg", "wall_s",
]
SYMBOLS = "IXYZ"
EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _prob_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad probability list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty probability list")
    return vals


def _common(p: argparse.ArgumentParser, decoding: bool = True) -> None:
    src = p.add_argument_group("code source")
    src.add_argument("--code", metavar="PATH", help="code file")
    src.add_argument("--hgp", nargs=2, metavar=("A.alist", "B.alist"), help="hypergraph product of two alist matrices")
    p.add_argument("--config", metavar="PATH", help="key = value file; flags take precedence")
    if not decoding:
        return
    p.add_argument("--decoder", choices=DECODERS, default="bpgd")
    p.add_argument("--noise", choices=(BIT_FLIP, DEPOLARIZING), help="defaults to the decoder's natural channel")
    p.add_argument("--p", type=_prob_list, default=[0.05], help="probability or comma-separated list")
    p.add_argument("--T", type=int, default=10, help="BP iterations (per round for decimation)")
    p.add_argument("--R", type=int, default=None, help="decimation rounds (default n)")
    p.add_argument("--K", type=float, default=25.0, help="message saturation")
    p.add_argument("--llr-max", type=float, default=25.0)
    p.add_argument("--gamma-prime", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=1e-10)
    p.add_argument("--variant", choices=("sum-product", "min-sum"), default="sum-product")
    p.add_argument("--alpha", type=float, default=0.625, help="min-sum scaling")
    p.add_argument("--seed", type=int, default=None, help="master seed (fallback: $QBPGD_SEED, then 0)")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="qbpgd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("validate", help="print code parameters and check G2 H1^T = 0")
    p.add_argument("path", nargs="?", help="code file (same as --code)")
    _common(p, decoding=False)
    subs["validate"] = p

    p = sub.add_parser("decode", help="decode one syndrome and print JSON")
    _common(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--syndrome", help="syndrome bits, e.g. 111 or 1,1,1")
    g.add_argument("--error", help="error as n symbols (0/1, or IXYZ / 0123 for quaternary)")
    g.add_argument("--error-file", metavar="PATH")
    subs["decode"] = p

    p = sub.add_parser("sweep", help="Monte Carlo block error rates over a list of probabilities")
    _common(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-trials", type=int, default=10000)
    p.add_argument("--target-errors", type=int, default=100, help="0 disables the error target")
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--timing", action="store_true", help="fill the wall_s column")
    subs["sweep"] = p

    p = sub.add_parser("degeneracy", help="tally BPGD-rd estimates for one fixed error")
    _common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--truth", help="error bits")
    g.add_argument("--truth-file", metavar="PATH")
    p.add_argument("--runs", type=int, default=10000)
    p.add_argument("--top", type=int, default=10, help="rows to print")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(decoder="bpgd-rd")
    subs["degeneracy"] = p

    p = sub.add_parser("theorem1", help="exact DQML and sampling-decoder error rates")
    p.add_argument("path", nargs="?", help="code file (same as --code)")
    _common(p, decoding=False)
    p.add_argument("--p", type=_prob_list, default=[0.01, 0.05, 0.1, 0.2])
    subs["theorem1"] = p

    p = sub.add_parser("construct-hgp", help="write the hypergraph product of two alist matrices")
    _common(p, decoding=False)
    p.add_argument("--name", default="hgp")
    p.add_argument("--out", metavar="PATH", required=True)
    subs["construct-hgp"] = p
    return parser, subs


def read_config(path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (t.strip() for t in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _apply_config(parser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in parser._actions}
    defaults = {}
    for key, val in values.items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        act = actions[key]
        if act.nargs == 2:
            defaults[key] = val.split()
        elif isinstance(act, argparse._StoreTrueAction):
            defaults[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            # argparse converts string defaults with the action's type
            defaults[key] = val
    parser.set_defaults(**defaults)


def load_code(args) -> CssCode:
    path = getattr(args, "path", None) or args.code
    if path and args.hgp:
        raise UsageError("give either a code file or --hgp, not both")
    if args.hgp:
        a, b = args.hgp
        return hypergraph_product(parse_alist(a), parse_alist(b), name=f"hgp-{Path(a).stem}-{Path(b).stem}")
    if not path:
        raise UsageError("no code given (use --code PATH or --hgp A B)")
    return parse_code_file(path)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QBPGD_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"QBPGD_SEED must be an integer, got {env!r}") from None
    return 0


def _spec(args) -> DecoderSpec:
    return DecoderSpec(
        name=args.decoder, T=args.T, R=args.R, K=args.K, llr_max=args.llr_max,
        gamma_prime=args.gamma_prime, eps=args.epsilon, variant=args.variant, alpha=args.alpha,
    )


def _noise(args, spec: DecoderSpec, p: float) -> NoiseModel:
    kind = args.noise or (DEPOLARIZING if spec.quaternary else BIT_FLIP)
    if spec.quaternary != (kind == DEPOLARIZING):
        raise UsageError(f"decoder {spec.name} cannot be used with {kind} noise")
    return NoiseModel(kind, p)


def _bits(text: str, alphabet: str = "01") -> np.ndarray:
    text = "".join(text.replace(",", " ").split()).upper()
    if not text:
        raise UsageError("empty vector")
    table = {c: i for i, c in enumerate(alphabet)}
    if alphabet == "IXYZ":
        table.update({str(i): i for i in range(4)})
    try:
        return np.array([table[c] for c in text], dtype=np.uint8)
    except KeyError as e:
        raise UsageError(f"unexpected symbol {e.args[0]!r}") from None


def _hist(weights) -> str:
    return " ".join(f"{w}:{c}" for w, c in sorted(Counter(int(x) for x in weights).items()))


def cmd_validate(args, out) -> int:
    code = load_code(args)
    print(f"name={code.name} n={code.n} k1={code.k1} k2={code.k2} k={code.k} m={code.m} valid", file=out)
    print(f"H1 rows={code.H1.rows} row weights {_hist(code.H1.row_weights())}", file=out)
    print(f"G2 rows={code.G2.rows} row weights {_hist(code.G2.row_weights())}", file=out)
    return EXIT_OK


def _estimate_json(est, quaternary: bool):
    if est is None:
        return None
    if quaternary:
        return [{"qubit": int(i) + 1, "pauli": SYMBOLS[int(est[i])]} for i in np.flatnonzero(est)]
    return [int(i) + 1 for i in np.flatnonzero(est)]


def cmd_decode(args, out) -> int:
    code = load_code(args)
    spec = _spec(args)
    if len(args.p) != 1:
        raise UsageError("decode takes a single probability")
    model = _noise(args, spec, args.p[0])
    decoder = Decoder(code, spec)
    alphabet = "IXYZ" if spec.quaternary else "01"
    truth = None
    if args.error or args.error_file:
        truth = _bits(args.error or Path(args.error_file).read_text(), alphabet)
        if truth.size != code.n:
            raise UsageError(f"error has length {truth.size}, expected {code.n}")
        s = decoder.syndrome(truth)
    elif args.syndrome:
        s = _bits(args.syndrome)
    else:
        s = np.zeros(decoder.graph.m, dtype=np.uint8)
    if s.size != decoder.graph.m:
        raise UsageError(f"syndrome has length {s.size}, expected {decoder.graph.m}")
    rng = np.random.default_rng(_seed(args))
    res = decoder.decode(s, model.p, rng)
    report = {
        "code": code.name,
        "decoder": spec.name,
        "p": model.p,
        "syndrome": "".join(str(int(b)) for b in s),
        "converged": res.converged,
        "estimate_support": _estimate_json(res.estimate, spec.quaternary),
        "rounds": res.rounds,
        "trace": [
            [v + 1, SYMBOLS[b] if spec.quaternary else b] for v, b in res.trace
        ],
    }
    if truth is not None:
        report["outcome"] = decoder.classify(truth, res.estimate).value
    print(json.dumps(report), file=out)
    return EXIT_OK


def _fmt(x) -> str:
    return repr(float(x))


def cmd_sweep(args, out) -> int:
    code = load_code(args)
    spec = _spec(args)
    ps = args.p
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise UsageError("sweep probabilities must be strictly increasing")
    seed = _seed(args)
    target = args.target_errors if args.target_errors > 0 else None
    rows = []
    for p in ps:
        model = _noise(args, spec, p)
        st = run_trials(code, model, spec, args.max_trials, target, seed, args.workers)
        lo, hi = st.bler_ci
        rows.append({
            "code": code.name,
            "decoder": spec.name,
            "variant": spec.variant,
            "p": _fmt(p),
            "T": str(spec.T),
            "R": str(spec.R if spec.R is not None else code.n) if spec.decimates else "",
            "gamma_prime": _fmt(spec.gamma_prime) if spec.name == "bpgd-rd" else "",
            "seed": str(seed),
            "trials": str(st.trials),
            "block_errors": str(st.block_errors),
            "bler": _fmt(st.bler),
            "bler_ci_lo": _fmt(lo),
            "bler_ci_hi": _fmt(hi),
            "nonconv_frac": _fmt(st.nonconv_frac),
            "r_avg": _fmt(st.r_avg),
            "wall_s": f"{st.wall_s:.3f}" if args.timing else "",
        })
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(rows, indent=2) + "\n"
    _emit(text, args.out, out)
    return EXIT_OK


def _emit(text: str, path, out) -> None:
    if path:
        Path(path).write_text(text)
    else:
        out.write(text)


def cmd_degeneracy(args, out) -> int:
    code = load_code(args)
    spec = _spec(args)
    if spec.name != "bpgd-rd":
        raise UsageError("the degeneracy experiment needs --decoder bpgd-rd")
    if len(args.p) != 1:
        raise UsageError("degeneracy takes a single probability")
    truth = _bits(args.truth or Path(args.truth_file).read_text())
    if truth.size != code.n:
        raise UsageError(f"truth has length {truth.size}, expected {code.n}")
    rep = degeneracy_experiment(code, truth, args.runs, spec.gd_config(), _noise(args, spec, args.p[0]).p)
    print(
        f"runs={rep.runs} converged={rep.converged} convergence={rep.convergence_fraction:.4f} "
        f"distinct={rep.distinct} logical={sum(e.frequency for e in rep.entries if not e.outcome.is_success)}",
        file=out,
    )
    print(f"{'index':>5} {'frequency':>9} {'weight':>6} {'distance':>8}  class", file=out)
    for i, e in enumerate(rep.entries[: args.top], start=1):
        print(f"{i:>5} {e.frequency:>9} {e.weight:>6} {e.distance:>8}  {e.outcome.value}", file=out)
    if args.out:
        rows = [
            {"index": i, "frequency": e.frequency, "weight": e.weight, "distance": e.distance,
             "class": e.outcome.value, "support": " ".join(str(j + 1) for j in np.flatnonzero(e.estimate))}
            for i, e in enumerate(rep.entries, start=1)
        ]
        if args.format == "csv":
            buf = io.StringIO()
            w = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["index"], lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
            Path(args.out).write_text(buf.getvalue())
        else:
            Path(args.out).write_text(json.dumps(rows, indent=2) + "\n")
    return EXIT_OK


def cmd_theorem1(args, out) -> int:
    code = load_code(args)
    status = EXIT_OK
    print(f"{'p':>8} {'P_DQML':>22} {'P_S':>22} {'ratio':>10}  bounds", file=out)
    for p in args.p:
        r = sampling_error_rates(code, p)
        ratio = r.p_s / r.p_dqml if r.p_dqml > 0 else 1.0
        ok = r.theorem_holds()
        if not ok:
            status = EXIT_VIOLATION
        print(f"{p:>8g} {r.p_dqml:>22.15e} {r.p_s:>22.15e} {ratio:>10.6f}  {'ok' if ok else 'VIOLATED'}", file=out)
    return status


def cmd_construct_hgp(args, out) -> int:
    if not args.hgp:
        raise UsageError("construct-hgp needs --hgp A.alist B.alist")
    code = load_code(args)
    if args.name:
        code = CssCode(code.H1, code.G2, args.name)
    write_code_file(code, args.out)
    print(f"wrote {args.out}: n={code.n} k={code.k} rows H1={code.H1.rows} G2={code.G2.rows}", file=out)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "decode": cmd_decode,
    "sweep": cmd_sweep,
    "degeneracy": cmd_degeneracy,
    "theorem1": cmd_theorem1,
    "construct-hgp": cmd_construct_hgp,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    try:
        known, _ = pre.parse_known_args(argv)
        if known.config and known.command in subs:
            _apply_config(subs[known.command], read_config(known.config))
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args, out)
    except (UsageError, CodeFormatError, CssValidationError, OSError, ValueError) as e:
        print(f"qbpgd: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
