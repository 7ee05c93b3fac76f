"""Command-line front end: ``parisian <command> [options]``.

Every artifact embeds the configuration that produced it: JSON outputs
carry a ``config`` object, CSV outputs start with ``#`` comment lines.
Output paths are left out of the provenance so reruns into another
directory stay byte-identical.

Exit status is 0 on success, 1 when a verification fails and 2 for
configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .exceptions import ParisianError, SelectionError, WindowError
from .numerics import as_rational, guard_bits

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG = 0, 1, 2
OUTPUT_KEYS = ("out", "summary", "table", "csv", "config")


class ConfigError(Exception):
    pass


class VerificationFailed(Exception):
    pass


# ---------------------------------------------------------------- parsing helpers


def rational(text) -> Fraction:
    """Parse ``p/q`` or a decimal integer exactly."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    try:
        if isinstance(text, str) and "." not in text and "e" not in text.lower():
            return as_rational(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        pass
    raise argparse.ArgumentTypeError(f"not an exact rational (use p/q): {text!r}")


def int_list(text) -> list[int]:
    if isinstance(text, list):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def rational_list(text) -> list[Fraction]:
    if isinstance(text, list):
        return [rational(v) for v in text]
    return [rational(v) for v in str(text).split(",") if v.strip()]


def _json_value(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def provenance(args: argparse.Namespace) -> dict:
    cfg = {k: _json_value(v) for k, v in vars(args).items()
           if k not in OUTPUT_KEYS and k not in ("func", "threads") and v is not None}
    cfg["guard_bits"] = guard_bits()
    cfg["version"] = __version__
    return cfg


def header_lines(args: argparse.Namespace) -> list[str]:
    return [f"parisian {args.command}"] + [
        f"{k} = {json.dumps(v, sort_keys=True)}" for k, v in sorted(provenance(args).items())]


def dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return obj


def load_measure(spec: str):
    """``dirac[:point]``, ``lebesgue`` or a measure JSON file."""
    from .measure import dirac, lebesgue, measure_from_json

    try:
        if spec == "lebesgue":
            return lebesgue(1)
        if spec == "dirac" or spec.startswith("dirac:"):
            return dirac(rational(spec.partition(":")[2] or "0"))
        obj = load_json(spec)
        return measure_from_json(obj.get("measure", obj))
    except (ValueError, KeyError, TypeError, argparse.ArgumentTypeError) as exc:
        raise ConfigError(f"bad measure {spec!r}: {exc}") from None


def load_params(args: argparse.Namespace):
    from .construction import generate_sequence, params_from_json

    try:
        if getattr(args, "params", None):
            obj = load_json(args.params)
            return params_from_json(obj.get("params", obj))
        if args.alpha is None or args.n1 is None or args.depth is None:
            raise ConfigError("need --params or all of --alpha, --n1, --depth")
        return generate_sequence(args.alpha, args.n1, args.depth, args.max_digits)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad construction parameters: {exc}") from None


def candidate_pool(rule: str, params) -> list[int]:
    """``powers:b:k`` (b^1..b^k), ``params`` (the N_j) or a comma list."""
    if rule == "params":
        if params is None:
            raise ConfigError("candidate rule 'params' needs --params or --alpha/--n1/--depth")
        return list(params.N)
    if rule.startswith("powers:"):
        try:
            _, base, count = rule.split(":")
            return [int(base) ** j for j in range(1, int(count) + 1)]
        except ValueError:
            raise ConfigError(f"bad candidate rule {rule!r}; use powers:b:k") from None
    try:
        return int_list(rule)
    except argparse.ArgumentTypeError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------- commands


def cmd_gen_seq(args):
    from .construction import params_to_json

    params = load_params(args)
    write(args.out, dump_json({"config": provenance(args), "params": params_to_json(params)}))


def cmd_build(args):
    from .construction import (build_stages, containment_violations, family_to_json,
                               params_to_json, summary_csv, window_violations)

    params = load_params(args)
    fams = build_stages(params)
    problems = []
    for fam in fams:
        if window_violations(params, fam):
            problems.append(f"window property fails at stage {fam.stage}")
    for child, parent in zip(fams[1:], fams):
        if containment_violations(child, parent):
            problems.append(f"containment fails at stage {child.stage}")
    write(args.out, dump_json({"config": provenance(args), "params": params_to_json(params),
                               "stages": [family_to_json(f) for f in fams],
                               "verified": not problems}))
    if args.summary:
        write(args.summary, summary_csv(params, fams, header_lines(args)))
    if problems:
        raise VerificationFailed("; ".join(problems))


def cmd_fourier(args):
    from .fourier import coefficient_oracle, coefficients_batch, coefficients_to_csv
    from .measure import total_variation

    mu = load_measure(args.measure)
    if args.frequencies is not None:
        ns = args.frequencies
    else:
        if args.n_max < args.n_min:
            raise ConfigError("--n-max below --n-min")
        ns = list(range(args.n_min, args.n_max + 1))
    coefs = coefficients_batch(mu, ns, threads=args.threads)
    write(args.out, coefficients_to_csv(coefs, header_lines(args)))
    if args.oracle:
        ref = coefficient_oracle(mu, ns)
        scale = float(total_variation(mu)) / 2
        for c, r in zip(coefs, ref):
            err = abs(c.value - complex(r)) / max(abs(complex(r)), scale, 1e-300)
            if err > args.tol:
                raise VerificationFailed(f"closed form vs oracle at n={c.frequency}: error {err:.3e}")


def cmd_omega(args):
    from .riesz import LacunarySequence, is_dissociate, omega, omega_to_csv

    seq = LacunarySequence(tuple(args.terms))
    depth = len(seq) if args.depth is None else args.depth
    lines = header_lines(args) + [f"dissociate = {json.dumps(is_dissociate(seq, depth))}"]
    write(args.out, omega_to_csv(omega(seq, depth), depth, lines))


def cmd_riesz(args):
    import csv
    import io

    from .riesz import LacunarySequence, riesz_coefficient, riesz_coefficient_quadrature

    seq = LacunarySequence(tuple(args.terms), args.coefficients)
    depth = len(seq) if args.depth is None else args.depth
    buf = io.StringIO()
    for line in header_lines(args):
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "exact", "quadrature_re", "quadrature_im", "abs_error"])
    worst = None
    for n in args.frequencies:
        exact = riesz_coefficient(seq, n, depth)
        quad = riesz_coefficient_quadrature(seq, n, depth)
        err = abs(quad - float(exact))
        writer.writerow([n, str(exact), repr(quad.real), repr(quad.imag), repr(err)])
        if err > args.tol and worst is None:
            worst = f"quadrature disagrees at n={n}: error {err:.3e}"
    write(args.out, buf.getvalue())
    if worst:
        raise VerificationFailed(worst)


def cmd_select(args):
    from .selection import certificate_table_csv, certificate_to_json, select

    mu = load_measure(args.measure)
    params = None
    if args.params or args.alpha is not None:
        params = load_params(args)
    candidates = candidate_pool(args.candidates, params)
    delta = args.delta if args.delta is not None else (params.delta if params else None)
    if delta is None:
        raise ConfigError("need --delta (or construction parameters)")
    if args.mode == "lemma2" and params is None:
        raise ConfigError("lemma2 mode needs --params or --alpha/--n1/--depth")
    cert = select(mu, candidates, delta, args.steps, mode=args.mode, truncation_params=params,
                  shift=args.shift, search_radius=args.search_radius)
    body = certificate_to_json(cert)
    body["verified"] = cert.verify()
    write(args.out, dump_json({"config": provenance(args), "certificate": body}))
    if args.table:
        write(args.table, certificate_table_csv(cert, header_lines(args)))
    if not body["verified"]:
        raise VerificationFailed("certificate table falls below its lower bound")


def cmd_dim_audit(args):
    from .construction import build_stages, stage_measure
    from .dimension import mass_ratio_audit, report_csv, report_to_json

    params = load_params(args)
    stage = params.depth if args.stage is None else args.stage
    if not 1 <= stage <= params.depth:
        raise ConfigError(f"--stage outside [1, {params.depth}]")
    fam = build_stages(params, stage)[-1]
    mu = stage_measure(params, stage, fam)
    finest = args.finest_scale if args.finest_scale is not None else Fraction(1, params.N[stage - 1])
    reports = [mass_ratio_audit(mu, s, finest, params=params, stage=stage, family=fam)
               for s in args.s]
    write(args.out, dump_json({"config": provenance(args),
                               "reports": [report_to_json(r) for r in reports]}))
    if args.csv:
        write(args.csv, report_csv(reports, header_lines(args)))
    failed = [str(r.s) for r in reports if not r.passed]
    if failed:
        raise VerificationFailed(f"mass-ratio audit fails for s = {', '.join(failed)}")


def cmd_self_test(args):
    from .acceptance import run_all

    results = run_all(args.only)
    lines = [r.line() for r in results]
    text = "\n".join(lines) + "\n"
    write(args.out, text)
    failed = [f"AC{r.number}" for r in results if not r.passed]
    if failed:
        raise VerificationFailed(f"acceptance criteria failed: {', '.join(failed)}")


# ---------------------------------------------------------------- parser


def _construction_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", help="params JSON written by gen-seq")
    p.add_argument("--alpha", type=rational, help="target dimension p/q in (0, 1)")
    p.add_argument("--n1", type=int, help="first frequency N_1")
    p.add_argument("--depth", type=int, help="number of stages")
    p.add_argument("--max-digits", type=int, help="refuse N_k with more digits")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parisian", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON object of option values (keys as option names)")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--threads", type=int, default=1, help="worker cap; results do not change")
        return p

    p = command("gen-seq", cmd_gen_seq, "generate the frequency sequence N_j")
    _construction_args(p)

    p = command("build", cmd_build, "build the stage families")
    _construction_args(p)
    p.add_argument("--summary", help="per-stage summary CSV")

    p = command("fourier", cmd_fourier, "tabulate Fourier coefficients")
    p.add_argument("--measure", required=True, help="dirac[:p], lebesgue or a measure JSON file")
    p.add_argument("--n-min", type=int, default=0)
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--frequencies", type=int_list, help="explicit comma-separated frequencies")
    p.add_argument("--oracle", action="store_true", help="cross-check against quadrature")
    p.add_argument("--tol", type=float, default=1e-9)

    p = command("omega", cmd_omega, "enumerate signed sums of a sequence")
    p.add_argument("--terms", type=int_list, required=True)
    p.add_argument("--depth", type=int)

    p = command("riesz", cmd_riesz, "Riesz-product coefficients against quadrature")
    p.add_argument("--terms", type=int_list, required=True)
    p.add_argument("--coefficients", type=rational_list)
    p.add_argument("--depth", type=int)
    p.add_argument("--frequencies", type=int_list, default=[0])
    p.add_argument("--tol", type=float, default=1e-8)

    p = command("select", cmd_select, "select frequencies and write a certificate")
    p.add_argument("--measure", required=True, help="dirac[:p], lebesgue or a measure JSON file")
    p.add_argument("--candidates", default="params", help="powers:b:k, params, or a comma list")
    p.add_argument("--delta", type=rational)
    p.add_argument("--steps", type=int, default=3, help="selection depth")
    p.add_argument("--mode", choices=("lemma1", "lemma2"), default="lemma1")
    p.add_argument("--shift", type=int)
    p.add_argument("--search-radius", type=int, default=64)
    p.add_argument("--table", help="certificate table CSV")
    _construction_args(p)

    p = command("dim-audit", cmd_dim_audit, "mass-ratio audit and box counting")
    _construction_args(p)
    p.add_argument("--stage", type=int)
    p.add_argument("--s", type=rational_list, default=[Fraction(1, 4)])
    p.add_argument("--finest-scale", type=rational)
    p.add_argument("--csv", help="per-scale CSV")

    p = command("self-test", cmd_self_test, "run the acceptance checks")
    p.add_argument("--only", type=int_list, help="criterion numbers to run")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Load ``--config`` values as subcommand defaults; unknown keys are errors."""
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    if known.command not in sub.choices:
        return
    subparser = sub.choices[known.command]
    obj = load_json(known.config)
    dests = {a.dest: a for a in subparser._actions}
    values = {}
    for key, value in obj.items():
        dest = key.replace("-", "_")
        if dest not in dests or dest in ("help", "config", "func"):
            raise ConfigError(f"unknown config field {key!r} for {known.command}")
        action = dests[dest]
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        if action.type is not None and value is not None and not isinstance(value, bool):
            try:
                value = action.type(str(value) if action.type in (int_list, rational_list, rational)
                                    else value)
            except (argparse.ArgumentTypeError, ValueError, TypeError) as exc:
                raise ConfigError(f"config field {key!r}: {exc}") from None
        values[dest] = value
        action.required = False
    subparser.set_defaults(**values)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except ConfigError as exc:
        print(f"parisian: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    if args.threads < 1:
        print("parisian: config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    from .fourier import set_default_threads

    set_default_threads(args.threads)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"parisian: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationFailed as exc:
        print(f"parisian: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (SelectionError, WindowError) as exc:
        print(f"parisian: verification failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ParisianError as exc:  # input refused by the library (growth, dissociation, range)
        print(f"parisian: config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"parisian: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
