"""Command line front end: ``tangency <command> INPUT [options]``.

Every run starts its output with the effective configuration, so that a
result file records how it was produced.  Exit codes: 0 success, 1 domain
error, 2 usage or parse error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from . import __version__
from .bifurcation import FamilySpec, count_cycles_numeric, degenerate_hopf_check, hopf_scan, sweep_csv
from .canonical import canonical_form
from .errors import NoSignChange, TangencyError
from .lyapunov import lyapunov
from .model import classify, load_template
from .numeric import IntegratorConfig, series_agreement
from .polar import gen_trig, trig_table_csv

FORMATS = ("text", "json", "csv")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _parse_value(text: str):
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a rational or decimal number: {text!r}") from None


def _assignment(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    name, value = text.split("=", 1)
    return name.strip(), _parse_value(value.strip())


def _config(args) -> dict:
    keys = ("command", "input", "order", "digits", "tol", "event_tol", "method",
            "polar_threshold", "format", "seed", "set")
    cfg = {}
    for k in keys:
        if hasattr(args, k):
            v = getattr(args, k)
            if k == "set":
                v = {n: str(x) for n, x in (v or [])}
            cfg[k] = v
    for k in ("param", "interval", "range", "samples", "x0", "n", "p", "q", "values"):
        if hasattr(args, k) and getattr(args, k) is not None:
            v = getattr(args, k)
            cfg[k] = [str(x) for x in v] if isinstance(v, list) else (str(v) if isinstance(v, Fraction) else v)
    cfg["version"] = __version__
    return cfg


def _integrator(args) -> IntegratorConfig:
    return IntegratorConfig(method=args.method, abs_tol=args.tol, rel_tol=args.tol,
                            event_tol=args.event_tol, polar_threshold=args.polar_threshold)


def _bind(args):
    template = load_template(args.input)
    return template, template.bind(dict(args.set or []), digits=args.digits)


class _Out:
    """Collects output in the chosen format and prints it once."""

    def __init__(self, args):
        self.fmt = args.format
        self.config = _config(args)

    def emit(self, payload: dict, text: str, rows: tuple | None = None):
        if self.fmt == "json":
            return json.dumps({"config": self.config, "result": payload}, indent=2, sort_keys=False)
        header = "# config: " + json.dumps(self.config, sort_keys=True)
        if self.fmt == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            if rows is not None:
                head, body = rows
                writer.writerow(head)
                writer.writerows(body)
            else:
                writer.writerow(["key", "value"])
                for k, v in payload.items():
                    writer.writerow([k, json.dumps(v) if isinstance(v, (dict, list)) else v])
            return header + "\n" + buf.getvalue().rstrip("\n")
        return header + "\n" + text


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_classify(args) -> tuple[str, int]:
    _, pf = _bind(args)
    cls = classify(pf)
    payload = {
        "k_plus": cls.k_plus, "k_minus": cls.k_minus, "delta": cls.delta,
        "invisible_plus": cls.invisible_plus, "invisible_minus": cls.invisible_minus,
        "orientation_ok": cls.orientation_ok, "monodromic": cls.monodromic,
        "convention": cls.convention, "reasons": list(cls.reasons), "summary": cls.summary(),
    }
    return _Out(args).emit(payload, cls.summary()), 0


def cmd_canonical(args) -> tuple[str, int]:
    _, pf = _bind(args)
    canon = canonical_form(pf, args.order)
    d = canon.to_dict()
    text = "\n".join(f"{k}: {v}" for k, v in d.items())
    return _Out(args).emit(d, text), 0


def cmd_lyapunov(args) -> tuple[str, int]:
    _, pf = _bind(args)
    res = lyapunov(pf, args.order)
    rows = (("n", "alpha_plus", "alpha_minus", "V"), list(res.rows()))
    return _Out(args).emit(res.to_dict(), res.table(), rows), 0


def cmd_verify(args) -> tuple[str, int]:
    _, pf = _bind(args)
    res = lyapunov(pf, args.order)
    xs = args.x0 or [Fraction(1, 2 ** m) for m in range(3, 10)]
    cfg = IntegratorConfig(method="taylor", abs_tol=1e-34, event_tol=args.event_tol, digits=45)
    predicted = args.order + 1
    payload, lines, body = {"predicted_slope": predicted, "sides": {}}, [], []
    all_failed = True
    for side, alphas in (("upper", res.alpha_plus), ("lower", res.alpha_minus)):
        rows, ok_x, residuals = [], [], []
        for x in xs:
            try:
                agr = series_agreement(pf, side, alphas, [x], cfg)
                rows.append({"x0": str(x), "residual": float(agr.residuals[0])})
                ok_x.append(x)
                residuals.append(agr.residuals[0])
                all_failed = False
            except TangencyError as exc:
                rows.append({"x0": str(x), "residual": None, "flag": str(exc)})
        slope = _slope(ok_x, residuals)
        passed = slope is not None and slope >= predicted - 0.3
        payload["sides"][side] = {"rows": rows, "slope": slope, "pass": passed}
        lines.append(f"{side}: fitted slope {slope if slope is None else round(slope, 3)} "
                     f"(predicted {predicted}) {'PASS' if passed else 'FAIL'}")
        for r in rows:
            lines.append(f"  x0={r['x0']:>10}  residual={r['residual'] if r['residual'] is not None else r['flag']}")
            body.append((side, r["x0"], r["residual"] if r["residual"] is not None else r["flag"]))
    out = _Out(args).emit(payload, "\n".join(lines), (("side", "x0", "residual"), body))
    return out, 1 if all_failed else 0


def _slope(xs, residuals):
    pts = [(math.log(float(x)), math.log(float(r))) for x, r in zip(xs, residuals) if r > 0]
    if len(pts) < 2:
        return None
    n = len(pts)
    mx = sum(p[0] for p in pts) / n
    my = sum(p[1] for p in pts) / n
    return sum((p[0] - mx) * (p[1] - my) for p in pts) / sum((p[0] - mx) ** 2 for p in pts)


def _family(args):
    template = load_template(args.input)
    sweep = {name: value for name, value in (args.set or [])}
    for name in template.unbound():
        sweep.setdefault(name, None)
    if getattr(args, "param", None):
        if getattr(args, "interval", None):
            sweep[args.param] = tuple(args.interval)
        elif getattr(args, "values", None):
            sweep[args.param] = list(args.values)
    sweep = {k: v for k, v in sweep.items() if v is not None}
    return FamilySpec(template, sweep, digits=args.digits)


def cmd_hopf(args) -> tuple[str, int]:
    family = _family(args)
    try:
        reports = hopf_scan(family, args.param, tuple(args.interval))
    except NoSignChange as exc:
        return _Out(args).emit({"reports": [], "note": str(exc)}, f"no root of V_2: {exc}",
                               (("lambda0", "d", "ell"), [])), 0
    lines = []
    for r in reports:
        lines.append(f"{r.name}0 = {r.to_dict()['lambda0']}  d = {r.to_dict()['d']}  ell = {r.to_dict()['ell']}  "
                     f"hypotheses {'hold' if r.hypothesis_ok else 'fail'}; cycle for {r.existence_side}, "
                     f"predicted {r.predicted_stability} ({r.path})")
    rows = (("lambda0", "V2", "d", "ell", "hypothesis_ok", "existence_side", "stability"),
            [(r.to_dict()["lambda0"], r.to_dict()["V2_at_lambda0"], r.to_dict()["d"], r.to_dict()["ell"],
              r.hypothesis_ok, r.existence_side, r.predicted_stability) for r in reports])
    return _Out(args).emit({"reports": [r.to_dict() for r in reports]}, "\n".join(lines), rows), 0


def cmd_degenerate(args) -> tuple[str, int]:
    template = load_template(args.input)
    pf = template.bind(dict(args.set or []), digits=args.digits)
    names = args.names or sorted(template.referenced())
    point = {n: pf.parameters[n] for n in names}
    others = {n: v for n, v in pf.parameters.items() if n not in point}
    family = FamilySpec(template, {**others, **{n: (v, v) for n, v in point.items()}}, digits=args.digits)
    rep = degenerate_hopf_check(family, point, args.n, names=names)
    fmt = pf.field.format
    lines = [f"V_{2 * (i + 1)} = {fmt(v)}" for i, v in enumerate(rep.V_vector)]
    lines += [f"det = {fmt(rep.det)}", f"V_{2 * args.n + 2} = {fmt(rep.V_next)}",
              f"hypotheses {'hold' if rep.hypothesis_ok else 'fail'} ({rep.path})"]
    payload = rep.to_dict()
    payload.update({"V_vector": [fmt(v) for v in rep.V_vector], "det": fmt(rep.det),
                    "V_next": fmt(rep.V_next), "Lambda0": {k: fmt(v) for k, v in point.items()},
                    "jacobian": [[fmt(v) for v in row] for row in rep.jacobian]})
    return _Out(args).emit(payload, "\n".join(lines)), 0


def cmd_cycles(args) -> tuple[str, int]:
    family = _family(args)
    count, rep = count_cycles_numeric(family, {}, tuple(float(v) for v in args.range), _integrator(args),
                                      args.samples)
    lines = [f"{count} cycle(s)"] + [f"  x* = {x:.12g}  {s}" for x, s in rep.cycles]
    if rep.annotation:
        lines.append(rep.annotation)
    rows = (("x_star", "stability"), [(repr(float(x)), s) for x, s in rep.cycles])
    return _Out(args).emit({"count": count, **rep.to_dict()}, "\n".join(lines), rows), 0


def cmd_sweep(args) -> tuple[str, int]:
    family = _family(args)
    points = [{args.param: v} for v in args.values]
    text = sweep_csv(family, points, args.order)
    reader = list(csv.reader(io.StringIO(text)))
    payload = {"header": reader[0], "rows": reader[1:]}
    return _Out(args).emit(payload, text.rstrip("\n"), (reader[0], reader[1:])), 0


def cmd_polar(args) -> tuple[str, int]:
    trig = gen_trig(args.p, args.q, args.tol)
    text = trig_table_csv(trig, args.samples)
    reader = list(csv.reader(io.StringIO(text)))
    payload = {"T": trig.T, "rows": reader[1:]}
    return _Out(args).emit(payload, f"T = {trig.T!r}\n" + text.rstrip("\n"), (reader[0], reader[1:])), 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=8, help="highest Lyapunov coefficient index N")
    common.add_argument("--digits", type=int, default=50, help="working digits when parameters are irrational")
    common.add_argument("--tol", type=float, default=1e-12, help="integrator abs/rel tolerance")
    common.add_argument("--event-tol", type=float, default=1e-10, help="crossing location tolerance")
    common.add_argument("--method", choices=("dop853", "taylor", "taylor-fixed"), default="dop853")
    common.add_argument("--polar-threshold", type=float, default=0.0,
                        help="use the polar equation for |x0| below this value")
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized fixtures")
    common.add_argument("--set", action="append", type=_assignment, metavar="NAME=VALUE",
                        help="bind or override a parameter (repeatable)")

    parser = argparse.ArgumentParser(prog="tangency", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, needs_input=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if needs_input:
            p.add_argument("input", help="JSON field description")
        p.set_defaults(func=fn)
        return p

    add("classify", cmd_classify, "multiplicities, delta and monodromy verdict")
    add("canonical", cmd_canonical, "canonical form coefficients a, f, g")
    add("lyapunov", cmd_lyapunov, "alpha_n and V_n table with verdict")
    p = add("verify", cmd_verify, "compare the series with numerical half-return maps")
    p.add_argument("--x0", type=_parse_value, nargs="+", help="sample points (default 2^-3 .. 2^-9)")
    p = add("hopf", cmd_hopf, "locate V_2 = 0 and check the Hopf-type hypotheses")
    p.add_argument("--param", required=True)
    p.add_argument("--interval", type=_parse_value, nargs=2, required=True, metavar=("LO", "HI"))
    p = add("degenerate", cmd_degenerate, "check the n-parameter degenerate Hopf hypotheses")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--names", nargs="+", help="parameter names in Jacobian order")
    p = add("cycles", cmd_cycles, "locate limit cycles from the numerical displacement")
    p.add_argument("--range", type=_parse_value, nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--samples", type=int, default=40)
    p = add("sweep", cmd_sweep, "V_2..V_N over a list of parameter values")
    p.add_argument("--param", required=True)
    p.add_argument("--values", type=_parse_value, nargs="+", required=True)
    p = add("polar", cmd_polar, "table of the generalized trigonometric functions", needs_input=False)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--samples", type=int, default=201)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out, code = args.func(args)
    except TangencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(out + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
