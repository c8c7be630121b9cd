"""Command-line front end: ``subfock <command> [options]``.

Exit codes: 0 pass, 1 validation or invariant failure, 2 bad input,
3 not enough truncation headroom (the message names the minimal M).
"""
from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .fock import (
    GradedOperator,
    ShiftPolynomial,
    parse_element,
    represent,
    row_sum_residual,
    top_level,
)
from .limits import (
    arveson_report,
    asymptotic_mult_gap,
    berezin_report,
    choi_effros_profile,
    contravariant_sequence,
    markov_residuals,
    qsphere_report,
    strict_quantization_report,
)
from .polynomials import PolynomialError, _load_toml, load_ideal_file
from .quantize import (
    HeadroomError,
    covariant_symbol_frame,
    final_projection,
    iota,
    iota_bar,
    iota_bar_compression,
    iota_compression,
    isometry_V,
    isometry_Vbar,
    jmath,
    jmath_partial_trace,
    weighted_adjoint,
)
from .subproduct import (
    SubproductSystem,
    ValidationError,
    build_from_ideal,
    named_system,
    validate,
)
from .tensor import DEFAULT_TOL, DimensionCapError, operator_norm, random_matrix
from .weights import WeightError, build_weight, invariance_residual, kms_residual, phi

# "0xB3R3Z1N" cut at its first non-hex character
DEFAULT_SEED = 0xB3

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_HEADROOM = 0, 1, 2, 3


class InputError(ValueError):
    pass


@dataclass
class Table:
    command: str
    identity: str
    columns: List[str]
    rows: List[list]
    meta: Dict[str, object] = field(default_factory=dict)
    passed: bool = True
    header: bool = True


# ---------------------------------------------------------------------------
# configuration

def _parse_weights(text) -> Optional[List[float]]:
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad weights {text!r}: expected comma-separated numbers") from None


def _merge_config(args: argparse.Namespace) -> None:
    """Fill unset flags from the --config TOML file."""
    if not args.config:
        return
    try:
        data = _load_toml(Path(args.config).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from None
    for key, value in data.items():
        key = key.replace("-", "_")
        if not hasattr(args, key):
            raise InputError(f"unknown config key {key!r}")
        if getattr(args, key) is None:
            setattr(args, key, value)


def _read_spec_file(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSON in {path}: {exc}") from None
    return _load_toml(text)


def load_system(args: argparse.Namespace) -> SubproductSystem:
    n = args.n
    M = 4 if args.M is None else int(args.M)
    if args.ideal:
        n_file, mode, gens = load_ideal_file(args.ideal)
        return build_from_ideal(gens, mode, n_file, M, tag=Path(args.ideal).stem)
    name = args.system
    if name is None:
        raise InputError("no system given: use --system or --ideal")
    path = Path(str(name))
    if path.suffix.lower() in (".toml", ".json"):
        try:
            spec = _read_spec_file(path)
        except OSError as exc:
            raise InputError(f"cannot read system file: {exc}") from None
        M = int(spec.get("M", M)) if args.M is None else M
        if args.weights is None and "weights" in spec:
            args.weights = spec["weights"]
        if "ideal" in spec:
            n_file, mode, gens = load_ideal_file(path.parent / spec["ideal"])
            mode = spec.get("mode", mode)
            return build_from_ideal(gens, mode, n_file, M, tag=Path(spec["ideal"]).stem)
        params = dict(spec.get("params", {}))
        params.setdefault("n", spec.get("n", 2) if n is None else n)
        params["M"] = M
        if "mode" in spec:
            params.setdefault("mode", spec["mode"])
        if args.q is not None:
            params["q"] = args.q
        if "name" not in spec:
            raise InputError(f"{path}: need 'name' or 'ideal'")
        return named_system(spec["name"], params)
    params = {"n": 2 if n is None else int(n), "M": M}
    if args.q is not None:
        params["q"] = float(args.q)
    return named_system(name, params)


def default_weights(system: SubproductSystem) -> List[float]:
    """All-ones, except (1/q, q) on the quantum plane, the weights that keep
    the connecting maps state preserving there."""
    q = system.params.get("q")
    if system.tag.startswith("quantum_plane") and system.n == 2 and q not in (None, 0):
        q = float(np.real(q))
        return [1.0 / q, q]
    return [1.0] * system.n


def _weights_for(args, system):
    w = _parse_weights(args.weights)
    return default_weights(system) if w is None else w


def _element(text: str, n: int, what: str) -> ShiftPolynomial:
    try:
        return parse_element(text, n)
    except (PolynomialError, ValueError) as exc:
        raise InputError(f"bad {what} element {text!r}: {exc}") from None


def _tol(args, default: float) -> float:
    if args.tol is None:
        return default
    tol = float(args.tol)
    if not tol > 0:
        raise InputError("tolerances must be positive")
    return tol


def _need_limit_levels(system: SubproductSystem) -> None:
    if system.M < 2:
        raise InputError("limit commands need M >= 2")


# ---------------------------------------------------------------------------
# output

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6e}"
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real:.6e}{x.imag:+.6e}j"
    return str(x)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def render_csv(table: Table) -> str:
    out = io.StringIO()
    if table.header:
        out.write(f"# identity: {table.identity}\n")
        for k, v in table.meta.items():
            out.write(f"# {k}: {_fmt(v) if not isinstance(v, list) else v}\n")
        out.write(",".join(table.columns) + "\n")
    for row in table.rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def render_json(table: Table) -> str:
    doc = {
        "command": table.command,
        "identity": table.identity,
        "passed": table.passed,
        "meta": _jsonable(table.meta),
        "columns": table.columns,
        "rows": _jsonable(table.rows),
    }
    return json.dumps(doc, indent=2) + "\n"


def emit(args, table: Table) -> int:
    text = render_json(table) if args.format == "json" else render_csv(table)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        ext = "json" if args.format == "json" else "csv"
        (out / f"{table.command}.{ext}").write_text(text)
    else:
        sys.stdout.write(text)
    if args.json:
        Path(args.json).write_text(render_json(table))
    return EXIT_OK if table.passed else EXIT_FAIL


def _system_meta(system: SubproductSystem, weights=None) -> dict:
    meta = {"system": system.tag, "n": system.n, "M": system.M, "dims": system.dims}
    if weights is not None:
        meta["weights"] = [float(w) for w in weights]
    return meta


# ---------------------------------------------------------------------------
# commands

def cmd_build(args) -> Table:
    system = load_system(args)
    tol = _tol(args, DEFAULT_TOL)
    report = validate(system, tol)
    worst = report.worst
    rows = [["tag", system.tag], ["n", system.n], ["M", system.M], ["mode", system.mode],
            ["dims", " ".join(str(d) for d in system.dims)],
            ["worst_residual", worst[2]], ["valid", report.passed]]
    return Table("build", "subproduct system construction", ["key", "value"], rows,
                 {}, report.passed)


def cmd_dims(args) -> Table:
    system = load_system(args)
    rows = [[m, d] for m, d in enumerate(system.dims)]
    return Table("dims", "dimensions of H_m", ["m", "dim"], rows, _system_meta(system),
                 header=args.format == "json")


def _validation_table(system_tag, report) -> Table:
    rows = [[m, l, r, r <= report.tol] for m, l, r in report.residuals]
    return Table("validate", "p_l (p_m x p_{l-m}) p_l = p_l", ["m", "l", "residual", "pass"],
                 rows, {"system": system_tag, "tol": report.tol}, report.passed)


def cmd_validate(args) -> Table:
    tol = _tol(args, DEFAULT_TOL)
    try:
        system = load_system(args)
    except ValidationError as exc:
        return _validation_table("rejected", exc.report)
    return _validation_table(system.tag, validate(system, tol))


def _pairs(M: int, top: Optional[int] = None):
    top = M if top is None else top
    return [(m, l) for l in range(top + 1) for m in range(l + 1)]


def invariant_rows(system: SubproductSystem, weights, seed: int) -> List[list]:
    """Rows ``identity, residual, threshold, status`` for the whole invariant suite.

    Random matrices come from one generator seeded with ``seed`` and are drawn
    in a fixed order, so equal seeds give equal output.
    """
    rng = np.random.default_rng(seed)
    M = system.M
    rows = []

    def row(name, value, threshold):
        rows.append([name, float(value), threshold, "pass" if value <= threshold else "fail"])

    inv = max(invariance_residual(system, weights, m) for m in range(M + 1))
    row("weight_invariance", inv, 1e-8)
    row("subproduct_law", validate(system).worst[2], 1e-10)
    inner = range(M)
    row("row_sum_S", max((row_sum_residual(system, m, l, "S")
                          for l in inner for m in range(l + 1)), default=0.0), 1e-10)
    row("row_sum_R", max((row_sum_residual(system, m, l, "R")
                          for l in inner for m in range(l + 1)), default=0.0), 1e-10)

    cross = cross_bar = coh = unital = 0.0
    for m, l in _pairs(M):
        d = system.dim(m)
        a = random_matrix(rng, d)
        cross = max(cross, operator_norm(iota(system, a, m, l) - iota_compression(system, a, m, l)))
        cross_bar = max(cross_bar, operator_norm(iota_bar(system, a, m, l)
                                                 - iota_bar_compression(system, a, m, l)))
        unital = max(unital, operator_norm(iota(system, np.eye(d), m, l) - np.eye(system.dim(l))))
        for r in range(m, l + 1):
            coh = max(coh, operator_norm(iota(system, iota(system, a, m, r), r, l)
                                         - iota(system, a, m, l)))
    row("iota_rsum_vs_compression", cross, 1e-12)
    row("iota_bar_ssum_vs_compression", cross_bar, 1e-12)
    row("iota_coherence", coh, 1e-12)
    row("iota_unital", unital, 1e-12)

    if inv > 1e-8:
        return rows
    ws = build_weight(system, weights)

    iso = proj = iso_bar = proj_bar = 0.0
    adj = st_iota = st_j = j_unital = chain = ptrace = kms = cov = 0.0
    for m, l in _pairs(M):
        dm, dl = system.dim(m), system.dim(l)
        for bar, fn in ((False, isometry_V), (True, isometry_Vbar)):
            v = fn(ws, m, l)
            vd = weighted_adjoint(ws, v, m, l, bar)
            e1 = operator_norm(vd @ v - np.eye(dl))
            e2 = operator_norm(v @ vd - final_projection(system, m, l, bar))
            if bar:
                iso_bar, proj_bar = max(iso_bar, e1), max(proj_bar, e2)
            else:
                iso, proj = max(iso, e1), max(proj, e2)
        a, b = random_matrix(rng, dl), random_matrix(rng, dm)
        ja = jmath(ws, a, l, m)
        adj = max(adj, abs(phi(ws, l, a @ iota(system, b, m, l)) - phi(ws, m, ja @ b)))
        st_iota = max(st_iota, abs(phi(ws, l, iota(system, b, m, l)) - phi(ws, m, b)))
        st_j = max(st_j, abs(phi(ws, m, ja) - phi(ws, l, a)))
        j_unital = max(j_unital, operator_norm(jmath(ws, np.eye(dl), l, m) - np.eye(dm)))
        ptrace = max(ptrace, operator_norm(ja - jmath_partial_trace(ws, a, l, m)))
        for r in range(m, l + 1):
            chain = max(chain, operator_norm(jmath(ws, jmath(ws, a, l, r), r, m) - ja))
        cov = max(cov, operator_norm(covariant_symbol_frame(system, b, m, l) - iota(system, b, m, l)))
    for m in range(M + 1):
        d = system.dim(m)
        kms = max(kms, kms_residual(ws, m, random_matrix(rng, d), random_matrix(rng, d)))
    row("V_isometry", iso, 1e-10)
    row("V_final_projection", proj, 1e-10)
    row("Vbar_isometry", iso_bar, 1e-10)
    row("Vbar_final_projection", proj_bar, 1e-10)
    row("adjointness_phi_iota_j", adj, 1e-10)
    row("j_chain_law", chain, 1e-10)
    row("j_rsum_vs_partial_trace", ptrace, 1e-10)
    row("j_unital", j_unital, 1e-12)
    row("state_phi_iota", st_iota, 1e-10)
    row("state_phi_j", st_j, 1e-10)
    row("covariant_frame_vs_iota", cov, 1e-10)
    row("kms", kms, 1e-9)

    if M >= 2:
        f = ShiftPolynomial.monomial(system.n, [1], [1])
        x = contravariant_sequence(ws, f, range(0, top_level(f, system) + 1), top_level(f, system))
        row("markov_fixed_contravariant", max(markov_residuals(ws, x).values()), 1e-10)
        anti = ShiftPolynomial(system.n, ((1.0, ((1, True), (1, False))),))
        rep = represent(anti, system, range(0, top_level(anti, system) + 1))
        tail = list(markov_residuals(ws, rep).values())[-1]
        rows.append(["markov_anti_normal_representative_top", float(tail), "-", "report"])
        one = GradedOperator(system, 0, {m: np.eye(system.dim(m)) for m in range(M + 1)})
        row("markov_unital", max(markov_residuals(ws, one).values()), 1e-12)

        d1 = system.dim(1)
        a, b = random_matrix(rng, d1), random_matrix(rng, d1)
        gap = asymptotic_mult_gap(system, a, b, 1, 1, M)
        rows.append(["asymptotic_mult_gap_1_1_M", float(gap), "-", "exact" if gap == 0 else "report"])
    return rows


def cmd_invariants(args) -> Table:
    system = load_system(args)
    weights = _weights_for(args, system)
    seed = DEFAULT_SEED if args.seed is None else int(args.seed)
    rows = invariant_rows(system, weights, seed)
    passed = all(r[3] != "fail" for r in rows)
    meta = _system_meta(system, weights)
    meta["seed"] = seed
    return Table("invariants", "invariant suite", ["identity", "residual", "threshold", "status"],
                 rows, meta, passed)


def _max_contravariant_m(f: ShiftPolynomial, system: SubproductSystem, level=None) -> int:
    big = top_level(f, system) if level is None else level
    return (big - f.height) // 2


def _m_range(args, elements, system) -> range:
    lo = 1 if args.m_min is None else args.m_min
    if args.m_max is not None:
        hi = args.m_max
    else:
        hi = min(_max_contravariant_m(e, system, args.level) for e in elements)
        if hi < lo:
            need = max(2 * lo + e.height + e.excursion()[1] for e in elements)
            raise HeadroomError(f"no level m >= {lo} fits", need)
    return range(lo, hi + 1)


def _weight_system(args, system):
    weights = _weights_for(args, system)
    return build_weight(system, weights), weights


def cmd_berezin(args) -> Table:
    system = load_system(args)
    _need_limit_levels(system)
    ws, weights = _weight_system(args, system)
    f = _element(args.f, system.n, "--f")
    rep = berezin_report(ws, f, _m_range(args, [f], system), args.level, args.window)
    meta = _system_meta(system, weights)
    meta.update(f=str(f), window=args.window)
    return Table("berezin", rep.identity, ["m", "value"], rep.rows, meta)


def cmd_arveson(args) -> Table:
    system = load_system(args)
    _need_limit_levels(system)
    rep = arveson_report(system)
    applies = bool(rep.flags["applies"])
    passed = not applies or all(v <= 1e-12 for v in rep.column("max_comm_SiSj"))
    meta = _system_meta(system)
    meta["applies"] = applies
    return Table("arveson", rep.identity, rep.columns, rep.rows, meta, passed)


def cmd_strict(args) -> Table:
    system = load_system(args)
    _need_limit_levels(system)
    ws, weights = _weight_system(args, system)
    f = _element(args.f, system.n, "--f")
    g = _element(args.g, system.n, "--g")
    rep = strict_quantization_report(ws, f, g, _m_range(args, [f, g, f * g], system), args.level)
    meta = _system_meta(system, weights)
    meta.update(f=str(f), g=str(g))
    return Table("strict", rep.identity, rep.columns, rep.rows, meta)


def cmd_markov(args) -> Table:
    system = load_system(args)
    _need_limit_levels(system)
    ws, weights = _weight_system(args, system)
    tol = _tol(args, DEFAULT_TOL)
    x = _element(args.x, system.n, "--x")
    if x.degree != 0:
        raise InputError("--x must have degree 0")
    top = top_level(x, system)
    lo = max(0, -x.excursion()[0])
    if args.representative:
        # fixed only modulo finitely supported sequences, so nothing is asserted
        seq = represent(x, system, range(lo, top + 1))
    else:
        seq = contravariant_sequence(ws, x, range(lo, top + 1), top)
    res = markov_residuals(ws, seq)
    rows = [[m, r] for m, r in res.items()]
    passed = args.representative or all(r <= tol for r in res.values())
    meta = _system_meta(system, weights)
    meta.update(x=str(x), sequence="representative" if args.representative else "contravariant",
                anti_normal_ordered=x.is_anti_normal_ordered(), tol=tol)
    return Table("markov", "Phi(X) = X on the projective limit", ["m", "residual"], rows, meta,
                 passed)


def cmd_choi_effros(args) -> Table:
    system = load_system(args)
    _need_limit_levels(system)
    ws, weights = _weight_system(args, system)
    f = _element(args.f, system.n, "--f")
    g = _element(args.g, system.n, "--g")
    m = args.m
    limit = system.M - m - 1
    r_max = limit if args.r_max is None else args.r_max
    if r_max > limit:
        raise HeadroomError(f"r = {r_max} needs more levels", m + r_max + 1)
    rep = choi_effros_profile(ws, f, g, m, args.level)
    rows = [r for r in rep.rows if r[0] <= r_max]
    meta = _system_meta(system, weights)
    meta.update(f=str(f), g=str(g), m=m)
    return Table("choi-effros", rep.identity, rep.columns, rows, meta)


def cmd_qsphere(args) -> Table:
    system = load_system(args)
    _need_limit_levels(system)
    ws, weights = _weight_system(args, system)
    rep = qsphere_report(ws, row=args.row)
    return Table("qsphere", rep.identity, rep.columns, rep.rows, _system_meta(system, weights))


COMMANDS = {
    "build": cmd_build, "dims": cmd_dims, "validate": cmd_validate,
    "invariants": cmd_invariants, "berezin": cmd_berezin, "arveson": cmd_arveson,
    "strict": cmd_strict, "markov": cmd_markov, "choi-effros": cmd_choi_effros,
    "qsphere": cmd_qsphere,
}


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", help="built-in name or a TOML/JSON system file")
    common.add_argument("--ideal", help="TOML/JSON ideal file (n, mode, generators)")
    common.add_argument("--n", type=int)
    common.add_argument("--M", type=int)
    common.add_argument("--q", type=float, help="deformation parameter for quantum_plane")
    common.add_argument("--weights", help="comma-separated diagonal of Q")
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="directory for the report file")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--json", help="also write the JSON report here")
    common.add_argument("--config", help="TOML file with defaults for these flags")

    parser = argparse.ArgumentParser(prog="subfock", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"subfock {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("build", "dims", "validate", "invariants", "arveson"):
        sub.add_parser(name, parents=[common])
    p = sub.add_parser("qsphere", parents=[common])
    p.add_argument("--row", type=int, default=1,
                   help="row k of the relation constant (Q^-1)_kk")

    def ranged(p):
        p.add_argument("--m-min", type=int, dest="m_min")
        p.add_argument("--m-max", type=int, dest="m_max")
        p.add_argument("--level", type=int, help="truncation level used to estimate the limit state")

    p = sub.add_parser("berezin", parents=[common])
    p.add_argument("--f", default="Z1*Zd1")
    p.add_argument("--window", type=int, default=3)
    ranged(p)
    p = sub.add_parser("strict", parents=[common])
    p.add_argument("--f", default="Z1*Zd1")
    p.add_argument("--g", default="Z2*Zd2")
    ranged(p)
    p = sub.add_parser("markov", parents=[common])
    p.add_argument("--x", default="Zd1*Z1")
    p.add_argument("--representative", action="store_true",
                   help="use the Toeplitz representative of x instead of its contravariant "
                        "symbols; the residuals are then reported, not asserted")
    p = sub.add_parser("choi-effros", parents=[common])
    p.add_argument("--f", default="Z1*Zd1")
    p.add_argument("--g", default="Z2*Zd2")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--r-max", type=int, dest="r_max")
    p.add_argument("--level", type=int)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        _merge_config(args)
        if args.format is None:
            args.format = "csv"
        table = COMMANDS[args.command](args)
        return emit(args, table)
    except HeadroomError as exc:
        print(f"error: {exc}; minimal M required: {exc.required_M}", file=sys.stderr)
        return EXIT_HEADROOM
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except WeightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (InputError, PolynomialError, DimensionCapError, KeyError, OSError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
