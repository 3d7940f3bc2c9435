"""Command line driver: spec ingestion, prime sweeps, persistence and check suites."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import dwork
from .expsum import (
    BudgetExceeded,
    DEFAULT_BUDGET,
    Family,
    IrregularError,
    LaurentPoly,
    gnp_estimate,
    is_regular,
    l_polynomial,
)
from .ffield import is_prime, make_field
from .lattice import (
    Point,
    PolytopeError,
    build_polytope,
    generation_check,
    hilbert_basis,
    normalized_volume,
    parallelepiped_points,
    primitive_generating_set,
    smith_invariants,
    triangulate_facet,
)
from .parallel import ordered_map
from .polygon import compare, hodge_polygon, slopes_to_str, toric_hodge_numbers
from .weights import weight_census

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
CSV_COLUMNS = ["p", "a", "slopes", "hp_slopes", "max_gap", "ordinary", "samples", "seed"]
SMOOTHNESS_NOTE = "asymptotic smoothness hypothesis violated"


class SpecError(ValueError):
    pass


# ---------------------------------------------------------------------------
# experiment specs


@dataclass(frozen=True)
class ExperimentSpec:
    dim: int
    vertices: tuple[Point, ...]
    family: str  # "full", "toric" or "AJV"
    J: tuple[Point, ...] = ()
    V: tuple[Point, ...] = ()
    coeffs_V: tuple[Fraction, ...] = ()
    f: tuple[tuple[Point, Fraction], ...] = ()
    pmin: int = 5
    pmax: int = 13
    a: int = 1
    trials: int = 50
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    cap: int = 8
    precision: int | None = None

    @property
    def polytope(self):
        return build_polytope(self.vertices)

    @property
    def V_delta(self) -> int:
        return normalized_volume(self.polytope)

    def family_object(self) -> Family:
        poly = self.polytope
        if self.family == "AJV":
            return Family(poly, "AJV", self.J, tuple(zip(self.V, self.coeffs_V)))
        return Family(poly, self.family)

    def fixed_polynomial(self) -> dict[Point, Fraction]:
        """The rational f of a sweep: given explicitly, else V coefficients plus 1 on J."""
        if self.f:
            return dict(self.f)
        if self.family == "AJV":
            out = dict(zip(self.V, self.coeffs_V))
            out.update({j: Fraction(1) for j in self.J})
            return out
        return {tuple(v): Fraction(1) for v in self.vertices if any(v)}

    def primes(self) -> list[int]:
        return [p for p in range(max(2, self.pmin), self.pmax + 1) if is_prime(p)]

    def canonical(self) -> str:
        data = asdict(self)
        return json.dumps(data, sort_keys=True, default=str)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def _line_of(text: str, key: str) -> int:
    for i, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return i
    return 1


def _point(x, dim: int, where: str) -> Point:
    if not isinstance(x, list) or len(x) != dim or not all(isinstance(c, int) for c in x):
        raise ValueError(f"{where}: expected a list of {dim} integers, got {x!r}")
    return tuple(x)


def parse_spec(text: str) -> ExperimentSpec:
    """Validate a JSON spec; errors name the offending key and its line."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"line {e.lineno}: invalid JSON: {e.msg}") from None
    if not isinstance(raw, dict):
        raise SpecError("line 1: top level must be an object")
    known = {"dim", "vertices", "family", "support_J", "support_V", "coeffs_V", "f", "pmin", "pmax",
             "a", "trials", "seed", "budget", "cap", "precision"}
    for key in raw:
        if key not in known:
            raise SpecError(f"line {_line_of(text, key)}: unknown key {key!r}")

    def fail(key: str, msg: str):
        raise SpecError(f"line {_line_of(text, key)}: {key}: {msg}")

    dim = raw.get("dim")
    if not isinstance(dim, int) or dim < 1:
        fail("dim", "must be a positive integer")
    try:
        vertices = tuple(_point(v, dim, "vertices") for v in raw.get("vertices", []))
        J = tuple(_point(v, dim, "support_J") for v in raw.get("support_J", []))
        V = tuple(_point(v, dim, "support_V") for v in raw.get("support_V", []))
    except ValueError as e:
        key = str(e).split(":")[0]
        fail(key, str(e).split(": ", 1)[1])
    if not vertices:
        fail("vertices", "at least one vertex is required")
    try:
        poly = build_polytope(vertices)
    except (PolytopeError, ValueError) as e:
        fail("vertices", str(e))
    if poly.dim != dim or not poly.contains_origin:
        fail("vertices", "polytope must be full-dimensional and contain the origin")
    family = raw.get("family", "AJV" if (J or V) else "full")
    if family not in ("full", "toric", "AJV"):
        fail("family", "must be one of full, toric, AJV")
    coeffs_raw = raw.get("coeffs_V", [])
    if isinstance(coeffs_raw, dict):
        coeffs_raw = [coeffs_raw.get(json.dumps(list(v)).replace(" ", ""), coeffs_raw.get(str(list(v))))
                      for v in V]
    try:
        coeffs = tuple(Fraction(str(c)) for c in coeffs_raw)
    except (ValueError, TypeError, ZeroDivisionError):
        fail("coeffs_V", "coefficients must be rationals")
    if family == "AJV":
        if set(J) & set(V):
            fail("support_J", "J and V must be disjoint")
        if len(coeffs) != len(V):
            fail("coeffs_V", "one coefficient per point of support_V is required")
        nonzero_vertices = {v for v in poly.vertices if any(v)}
        if not nonzero_vertices <= set(V):
            fail("support_V", "V must contain every nonzero vertex")
        for v, c in zip(V, coeffs):
            if v in nonzero_vertices and c == 0:
                fail("coeffs_V", f"coefficient at vertex {list(v)} must be nonzero")
        for pt in J + V:
            if not poly.contains_point(pt) or not any(pt):
                fail("support_J" if pt in J else "support_V", f"{list(pt)} is not a nonzero point of Delta")
    f_terms = ()
    if "f" in raw:
        try:
            f_terms = tuple((_point(t[0], dim, "f"), Fraction(str(t[1]))) for t in raw["f"])
        except (ValueError, TypeError, IndexError, ZeroDivisionError):
            fail("f", "expected a list of [exponent, rational] pairs")
    ints = {}
    for key, default in (("pmin", 5), ("pmax", 13), ("a", 1), ("trials", 50), ("seed", 0),
                         ("budget", DEFAULT_BUDGET), ("cap", 8)):
        val = raw.get(key, default)
        if not isinstance(val, int) or (key != "seed" and val < 0):
            fail(key, "must be a non-negative integer")
        ints[key] = val
    if ints["a"] < 1:
        fail("a", "must be at least 1")
    precision = raw.get("precision")
    if precision is not None and (not isinstance(precision, int) or precision < 1):
        fail("precision", "must be a positive integer")
    return ExperimentSpec(dim, tuple(poly.vertices), family, J, V, coeffs, f_terms,
                          precision=precision, **ints)


def load_spec(path: str | os.PathLike) -> ExperimentSpec:
    p = Path(path)
    if not p.is_file():
        raise SpecError(f"spec file {path} does not exist")
    return parse_spec(p.read_text())


# ---------------------------------------------------------------------------
# run records and persistence


@dataclass
class RunRecord:
    spec_hash: str
    seed: int
    rows: list[dict] = field(default_factory=list)
    annotations: list[str] = field(default_factory=list)
    fitted_C: str | None = None
    status: str = "complete"
    environment: dict = field(default_factory=lambda: {
        "python": platform.python_version(), "implementation": platform.python_implementation()})

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in CSV_COLUMNS})
    return buf.getvalue()


def persist(record: RunRecord, out_dir: str | os.PathLike) -> Path:
    """Write results/<hash>/sweep.csv and record.json; IO errors propagate."""
    target = Path(out_dir) / record.spec_hash
    target.mkdir(parents=True, exist_ok=True)
    (target / "sweep.csv").write_text(rows_to_csv(record.rows))
    (target / "record.json").write_text(record.to_json())
    return target


# ---------------------------------------------------------------------------
# sweeps


def _reduce_fixed(spec: ExperimentSpec, p: int) -> LaurentPoly | None:
    coeffs = spec.fixed_polynomial()
    if any(c.denominator % p == 0 for c in coeffs.values()):
        return None
    reduced = {j: c for j, c in coeffs.items() if c.numerator % p}
    if set(reduced) != set(coeffs):
        return None
    return LaurentPoly.from_rational(reduced, p, spec.a)


def sweep_row(spec: ExperimentSpec, p: int) -> dict | None:
    f = _reduce_fixed(spec, p)
    if f is None:
        return None
    family = spec.family_object()
    hp = family.hodge()
    if spec.family == "toric":
        from .expsum import toric_key_polynomial

        np_f = toric_key_polynomial(f, budget=spec.budget).newton_polygon
    else:
        np_f = l_polynomial(f, budget=spec.budget).newton_polygon()
    cmp = compare(np_f, hp)
    if not (cmp.lies_above and cmp.endpoints_meet):
        raise AssertionError(f"NP {np_f} lies below HP {hp} at p = {p}")
    gnp = gnp_estimate(family, p, spec.a, spec.trials, spec.seed, spec.budget) if spec.trials else None
    return {"p": p, "a": spec.a, "slopes": slopes_to_str(np_f.slopes()),
            "hp_slopes": slopes_to_str(hp.slopes()), "max_gap": str(cmp.max_vertical_gap),
            "ordinary": int(gnp.ordinary if gnp else np_f == hp),
            "samples": gnp.samples if gnp else 0, "seed": spec.seed,
            "gnp_slopes": slopes_to_str(gnp.polygon.slopes()) if gnp else "",
            "np_vertices": np_f.to_json(), "hp_vertices": hp.to_json()}


def fitted_constant(rows: Sequence[dict]) -> Fraction:
    """Smallest C with gap <= C / (p - 1) on every row."""
    return max((Fraction(r["max_gap"]) * (r["p"] - 1) for r in rows), default=Fraction(0))


def cmd_sweep(spec: ExperimentSpec) -> RunRecord:
    record = RunRecord(spec.digest(), spec.seed)
    poly = spec.polytope
    gens = list(spec.J) + list(spec.V) if spec.family == "AJV" else [
        v for v in poly.lattice_points() if any(v)]
    gen = generation_check(gens, poly, 2)
    if not gen["asymptotically_generates"]:
        record.annotations.append(SMOOTHNESS_NOTE)
    primes = spec.primes()
    try:
        rows = ordered_map(lambda p: sweep_row(spec, p), primes)
    except BudgetExceeded:
        # rerun serially to keep every row finished before the budget ran out
        rows = []
        for p in primes:
            try:
                rows.append(sweep_row(spec, p))
            except BudgetExceeded:
                record.status = f"budget exceeded at p = {p}"
                break
    record.rows = [r for r in rows if r is not None]
    record.fitted_C = str(fitted_constant(record.rows))
    return record


# ---------------------------------------------------------------------------
# check suites


def _random_cone(rng, n: int):
    while True:
        verts = [tuple(int(x) for x in rng.integers(-5, 6, size=n)) for _ in range(n)]
        try:
            return primitive_generating_set(verts)
        except PolytopeError:
            continue


def suite_disc(seed: int = 0, count: int = 100) -> list[str]:
    import numpy as np

    rng = np.random.default_rng(seed)
    failures = []
    for _ in range(count):
        cone = _random_cone(rng, int(rng.integers(1, 4)))
        pts, disc = parallelepiped_points(cone)
        inv = math.prod(smith_invariants(cone.generators))
        if not disc == len(pts) == inv:
            failures.append(f"{cone.generators}: det {disc}, count {len(pts)}, invariants {inv}")
    return failures


CUBIC = build_polytope([(0,), (3,)])
TRIANGLE = build_polytope([(0, 0), (2, 0), (0, 2)])


def suite_np_ge_hp(seed: int = 0, count: int = 200) -> list[str]:
    failures = []
    primes = (5, 7, 11, 13)
    for poly in (CUBIC, TRIANGLE):
        for p in primes:
            try:
                gnp_estimate(Family(poly), p, 1, count // len(primes), seed)
            except AssertionError as e:
                failures.append(str(e))
    return failures


def _regular_samples(poly, p: int, count: int, seed: int) -> list[LaurentPoly]:
    from .expsum import family_rng

    rng = family_rng(seed, p, 1)
    family, F, out = Family(poly), make_field(p), []
    while len(out) < count:
        f = family.sample(F, rng)
        if is_regular(f).regular:
            out.append(f)
    return out


def suite_oracle_equivalence(seed: int = 0, count: int = 5) -> list[str]:
    from .expsum import np_of_f

    cases = [LaurentPoly.from_rational({(1,): 1}, 3)]
    for p in (5, 7):
        cases.append(LaurentPoly.from_rational({(3,): 1}, p))
        cases.extend(_regular_samples(CUBIC, p, count, seed))
    cases.extend(_regular_samples(TRIANGLE, 5, count, seed))
    failures = []
    for f in cases:
        report = dwork.dwork_report(f)
        if report.verified and report.polygon != np_of_f(f):
            failures.append(f"{f} over F_{f.p}: dwork {report.polygon} vs oracle {np_of_f(f)}")
    return failures


def suite_skew(seed: int = 0, count: int = 20) -> list[str]:
    try:
        dwork.skew_self_test(seed, count)
    except AssertionError as e:
        return [str(e)]
    return []


SUITES: dict[str, Callable[..., list[str]]] = {
    "disc": suite_disc,
    "np-ge-hp": suite_np_ge_hp,
    "oracle-equivalence": suite_oracle_equivalence,
    "skew": suite_skew,
}


def cmd_check(name: str, seed: int = 0) -> list[str]:
    if name not in SUITES:
        raise SpecError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))}")
    return SUITES[name](seed)


# ---------------------------------------------------------------------------
# argument parsing


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def _spec_from_args(args) -> ExperimentSpec:
    if not args.spec:
        raise SpecError("--spec is required")
    spec = load_spec(args.spec)
    overrides = {k: getattr(args, k) for k in ("pmin", "pmax", "a", "trials", "seed", "precision",
                                                "budget") if getattr(args, k, None) is not None}
    if getattr(args, "p", None) is not None:
        overrides["pmin"] = overrides["pmax"] = args.p
    if overrides:
        spec = ExperimentSpec(**{**asdict(spec), **overrides})
    return spec


def _single_prime(spec: ExperimentSpec) -> int:
    if spec.pmin != spec.pmax or not is_prime(spec.pmin):
        raise SpecError("give a single prime with --p")
    return spec.pmin


def run_hp(args) -> int:
    spec = _spec_from_args(args)
    poly = spec.polytope
    if spec.family == "toric":
        th = toric_hodge_numbers(poly)
        _emit({"h": th.h, "slopes": slopes_to_str(th.polygon.slopes()),
               "vertices": th.polygon.to_json()})
        return EXIT_OK
    ctx = weight_census(poly)
    hp = hodge_polygon(ctx)
    _emit({"D": ctx.D, "V": ctx.V, "H": ctx.H, "slopes": slopes_to_str(hp.slopes()),
           "vertices": hp.to_json()})
    return EXIT_OK


def run_hilbert(args) -> int:
    spec = _spec_from_args(args)
    poly = spec.polytope
    res = hilbert_basis(poly)
    gen = generation_check(res.generators, poly, 2)
    lattice_gen = generation_check([v for v in poly.lattice_points() if any(v)], poly, 2)
    _emit({"hilbert_basis": res.generators, "generates": gen["generates"],
           "lattice_points_generate": lattice_gen["generates"],
           "lattice_points_asymptotically_generate": lattice_gen["asymptotically_generates"],
           "non_generated": lattice_gen["fails_at"][:10]})
    return EXIT_OK


def run_triangulate(args) -> int:
    spec = _spec_from_args(args)
    poly = spec.polytope
    out = []
    for f in poly.originless_facets:
        out.append({"facet": list(poly.facet_points(f)),
                    "simplices": triangulate_facet(poly.facet_points(f))})
    _emit({"normalized_volume": normalized_volume(poly), "facets": out})
    return EXIT_OK


def run_weights(args) -> int:
    spec = _spec_from_args(args)
    ctx = weight_census(spec.polytope)
    _emit({"D": ctx.D, "V": ctx.V, "k_index": ctx.k_index, "k_exact": ctx.k_exact,
           "census": [{"i": i, "W": w, "H": h} for i, w, h in ctx.to_csv_rows()]})
    return EXIT_OK


def run_np(args) -> int:
    spec = _spec_from_args(args)
    p = _single_prime(spec)
    f = _reduce_fixed(spec, p)
    if f is None:
        raise SpecError(f"f does not reduce to a polynomial with the same support mod {p}")
    L = l_polynomial(f, budget=spec.budget)
    np_f = L.newton_polygon()
    hp = hodge_polygon(spec.polytope)
    cmp = compare(np_f, hp)
    _emit({"f": f.to_json(), "p": p, "a": spec.a, **L.to_json(),
           "np_vertices": np_f.to_json(), "hp_vertices": hp.to_json(),
           "lies_above": cmp.lies_above, "endpoints_meet": cmp.endpoints_meet})
    return EXIT_OK if cmp.lies_above and cmp.endpoints_meet else EXIT_VIOLATION


def run_gnp(args) -> int:
    spec = _spec_from_args(args)
    p = _single_prime(spec)
    res = gnp_estimate(spec.family_object(), p, spec.a, spec.trials, spec.seed, spec.budget)
    _emit({"p": p, "a": spec.a, "gnp": slopes_to_str(res.polygon.slopes()),
           "hp": slopes_to_str(res.hodge.slopes()), "ordinary": res.ordinary,
           "attained": res.attained, "samples": res.samples, "seed": res.seed})
    return EXIT_OK


def run_sweep(args) -> int:
    spec = _spec_from_args(args)
    record = cmd_sweep(spec)
    path = persist(record, args.out)
    _emit({"out": str(path), "rows": len(record.rows), "fitted_C": record.fitted_C,
           "annotations": record.annotations, "status": record.status})
    return EXIT_OK if record.status == "complete" else EXIT_BUDGET


def run_dwork_np(args) -> int:
    spec = _spec_from_args(args)
    p = _single_prime(spec)
    if spec.a != 1:
        raise SpecError("the Dwork route is implemented over the prime field only (a = 1)")
    f = _reduce_fixed(spec, p)
    if f is None:
        raise SpecError(f"f does not reduce to a polynomial with the same support mod {p}")
    rep = dwork.dwork_report(f, precision=spec.precision)
    _emit({"p": p, "slopes": slopes_to_str(rep.polygon.slopes()),
           "vertices": rep.polygon.to_json(), "verified": rep.verified,
           "certified_order": str(rep.certified), "matrix_size": rep.matrix_size,
           "rigid": [{"k": r.k, "passes": r.passes, "margin": str(r.margin)} for r in rep.rigid]})
    return EXIT_OK


def run_hasse(args) -> int:
    spec = _spec_from_args(args)
    poly = spec.polytope
    if args.kind == "local":
        p = _single_prime(spec)
        J = spec.J + spec.V if spec.J or spec.V else tuple(v for v in poly.lattice_points() if any(v))
        res = dwork.hasse_local(poly, J, p, cap=spec.cap)
        _emit({"P": json.loads(res.P.to_json()), "G": json.loads(res.G.to_json()),
               "P_str": str(res.P), "G_str": str(res.G)})
        return EXIT_OK
    primes = spec.primes()
    if args.kind == "global":
        res = dwork.hasse_global(poly, spec.J, spec.V, dict(zip(spec.V, spec.coeffs_V)), primes,
                                 cap=spec.cap)
        _emit({"P": json.loads(res.P.to_json()), "G": json.loads(res.G.to_json()),
               "P_str": str(res.P), "G_str": str(res.G),
               "classes": {str(k): v for k, v in res.primes.items()}})
        return EXIT_OK
    J = spec.J + spec.V
    res = dwork.hasse_star(poly, J, primes, cap=spec.cap)
    _emit({"P": json.loads(res.P.to_json()), "P_str": str(res.P)})
    return EXIT_OK


def run_check(args) -> int:
    failures = cmd_check(args.suite, args.seed or 0)
    for line in failures:
        print(f"FAIL {line}")
    print(f"{args.suite}: {'PASS' if not failures else 'FAIL'}")
    return EXIT_OK if not failures else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dworklab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn, help_text: str):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(fn=fn)
        sp.add_argument("--spec")
        sp.add_argument("--p", type=int)
        sp.add_argument("--pmin", type=int)
        sp.add_argument("--pmax", type=int)
        sp.add_argument("--a", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", default="results")
        sp.add_argument("--precision", type=int)
        sp.add_argument("--budget", type=int)
        return sp

    add("hp", run_hp, "Hodge polygon of the spec polytope")
    add("hilbert", run_hilbert, "Hilbert basis and generation check")
    add("triangulate", run_triangulate, "triangulate the origin-less facets")
    add("weights", run_weights, "weight census W(i), H(i)")
    add("np", run_np, "Newton polygon of the fixed f by exponential sums")
    add("gnp", run_gnp, "empirical generic Newton polygon")
    add("sweep", run_sweep, "NP, GNP and HP over a prime range")
    add("dwork-np", run_dwork_np, "Newton polygon by the Fredholm determinant")
    add("hasse", run_hasse, "local, global or star Hasse polynomials").add_argument(
        "--kind", choices=["local", "global", "star"], default="global")
    chk = sub.add_parser("check", help="run a property suite")
    chk.set_defaults(fn=run_check)
    chk.add_argument("suite")
    chk.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (SpecError, IrregularError, PolytopeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (AssertionError, dwork.HasseError, dwork.PrecisionError) as e:
        print(f"property violation: {e}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
