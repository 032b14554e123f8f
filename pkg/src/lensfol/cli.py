"""Command line front end: ``lensfol {classify,verify,retract,whitney}``.

Reports go to stdout (or ``--out``) as JSON or CSV.  Exit status is 0 when
every check passes, 1 when a check fails and 2 on invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fn1d, gamma_group, lens_arith, lens_glue, torus_fol
from .errors import InvalidInput, LensfolError, NotDiffeo
from .homog_bundle import HomogFn, QuadHomogField

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


# --- serialization ------------------------------------------------------------------

def _encode(obj) -> str:
    # floats keep 17 significant digits so that doubles round-trip exactly
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {_encode(v)}"
                               for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj) -> str:
    return _encode(obj) + "\n"


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    if isinstance(x, (list, tuple, dict)):
        return _encode(x)
    return x


def to_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


@dataclass
class Report:
    command: str
    config: dict
    results: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    csv_header: list = field(default_factory=lambda: ["check", "samples", "max_residual", "verdict"])
    csv_rows: Optional[list] = None

    def add(self, check: str, samples: int, residual: float, passed: bool) -> None:
        self.results.append({"check": check, "samples": int(samples),
                             "max_residual": float(residual),
                             "verdict": "pass" if passed else "fail"})

    def note(self, check: str, samples: int, residual: float) -> None:
        """Measured value reported without a pass/fail judgement."""
        self.results.append({"check": check, "samples": int(samples),
                             "max_residual": float(residual), "verdict": "reported"})

    @property
    def passed(self) -> bool:
        return all(r["verdict"] != "fail" for r in self.results)

    def as_dict(self) -> dict:
        out = {"command": self.command, "config": self.config, "results": self.results}
        out.update(self.extra)
        out["verdict"] = "pass" if self.passed else "fail"
        return out

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return to_json(self.as_dict())
        if self.csv_rows is not None:
            return to_csv(self.csv_header, self.csv_rows)
        return to_csv(self.csv_header, [[r[k] for k in self.csv_header] for r in self.results])


# --- shared fixtures ----------------------------------------------------------------

def anisotropic_f() -> HomogFn:
    """A definite quadratic form whose principal axes turn with the base angle."""
    return HomogFn.from_quadratic(QuadHomogField.rotated_diag(0.5, 2.0))


def round_f() -> HomogFn:
    return HomogFn.norm_power(2)


# --- classify -----------------------------------------------------------------------

def cmd_classify(args) -> Report:
    data = lens_arith.classify(args.p, args.q)
    rep = Report("classify", {"p": args.p, "q": args.q}, extra={"classification": data},
                 csv_header=["key", "value"])
    rep.csv_rows = [[k, v] for k, v in data.items()]
    return rep


# --- verify -------------------------------------------------------------------------

def _verify_gamma(rep: Report, args) -> None:
    fails = gamma_group.relation_failures()
    rep.add("relations", len(gamma_group.RELATIONS), len(fails), not fails)
    bad = gamma_group.round_trip_failures(np.random.default_rng(args.seed), args.samples)
    rep.add("normal_form_round_trip", args.samples, bad, bad == 0)
    ab = gamma_group.gamma_abelianization()
    rep.add("abelianization_Z2^3", 1, 0 if str(ab) == "Z_2^3" else 1, str(ab) == "Z_2^3")


def _verify_torus(rep: Report, args) -> None:
    rng = np.random.default_rng(args.seed)
    tol = args.tol
    F = anisotropic_f()
    Z = round_f()
    pts = torus_fol.sample_points(F, args.samples, rng)
    phis = [fn1d.sample_diffeo(rng) for _ in range(4)]
    s = np.linspace(0.0, 1.0, 513)

    ident = max(torus_fol.stabilizer_residual(p, torus_fol.theta(p, F), F, args.samples, args.seed)
                for p in phis)
    rep.add("theta_identity", args.samples, ident, ident <= min(tol, 1e-10))
    hom = max(torus_fol.map_residual(torus_fol.theta(fn1d.compose(q, p), F),
                                     torus_fol.theta(q, F) @ torus_fol.theta(p, F), pts)
              for p, q in zip(phis, phis[1:]))
    rep.add("theta_homomorphism", args.samples, hom, hom <= min(tol, 1e-9))
    sec = max(float(np.max(np.abs(torus_fol.sigma(torus_fol.theta(p, F), F)(s) - p(s)))) for p in phis)
    rep.add("sigma_theta_identity", len(s), sec, sec <= tol)
    ray = (np.array([1.3]), np.array([[np.cos(0.4), np.sin(0.4)]]))
    th = torus_fol.theta(phis[0], F)
    ray_gap = float(np.max(np.abs(torus_fol.sigma(th, F)(s) - torus_fol.sigma(th, F, ray=ray)(s))))
    rep.add("sigma_ray_independence", len(s), ray_gap, ray_gap <= tol)

    A = gamma_group.random_elem(rng, 5)
    B = gamma_group.random_elem(rng, 5)
    zp = torus_fol.sample_points(Z, args.samples, rng)
    gh = torus_fol.map_residual(torus_fol.g_A(A) @ torus_fol.g_A(B), torus_fol.g_A(A * B), zp)
    rep.add("g_A_homomorphism", args.samples, gh, gh <= 1e-12)

    h = (torus_fol.theta(phis[1], Z) @ torus_fol.g_A(gamma_group.DELTA)
         @ torus_fol.rotation(*rng.uniform(0.0, 2 * np.pi, 2)))
    R = torus_fol.Retraction(h, Z)
    g0 = torus_fol.map_residual(R(0.0), h, zp)
    rep.add("retraction_start", args.samples, g0, g0 <= 1e-9)
    g1 = torus_fol.leaf_residual(R(1.0), Z, args.samples, args.seed)
    rep.add("retraction_end_leaf_residual", args.samples, g1, g1 <= tol)
    hb = torus_fol.theta(phis[2], Z)
    Rb = torus_fol.Retraction(hb, Z)
    bp = torus_fol.boundary_points(Z, args.samples, rng)
    drift = max(float(np.max(torus_fol.point_distance(Rb(t)(*bp), bp))) for t in (0.25, 0.5, 1.0))
    rep.add("retraction_fixes_boundary", args.samples, drift, drift <= 1e-10)

    try:
        torus_fol.sigma(torus_fol.identity_map(), Z, HomogFn.norm_power(4))
        rep.add("degree_mismatch_rejected", 1, 1.0, False)
    except NotDiffeo:
        rep.add("degree_mismatch_rejected", 1, 0.0, True)


LENS_RELATIONS = {
    (1, 0): [("sigma_plus^2", "id"), ("sigma_minus^4", "id"),
             ("sigma_minus^2", "lambda_hat mu_hat"),
             ("sigma_plus sigma_minus sigma_plus", "sigma_minus^-1"),
             ("lambda_hat rho(0.7,0.3)", "rho(-0.7,0.3) lambda_hat"),
             ("mu_hat rho(0.7,0.3)", "rho(0.7,-0.3) mu_hat")],
    (2, 1): [("sigma_minus^2", "tau_hat"), ("sigma_plus sigma_minus", "theta_hat"),
             ("theta_hat tau_hat", "tau_hat theta_hat")],
}
DISCRIMINATIONS = {(1, 0): [("sigma_plus sigma_minus", ["lambda_hat", "mu_hat"]),
                            ("sigma_minus sigma_plus", ["lambda_hat", "mu_hat"])]}


def _generic_relations(spec: lens_glue.GlueSpec) -> list:
    out = []
    for name, rel in (("sigma_plus", ("sigma_plus^2", "id")), ("sigma_minus", ("sigma_minus^4", "id"))):
        try:
            lens_glue.mcg_diffeo(spec, name)
            out.append(rel)
        except LensfolError:
            pass
    out.append(("tau_hat^2", "id"))
    return out


def _verify_lens(rep: Report, args) -> None:
    spec = lens_glue.GlueSpec.for_lens(args.p, args.q)
    key = (spec.lens.p, spec.lens.q)
    rng = np.random.default_rng(args.seed)
    tol = args.tol
    F = anisotropic_f()
    gspec = lens_glue.GlueSpec.for_lens(args.p, args.q, F, F)

    pts = lens_glue.sample_lens_points(gspec, 0, args.samples, rng)
    moved = lens_glue.transfer(gspec, pts)
    leaf = float(np.max(np.abs(lens_glue.glued_f(gspec, pts) - lens_glue.glued_f(gspec, moved))))
    rep.add("xi_leaf_identity", args.samples, leaf, leaf <= 1e-12)
    back = float(np.max(lens_glue.lens_distance(gspec, pts, lens_glue.transfer(gspec, moved))))
    rep.add("xi_round_trip", args.samples, back, back <= 1e-9)

    phi = fn1d.sample_diffeo(rng)
    T = lens_glue.theta_glued(gspec, phi)
    comp = lens_glue.compatibility_residual(gspec, T, args.samples, args.seed)
    rep.add("theta_compatibility", args.samples, comp, comp <= tol)
    s = np.linspace(0.0, 1.0, 513)
    sec = float(np.max(np.abs(lens_glue.sigma_glued(gspec, T)(s) - phi(s))))
    rep.add("sigma_theta_identity", len(s), sec, sec <= tol)
    # rotations are foliated only for the round function, so that case uses spec
    cases = (("anisotropic", gspec, lens_glue.theta_glued(gspec, fn1d.sample_diffeo(rng)) @ T),
             ("round", spec, lens_glue.theta_glued(spec, phi)
              @ lens_glue.mcg_diffeo(spec, "rho(0.3,0.7)")))
    for label, sp, h in cases:
        R = lens_glue.GluedRetraction(sp, h)
        g0 = lens_glue.map_distance(sp, R(0.0), R.h, args.samples, args.seed)
        rep.add(f"retraction_start:{label}", args.samples, g0, g0 <= 1e-9)
        g1 = lens_glue.leaf_residual_glued(sp, R(1.0), args.samples, args.seed)
        rep.add(f"retraction_end_leaf_residual:{label}", args.samples, g1, g1 <= tol)

    relations = []
    for name in ("rho(0.3,0.7)", "delta_hat", "lambda_hat", "mu_hat", "tau_hat", "theta_hat",
                 "sigma_plus", "sigma_minus"):
        try:
            m = lens_glue.mcg_diffeo(spec, name)
        except LensfolError:
            continue
        res = lens_glue.compatibility_residual(spec, m, args.samples, args.seed)
        if key == (0, 1) and name == "sigma_minus":
            rep.note(f"compatibility:{name}", args.samples, res)
        else:
            rep.add(f"compatibility:{name}", args.samples, res, res <= 1e-9)
    for word, expected in LENS_RELATIONS.get(key, _generic_relations(spec)):
        r = lens_glue.verify_relation(spec, word, expected, args.samples, args.seed)
        relations.append(r.as_dict())
        rep.add(f"relation:{word} = {expected}", args.samples, r.residual, r.verdict)
    disc = [lens_glue.discriminate(spec, w, c, args.samples, args.seed)
            for w, c in DISCRIMINATIONS.get(key, [])]
    rep.extra.update({"spec": {"p": key[0], "q": key[1], "xi": spec.lens.xi_list()},
                      "relations": relations, "discrimination": disc})


SUITES: dict = {"gamma": _verify_gamma, "torus": _verify_torus, "lens": _verify_lens}


def cmd_verify(args) -> Report:
    rep = Report("verify", {"suite": args.suite, "p": args.p, "q": args.q, "seed": args.seed,
                            "samples": args.samples, "tol": args.tol})
    SUITES[args.suite](rep, args)
    return rep


# --- retract ------------------------------------------------------------------------

def _torus_map(name: str, rng) -> torus_fol.TorusMap:
    Z = round_f()
    phi = fn1d.sample_diffeo(rng)
    maps: dict = {
        "identity": lambda: torus_fol.identity_map(),
        "rotation": lambda: torus_fol.rotation(0.3, 0.7),
        "theta": lambda: torus_fol.theta(phi, Z),
        "theta_square": lambda: torus_fol.theta(fn1d.power_map(2), Z),
        "composite": lambda: (torus_fol.theta(phi, Z) @ torus_fol.g_A(gamma_group.DELTA)
                              @ torus_fol.rotation(0.3, 0.7)),
        "shear": lambda: torus_fol.TorusMap(lambda a, v: (a, v + np.array([0.1, 0.0])),
                                            lambda a, v: (a, v - np.array([0.1, 0.0])),
                                            name="shear"),
    }
    if name not in maps:
        raise KeyError(name)
    return maps[name]()


def _lens_map(spec: lens_glue.GlueSpec, name: str, rng) -> lens_glue.LensMap:
    phi = fn1d.sample_diffeo(rng)
    if name == "identity":
        return lens_glue.lens_identity()
    if name == "rotation":
        return lens_glue.mcg_diffeo(spec, "rho(0.3,0.7)")
    if name == "theta":
        return lens_glue.theta_glued(spec, phi)
    if name == "composite":
        return lens_glue.theta_glued(spec, phi) @ lens_glue.mcg_diffeo(spec, "rho(0.3,0.7)")
    return lens_glue.mcg_diffeo(spec, name)


def cmd_retract(args) -> Report:
    rng = np.random.default_rng(args.seed)
    ts = np.linspace(0.0, 1.0, args.steps + 1)
    solid = args.p is None
    cfg = {"space": "solidtorus" if solid else "lens", "p": args.p, "q": args.q,
           "map": args.map, "steps": args.steps, "seed": args.seed, "samples": args.samples}
    rep = Report("retract", cfg, csv_header=["t", "residual"])
    if solid:
        Z = round_f()
        try:
            h = _torus_map(args.map, rng)
        except KeyError:
            raise InvalidInput(f"unknown map {args.map!r}") from None
        R = torus_fol.Retraction(h, Z)
        traj = [(float(t), torus_fol.leaf_residual(R(t), Z, args.samples, args.seed)) for t in ts]
    else:
        spec = lens_glue.GlueSpec.for_lens(args.p, args.q)
        R = lens_glue.GluedRetraction(spec, _lens_map(spec, args.map, rng))
        traj = [(float(t), lens_glue.leaf_residual_glued(spec, R(t), args.samples, args.seed))
                for t in ts]
    rep.extra["retraction"] = [{"t": t, "residual": r} for t, r in traj]
    rep.add("endpoint_leaf_residual", args.samples, traj[-1][1], traj[-1][1] <= args.tol)
    rep.csv_rows = [list(p) for p in traj]
    return rep


# --- whitney ------------------------------------------------------------------------

def cmd_whitney(args) -> Report:
    spec = args.function
    if spec.lstrip().startswith("{"):
        spec = json.loads(spec)
    gamma = fn1d.fn_from_spec(spec, args.a)
    phi = fn1d.whitney_even_root(gamma)
    grid = np.linspace(-args.a, args.a, 512)
    err = float(np.max(np.abs(gamma(grid) - phi(grid * grid))))
    bound = fn1d.whitney_bound(gamma, phi)
    s = np.linspace(0.0, args.a * args.a, args.samples)
    vals = phi(s)
    cfg = {"function": args.function, "a": args.a, "samples": args.samples}
    rep = Report("whitney", cfg, csv_header=["s", "phi"])
    rep.add("even_root_residual", len(grid), err, err <= 1e-9)
    rep.add("derivative_bound", 512, bound.sup_phi_prime - bound.half_sup_gamma_2, bound.holds())
    rep.extra["bound"] = {"sup_phi_prime": bound.sup_phi_prime,
                          "half_sup_gamma_2": bound.half_sup_gamma_2}
    rep.extra["phi"] = [{"s": float(a), "phi": float(b)} for a, b in zip(s, vals)]
    rep.csv_rows = [[float(a), float(b)] for a, b in zip(s, vals)]
    return rep


# --- entry point ----------------------------------------------------------------------

def _common(samples: int = 1000) -> argparse.ArgumentParser:
    # a fresh parent per subcommand: argparse shares parent actions, defaults included
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=samples)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lensfol", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[_common()], help="gluing matrix, sigma flags, pi_0 table")
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--q", type=int, required=True)
    c.set_defaults(run=cmd_classify)

    v = sub.add_parser("verify", parents=[_common()], help="run an identity-verification suite")
    v.add_argument("--suite", choices=sorted(SUITES), required=True)
    v.add_argument("--p", type=int, default=1)
    v.add_argument("--q", type=int, default=0)
    v.set_defaults(run=cmd_verify)

    r = sub.add_parser("retract", parents=[_common()],
                       help="leaf residual along the deformation retraction")
    r.add_argument("--p", type=int, help="lens space L(p, q); omit for the solid torus")
    r.add_argument("--q", type=int)
    r.add_argument("--map", default="composite",
                   help="identity, rotation, theta, theta_square, composite, shear "
                        "or a mapping class name for lens spaces")
    r.add_argument("--steps", type=int, default=10)
    r.set_defaults(run=cmd_retract)

    w = sub.add_parser("whitney", parents=[_common(samples=17)], help="even-root division of an even function")
    w.add_argument("--function", default="cos",
                   help="t2, t3, t4, cos, cos_minus_1, gauss, sin or a JSON spec")
    w.add_argument("--a", type=float, default=1.0)
    w.set_defaults(run=cmd_whitney)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "retract" and (args.p is None) != (args.q is None):
        parser.error("--p and --q go together")
    if getattr(args, "steps", 1) < 1:
        parser.error("--steps must be at least 1")
    try:
        rep = args.run(args)
    except (LensfolError, ValueError) as exc:
        print(f"lensfol: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = rep.render(args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
