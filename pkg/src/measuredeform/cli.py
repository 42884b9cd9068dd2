"""Command-line front end.

Subcommands: check, falsify, deform, velocity, fourier, cone.  Artifacts are
CSV files whose header comments echo the resolved configuration, so identical
configurations produce byte-identical output.  Exit codes: 0 success or
admissible/satisfied, 1 inadmissible/violated/counterexample found, 2 usage or
evaluation error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import admissibility, caratheodory, cone, families, transport
from .distributions import RadonMeasureSpec, StructuredDistribution, pair
from .errors import ConstructionError, DomainError, EvaluationError, UnsupportedOrderError
from .mollifier import ScaledMollifier, build_mollifier
from .specfile import SpecFormatError, read_distribution, read_measure


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    options: Dict[str, object]

    def header_lines(self) -> List[str]:
        lines = [f"# measuredeform {self.subcommand}"]
        for key in sorted(self.options):
            lines.append(f"# {key} = {_fmt(self.options[key])}")
        return lines


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _write_csv(path: Path, config: RunConfig, columns: Sequence[str], rows) -> None:
    with open(path, "w") as fh:
        for line in config.header_lines():
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _eps_ladder(text: str) -> tuple:
    ladder = tuple(sorted({float(tok) for tok in text.split(",") if tok.strip()}, reverse=True))
    if not ladder:
        raise argparse.ArgumentTypeError("empty epsilon ladder")
    return ladder


def _vector(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.split(",") if tok.strip()])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="measuredeform",
        description="Admissible measure-family derivatives, deforming families, "
        "circle moment criteria, and mollified transport velocities.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_check = sub.add_parser("check", help="rule-engine admissibility verdict")
    p_check.add_argument("--mu", required=True, help="measure spec file")
    p_check.add_argument("--eta", required=True, help="distribution spec file")
    p_check.add_argument("--mode", choices=["one_sided", "two_sided"], default="one_sided")

    p_fal = sub.add_parser("falsify", help="search for a violating test function")
    p_fal.add_argument("--mu", required=True)
    p_fal.add_argument("--eta", required=True)
    p_fal.add_argument("--mode", choices=["one_sided", "two_sided"], default="one_sided")
    p_fal.add_argument("--budget", type=int, default=10**4)
    p_fal.add_argument("--seed", type=int, default=0)

    p_def = sub.add_parser("deform", help="verify a family's weak derivative")
    p_def.add_argument("--family", choices=["explicit", "delta", "scaling"], required=True)
    p_def.add_argument("-k", type=int, default=1, help="derivative order (explicit family)")
    p_def.add_argument("-q", type=float, default=0.5, help="amplitude exponent (explicit family)")
    p_def.add_argument("--mu", help="base measure (scaling family)")
    p_def.add_argument("--rate", type=float, default=1.0, help="mass growth rate (scaling family)")
    p_def.add_argument("--normalize", action="store_true", help="normalize to probabilities")
    p_def.add_argument("--side", choices=["+", "-"], default="+")
    p_def.add_argument("--battery-size", type=int, default=10)
    p_def.add_argument("--battery-seed", type=int, default=0)
    p_def.add_argument("--levels", type=int, default=12)
    p_def.add_argument("--shape-ratio", type=float, default=0.5)
    p_def.add_argument("--out", required=True, help="output base path (writes _samples/_summary)")

    p_vel = sub.add_parser("velocity", help="mollified continuity-equation velocities")
    p_vel.add_argument("--mu", required=True)
    p_vel.add_argument("--eta", required=True)
    p_vel.add_argument("--eps", type=_eps_ladder, default=transport.DEFAULT_LADDER)
    p_vel.add_argument("--shape-ratio", type=float, default=0.5)
    p_vel.add_argument("--points-per-eps", type=int, default=transport.POINTS_PER_EPS)
    p_vel.add_argument("--stride", type=int, default=0, help="CSV row stride (0: about 2000 rows per eps)")
    p_vel.add_argument("--jobs", type=int, default=1)
    p_vel.add_argument("--moderate", action="store_true", help="add growth-exponent fits")
    p_vel.add_argument("--out", required=True)

    p_fou = sub.add_parser("fourier", help="circle moments and tangent criterion")
    p_fou.add_argument("--object", help="spec file for a single object")
    p_fou.add_argument("--object-type", choices=["measure", "distribution"], default="measure")
    p_fou.add_argument("--mu", help="measure spec (tangent test)")
    p_fou.add_argument("--eta", help="distribution spec (tangent test)")
    p_fou.add_argument("--max-freq", type=int, default=16)
    p_fou.add_argument("--out")

    p_cone = sub.add_parser("cone", help="tangent-cone membership and curves")
    group = p_cone.add_mutually_exclusive_group(required=True)
    group.add_argument("--polytope", help="CSV of rows a_1,...,a_d,b meaning a.x <= b")
    group.add_argument("--ball", help="c_1,...,c_d,r")
    p_cone.add_argument("--point", required=True, type=_vector)
    p_cone.add_argument("--direction", required=True, type=_vector)
    p_cone.add_argument("--curve", action="store_true")
    p_cone.add_argument("--t-start", type=float, default=0.125)
    p_cone.add_argument("--out")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (FileNotFoundError, SpecFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ConstructionError, EvaluationError, UnsupportedOrderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    if args.subcommand == "check":
        return _run_check(args)
    if args.subcommand == "falsify":
        return _run_falsify(args)
    if args.subcommand == "deform":
        return _run_deform(args)
    if args.subcommand == "velocity":
        return _run_velocity(args)
    if args.subcommand == "fourier":
        return _run_fourier(args)
    if args.subcommand == "cone":
        return _run_cone(args)
    raise AssertionError(f"unhandled subcommand {args.subcommand}")


def _run_check(args) -> int:
    mu = read_measure(args.mu)
    eta = read_distribution(args.eta)
    checker = admissibility.check_two_sided if args.mode == "two_sided" else admissibility.check_one_sided
    verdict = checker(mu, eta)
    print(f"mode: {args.mode}")
    print(f"admissible: {verdict.admissible}")
    print(f"probability_constraint_ok: {verdict.probability_constraint_ok}")
    for event in verdict.rule_trace:
        detail = f" ({event.detail})" if event.detail else ""
        print(f"  [{event.rule}] {event.subject}: {event.outcome}{detail}")
    return 0 if verdict.admissible else 1


def _run_falsify(args) -> int:
    mu = read_measure(args.mu)
    eta = read_distribution(args.eta)
    ce = admissibility.falsify(mu, eta, mode=args.mode, budget=args.budget, seed=args.seed)
    if ce is None:
        print(f"no counterexample found within budget {args.budget}")
        return 0
    s = ce.spec
    print("counterexample found:")
    print(f"  kind = {s.kind}")
    print(f"  center = {_fmt(s.center)}")
    print(f"  width = {_fmt(s.width)}")
    if s.kind == "pinned_bump":
        print(f"  pin_order = {s.pin_order}")
        print(f"  tilt = {_fmt(s.tilt)}")
    print(f"  pairing = {_fmt(ce.value)}")
    return 1


def _family_from_args(args):
    psi = build_mollifier(args.shape_ratio)
    if args.family == "explicit":
        fam = families.explicit_family(k=args.k, q=args.q, psi=psi)
    elif args.family == "delta":
        fam = families.delta_family()
    else:
        if not args.mu:
            raise DomainError("scaling family needs --mu")
        fam = families.scaling_family(read_measure(args.mu), args.rate)
    if args.normalize:
        fam = families.normalize_to_probability(fam)
    return psi, fam


def _run_deform(args) -> int:
    psi, fam = _family_from_args(args)
    ensure = args.k if args.family == "explicit" else 1
    battery = families.jet_battery(psi, args.battery_size, seed=args.battery_seed, ensure_order=ensure)
    config = RunConfig(
        "deform",
        {
            "family": args.family,
            "k": args.k,
            "q": args.q,
            "mu": args.mu or "",
            "rate": args.rate,
            "normalize": args.normalize,
            "side": args.side,
            "battery_size": args.battery_size,
            "battery_seed": args.battery_seed,
            "levels": args.levels,
            "shape_ratio": args.shape_ratio,
        },
    )
    samples = families.ladder_table(fam, battery, side=args.side, levels=args.levels)
    checks = families.verify_weak_derivative(fam, battery, side=args.side, levels=args.levels)
    base = Path(args.out)
    _write_csv(base.with_name(base.name + "_samples.csv"), config, ["t", "phi_id", "integral"], samples)
    _write_csv(
        base.with_name(base.name + "_summary.csv"),
        config,
        ["phi_id", "estimate", "target", "abs_err"],
        [(c.phi_id, c.estimate, c.target, c.abs_err) for c in checks],
    )
    worst = max(c.abs_err for c in checks)
    print(f"checked {len(checks)} battery functions; worst abs err = {_fmt(worst)}")
    return 0


def _run_velocity(args) -> int:
    if args.moderate and np.log10(max(args.eps) / min(args.eps)) < 1.5:
        raise DomainError(
            "--moderate needs an epsilon ladder spanning at least 1.5 decades; "
            "extend it, e.g. --eps 0.2,0.1,0.05,0.025,0.0125,0.00625"
        )
    mu = read_measure(args.mu)
    eta = read_distribution(args.eta)
    psi = build_mollifier(args.shape_ratio)
    rep = transport.velocity_representative(
        mu, eta, psi, ladder=args.eps, points_per_eps=args.points_per_eps, jobs=args.jobs
    )
    config = RunConfig(
        "velocity",
        {
            "mu": args.mu,
            "eta": args.eta,
            "eps": args.eps,
            "shape_ratio": args.shape_ratio,
            "points_per_eps": args.points_per_eps,
            "stride": args.stride,
            "jobs": args.jobs,
            "moderate": args.moderate,
        },
    )
    rows = []
    for s in rep.slices:
        stride = args.stride if args.stride > 0 else max(1, s.f.n // 2001)
        x = s.f.x
        for i in range(0, s.f.n, stride):
            rows.append(
                (s.eps, x[i], s.f.values[i], s.g.values[i], s.v.values[i], int(s.mask[i]))
            )
    base = Path(args.out)
    _write_csv(
        base.with_name(base.name + "_fields.csv"),
        config,
        ["epsilon", "x", "f_eps", "g_eps", "v_eps", "in_mask"],
        rows,
    )
    _write_csv(
        base.with_name(base.name + "_summary.csv"),
        config,
        ["epsilon", "residual", "sup_v"],
        [(s.eps, s.residual, s.sup_v) for s in rep.slices],
    )
    for s in rep.slices:
        rel = s.residual / s.g.sup_abs() if s.g.sup_abs() > 0 else 0.0
        print(f"eps={_fmt(s.eps)}: residual={_fmt(s.residual)} (relative {_fmt(rel)}), sup|v|={_fmt(s.sup_v)}")
    if args.moderate:
        lo, hi = rep.slices[0].f.x_lo, rep.slices[0].f.x_hi
        fit_f = transport.moderateness_estimate([(s.eps, s.f) for s in rep.slices], (lo, hi))
        fit_v = transport.moderateness_estimate([(s.eps, s.v) for s in rep.slices], (lo, hi))
        _write_csv(
            base.with_name(base.name + "_moderateness.csv"),
            config,
            ["quantity", "c", "N_fit", "r_squared"],
            [("f_eps", fit_f.c, fit_f.N_fit, fit_f.r_squared), ("v_eps", fit_v.c, fit_v.N_fit, fit_v.r_squared)],
        )
        print(f"f_eps growth: N={_fmt(fit_f.N_fit)} (c={_fmt(fit_f.c)}, r2={_fmt(fit_f.r_squared)})")
        print(f"v_eps growth: N={_fmt(fit_v.N_fit)} (c={_fmt(fit_v.c)}, r2={_fmt(fit_v.r_squared)})")
    return 0


def _run_fourier(args) -> int:
    N = args.max_freq
    if args.object and (args.mu or args.eta):
        raise DomainError("give either --object or the --mu/--eta pair")
    if args.object:
        obj = read_measure(args.object) if args.object_type == "measure" else read_distribution(args.object)
        data = caratheodory.fourier_coefficients(obj, N)
        config = RunConfig(
            "fourier",
            {"object": args.object, "object_type": args.object_type, "max_freq": N},
        )
        if args.out:
            _write_csv(
                Path(args.out),
                config,
                ["n", "re_a_n", "im_a_n"],
                [
                    (n, data.a(n).real, data.a(n).imag)
                    for n in range(-N, N + 1)
                ],
            )
        is_psd, min_eig = caratheodory.toeplitz_psd(data)
        print(f"toeplitz_psd: {is_psd} (min eigenvalue {_fmt(min_eig)}, N={N})")
        return 0 if is_psd else 1
    if not (args.mu and args.eta):
        raise DomainError("tangent test needs both --mu and --eta")
    mu = read_measure(args.mu)
    eta = read_distribution(args.eta)
    a0 = caratheodory.fourier_coefficients(mu, N)
    a1 = caratheodory.fourier_coefficients(eta, N)
    verdict = caratheodory.tangent_condition(a0, a1, N)
    config = RunConfig("fourier", {"mu": args.mu, "eta": args.eta, "max_freq": N})
    if args.out:
        _write_csv(
            Path(args.out),
            config,
            ["n", "re_mu", "im_mu", "re_eta", "im_eta"],
            [
                (n, a0.a(n).real, a0.a(n).imag, a1.a(n).real, a1.a(n).imag)
                for n in range(-N, N + 1)
            ],
        )
    print(
        f"tangent_condition (up to frequency {N}): satisfied={verdict.satisfied} "
        f"kernel_dim={verdict.kernel_dim} min_eig={_fmt(verdict.min_eig)} "
        f"projected_norm={_fmt(verdict.projected_norm)}"
    )
    return 0 if verdict.satisfied else 1


def _load_body(args):
    if args.polytope:
        path = Path(args.polytope)
        if not path.exists():
            raise FileNotFoundError(f"no such polytope file: {path}")
        data = np.atleast_2d(np.loadtxt(path, delimiter=",", comments="#"))
        return cone.HPolytope(data[:, :-1], data[:, -1])
    vals = _vector(args.ball)
    if vals.size < 2:
        raise DomainError("ball needs c_1,...,c_d,r")
    return cone.Ball(center=vals[:-1], radius=float(vals[-1]))


def _run_cone(args) -> int:
    body = _load_body(args)
    p, v = args.point, args.direction
    if p.size != body.dim or v.size != body.dim:
        raise DomainError(f"point/direction dimension mismatch (body is {body.dim}-dimensional)")
    verdict = cone.classify_direction(body, p, v)
    thetas = cone.normal_functionals(body, p)
    print(f"classification: {verdict}")
    print(f"normal functionals at p: {[list(map(float, th)) for th in thetas]}")
    config = RunConfig(
        "cone",
        {
            "body": args.polytope or f"ball({args.ball})",
            "point": tuple(map(float, p)),
            "direction": tuple(map(float, v)),
            "curve": args.curve,
            "t_start": args.t_start,
        },
    )
    if args.curve:
        if verdict == cone.OUTSIDE:
            theta = min(thetas, key=lambda th: float(th @ v))
            print(f"no curve: violating functional {list(map(float, theta))}")
            return 1
        curve = cone.construct_curve(body, p, v, t_start=args.t_start)
        if args.out:
            rows = []
            for t in curve.times:
                c_t = curve(t)
                err = float(np.linalg.norm((c_t - p) / t - v))
                rows.append((t, *map(float, c_t), err))
            coords = [f"c{i+1}" for i in range(body.dim)]
            _write_csv(Path(args.out), config, ["t", *coords, "quotient_error"], rows)
        max_err, rate = cone.verify_curve_derivative(curve, p, v, curve.times[2:14])
        print(f"curve nodes: {curve.times.size}; max quotient error {_fmt(max_err)}; fitted order {_fmt(rate)}")
    return 0 if verdict != cone.OUTSIDE else 1


if __name__ == "__main__":
    sys.exit(main())
