"""Command line experiment runner.

One process, one seeded generator per command, deterministic outputs: CSV
and JSON files are byte-identical for a fixed (config, seed) whatever the
worker-pool size. SVG files are presentation-only and excluded from that
contract. Validation problems exit 1, numerical non-convergence exits 2,
both with an error JSON on stderr.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import backend
from .body import body_from_spec
from .errors import ConvergenceError
from .measure import folner_ratio, growth_curve
from .metric import (BallSpec, HoroballSpec, ball_boundary_polyline, distance,
                     horosphere_polyline)
from .nets import (build_graph, build_net, certify_net, export_graph_adjacency,
                   export_graph_dot, export_net_csv, quasi_isometry_report)
from .spectral import (amenability_verdict, dirichlet_by_radius,
                       lambda1_upper_estimate, markov_system, spectral_radius)


def _point(s):
    return np.array([float(c) for c in s.split(",")], float)


def _floats(s):
    return tuple(float(c) for c in s.split(","))


def _csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else repr(float(c))
                              for c in row))
    return "\n".join(lines) + "\n"


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _emit(obj):
    print(json.dumps(obj, sort_keys=True, indent=2, default=_jsonable))


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x)}")


def _body_boundary(body, m=360):
    """Closed polyline tracing the body boundary, for SVG context."""
    c = np.zeros(2)
    if not body.contains(c):
        lo, hi = body.bounding_box()
        c = 0.5 * (np.asarray(lo) + np.asarray(hi))
    th = 2 * np.pi * np.arange(m) / m
    U = np.stack([np.cos(th), np.sin(th)], 1)
    _, tp = body.ops().profile_tvals(c, U)
    return c[None, :] + tp[:, None] * U


def _svg(path, body, curves):
    """Body outline plus curves, fitted into a 640px viewport."""
    outline = _body_boundary(body)
    allpts = np.concatenate([outline] + [np.asarray(c) for c in curves])
    lo, hi = allpts.min(0), allpts.max(0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.05 * span
    lo, span = lo - pad, span + 2 * pad

    def pts(P):
        Q = (P - lo) / span * 600.0 + 20.0
        Q[:, 1] = 640.0 - Q[:, 1]
        return " ".join(f"{x:.2f},{y:.2f}" for x, y in Q)

    parts = ['<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 640 640">',
             f'<polygon points="{pts(outline)}" fill="none" '
             'stroke="#888" stroke-width="1.5"/>']
    for c in curves:
        parts.append(f'<polygon points="{pts(np.asarray(c))}" fill="none" '
                     'stroke="#c33" stroke-width="1.5"/>')
    parts.append("</svg>")
    _write(path, "\n".join(parts) + "\n")


def _common(sub, body_required=True):
    sub.add_argument("--body", required=body_required,
                     help="named body (triangle, hexagon, disk, superellipse, "
                          "simplex3), inline JSON, or a JSON spec file")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=".", help="output directory for files")
    sub.add_argument("--tol", type=float, default=None)
    sub.add_argument("--workers", type=int, default=None)


def _resolve_body(args):
    spec = args.body
    if isinstance(spec, str) and spec.lstrip().startswith("{"):
        spec = json.loads(spec)
    return body_from_spec(spec)


def _cmd_distance(args):
    body = _resolve_body(args)
    print(repr(distance(body, _point(args.p), _point(args.q))))
    return 0


def _cmd_ball(args):
    body = _resolve_body(args)
    poly = ball_boundary_polyline(body, BallSpec(_point(args.center), args.radius),
                                  m=args.m)
    out = Path(args.out)
    _write(out / "ball.csv", _csv_text(("x0", "x1"), poly))
    _svg(out / "ball.svg", body, [poly])
    _emit({"command": "ball", "seed": args.seed, "n_vertices": len(poly),
           "files": ["ball.csv", "ball.svg"]})
    return 0


def _cmd_horosphere(args):
    body = _resolve_body(args)
    spec = HoroballSpec(base=_point(args.base), anchor=_point(args.anchor))
    poly = horosphere_polyline(body, spec, m=args.m)
    out = Path(args.out)
    _write(out / "horosphere.csv", _csv_text(("x0", "x1"), poly))
    _svg(out / "horosphere.svg", body, [poly])
    _emit({"command": "horosphere", "seed": args.seed, "n_vertices": len(poly),
           "files": ["horosphere.csv", "horosphere.svg"]})
    return 0


def _cmd_net(args):
    body = _resolve_body(args)
    net = build_net(body, _point(args.center), args.radius, args.epsilon,
                    seed=args.seed, oversample=args.oversample)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    export_net_csv(net, out / "net.csv")
    checks = certify_net(net)
    _emit({"command": "net", "seed": args.seed, "n_points": len(net),
           "covering_radius_est": net.covering_radius_est,
           "build_certificate": net.certificate, "checks": checks,
           "files": ["net.csv"]})
    return 0


def _cmd_graph(args):
    body = _resolve_body(args)
    net = build_net(body, _point(args.center), args.radius, args.epsilon,
                    seed=args.seed, oversample=args.oversample)
    graph = build_graph(net, rho=args.rho)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    export_net_csv(net, out / "net.csv")
    export_graph_adjacency(graph, out / "graph_adjacency.txt")
    export_graph_dot(graph, out / "graph.dot")
    qi = quasi_isometry_report(graph, n_pairs=args.qi_pairs, seed=args.seed)
    _emit({"command": "graph", "seed": args.seed, "n_vertices": graph.n_vertices,
           "n_edges": int(len(graph.indices) // 2), "rho": graph.rho,
           "quasi_isometry": qi,
           "files": ["net.csv", "graph_adjacency.txt", "graph.dot"]})
    return 0


def _cmd_growth(args):
    body = _resolve_body(args)
    radii = np.array(_floats(args.radii)) if args.radii else \
        np.linspace(args.rmax / args.n_radii, args.rmax, args.n_radii)
    gc = growth_curve(body, _point(args.center), radii)
    _write(Path(args.out) / "growth.csv",
           _csv_text(("R", "volume", "std_error"),
                     [(r, v.value, v.std_error) for r, v in zip(gc.radii, gc.volumes)]))
    _emit({"command": "growth", "seed": args.seed,
           "classification": gc.classification,
           "poly_exponent": gc.fit_poly_exponent, "exp_rate": gc.fit_exp_rate,
           "residuals": gc.fit_residuals, "files": ["growth.csv"]})
    return 0


def _cmd_folner(args):
    body = _resolve_body(args)
    x0 = _point(args.center)
    rows = [(r, folner_ratio(body, x0, r)) for r in _floats(args.radii)]
    _write(Path(args.out) / "folner.csv", _csv_text(("R", "ratio"), rows))
    _emit({"command": "folner", "seed": args.seed,
           "ratios": {repr(r): v for r, v in rows}, "files": ["folner.csv"]})
    return 0


def _cmd_spectrum(args):
    body = _resolve_body(args)
    net = build_net(body, _point(args.center), args.domain_radius, args.epsilon,
                    seed=args.seed, oversample=args.oversample)
    graph = build_graph(net)
    system = markov_system(graph, dirichlet_by_radius(net, args.interior_radius))
    rep = spectral_radius(system, tol=args.tol or 1e-10)
    if not rep.converged:
        raise ConvergenceError("power iteration did not converge", rep.rho)
    _emit({"rho": rep.rho, "residual": rep.residual,
           "iterations": rep.iterations, "R": args.interior_radius})
    return 0


def _cmd_rayleigh(args):
    body = _resolve_body(args)
    rep = lambda1_upper_estimate(
        body, _point(args.center),
        _floats(args.eps_grid) if args.eps_grid else None,
        _floats(args.r_grid) if args.r_grid else None)
    _write(Path(args.out) / "rayleigh.csv",
           _csv_text(("eps", "R", "estimate"), rep.table))
    _emit({"command": "rayleigh", "seed": args.seed,
           "lambda_estimate": rep.lambda_estimate,
           "parameters": {"eps": rep.parameters[0], "R": rep.parameters[1]},
           "quadrature_error": rep.quadrature_error, "files": ["rayleigh.csv"]})
    return 0


def _cmd_verdict(args):
    body = _resolve_body(args)
    cfg = {"seed": args.seed}
    if args.center:
        cfg["x0"] = _point(args.center)
    if args.radii:
        cfg["radii"] = _floats(args.radii)
    if args.epsilon is not None:
        cfg["epsilon"] = args.epsilon
    report = amenability_verdict(body, cfg)
    ind = report["indicators"]
    rows = [("growth", r, 0.0, v)
            for r, v in zip(ind["growth_radii"], ind["growth_volumes"])]
    rows += [("folner", r, 0.0, v) for r, v in sorted(ind["folner"].items())]
    rows += [("rho", r, 0.0, v) for r, v in sorted(ind["rho"].items())]
    rows += [("lambda1", e, r, v) for e, r, v in ind["lambda1_table"]]
    out = Path(args.out)
    _write(out / "verdict_trends.csv", _csv_text(("kind", "a", "b", "value"), rows))
    _write(out / "verdict.json",
           json.dumps(report, sort_keys=True, indent=2, default=_jsonable) + "\n")
    _emit(report)
    return 0


def _cmd_selftest(args):
    from .acceptance import run_acceptance

    results = run_acceptance(args.criteria and [int(c) for c in args.criteria.split(",")])
    ok = all(r["passed"] for r in results)
    for r in results:
        print(f"[{'PASS' if r['passed'] else 'FAIL'}] criterion {r['index']:2d} "
              f"{r['name']}: {r['detail']} ({r['elapsed']:.1f}s)")
    print("acceptance: " + ("all criteria passed" if ok else "FAILURES present"))
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="hilbertlab",
                                description="Hilbert geometry experiments")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("distance", help="Hilbert distance between two points")
    _common(s)
    s.add_argument("p", help="first point, e.g. 0,0")
    s.add_argument("q", help="second point, e.g. 0.5,0")
    s.set_defaults(fn=_cmd_distance)

    s = sub.add_parser("ball", help="metric sphere polyline -> CSV + SVG")
    _common(s)
    s.add_argument("--center", default="0,0")
    s.add_argument("--radius", type=float, required=True)
    s.add_argument("--m", type=int, default=512)
    s.set_defaults(fn=_cmd_ball)

    s = sub.add_parser("horosphere", help="horosphere polyline -> CSV + SVG")
    _common(s)
    s.add_argument("--base", required=True, help="boundary point, e.g. 1,0")
    s.add_argument("--anchor", default="0,0", help="interior point on the curve")
    s.add_argument("--m", type=int, default=256)
    s.set_defaults(fn=_cmd_horosphere)

    s = sub.add_parser("net", help="separated net -> CSV + certificate")
    _common(s)
    s.add_argument("--center", default="0,0")
    s.add_argument("--radius", type=float, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--oversample", type=float, default=12.0)
    s.set_defaults(fn=_cmd_net)

    s = sub.add_parser("graph", help="net proximity graph -> files + QI report")
    _common(s)
    s.add_argument("--center", default="0,0")
    s.add_argument("--radius", type=float, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--oversample", type=float, default=12.0)
    s.add_argument("--rho", type=float, default=None)
    s.add_argument("--qi-pairs", type=int, default=100)
    s.set_defaults(fn=_cmd_graph)

    s = sub.add_parser("growth", help="ball volume growth curve")
    _common(s)
    s.add_argument("--center", default="0,0")
    s.add_argument("--radii", default=None, help="explicit comma list")
    s.add_argument("--rmax", type=float, default=10.0)
    s.add_argument("--n-radii", type=int, default=20)
    s.set_defaults(fn=_cmd_growth)

    s = sub.add_parser("folner", help="boundary/volume ratios over radii")
    _common(s)
    s.add_argument("--center", default="0,0")
    s.add_argument("--radii", default="2,4,6,8,10")
    s.set_defaults(fn=_cmd_folner)

    s = sub.add_parser("spectrum", help="Dirichlet walk spectral radius")
    _common(s)
    s.add_argument("--center", default="0,0")
    s.add_argument("--domain-radius", type=float, required=True)
    s.add_argument("--interior-radius", type=float, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--oversample", type=float, default=12.0)
    s.set_defaults(fn=_cmd_spectrum)

    s = sub.add_parser("rayleigh", help="variational upper bound grid")
    _common(s)
    s.add_argument("--center", default="0,0")
    s.add_argument("--eps-grid", default=None)
    s.add_argument("--r-grid", default=None)
    s.set_defaults(fn=_cmd_rayleigh)

    s = sub.add_parser("verdict", help="amenability indicator pipeline")
    _common(s)
    s.add_argument("--center", default=None)
    s.add_argument("--radii", default=None)
    s.add_argument("--epsilon", type=float, default=None)
    s.set_defaults(fn=_cmd_verdict)

    s = sub.add_parser("selftest", help="run the acceptance suite")
    _common(s, body_required=False)
    s.add_argument("--criteria", default=None, help="comma list of indices")
    s.set_defaults(fn=_cmd_selftest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.workers is not None:
        backend.set_workers(args.workers)
    try:
        return args.fn(args)
    except ConvergenceError as exc:
        json.dump({"error": "non-convergence", "message": str(exc)},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 2
    except (ValueError, FileNotFoundError, KeyError) as exc:
        json.dump({"error": "validation", "message": str(exc)},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
