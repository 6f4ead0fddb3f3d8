"""Command-line front end.

Subcommands: sample, solve, estimate, exponent, bounds, scaling, fluct,
volume, rerun.  Every run writes ``manifest.json`` (full configuration,
seeds, version; no timestamps) into the output directory, and ``rerun
--manifest`` reproduces the run's outputs byte-for-byte.  Wall-clock notes
go to a sidecar ``run.log`` only.

Exit codes: 0 success / all checks passed, 1 assertion failure, 2 usage
error, 3 I/O error.  A flat ``key = value`` config file may supply any
long-option default; explicit flags override it.  CLPP_SEED provides the
default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .analytics import (conjectured_constant_holder, mc_volume, vol_entropy,
                        vol_holder, vol_nondir, EntropyRegion, HolderRegion,
                        NonDirRegion, nondir_length_budget)
from .constraints import Entropy, Holder, NonDirEntropy
from .experiments import (KsPlan, PolymerProblem, ReplicaPlan,
                          check_scaling_distribution, default_window,
                          estimate_constant, exponent_fit, fluctuation_study,
                          load_reference_cdf, reference_moments, regenerate,
                          to_json, verify_tail_bounds)
from .model import PointCloud, sample_heavy_tail_field, sample_poisson_strip, \
    sample_uniform_box, sample_uniform_disk
from .solvers import (AnnealConfig, HELDKARP_CAP, SizeCapError,
                      solve_entropy_anneal, solve_entropy_exact,
                      solve_holder_exact, solve_nondir_anneal,
                      solve_nondir_heldkarp)
from . import svg as svgmod


class CheckFailed(Exception):
    pass


DP_CAP_DEFAULT = 20000


def _default_seed():
    return int(os.environ.get("CLPP_SEED", "1"))


def read_config(path: str) -> dict:
    """Flat key = value file; '#' starts a comment."""
    out = {}
    for raw in open(path).read().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def write_config(cfg: dict) -> str:
    return "".join(f"{k} = {cfg[k]}\n" for k in sorted(cfg))


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _write(path: str, text: str):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as e:
        raise IOError(f"cannot write {path}: {e}") from e


def _log(outdir: str, message: str):
    with open(os.path.join(outdir, "run.log"), "a") as fh:
        fh.write(f"[{time.strftime('%Y-%m-%dT%H:%M:%S')}] {message}\n")


def _write_manifest(outdir, doc):
    _write(os.path.join(outdir, "manifest.json"),
           json.dumps(doc, sort_keys=True, indent=1) + "\n")


# ----------------------------------------------------------------------
# sampling

def _sample_from_args(args):
    seed = args.seed
    if args.model == "uniform":
        return sample_uniform_box(args.m, args.t, args.x, seed)
    if args.model == "poisson":
        window = args.window if args.window is not None \
            else default_window(args.t)
        return sample_poisson_strip(getattr(args, "lam"), args.t, window,
                                    seed)
    if args.model == "disk":
        return sample_uniform_disk(args.m, args.r, seed)
    if args.model == "heavytail":
        return sample_heavy_tail_field(args.alpha, args.R, args.wmin, seed)
    raise ValueError(f"unknown model {args.model!r}")


def cmd_sample(args):
    cloud = _sample_from_args(args)
    _write_bytes(args.out, cloud.to_bytes())
    if args.json_out:
        _write(args.json_out, cloud.to_json())
    pts = cloud.pts
    lo = pts.min(axis=0).tolist() if cloud.n else []
    hi = pts.max(axis=0).tolist() if cloud.n else []
    print(f"sampled {cloud.n} points ({cloud.kind}); bounds min={lo} "
          f"max={hi}; wrote {args.out}")
    return 0


def _write_bytes(path, data):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as e:
        raise IOError(f"cannot write {path}: {e}") from e


def _load_cloud(path) -> PointCloud:
    try:
        if path.endswith(".json"):
            return PointCloud.from_json(open(path).read())
        return PointCloud.from_bytes(open(path, "rb").read())
    except FileNotFoundError as e:
        raise IOError(str(e)) from e


# ----------------------------------------------------------------------
# solve

def cmd_solve(args):
    if args.cloud:
        cloud = _load_cloud(args.cloud)
    else:
        cloud = _sample_from_args(args)
    endpoint = args.t if args.point_to_point else None
    anneal = AnnealConfig(seed=args.seed, restarts=args.restarts)
    t0 = time.time()
    if args.constraint == "holder":
        sol = solve_holder_exact(cloud, args.gamma, args.A, endpoint)
    elif args.constraint == "entropy":
        budget = args.B * args.t if args.point_to_point else args.B
        if args.solver == "anneal":
            sol = solve_entropy_anneal(cloud, args.a, args.b, budget,
                                       endpoint, anneal)
        else:
            if cloud.n > args.dp_cap:
                print(f"refusing the exact entropy DP at m={cloud.n} > "
                      f"--dp-cap {args.dp_cap}; rerun with --solver anneal",
                      file=sys.stderr)
                return 2
            sol = solve_entropy_exact(cloud, args.a, args.b, budget, endpoint)
    elif args.constraint == "nondir":
        if args.solver == "anneal" or (args.solver == "auto"
                                       and cloud.n > HELDKARP_CAP):
            sol = solve_nondir_anneal(cloud, args.a, args.b, args.B, args.t,
                                      anneal)
        else:
            try:
                sol = solve_nondir_heldkarp(cloud, args.a, args.b, args.B,
                                            args.t)
            except SizeCapError as e:
                print(f"{e}; rerun with --solver anneal", file=sys.stderr)
                return 2
    else:
        raise ValueError(f"unknown constraint {args.constraint!r}")
    elapsed = time.time() - t0
    doc = {
        "cardinality": sol.cardinality,
        "achieved": sol.achieved,
        "method": sol.method,
        "lower_bound": sol.lower_bound,
        "chain": list(sol.chain.indices),
        "chain_points": sol.chain.coords().tolist(),
        "constraint": args.constraint,
        "version": __version__,
    }
    text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if args.out:
        _write(args.out, text)
        print(f"L = {sol.cardinality} ({sol.method}); wrote {args.out} "
              f"[{elapsed:.2f}s]")
    else:
        print(text, end="")
    if args.svg:
        pts = cloud.pts if cloud.kind != "weighted" else cloud.pts[:, 1:]
        origin = (0.0, 0.0)
        terminal = (args.t, 0.0) if args.point_to_point else None
        _write(args.svg, svgmod.path_plot(
            pts, sol.chain.indices, title=f"L={sol.cardinality}",
            origin=origin, terminal=terminal))
    return 0


# ----------------------------------------------------------------------
# experiment wrappers

def _spec_from_family(args):
    if args.family == "holder":
        return Holder(args.gamma, args.A)
    if args.family == "entropy":
        return Entropy(args.a, args.b, args.B)
    if args.family == "nondir":
        return NonDirEntropy(args.a, args.b, args.B, args.t)
    if args.family == "polymer":
        return PolymerProblem(args.a, args.b, args.beta)
    raise ValueError(f"unknown family {args.family!r}")


def cmd_estimate(args):
    outdir = _outdir(args)
    spec = _spec_from_family(args)
    window = args.window if args.window is not None \
        else default_window(args.t, args.window_scale)
    anneal = None
    if args.solver == "anneal":
        anneal = AnnealConfig(temp_levels=100, moves_per_temp=12000,
                              restarts=3)
    plan = ReplicaPlan(spec=spec, replicas=args.replicas, seed=args.seed,
                       t=args.t, lam=getattr(args, "lam"), window=window,
                       solver=args.solver, anneal=anneal, jobs=args.jobs)
    t0 = time.time()
    rep = estimate_constant(plan)
    _log(outdir, f"estimate done in {time.time()-t0:.1f}s")
    _write(os.path.join(outdir, "estimate.json"), to_json(rep))
    _write(os.path.join(outdir, "estimate.csv"), rep.to_csv())
    _write_manifest(outdir, rep.manifest)
    tag = " (lower bound, heuristic solver)" if rep.lower_bound else ""
    print(f"{rep.label} = {rep.estimate:.5f} +- {rep.stderr:.5f} over "
          f"{rep.replicas} replicas{tag}")
    if args.family == "holder":
        conj = conjectured_constant_holder(args.gamma)
        print(f"conjectured-curve value (conjecture=true): "
              f"{conj.value:.5f}; {conj.note}")
    return 0


def cmd_exponent(args):
    outdir = _outdir(args)
    spec = _spec_from_family(args)
    grid = [int(v) for v in args.m_grid.split(",")]
    t0 = time.time()
    rep = exponent_fit(spec, grid, args.replicas, args.seed, jobs=args.jobs)
    _log(outdir, f"exponent fit done in {time.time()-t0:.1f}s")
    _write(os.path.join(outdir, "exponent.json"), to_json(rep))
    _write(os.path.join(outdir, "exponent.csv"), rep.to_csv())
    _write_manifest(outdir, rep.manifest)
    print(f"slope = {rep.slope:.4f} +- {rep.slope_stderr:.4f} "
          f"(predicted {rep.predicted:.4f})")
    return 0


def cmd_bounds(args):
    outdir = _outdir(args)
    spec = _spec_from_family(args)
    t0 = time.time()
    rep = verify_tail_bounds(spec, args.m, args.t, args.x, args.replicas,
                             args.seed, jobs=args.jobs)
    _log(outdir, f"bounds check done in {time.time()-t0:.1f}s")
    _write(os.path.join(outdir, "bounds.json"), to_json(rep))
    _write(os.path.join(outdir, "bounds.csv"), rep.to_csv())
    _write_manifest(outdir, rep.manifest)
    bad = [k for k, pg, pl in zip(rep.ks, rep.pass_ge, rep.pass_le)
           if not (pg and pl)]
    if bad:
        print(f"FAIL: bound violations at k in {bad}", file=sys.stderr)
        raise CheckFailed("tail bounds violated")
    print(f"all {len(rep.ks)} per-k bound checks passed")
    return 0


def cmd_scaling(args):
    outdir = _outdir(args)
    params = json.loads(args.params)
    plan = KsPlan(kind=args.kind, params=params, samples=args.samples,
                  seed=args.seed, jobs=args.jobs)
    t0 = time.time()
    rep = check_scaling_distribution(plan)
    _log(outdir, f"scaling test done in {time.time()-t0:.1f}s")
    _write(os.path.join(outdir, "scaling.json"), to_json(rep))
    _write(os.path.join(outdir, "scaling.csv"), rep.to_csv())
    _write_manifest(outdir, rep.manifest)
    print(f"{rep.label}: D = {rep.statistic:.4f}, p = {rep.pvalue:.4f}")
    if not rep.passed:
        raise CheckFailed("scaling-law KS test failed (p <= 0.01)")
    return 0


def cmd_fluct(args):
    outdir = _outdir(args)
    t0 = time.time()
    rep = fluctuation_study(args.gamma, args.t, args.replicas, args.seed,
                            A=args.A, lam=getattr(args, "lam"),
                            window=args.window, table_path=args.table,
                            jobs=args.jobs)
    _log(outdir, f"fluctuation study done in {time.time()-t0:.1f}s")
    _write(os.path.join(outdir, "fluct.json"), to_json(rep))
    _write(os.path.join(outdir, "fluct.csv"), rep.to_csv())
    _write_manifest(outdir, rep.manifest)
    rx, rc = load_reference_cdf(args.table)
    pdf = np.gradient(rc, rx)
    ref_mean, _ = reference_moments(rx, rc)
    aligned = np.asarray(rep.standardized) + ref_mean
    _write(os.path.join(outdir, "fluct.svg"),
           svgmod.histogram(aligned, bins=40,
                            title=f"standardized, C={rep.c_hat:.3f} "
                                  f"c={rep.c_scale_hat:.3f}",
                            overlay=(rx, pdf)))
    mom = rep.moments
    print(f"C_hat = {rep.c_hat:.4f}, c_hat = {rep.c_scale_hat:.4f}, "
          f"skewness = {mom['skewness']:.3f}, "
          f"KS distance vs reference = {rep.ks_distance:.4f} (exploratory)")
    return 0


def cmd_volume(args):
    if args.family == "entropy":
        v = vol_entropy(args.k, args.t, args.B, args.a, args.b)
        region = EntropyRegion(args.k, args.t, args.B, args.a, args.b)
    elif args.family == "holder":
        v = vol_holder(args.k, args.t, args.A, args.gamma)
        region = HolderRegion(args.k, args.t, args.A, args.gamma)
    else:
        D = args.D if args.D is not None else \
            nondir_length_budget(args.B, args.t, args.b)
        v = vol_nondir(args.k, D, args.a, args.b)
        region = NonDirRegion(args.k, D, args.a, args.b)
    print(f"volume = {v!r}")
    if args.mc:
        est, se = mc_volume(region, args.mc, args.seed)
        print(f"hit-or-miss check: {est!r} +- {se!r} "
              f"(z = {(est - v) / se if se else 0.0:.2f})")
    return 0


def cmd_rerun(args):
    manifest = json.loads(open(args.manifest).read())
    rep = regenerate(manifest)
    outdir = _outdir(args)
    kind = manifest["kind"]
    if kind == "superadd":
        _write(os.path.join(outdir, f"{kind}.json"),
               json.dumps(rep, sort_keys=True, indent=1) + "\n")
    else:
        _write(os.path.join(outdir, f"{kind}.json"), to_json(rep))
        if hasattr(rep, "to_csv"):
            _write(os.path.join(outdir, f"{kind}.csv"), rep.to_csv())
    _write_manifest(outdir, manifest)
    print(f"regenerated {kind} report into {outdir}")
    return 0


# ----------------------------------------------------------------------
# parser

def _add_common(p):
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--config", default=None,
                   help="flat key = value file supplying option defaults")


def _add_sampling(p):
    p.add_argument("--model", choices=["uniform", "poisson", "disk",
                                       "heavytail"], default="poisson")
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--wmin", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=1.5)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="clpp",
        description="constrained last-passage percolation toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a point cloud to a file")
    _add_common(p)
    _add_sampling(p)
    p.add_argument("--out", required=True)
    p.add_argument("--json-out", default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("solve", help="solve one instance")
    _add_common(p)
    _add_sampling(p)
    p.add_argument("--cloud", default=None, help="cloud file (.clpp or .json)")
    p.add_argument("--constraint", choices=["holder", "entropy", "nondir"],
                   required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--point-to-point", action="store_true")
    p.add_argument("--solver", choices=["auto", "exact", "anneal"],
                   default="auto")
    p.add_argument("--dp-cap", type=int, default=DP_CAP_DEFAULT)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", default=None)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("estimate", help="estimate a limiting constant")
    _add_common(p)
    p.add_argument("--family", choices=["holder", "entropy", "polymer"],
                   required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--window-scale", type=float, default=1.0)
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--solver", choices=["exact", "anneal"], default="exact")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("exponent", help="fit the growth exponent")
    _add_common(p)
    p.add_argument("--family", choices=["holder", "entropy", "nondir"],
                   required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--m-grid", default="128,256,512,1024,2048,4096,8192")
    p.add_argument("--replicas", type=int, default=16)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_exponent)

    p = sub.add_parser("bounds", help="verify rigorous tail bounds")
    _add_common(p)
    p.add_argument("--family", choices=["holder", "entropy"], required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--m", type=int, default=200)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--replicas", type=int, default=10000)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("scaling", help="two-sample KS scaling-law test")
    _add_common(p)
    p.add_argument("--kind", choices=["holder-intensity", "polymer-beta",
                                      "heavy-beta"], required=True)
    p.add_argument("--params", required=True,
                   help="JSON object of the identity's parameters")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_scaling)

    p = sub.add_parser("fluct", help="fluctuation histogram study")
    _add_common(p)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--t", type=float, default=500.0)
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--table", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_fluct)

    p = sub.add_parser("volume", help="closed-form configuration volume")
    _add_common(p)
    p.add_argument("--family", choices=["entropy", "holder", "nondir"],
                   default="entropy")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--D", type=float, default=None)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--mc", type=int, default=0,
                   help="hit-or-miss cross-check with this many samples")
    p.set_defaults(fn=cmd_volume)

    p = sub.add_parser("rerun", help="regenerate a run from its manifest")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_rerun)

    return ap


def _apply_config(ap, argv):
    """Pre-scan for --config and inject file values as parser defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    cfg = read_config(path)
    sub = argv[0]
    for action in ap._subparsers._group_actions[0].choices[sub]._actions:
        for opt in action.option_strings:
            key = opt.lstrip("-")
            if key in cfg and opt not in argv:
                argv = argv + [opt, cfg[key]]
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    if argv and not argv[0].startswith("-"):
        try:
            argv = _apply_config(ap, argv)
        except FileNotFoundError as e:
            print(f"I/O error: {e}", file=sys.stderr)
            return 3
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except CheckFailed as e:
        print(f"check failed: {e}", file=sys.stderr)
        return 1
    except (IOError, OSError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
