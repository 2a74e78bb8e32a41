"""Command line interface: ``multiplexgm {match,generate,experiment,analyze}``.

Exit codes: 0 success, 1 internal error, 2 parse/validation failure,
3 dimension or channel-count mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as mxio
from ._parallel import resolve_threads, substream
from .errors import ShapeError, ValidationError
from .faq import SeedSpec, SolverConfig
from .generators import (
    CorrelatedErSpec,
    MeModelSpec,
    MsModelSpec,
    gen_correlated_er_pair,
    gen_me_instance,
    gen_ms_instance,
    plant_template,
    shuffle_background,
)
from .lab import conditions as cond
from .lab.experiments import (
    read_rows_csv,
    run_figure1_experiment,
    run_figure2_experiment,
    summarize,
    write_rows_csv,
    write_summary_csv,
)
from .lab.oracle import MAX_ENUM_ORDER, brute_force_global_min, injections
from .lab.xp import xp_statistic
from .matched_filter import MatchRanking, dedup_matchings, induced_match_quality, mgmmf
from .multiplex import CENTERED, NAIVE, PaddingScheme, Role, objective, pad

U64 = 2**64


def _u64(text):
    v = int(text)
    if not 0 <= v < U64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _threads(text):
    if text == "auto":
        return text
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("threads must be positive or 'auto'")
    return v


def _floats(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _common(p):
    p.add_argument("--seed", type=_u64, default=0, help="master RNG seed (u64)")
    p.add_argument("--threads", type=_threads, default=1, help="worker threads or 'auto'")
    p.add_argument("--config", help="key = value file supplying defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multiplexgm", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    _common(common)

    m = sub.add_parser("match", parents=[common], allow_abbrev=False, help="run the matched filter")
    m.add_argument("--template", required=True)
    m.add_argument("--background", required=True)
    m.add_argument("--padding", choices=["naive", "centered", "generalized"], default="centered")
    m.add_argument("--w", type=float, default=0.25, help="template non-edge weight for generalized padding")
    m.add_argument("--restarts", type=int, default=100)
    m.add_argument("--max-iters", type=int, default=30)
    m.add_argument("--epsilon", type=float, default=None)
    m.add_argument("--weights", type=_floats, default=None, help="channel weights")
    m.add_argument("--hard-seeds", help="file of 'template background' label pairs")
    m.add_argument("--soft-seeds", help="CSV of template,background,weight triples")
    m.add_argument("--jitter", type=float, default=0.1)
    m.add_argument("--truth", help="truth sidecar; adds accuracy to the summary")
    m.add_argument("--dedup", action="store_true", help="collapse repeated matchings")
    m.add_argument("--out", required=True, help="ranking JSON")
    m.add_argument("--log", help="per-restart CSV log (default: OUT with .csv suffix)")
    m.set_defaults(func=cmd_match)

    g = sub.add_parser("generate", parents=[common], allow_abbrev=False, help="generate instances")
    g.add_argument("model", choices=["ms", "me", "corr-er", "plant"])
    g.add_argument("--n", type=int, default=None, help="default 500 for plant, else 100")
    g.add_argument("--m", type=int, default=None, help="default 35 for plant, else n")
    g.add_argument("--c", type=int, default=None, help="default 3 for plant, else 1")
    g.add_argument("--p", type=_floats, default=[0.5])
    g.add_argument("--s", type=_floats, default=[0.0])
    g.add_argument("--q", type=_floats, default=[0.0])
    g.add_argument("--r", type=_floats, default=[0.0])
    g.add_argument("--t", type=_floats, default=[0.0])
    g.add_argument("--rho", type=_floats, default=[0.5])
    g.add_argument("--bg-density", type=_floats, default=[0.02])
    g.add_argument("--tpl-density", type=_floats, default=[0.15])
    g.add_argument("--noise", type=_floats, default=[0.05])
    g.add_argument("--drop-vertices", type=float, default=0.0)
    g.add_argument("--no-shuffle", action="store_true", help="keep the truth as the identity")
    g.add_argument("--out-prefix", required=True)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("experiment", parents=[common], allow_abbrev=False, help="Monte Carlo sweeps")
    e.add_argument("figure", choices=["figure1", "figure2"])
    e.add_argument("--c-values", type=_ints, default=list(range(1, 11)))
    e.add_argument("--rho-values", type=_floats, default=[0.1, 0.2, 0.3, 0.4, 0.5])
    e.add_argument("--r-values", type=_floats, default=[0.1, 0.2, 0.3, 0.4, 0.5])
    e.add_argument("--cb-values", type=_ints, default=list(range(0, 10)))
    e.add_argument("--c", type=int, default=10, help="channels for figure2")
    e.add_argument("--n", type=int, default=100)
    e.add_argument("--p", type=float, default=0.5)
    e.add_argument("--n-seeds", type=int, default=10)
    e.add_argument("--replicates", type=int, default=100)
    e.add_argument("--max-iters", type=int, default=30)
    e.add_argument("--epsilon", type=float, default=None)
    e.add_argument("--out", required=True, help="per-replicate CSV")
    e.add_argument("--summary", help="per-cell summary CSV (default: OUT with _summary suffix)")
    e.add_argument("--resume", action="store_true", help="skip replicates already in OUT")
    e.add_argument("--record-time", action="store_true",
                   help="fill wall_time_ms (makes output non-reproducible)")
    e.set_defaults(func=cmd_experiment)

    a = sub.add_parser("analyze", parents=[common], allow_abbrev=False, help="matchability analysis report")
    a.add_argument("--template", required=True)
    a.add_argument("--background", required=True)
    a.add_argument("--truth", help="truth sidecar (default: identity)")
    a.add_argument("--weights", type=_floats, default=None)
    a.add_argument("--alpha", type=float, default=None)
    a.add_argument("--beta", type=float, default=None)
    a.add_argument("--gamma", type=float, default=None)
    a.add_argument("--p", type=_floats, default=None)
    a.add_argument("--s", type=_floats, default=None)
    a.add_argument("--q", type=_floats, default=None)
    a.add_argument("--r", type=_floats, default=None)
    a.add_argument("--t", type=_floats, default=None)
    a.add_argument("--ranking", help="ranking JSON from 'match'; each entry is scored")
    a.add_argument("--xp-limit", type=int, default=50, help="X_P rows kept (smallest first)")
    a.add_argument("--out", required=True, help="report JSON")
    a.set_defaults(func=cmd_analyze)
    return parser


# --- config handling --------------------------------------------------------

def read_config(path) -> dict:
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        k, v = (x.strip() for x in line.split("=", 1))
        cfg[k.replace("-", "_")] = v
    return cfg


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    cmd = next((a for a in argv if a in parser._subparsers._group_actions[0].choices), None)
    if cmd is None:
        return
    sp = parser._subparsers._group_actions[0].choices[cmd]
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for k, v in cfg.items():
        if k not in actions or k in ("help", "config"):
            raise ValidationError(f"unknown config key {k!r} for '{cmd}'")
        act = actions[k]
        if act.const is not None and act.nargs == 0:
            defaults[k] = v.lower() in ("1", "true", "yes", "on")
        elif act.type is not None:
            defaults[k] = act.type(v)
        else:
            defaults[k] = v
        act.required = False
    sp.set_defaults(**defaults)


# --- subcommands ------------------------------------------------------------

def _scheme(args) -> PaddingScheme:
    if args.padding == "naive":
        return NAIVE
    if args.padding == "centered":
        return CENTERED
    return PaddingScheme.generalized(args.w)


def cmd_match(args) -> int:
    tpl = mxio.read_mx(args.template)
    bg = mxio.read_mx(args.background)
    hard = mxio.read_hard_seeds(args.hard_seeds) if args.hard_seeds else {}
    soft = mxio.read_soft_seeds(args.soft_seeds, tpl.n_total, bg.n_total) if args.soft_seeds else None
    seeds = SeedSpec(hard=hard, soft=soft)
    cfg = SolverConfig(epsilon=args.epsilon, max_iters=args.max_iters,
                       weights=tuple(args.weights) if args.weights else None)
    ranking, traces = mgmmf(tpl, bg, _scheme(args), cfg, args.restarts, seeds, args.seed,
                            threads=args.threads, jitter=args.jitter, return_traces=True)
    log_rows = []
    for e in sorted(ranking.entries, key=lambda e: e.restart_id):
        tr = traces[e.restart_id]
        log_rows.append([e.restart_id, repr(e.objective), tr.iterations_used, int(tr.converged),
                         *(repr(x) for x in e.recovery)])
    if args.dedup:
        ranking = dedup_matchings(ranking)
    Path(args.out).write_text(ranking.to_json() + "\n")
    log_path = args.log or str(Path(args.out).with_suffix(".csv"))
    with open(log_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["restart_id", "objective", "iterations", "converged",
                    *(f"recovery_ch{i + 1}" for i in range(tpl.c))])
        w.writerows(log_rows)
    best = ranking.best
    msg = (f"rank 1: restart {best.restart_id} objective {best.objective:g} "
           f"recovery {', '.join(f'{x:.4f}' for x in best.recovery)}")
    quality = induced_match_quality(tpl, bg, best.match)
    msg += f" induced agreement {np.mean(quality):.4f}"
    if args.truth:
        truth = mxio.read_truth(args.truth)
        msg += f" accuracy {np.mean(np.asarray(best.match) == truth):.4f}"
    print(msg)
    return 0


def cmd_generate(args) -> int:
    rng = substream(args.seed, 0)
    plant = args.model == "plant"
    n = args.n if args.n is not None else (500 if plant else 100)
    c = args.c if args.c is not None else (3 if plant else 1)
    m = args.m if args.m is not None else (35 if plant else n)
    if args.model == "ms":
        spec = MsModelSpec(n, m, c, args.p, args.s, args.q)
        tpl, bg, truth = gen_ms_instance(spec, rng)
    elif args.model == "me":
        spec = MeModelSpec(n, m, c, args.p[0], args.s, args.q, args.r, args.t)
        tpl, bg, truth = gen_me_instance(spec, rng)
    elif args.model == "corr-er":
        tpl, bg, truth = gen_correlated_er_pair(CorrelatedErSpec(n, args.p[0], args.rho, c), rng)
    else:
        tpl, bg, truth = plant_template(n, m, c, rng, bg_density=args.bg_density,
                                        tpl_density=args.tpl_density, noise=args.noise,
                                        drop_vertices=args.drop_vertices, shuffle=False)
    if not args.no_shuffle:
        bg, truth = shuffle_background(bg, truth, rng)
    prefix = args.out_prefix
    mxio.write_mx(tpl, f"{prefix}.template.mx")
    mxio.write_mx(bg, f"{prefix}.background.mx")
    mxio.write_truth(truth, f"{prefix}.truth")
    print(f"wrote {prefix}.template.mx ({tpl.n_total} labels, {tpl.c} channels), "
          f"{prefix}.background.mx ({bg.n_total} labels), {prefix}.truth")
    return 0


def cmd_experiment(args) -> int:
    done = read_rows_csv(args.out) if args.resume else None
    cfg = SolverConfig(epsilon=args.epsilon, max_iters=args.max_iters)
    kw = dict(replicates=args.replicates, seed=args.seed, n=args.n, p=args.p,
              n_seeds=args.n_seeds, threads=args.threads, cfg=cfg, done=done,
              record_time=args.record_time)
    if args.figure == "figure1":
        rows = run_figure1_experiment(args.c_values, args.rho_values, **kw)
    else:
        rows = run_figure2_experiment(args.r_values, args.cb_values, c=args.c, **kw)
    write_rows_csv(rows, args.out)
    summary = summarize(rows)
    out = Path(args.out)
    spath = args.summary or str(out.with_name(out.stem + "_summary" + out.suffix))
    write_summary_csv(summary, spath)
    print(f"{len(rows)} replicate rows in {args.out}; {len(summary)} cells in {spath}")
    return 0


def _full(match, n):
    match = np.asarray(match, dtype=int)
    return np.concatenate([match, np.setdiff1d(np.arange(n), match)])


def _align_to_identity(bg, truth):
    """Relabel the background so the truth becomes the identity."""
    rest = np.setdiff1d(np.arange(bg.n_total), truth)
    order = np.concatenate([truth, rest])
    inv = np.empty_like(order)
    inv[order] = np.arange(bg.n_total)
    return bg.relabel(inv), inv


def cmd_analyze(args) -> int:
    tpl = mxio.read_mx(args.template)
    bg = mxio.read_mx(args.background)
    if tpl.c != bg.c:
        raise ShapeError(f"template has {tpl.c} channels, background {bg.c}")
    if tpl.n_total > bg.n_total:
        raise ShapeError("template has more labels than the background")
    inv = np.arange(bg.n_total)
    if args.truth:
        bg, inv = _align_to_identity(bg, mxio.read_truth(args.truth))
    A = pad(tpl, tpl.n_total, CENTERED, Role.TEMPLATE)
    B = pad(bg, bg.n_total, CENTERED, Role.BACKGROUND)
    m, n = tpl.n_total, bg.n_total
    report = {"template_order": m, "background_order": n, "channels": tpl.c,
              "truth_objective_centered": objective(A, B, np.arange(n), args.weights)}
    if n <= MAX_ENUM_ORDER:
        bf = brute_force_global_min(A, B, args.weights)
        report["brute_force"] = {
            "min_objective": bf.min_objective,
            "minimizers": [[int(x) + 1 for x in mz] for mz in bf.minimizers_mod_equiv],
            "in_target_set": bf.in_target_set,
            "classes": bf.n_classes,
        }
        rows = []
        for inj in injections(n, m):
            k = int(np.sum(inj != np.arange(m)))
            if k == 0:
                continue
            rows.append({"match": [int(x) + 1 for x in inj], "k": k,
                         "xp": xp_statistic(A, B, inj)})
        rows.sort(key=lambda r: (r["xp"], r["match"]))
        report["xp_nonpositive"] = sum(1 for r in rows if r["xp"] <= 0)
        report["xp_table"] = rows[: args.xp_limit]
    else:
        report["brute_force"] = None
    if args.ranking:
        ranking = MatchRanking.from_json(Path(args.ranking).read_text())
        ident = np.arange(m)
        report["ranking"] = [
            {"rank": i + 1, "restart_id": e.restart_id,
             "objective_centered": objective(A, B, _full(e.match, n), args.weights),
             "xp": xp_statistic(A, B, e.match),
             "accuracy": float(np.mean(np.asarray(e.match) == ident))}
            for i, e in enumerate(ranking.entries)
            for e in [replace(e, match=tuple(int(x) for x in inv[list(e.match)]))]
        ]
    report["conditions"] = _conditions(args, m, tpl.c)
    Path(args.out).write_text(json.dumps(report, indent=1) + "\n")
    bf = report["brute_force"]
    print("brute force:", "skipped (order too large)" if bf is None else
          f"min {bf['min_objective']:g}, in target set: {bf['in_target_set']}")
    return 0


def _conditions(args, m, c) -> dict:
    out = {}
    if args.alpha is None or args.beta is None:
        return out
    params = cond.ConditionParams(args.alpha, args.beta, args.gamma)
    asdict = lambda r: {"satisfied": r.satisfied, "lhs": r.lhs, "rhs": r.rhs}  # noqa: E731
    if args.p and args.s and args.q:
        s = np.broadcast_to(args.s, c)
        q = np.broadcast_to(args.q, c)
        out["ms_er"] = asdict(cond.check_condition_ms(params, "er", m=m, c=c, p=args.p, s=s, q=q))
        if args.r and args.t:
            out["me_er"] = asdict(cond.check_condition_me(
                params, "er", m=m, c=c, p=args.p[0], s=s, q=q,
                r=np.broadcast_to(args.r, c), t=np.broadcast_to(args.t, c)))
        if args.gamma is not None and len(set(args.s)) == 1 and len(set(args.q)) == 1:
            out["ms_good_only"] = asdict(cond.check_condition_ms(
                params, "good_only", m=m, c=c, s=args.s[0], q=args.q[0]))
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        resolve_threads(args.threads)
        return args.func(args)
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    except (ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - last resort
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
