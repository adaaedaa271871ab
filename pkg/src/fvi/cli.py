"""Command-line entry point ``fvi``.

Every command prints a one-line summary. Commands that produce a run report
write it as canonical JSON to ``--out``; ``gen-sysadmin`` writes the model
document there instead. Exit codes: 0 ok/converged, 2 diverged, 1 error.
"""
import argparse
import dataclasses
import json
import sys
import time

import numpy as np

from fvi import __version__
from fvi.errors import InvalidInputError
from fvi.factored.aux import aux_projector, build_aux_mdp, check_uc
from fvi.factored.model import FLATTEN_CAP, VarSpace, flatten, flatten_basis
from fvi.factored.sysadmin import TOPOLOGIES, gen_sysadmin
from fvi.modelfile import load_model, parse_model
from fvi.projection import KINDS, check_nonexpansion, make_projector
from fvi.report import dumps, emit_report
from fvi.sketch import dense_generator, scoped_generator, verify_bound
from fvi.solver import DISTINCT, IID, FviConfig, fvi_solve, plan_sample_size
from fvi.tabular import (DIVERGED, apriori_error_bound,
                         avi_iterate, exact_vi, greedy_policy)

EXIT_OK, EXIT_ERROR, EXIT_DIVERGED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _samples(text):
    if text == "all":
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'all', got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("sample count must be at least 1")
    return n


def _json_array(text):
    try:
        return np.asarray(json.loads(text), dtype=float)
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"expected a JSON numeric array, got {text!r}") from None


def build_parser():
    parser = _Parser(prog="fvi", description="Factored value iteration toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, model=True, basis_needed=False):
        if model:
            p.add_argument("--model", required=basis_needed, help="model JSON file")
            p.add_argument("--gamma", type=float, help="override the model discount factor")
            p.add_argument("--flatten-cap", type=int, default=FLATTEN_CAP,
                           help="largest state count the flat oracle may enumerate")
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--timing", action="store_true", help="include wall time in the report")

    def iteration(p, eps=1e-8, iters=100_000):
        p.add_argument("--epsilon", type=float, default=eps)
        p.add_argument("--max-iters", type=int, default=iters)

    def projection(p):
        p.add_argument("--projection", choices=KINDS, default="npinv")

    p = sub.add_parser("solve-exact", help="exact value iteration on the flattened model")
    common(p, basis_needed=True)
    iteration(p)

    p = sub.add_parser("solve-avi", help="approximate value iteration on the flattened model")
    common(p, basis_needed=True)
    iteration(p)
    projection(p)

    p = sub.add_parser("solve-fvi", help="factored value iteration on sampled states")
    common(p, basis_needed=True)
    iteration(p, 1e-6, 10_000)
    projection(p)
    p.add_argument("--samples", type=_samples, default=None, help="integer or 'all' (default)")
    p.add_argument("--sampling", choices=(IID, DISTINCT), default=IID)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle", action="store_true",
                   help="also compute the a-priori bound and true error on the flat model")

    for name, text in (("project", "project one vector onto the basis"),
                       ("check-projector", "test a projection for max-norm non-expansion")):
        p = sub.add_parser(name, help=text)
        common(p)
        projection(p)
        p.add_argument("--matrix", type=_json_array, help="basis matrix H as JSON, e.g. '[[1],[2]]'")
        if name == "project":
            p.add_argument("--vector", type=_json_array, required=True, help="vector v as JSON")
        else:
            p.add_argument("--trials", type=int, default=100)
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen-sysadmin", help="write a SysAdmin model file")
    p.add_argument("--m", type=int, required=True, help="number of machines")
    p.add_argument("--topology", choices=TOPOLOGIES, default="ring")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter", type=float, default=0.0, help="seeded relative noise on probabilities")
    p.add_argument("--gamma", type=float, default=0.95)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sketch-verify", help="Monte-Carlo check of the sampled-product bound")
    p.add_argument("--mode", choices=("dense", "scoped"), default="dense")
    p.add_argument("--rows", type=int, default=4)
    p.add_argument("--inner", type=int, default=200, help="inner dimension (dense mode)")
    p.add_argument("--cols", type=int, default=3)
    p.add_argument("--m", type=int, default=6, help="binary variables (scoped mode)")
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--samples", default="plan", help="integer or 'plan' for the planned size")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("aux-mdp-check", help="compare AVI against exact VI on the auxiliary MDP")
    common(p, basis_needed=True)
    iteration(p)
    return parser


def _load(args, need_basis=True):
    fmdp, basis = load_model(args.model)
    if getattr(args, "gamma", None) is not None:
        fmdp = dataclasses.replace(fmdp, gamma=args.gamma)
    if need_basis and basis is None:
        raise InvalidInputError(f"model {args.model} has no basis functions")
    return fmdp, basis


def _options(args):
    return {k: (v.tolist() if isinstance(v, np.ndarray) else v)
            for k, v in sorted(vars(args).items()) if k not in ("command", "out", "timing")}


def _trace(trace):
    return {"status": trace.status, "iterations": trace.iterations, "deltas": trace.deltas,
            "value_deltas": trace.value_deltas}


def _status_code(status):
    return EXIT_DIVERGED if status == DIVERGED else EXIT_OK


def cmd_solve_exact(args):
    fmdp, _ = _load(args, need_basis=False)
    flat = flatten(fmdp, args.flatten_cap)
    v, trace = exact_vi(flat, args.epsilon, args.max_iters)
    report = {"status": trace.status, "values": v, "trace": _trace(trace),
              "policy": greedy_policy(flat, v).tolist(), "n_states": flat.n_states}
    return report, f"solve-exact: {trace.status} after {trace.iterations} iterations, " \
                   f"max value {float(v.max()):.6g}"


def cmd_solve_avi(args):
    fmdp, basis = _load(args)
    flat = flatten(fmdp, args.flatten_cap)
    H = flatten_basis(basis, fmdp.space, cap=args.flatten_cap)
    proj = make_projector(args.projection, H)
    w, trace = avi_iterate(flat, H, proj, args.epsilon, args.max_iters)
    v_star, _ = exact_vi(flat, 1e-10)
    finite = bool(np.all(np.isfinite(w)))
    report = {"status": trace.status, "weights": w, "trace": _trace(trace),
              "apriori_bound": apriori_error_bound(flat, H, proj, v_star),
              "error_to_optimal": float(np.max(np.abs(H @ w - v_star))) if finite else float("nan")}
    return report, f"solve-avi[{args.projection}]: {trace.status} after {trace.iterations} iterations, " \
                   f"|w| = {float(np.max(np.abs(w))):.6g}"


def cmd_solve_fvi(args):
    fmdp, basis = _load(args)
    cfg = FviConfig(samples=args.samples, epsilon=args.epsilon, max_iters=args.max_iters,
                    seed=args.seed, projection=args.projection, sampling=args.sampling,
                    oracle=args.oracle, flatten_cap=args.flatten_cap)
    res = fvi_solve(fmdp, basis, cfg)
    report = {"status": res.status, "weights": res.weights, "trace": _trace(res.trace),
              "sampled_residual": res.residual, "n_samples": res.n_samples, "rank": res.rank,
              "rank_deficient": res.rank_deficient, "warnings": res.warnings,
              "apriori_bound": res.apriori_bound, "oracle_error": res.oracle_error,
              "seeds": {"sampling": args.seed}}
    report["_wall_time"] = res.wall_time
    return report, f"solve-fvi[{args.projection}]: {res.status} after {res.trace.iterations} iterations " \
                   f"on {res.n_samples} states, residual {res.residual:.6g}"


def _basis_matrix(args):
    if args.matrix is not None:
        H = args.matrix
        return H.reshape(-1, 1) if H.ndim == 1 else H
    if args.model is None:
        raise InvalidInputError("give either --matrix or --model")
    fmdp, basis = _load(args)
    return flatten_basis(basis, fmdp.space, cap=args.flatten_cap)


def cmd_project(args):
    H = _basis_matrix(args)
    v = args.vector.reshape(-1)
    w = np.asarray(make_projector(args.projection, H)(v), dtype=float)
    Hw = H @ w
    report = {"status": "ok", "weights": w, "projected": Hw,
              "projected_norm": float(np.max(np.abs(Hw))),
              "error_inf": float(np.max(np.abs(Hw - v))), "error_l1": float(np.sum(np.abs(Hw - v))),
              "error_l2": float(np.linalg.norm(Hw - v))}
    return report, f"project[{args.projection}]: |Hw| = {report['projected_norm']:.6g}, " \
                   f"|Hw - v| = {report['error_inf']:.6g}"


def cmd_check_projector(args):
    H = _basis_matrix(args)
    rep = check_nonexpansion(H, make_projector(args.projection, H), args.trials, args.seed)
    verdict = "nonexpansive" if rep.nonexpansive else "violations-found"
    report = {"status": "ok", "verdict": verdict, **dataclasses.asdict(rep)}
    return report, f"check-projector[{args.projection}]: {verdict} " \
                   f"({rep.violations}/{rep.trials} pair violations, max ratio {rep.max_ratio:.6g})"


def cmd_gen_sysadmin(args):
    doc = gen_sysadmin(args.m, args.topology, args.seed, jitter=args.jitter, gamma=args.gamma)
    parse_model(doc)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))
    return None, f"gen-sysadmin: wrote {args.m}-machine {args.topology} model to {args.out}"


def cmd_sketch_verify(args):
    if args.mode == "dense":
        gen = dense_generator(args.rows, args.inner, args.cols)
    else:
        gen = scoped_generator(VarSpace((2,) * args.m), args.rows, args.cols)
    if args.samples == "plan":
        n = plan_sample_size(args.rows, args.cols, args.epsilon, args.delta)
    else:
        try:
            n = int(args.samples)
        except ValueError:
            raise InvalidInputError(f"--samples must be an integer or 'plan', got {args.samples!r}") from None
    rep = verify_bound(gen, n, args.epsilon, args.delta, args.trials, args.seed)
    report = {"status": "ok", **rep.as_dict()}
    return report, f"sketch-verify[{args.mode}]: {rep.violations}/{rep.trials} exceedances " \
                   f"(rate {rep.violation_rate:.4g}, target {args.delta:g}) with {n} samples"


def cmd_aux_mdp_check(args):
    fmdp, basis = _load(args)
    flat = flatten(fmdp, args.flatten_cap)
    H = flatten_basis(basis, fmdp.space, cap=args.flatten_cap)
    uc = check_uc(H)
    if not uc.is_uc:
        raise InvalidInputError("basis matrix does not have the uniform-covering property")
    H1 = H / uc.row_sum
    aux = build_aux_mdp(flat, H1)
    _, t_aux = exact_vi(aux, args.epsilon, args.max_iters, record=True)
    _, t_avi = avi_iterate(flat, H1, aux_projector(H1), args.epsilon, args.max_iters, record=True)
    n = min(len(t_aux.history), len(t_avi.history))
    gap = max((float(np.max(np.abs(a - b))) for a, b in zip(t_aux.history[:n], t_avi.history[:n])),
              default=0.0)
    report = {"status": "ok", "row_sum": uc.row_sum, "compared_iterations": n,
              "max_iterate_gap": gap, "aux_trace": _trace(t_aux), "avi_trace": _trace(t_avi)}
    return report, f"aux-mdp-check: max per-iteration gap {gap:.3g} over {n} iterations"


COMMANDS = {
    "solve-exact": cmd_solve_exact,
    "solve-avi": cmd_solve_avi,
    "solve-fvi": cmd_solve_fvi,
    "project": cmd_project,
    "check-projector": cmd_check_projector,
    "gen-sysadmin": cmd_gen_sysadmin,
    "sketch-verify": cmd_sketch_verify,
    "aux-mdp-check": cmd_aux_mdp_check,
}


def run(argv=None):
    """Parse ``argv``, run the command and return ``(exit_code, report or None)``."""
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        report, summary = COMMANDS[args.command](args)
    except (InvalidInputError, OSError) as exc:
        print(f"fvi {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR, None
    elapsed = report.pop("_wall_time", None) if report else None
    if report is None:
        print(summary)
        return EXIT_OK, None
    report.update(command=args.command, options=_options(args), version=__version__)
    if args.timing:
        report["wall_time"] = time.perf_counter() - t0 if elapsed is None else elapsed
    if args.out:
        emit_report(report, args.out)
    print(summary)
    return _status_code(report["status"]), report


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
