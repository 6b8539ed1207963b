"""Command-line interface: one verb per analysis or simulation capability."""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .channels import Distribution, product_labels
from .config import GAP_TOL
from .errors import AvcsteinError, PairValidationError
from .eta import eta_certified_from_gaps, eta_feasibility_check, pvt_lower_bound
from .exponents import (
    d_opt_det,
    d_opt_shared,
    d_pvt_block,
    d_pvt_iid,
    min_kl_over_hulls,
    strong_converse_curve,
)
from .report import analyze, builtin_example, dump_json, resolve_pair, save_pair
from .sim import (
    BlockPrivate,
    CodebookUniform,
    Deterministic,
    DetHullDivergence,
    DetLRT,
    DetTypesDetector,
    IIDPrivate,
    IIDState,
    MimicHull,
    SharedCodeword,
    estimate_exponent,
    exact_errors,
    monte_carlo,
    transsym_attack_pair,
)
from .types_tools import Codebook, generate_codebook, verify_codebook

# ---------------------------------------------------------------------------
# small parsers for strategy / distribution spec strings
# ---------------------------------------------------------------------------


def _parse_dist(spec, labels, what):
    """Parse "uniform" or "label=p,label=p,..." into a Distribution."""
    if spec == "uniform":
        return Distribution.uniform(labels)
    weights = dict.fromkeys(labels, 0.0)
    for part in spec.split(","):
        if "=" not in part:
            raise PairValidationError(
                f"{what}: expected label=prob entries or 'uniform', got {spec!r}"
            )
        label, _, val = part.partition("=")
        if label not in weights:
            raise PairValidationError(f"{what}: unknown label {label!r}")
        weights[label] = float(val)
    return Distribution(tuple(labels), np.array([weights[l] for l in labels]))


def _split_spec(spec):
    head, _, rest = spec.partition(":")
    return head, rest


def _parse_opts(rest):
    opts = {}
    if rest:
        for part in rest.split(","):
            key, _, val = part.partition("=")
            opts[key] = val
    return opts


def parse_tx(spec, pair):
    """Build a transmitter strategy from a CLI spec string."""
    kind, rest = _split_spec(spec)
    if kind == "det":
        if not rest:
            raise PairValidationError("det transmitter needs det:<word>")
        return Deterministic(rest)
    if kind == "iid":
        return IIDPrivate(_parse_dist(rest or "uniform", pair.input_labels, "tx iid"))
    if kind == "block":
        k_str, _, law = rest.partition(":")
        k = int(k_str)
        labels = product_labels(pair.input_labels, k)
        return BlockPrivate(k, _parse_dist(law or "uniform", labels, "tx block"))
    if kind == "shared":
        words_str, _, probs_str = rest.partition(":")
        words = tuple(w for w in words_str.split("|") if w)
        if not words:
            raise PairValidationError("shared transmitter needs shared:<w1|w2|...>")
        if probs_str:
            probs = tuple(float(v) for v in probs_str.split(","))
        else:
            probs = tuple(1.0 / len(words) for _ in words)
        return SharedCodeword(words, probs)
    if kind == "codebook":
        words = tuple(w for w in rest.split("|") if w)
        if not words:
            raise PairValidationError("codebook transmitter needs codebook:<w1|w2|...>")
        n = len(words[0])
        rate = np.log(len(words)) / n
        cb = Codebook(n, pair.input_labels, words, rate, 1e-9)
        return CodebookUniform(cb)
    raise PairValidationError(f"unknown transmitter kind {kind!r}")


def parse_adv(spec, pair, side, tx=None):
    """Build an adversary strategy (side is "h0" or "h1")."""
    fam = pair.h0 if side == "h0" else pair.h1
    kind, rest = _split_spec(spec)
    if kind == "iid":
        return IIDState(_parse_dist(rest or "uniform", fam.states, f"adv {side}"))
    if kind == "mimic":
        if side != "h1":
            raise PairValidationError("mimic adversary only applies under h1")
        if rest in ("", "auto"):
            _, _, mu = min_kl_over_hulls(
                pair, Distribution.uniform(pair.input_labels)
            )
            return MimicHull(Distribution(fam.states, mu))
        return MimicHull(_parse_dist(rest, fam.states, "adv mimic"))
    if kind == "transsym":
        if tx is None:
            raise PairValidationError("transsym adversary needs a word transmitter")
        att0, att1 = transsym_attack_pair(pair, tx)
        return att0 if side == "h0" else att1
    raise PairValidationError(f"unknown adversary kind {kind!r}")


def parse_det(spec, pair):
    """Build a detector from a CLI spec string."""
    kind, rest = _split_spec(spec)
    opts = _parse_opts(rest)
    unif = Distribution.uniform(pair.input_labels)
    if kind == "lrt":
        _, lam, mu = min_kl_over_hulls(pair, unif)
        return DetLRT(
            tuple(lam),
            tuple(mu),
            unif,
            slack=float(opts.get("slack", 0.02)),
        )
    if kind == "hull":
        gamma = float(opts["gamma"]) if "gamma" in opts else None
        c0 = float(opts.get("c0", 2.0))
        return DetHullDivergence(c0=c0, gamma=gamma, input_law=unif)
    if kind == "types":
        words_str = opts.get("words", "")
        words = tuple(w for w in words_str.split("|") if w)
        if not words:
            raise PairValidationError("types detector needs words=<w1|w2|...>")
        triple = tuple(
            float(opts.get(k, d))
            for k, d in (("e1", 0.1), ("e2", 0.1), ("e3", 0.1), ("d", 0.05))
        )
        n = len(words[0])
        rate = np.log(len(words)) / n
        cb = Codebook(n, pair.input_labels, words, rate, 1e-9)
        return DetTypesDetector(cb, triple)
    raise PairValidationError(f"unknown detector kind {kind!r}")


def _parse_grid(text):
    return tuple(float(v) for v in text.split(",") if v)


def _parse_int_grid(text):
    return tuple(int(v) for v in text.split(",") if v)


# ---------------------------------------------------------------------------
# verb implementations
# ---------------------------------------------------------------------------


def _emit(payload, out=None):
    text = dump_json(payload, out)
    if out is None:
        sys.stdout.write(text)
    return 0


def _cmd_analyze(args):
    report = analyze(
        args.pair,
        tol=args.tol,
        seed=args.seed,
        restarts=args.restarts,
        t_grid=_parse_grid(args.t_grid),
        block_k=_parse_int_grid(args.block_k) if args.block_k else (),
        out=args.out,
    )
    if args.out is None:
        sys.stdout.write(report.to_json())
    return 3 if report.errors else 0


def _cmd_exponent(args):
    pair = resolve_pair(args.pair)
    setting = args.setting
    if setting == "shared":
        sol = d_opt_shared(pair, seed=args.seed)
        extra = {"px_star": sol.px_star, "unbounded_suspect": sol.unbounded_suspect}
    elif setting == "det":
        sol = d_opt_det(pair)
        extra = {"x_star": sol.x_star}
    elif setting == "pvt-iid":
        sol = d_pvt_iid(pair, seed=args.seed)
        extra = {"px_star": sol.px_star}
    elif setting in ("pvt-block", "pvt-adaptive2"):
        k = args.k if setting == "pvt-block" else 2
        if k is None:
            raise PairValidationError("pvt-block needs --k")
        labels = product_labels(pair.input_labels, k)
        law = _parse_dist(args.block_input, labels, "--block-input")
        ext = "block" if setting == "pvt-block" else "adaptive2"
        sol = d_pvt_block(pair, law, k=k, extension=ext)
        extra = {"mu_star": sol.mu_star, "unbounded_suspect": sol.unbounded_suspect}
    else:
        raise PairValidationError(f"unknown setting {setting!r}")
    payload = {
        "pair": pair.name,
        "setting": setting,
        "value": sol.value,
        "units": "nats",
        "converged": sol.converged,
        "iterations": sol.iterations,
    }
    payload.update(extra)
    return _emit(payload, args.out)


def _cmd_strong_converse(args):
    pair = resolve_pair(args.pair)
    curve = strong_converse_curve(pair, args.r, _parse_grid(args.t_grid), seed=args.seed)
    payload = {
        "pair": pair.name,
        "r": args.r,
        "bound": curve.bound,
        "units": "nats",
        "points": [
            {"t": p.t, "phi_star": p.phi_star, "slope": p.slope, "bound": p.bound}
            for p in curve.points
        ],
    }
    return _emit(payload, args.out)


def _build_game(args, pair):
    tx = parse_tx(args.tx, pair)
    adv0 = parse_adv(args.adv_h0, pair, "h0", tx=tx)
    adv1 = parse_adv(args.adv_h1, pair, "h1", tx=tx)
    det = parse_det(args.det, pair)
    return tx, adv0, adv1, det


def _cmd_simulate(args):
    pair = resolve_pair(args.pair)
    tx, adv0, adv1, det = _build_game(args, pair)
    if args.exact:
        alpha, beta = exact_errors(
            pair, tx, adv0, adv1, det, args.n, budget=args.budget
        )
        payload = {
            "pair": pair.name,
            "mode": "exact",
            "n": args.n,
            "alpha": alpha,
            "beta": beta,
        }
        return _emit(payload, args.out)
    res = monte_carlo(
        pair, tx, adv0, adv1, det, args.n, args.trials, args.seed, jobs=args.jobs
    )
    payload = {
        "pair": pair.name,
        "mode": "monte_carlo",
        "n": res.n,
        "trials": res.trials,
        "seed": res.seed,
        "alpha_hat": res.alpha_hat,
        "alpha_ci": list(res.alpha_ci),
        "beta_hat": res.beta_hat,
        "beta_ci": list(res.beta_ci),
    }
    return _emit(payload, args.out)


CSV_COLUMNS = (
    "setting",
    "n",
    "trials",
    "alpha_hat",
    "alpha_lo",
    "alpha_hi",
    "beta_hat",
    "beta_lo",
    "beta_hi",
    "seed",
)


def _cmd_exponent_sweep(args):
    pair = resolve_pair(args.pair)
    tx, adv0, adv1, det = _build_game(args, pair)
    n_grid = _parse_int_grid(args.n_grid)
    rows = []
    for n in n_grid:
        res = monte_carlo(
            pair, tx, adv0, adv1, det, n, args.trials, args.seed, jobs=args.jobs
        )
        rows.append(
            {
                "setting": args.det,
                "n": n,
                "trials": res.trials,
                "alpha_hat": res.alpha_hat,
                "alpha_lo": res.alpha_ci[0],
                "alpha_hi": res.alpha_ci[1],
                "beta_hat": res.beta_hat,
                "beta_lo": res.beta_ci[0],
                "beta_hi": res.beta_ci[1],
                "seed": res.seed,
            }
        )
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow(
                    {
                        k: (f"{v:.12g}" if isinstance(v, float) else v)
                        for k, v in row.items()
                    }
                )
    fit = estimate_exponent(
        pair, tx, adv1, det, n_grid, args.trials, args.seed, jobs=args.jobs
    )
    payload = {
        "pair": pair.name,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "stderr": fit.stderr,
        "points": [list(p) for p in fit.points],
        "dropped": list(fit.dropped),
        "csv": args.out,
    }
    sys.stdout.write(dump_json(payload))
    return 0


def _cmd_eta(args):
    pair = resolve_pair(args.pair)
    payload = {"pair": pair.name, "units": "nats"}
    if args.P == "uniform":
        p_input = Distribution.uniform(pair.input_labels)
        triple = eta_certified_from_gaps(pair, p_input, tol=args.tol)
        payload["p_input"] = p_input
        payload["triple"] = triple
        if args.search:
            outcome = eta_feasibility_check(
                pair, p_input, triple, restarts=args.restarts, seed=args.seed
            )
            payload["feasibility"] = {
                "outcome": type(outcome).__name__,
                "detail": outcome,
            }
    else:
        value, provenance = pvt_lower_bound(
            pair, search=args.search, restarts=args.restarts, seed=args.seed
        )
        payload["lower_bound"] = {"value": value, "provenance": provenance}
    return _emit(payload, args.out)


def _cmd_codebook(args):
    pair = resolve_pair(args.pair)
    p = _parse_dist(args.type, pair.input_labels, "--type")
    cb = generate_codebook(
        pair,
        p,
        args.n,
        args.rate,
        args.epsilon,
        args.seed,
        max_attempts=args.max_attempts,
    )
    check = verify_codebook(pair, cb, mode=args.verify, seed=args.seed)
    payload = {
        "pair": pair.name,
        "n": cb.n,
        "rate": cb.rate,
        "epsilon": cb.epsilon,
        "attempts": cb.attempts,
        "codewords": ["".join(w) for w in cb.codewords],
        "verify_mode": args.verify,
        "passed": check.passed,
        "worst_ratio": check.worst_ratio,
        "checks": check.checks,
    }
    return _emit(payload, args.out)


def _cmd_example(args):
    params = {}
    if args.p is not None:
        params["p"] = args.p
    if args.r is not None:
        params["r"] = args.r
    if args.p0 is not None:
        params["p0"] = args.p0
    if args.p1 is not None:
        params["p1"] = args.p1
    if args.name == "random":
        params["seed"] = args.seed
        if args.sizes:
            nx, ny, ns0, ns1 = _parse_int_grid(args.sizes)
            params.update(nx=nx, ny=ny, ns0=ns0, ns1=ns1)
    pair = builtin_example(args.name, **params)
    if args.out:
        save_pair(pair, args.out)
        return 0
    sys.stdout.write(dump_json(pair.to_dict()))
    return 0


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="avcstein",
        description="Exponents, certificates, and simulations for adversarial "
        "binary hypothesis testing.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pair=True):
        if pair:
            p.add_argument("pair", help="pair file path or builtin spec like bec:0.5,0.25")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--tol", type=float, default=GAP_TOL)
        p.add_argument("--out", default=None)
        p.add_argument("--budget", type=int, default=None)

    p = sub.add_parser("analyze", help="full geometry/exponent/certificate report")
    common(p)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--t-grid", default="-0.1")
    p.add_argument("--block-k", default="")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("exponent", help="one exponent in one randomness setting")
    common(p)
    p.add_argument(
        "--setting",
        required=True,
        choices=["shared", "det", "pvt-iid", "pvt-block", "pvt-adaptive2"],
    )
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--block-input", default="uniform")
    p.set_defaults(fn=_cmd_exponent)

    p = sub.add_parser("strong-converse", help="certified decay curve at a rate")
    common(p)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--t-grid", required=True)
    p.set_defaults(fn=_cmd_strong_converse)

    p = sub.add_parser("simulate", help="one game configuration, sampled or exact")
    common(p)
    p.add_argument("--tx", required=True)
    p.add_argument("--adv-h0", required=True)
    p.add_argument("--adv-h1", required=True)
    p.add_argument("--det", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("exponent-sweep", help="error rates across a blocklength grid")
    common(p)
    p.add_argument("--tx", required=True)
    p.add_argument("--adv-h0", required=True)
    p.add_argument("--adv-h1", required=True)
    p.add_argument("--det", required=True)
    p.add_argument("--n-grid", required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(fn=_cmd_exponent_sweep)

    p = sub.add_parser("eta", help="certified slack triples and lower bounds")
    common(p)
    p.add_argument("--P", default="uniform", choices=["uniform", "grid"])
    p.add_argument("--search", action="store_true")
    p.add_argument("--restarts", type=int, default=50)
    p.set_defaults(fn=_cmd_eta)

    p = sub.add_parser("codebook", help="generate and verify a codebook")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--type", default="uniform", help="input composition law")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--max-attempts", type=int, default=50)
    p.add_argument("--verify", default="exhaustive", choices=["exhaustive", "spot"])
    p.set_defaults(fn=_cmd_codebook)

    p = sub.add_parser("example", help="emit a builtin example pair as JSON")
    common(p, pair=False)
    p.add_argument("name")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--p0", type=float, default=None)
    p.add_argument("--p1", type=float, default=None)
    p.add_argument("--sizes", default="")
    p.set_defaults(fn=_cmd_example)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "budget", None):
        os.environ["AVCSTEIN_BUDGET"] = str(args.budget)
    try:
        return args.fn(args)
    except AvcsteinError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
