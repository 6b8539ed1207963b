"""Report assembly, pair files, and built-in example pairs."""

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channels import Distribution, HypothesisPair, StateChannelFamily, product_labels
from .config import ALPHABET_BUDGET, EXACT_BUDGET, GAP_TOL
from .errors import AvcsteinError, ConvergenceError, PairValidationError
from .eta import eta_certified_from_gaps, pvt_lower_bound
from .exponents import d_opt_det, d_opt_shared, d_pvt_block, d_pvt_iid, phi_star_shared
from .geometry import hull_gap, transsym_gap

# ---------------------------------------------------------------------------
# JSON canonicalisation
# ---------------------------------------------------------------------------


def sig12(x):
    """Round a float to 12 significant digits (stable across platforms)."""
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(f"{x:.12g}")


def jsonable(obj):
    """Recursively convert report values to plain JSON types.

    Floats are rounded to 12 significant digits; non-finite floats become
    the strings "inf", "-inf", or "nan" so the document stays valid JSON.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Distribution):
        return {"labels": list(obj.labels), "probs": jsonable(obj.probs)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return sig12(x)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
        }
    return obj


def dump_json(payload, path=None):
    """Serialise a payload deterministically; write to path when given."""
    text = json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# Pair files
# ---------------------------------------------------------------------------


def load_pair(path):
    """Load and validate a channel pair from a JSON file."""
    if not os.path.exists(path):
        raise PairValidationError(f"no such pair file: {path}")
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise PairValidationError(
                f"{path}: parse error at line {e.lineno} column {e.colno}: {e.msg}"
            ) from e
    return HypothesisPair.from_dict(doc)


def save_pair(pair, path):
    """Write a pair to a JSON file (load_pair round-trips it)."""
    with open(path, "w") as fh:
        fh.write(dump_json(pair.to_dict()))


# ---------------------------------------------------------------------------
# Built-in examples
# ---------------------------------------------------------------------------


def _bec_example(p=0.5, r=0.25):
    if not 0 < p < 1:
        raise PairValidationError(f"bec: p must lie in (0,1), got {p}")
    if not 0 <= r < 1:
        raise PairValidationError(f"bec: r must lie in [0,1), got {r}")
    ins, outs = ("0", "1"), ("0", "1", "e")
    base = np.array([[1 - p, 0.0, p], [0.0, 1 - p, p]])
    # state "k" flips input symbol k with probability r before the erasure
    s0 = np.array([[(1 - p) * (1 - r), (1 - p) * r, p], [0.0, 1 - p, p]])
    s1 = np.array([[1 - p, 0.0, p], [(1 - p) * r, (1 - p) * (1 - r), p]])
    h0 = StateChannelFamily(("0",), ins, outs, base[None])
    h1 = StateChannelFamily(("0", "1"), ins, outs, np.stack([s0, s1]))
    return HypothesisPair(ins, outs, h0, h1, name="bec")


def _sep_example():
    ins, outs = ("0", "1"), ("00", "01", "10", "11")
    w0 = np.zeros((2, 2, 4))
    w1 = np.zeros((2, 2, 4))
    for s in range(2):
        for x in range(2):
            w0[s, x, 2 * x + s] = 1.0  # reports (input, state)
            w1[s, x, 2 * s + x] = 1.0  # reports (state, input)
    h0 = StateChannelFamily(("0", "1"), ins, outs, w0)
    h1 = StateChannelFamily(("0", "1"), ins, outs, w1)
    return HypothesisPair(ins, outs, h0, h1, name="sep")


def _bsc_example(p0=0.1, p1=0.3):
    for tag, q in (("p0", p0), ("p1", p1)):
        if not 0 <= q <= 1:
            raise PairValidationError(f"bsc: {tag} must lie in [0,1], got {q}")
    ins = outs = ("0", "1")

    def fam(q):
        k = np.array([[1 - q, q], [q, 1 - q]])
        return StateChannelFamily(("0",), ins, outs, k[None])

    return HypothesisPair(ins, outs, fam(p0), fam(p1), name="bsc")


def _random_example(seed=0, nx=2, ny=2, ns0=2, ns1=2):
    for tag, v in (("nx", nx), ("ny", ny), ("ns0", ns0), ("ns1", ns1)):
        if not 1 <= int(v) <= 8:
            raise PairValidationError(f"random: {tag} must lie in 1..8, got {v}")
    nx, ny, ns0, ns1 = int(nx), int(ny), int(ns0), int(ns1)
    rng = np.random.default_rng(int(seed))
    ins = tuple(str(i) for i in range(nx))
    outs = tuple(str(i) for i in range(ny))

    def fam(ns):
        t = rng.dirichlet(np.ones(ny), size=(ns, nx))
        return StateChannelFamily(tuple(str(i) for i in range(ns)), ins, outs, t)

    return HypothesisPair(ins, outs, fam(ns0), fam(ns1), name=f"random-{seed}")


_BUILTINS = {
    "bec": _bec_example,
    "sep": _sep_example,
    "bsc": _bsc_example,
    "random": _random_example,
}


def builtin_example(name, **params):
    """Construct a named example pair ("bec", "sep", "bsc", "random")."""
    if name not in _BUILTINS:
        known = ", ".join(sorted(_BUILTINS))
        raise PairValidationError(f"unknown builtin example {name!r} (known: {known})")
    try:
        return _BUILTINS[name](**params)
    except TypeError as e:
        raise PairValidationError(f"{name}: {e}") from e


def resolve_pair(spec):
    """Turn a CLI pair argument into a HypothesisPair.

    Accepts a path to a JSON pair file, a builtin name like "sep", or a
    builtin name with positional parameters like "bec:0.5,0.25".
    """
    if isinstance(spec, HypothesisPair):
        return spec
    if os.path.exists(spec) or spec.endswith(".json"):
        return load_pair(spec)
    name, _, rest = spec.partition(":")
    args = [a for a in rest.split(",") if a] if rest else []
    if name == "bec":
        vals = [float(a) for a in args]
        return builtin_example("bec", **dict(zip(("p", "r"), vals)))
    if name == "bsc":
        vals = [float(a) for a in args]
        return builtin_example("bsc", **dict(zip(("p0", "p1"), vals)))
    if name == "sep":
        return builtin_example("sep")
    if name == "random":
        vals = [int(a) for a in args]
        keys = ("seed", "nx", "ny", "ns0", "ns1")
        return builtin_example("random", **dict(zip(keys, vals)))
    return builtin_example(name)


# ---------------------------------------------------------------------------
# Analysis report
# ---------------------------------------------------------------------------


@dataclass
class AnalysisReport:
    """Structured summary of the geometry / exponent / certificate pipelines."""

    pair_name: str
    gaps: dict
    exponents: dict
    strong_converse: list
    verdicts: dict
    solver: dict
    config: dict
    errors: list = field(default_factory=list)
    units: str = "nats"
    version: str = __version__

    def check_consistency(self):
        """Verify verdicts against values; raise AvcsteinError on mismatch."""
        tol = self.config["tol"]
        problems = []
        z1 = self.gaps["hull_gap"]["value"]
        z2 = self.gaps["transsym_gap"]["value"]
        if self.verdicts["hulls_intersect"] != (z1 <= tol):
            problems.append("hulls_intersect verdict disagrees with hull gap")
        if self.verdicts["trans_symmetrizable"] != (z2 <= tol):
            problems.append("trans_symmetrizable verdict disagrees with gap")
        d_sh = self.exponents.get("d_sh")
        if d_sh is not None and self.verdicts["shared_exponent_positive"] != (
            d_sh > tol
        ):
            problems.append("shared_exponent_positive verdict disagrees with d_sh")
        if problems:
            raise AvcsteinError("; ".join(problems))

    def to_dict(self):
        self.check_consistency()
        return {
            "pair": self.pair_name,
            "units": self.units,
            "version": self.version,
            "gaps": self.gaps,
            "exponents": self.exponents,
            "strong_converse": self.strong_converse,
            "verdicts": self.verdicts,
            "solver": self.solver,
            "config": self.config,
            "errors": self.errors,
        }

    def to_json(self, path=None):
        return dump_json(self.to_dict(), path)


def _solver_meta(sol):
    meta = {"converged": bool(sol.converged), "iterations": int(sol.iterations)}
    if getattr(sol, "duality_gap_estimate", None) is not None:
        meta["duality_gap_estimate"] = float(sol.duality_gap_estimate)
    if getattr(sol, "unbounded_suspect", False):
        meta["unbounded_suspect"] = True
    return meta


def analyze(
    source,
    tol=GAP_TOL,
    seed=0,
    restarts=20,
    t_grid=(-0.1,),
    block_k=(),
    out=None,
):
    """Run the geometry, exponent, and certificate pipelines on a pair."""
    pair = resolve_pair(source) if not isinstance(source, HypothesisPair) else source
    errors = []
    solver = {}

    cert1 = hull_gap(pair)
    cert2 = transsym_gap(pair)
    gaps = {
        "hull_gap": {
            "value": cert1.gap,
            "witness_h0": cert1.witness_h0,
            "witness_h1": cert1.witness_h1,
        },
        "transsym_gap": {
            "value": cert2.gap,
            "witness_h0": cert2.witness_h0,
            "witness_h1": cert2.witness_h1,
        },
    }
    solver["hull_gap"] = dict(cert1.solver_meta)
    solver["transsym_gap"] = dict(cert2.solver_meta)

    exponents = {}

    def run(tag, fn):
        try:
            return fn()
        except (ConvergenceError, AvcsteinError) as e:
            errors.append(f"{tag}: {e}")
            return None

    det = run("d_det", lambda: d_opt_det(pair))
    if det is not None:
        exponents["d_det"] = det.value
        solver["d_det"] = _solver_meta(det)

    pvt = run("d_pvt_iid", lambda: d_pvt_iid(pair, seed=seed, restarts=restarts))
    if pvt is not None:
        exponents["d_pvt_iid"] = pvt.value
        solver["d_pvt_iid"] = _solver_meta(pvt)

    sh = run("d_sh", lambda: d_opt_shared(pair, seed=seed, restarts=restarts))
    if sh is not None:
        exponents["d_sh"] = sh.value
        solver["d_sh"] = _solver_meta(sh)

    lb = run("pvt_lower_bound", lambda: pvt_lower_bound(pair, seed=seed))
    if lb is not None:
        value, provenance = lb
        exponents["pvt_lower_bound"] = {"value": value, "provenance": provenance}

    blocks = {}
    for k in block_k:
        labels = product_labels(pair.input_labels, k)
        pk = Distribution.uniform(labels)
        sol = run(f"d_pvt_block_{k}", lambda k=k, pk=pk: d_pvt_block(pair, pk, k=k))
        if sol is not None:
            blocks[str(k)] = sol.value
            solver[f"d_pvt_block_{k}"] = _solver_meta(sol)
    if blocks:
        exponents["d_pvt_block"] = blocks

    samples = []
    for t in t_grid:
        sol = run(f"phi_star[{t}]", lambda t=t: phi_star_shared(pair, t, seed=seed))
        if sol is not None:
            samples.append(
                {"t": t, "phi_star": sol.value, "slope": sol.value / (-t)}
            )

    d_sh_val = exponents.get("d_sh", 0.0)
    verdicts = {
        "hulls_intersect": bool(cert1.gap <= tol),
        "trans_symmetrizable": bool(cert2.gap <= tol),
        "shared_exponent_positive": bool(d_sh_val > tol),
    }

    config = {
        "tol": tol,
        "seed": seed,
        "restarts": restarts,
        "t_grid": list(t_grid),
        "block_k": list(block_k),
        "alphabet_budget": ALPHABET_BUDGET,
        "exact_budget": EXACT_BUDGET,
        "env_budget": os.environ.get("AVCSTEIN_BUDGET"),
    }

    report = AnalysisReport(
        pair_name=pair.name,
        gaps=gaps,
        exponents=exponents,
        strong_converse=samples,
        verdicts=verdicts,
        solver=solver,
        config=config,
        errors=errors,
    )
    report.check_consistency()
    if out is not None:
        report.to_json(out)
    return report
