"""Batch command-line front end.

One command per invocation: parse a tuple/IFS description from JSON,
dispatch to the library, write a machine-readable JSON report (atomically:
temp file + rename). Point clouds go to a sibling CSV. Exit codes: 0 ok,
2 input error, 3 budget error, 4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import __version__
from .analysis import (
    block_split_residual,
    check_separation,
    detect_similitude_structure,
    rho_form,
    rho_form_constancy,
    rho_form_normalize,
    spectral_radius_multiplicativity,
)
from .errors import BudgetError, DegenerateError, InputError
from .linalg import MatrixTuple
from .potentials import SVF, dualize, svf
from .pressure import (
    DEFAULT_BUDGET,
    AffineIFS,
    BernoulliMeasure,
    affinity_dimension,
    gibbs_approx,
    lyapunov_spectrum,
    pressure_bracket,
    sample_self_affine,
)
from .structure import structure_report

_INPUT_FIELDS = {"d", "matrices", "labels", "translations", "weights"}

COMMANDS = {
    "svf": "singular value function of each generator at exponent --s",
    "pressure": "pressure bracket for phi^s at --depth",
    "affdim": "affinity-dimension interval by bisection (--depth, --tol)",
    "lyapunov": "Lyapunov spectrum under the Bernoulli weights (--depth horizon, --reps)",
    "gibbs": "level-n Gibbs approximation of the phi^s equilibrium state",
    "structure": "irreducibility / strong irreducibility / triangularizability / proximality",
    "check-sep": "Lyapunov-gap separation criterion at exponent --s",
    "check-similitude": "search for a common invariant inner product (--reps iterations)",
    "check-mult": "spectral-radius multiplicativity defects over sampled word pairs",
    "fw-check": "normalize the weighted eigenvalue-modulus form and test its constancy",
    "dualize": "inverse-transpose duality transform at exponent --s",
    "sample-attractor": "chaos-game point cloud (--reps points, --depth burn-in) to CSV",
    "lemma3": "scalar-block svf max-decomposition residual (block entries in 'weights')",
}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "svf": {"s": 1.0},
    "pressure": {"s": 1.0, "depth": 8, "seed": 0, "budget": DEFAULT_BUDGET},
    "affdim": {"depth": 6, "tol": 1e-4, "seed": 0, "budget": DEFAULT_BUDGET},
    "lyapunov": {"depth": 1000, "reps": 16, "seed": 0},
    "gibbs": {"s": 1.0, "depth": 8, "budget": DEFAULT_BUDGET},
    "structure": {"max_len": 6},
    "check-sep": {"s": 1.0, "depth": 10, "reps": 400, "seed": 0, "budget": DEFAULT_BUDGET},
    "check-similitude": {"reps": 10_000, "tol": 1e-8},
    "check-mult": {"reps": 64, "max_len": 6, "seed": 0},
    "fw-check": {"s": 1.0, "max_len": 12, "reps": 64, "seed": 0},
    "dualize": {"s": 1.0},
    "sample-attractor": {"reps": 10_000, "depth": 100, "seed": 0},
    "lemma3": {"s": 1.5, "reps": 200, "max_len": 10, "seed": 0},
}


@dataclass(frozen=True)
class JobSpec:
    """One validated batch job: a command, input/output paths, parameters."""

    command: str
    input_path: str
    output_path: str
    params: dict[str, Any]

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        params = dict(_DEFAULTS[self.command])
        for key, value in self.params.items():
            if value is None:
                continue
            if key not in (
                "s",
                "depth",
                "max_len",
                "reps",
                "seed",
                "tol",
                "threads",
                "budget",
            ):
                raise InputError(f'unknown parameter "{key}"')
            params[key] = value
        _validate_params(params)
        object.__setattr__(self, "params", params)


def _validate_params(params: dict[str, Any]) -> None:
    checks = {
        "depth": lambda v: v >= 1,
        "max_len": lambda v: v >= 1,
        "reps": lambda v: v >= 1,
        "seed": lambda v: 0 <= v < 2**64,
        "tol": lambda v: v > 0,
        "threads": lambda v: v >= 1,
        "budget": lambda v: v >= 1,
    }
    for key, ok in checks.items():
        if key in params and not ok(params[key]):
            raise InputError(f'parameter "{key}" out of range: {params[key]!r}')


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------


def load_input(path: str) -> dict[str, Any]:
    """Parse and validate the strict input schema."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read input file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"input file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("input must be a JSON object")
    for key in data:
        if key not in _INPUT_FIELDS:
            raise InputError(f'unknown field "{key}" in input')
    for key in ("d", "matrices"):
        if key not in data:
            raise InputError(f'missing field "{key}" in input')
    d = data["d"]
    if not isinstance(d, int) or d < 1:
        raise InputError('field "d" must be a positive integer')
    mats = data["matrices"]
    if not isinstance(mats, list) or len(mats) < 1:
        raise InputError('field "matrices" must be a non-empty list')
    arr = np.asarray(mats, dtype=float)
    if arr.ndim != 3 or arr.shape[1:] != (d, d):
        raise InputError(
            f'field "matrices" must be N x {d} x {d} row-major, got shape {arr.shape}'
        )
    n = arr.shape[0]
    if "labels" in data:
        labels = data["labels"]
        if (
            not isinstance(labels, list)
            or len(labels) != n
            or not all(isinstance(x, str) for x in labels)
        ):
            raise InputError(f'field "labels" must be a list of {n} strings')
    if "translations" in data:
        trans = np.asarray(data["translations"], dtype=float)
        if trans.shape != (n, d):
            raise InputError(
                f'field "translations" must be {n} x {d}, got shape {trans.shape}'
            )
    if "weights" in data:
        w = np.asarray(data["weights"], dtype=float)
        if w.shape != (n,):
            raise InputError(f'field "weights" must have length {n}')
    return data


def _tuple_from_input(data: dict[str, Any]) -> MatrixTuple:
    try:
        return MatrixTuple(np.asarray(data["matrices"], dtype=float))
    except InputError as exc:
        raise InputError(f'field "matrices": {exc}') from None


def _bernoulli_from_input(data: dict[str, Any]) -> BernoulliMeasure:
    if "weights" not in data:
        raise InputError('missing field "weights" (Bernoulli probabilities)')
    try:
        return BernoulliMeasure(np.asarray(data["weights"], dtype=float))
    except InputError as exc:
        raise InputError(f'field "weights": {exc}') from None


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def jsonable(x: Any) -> Any:
    """Plain-JSON view of library objects (dataclasses tagged with their type)."""
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        out: dict[str, Any] = {"type": type(x).__name__}
        for f in dataclasses.fields(x):
            out[f.name] = jsonable(getattr(x, f.name))
        return out
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


def _atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_point_cloud_csv(path: str, points: np.ndarray) -> None:
    """CSV point cloud: header x1..xd, '.' decimal separator, newline line ends."""
    d = points.shape[1]
    lines = [",".join(f"x{i + 1}" for i in range(d))]
    for row in points:
        lines.append(",".join(repr(float(v)) for v in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def _run_command(job: JobSpec, data: dict[str, Any]) -> Any:
    p = job.params
    cmd = job.command
    if cmd == "svf":
        t = _tuple_from_input(data)
        return {
            "s": p["s"],
            "per_generator": [svf(a, p["s"]) for a in t.mats],
        }
    if cmd == "pressure":
        t = _tuple_from_input(data)
        return pressure_bracket(
            t, SVF(p["s"]), p["depth"], budget=p["budget"], seed=p["seed"]
        )
    if cmd == "affdim":
        t = _tuple_from_input(data)
        return affinity_dimension(
            t, p["depth"], p["tol"], budget=p["budget"], seed=p["seed"]
        )
    if cmd == "lyapunov":
        t = _tuple_from_input(data)
        mu = _bernoulli_from_input(data)
        return lyapunov_spectrum(t, mu, p["depth"], p["reps"], p["seed"])
    if cmd == "gibbs":
        t = _tuple_from_input(data)
        return gibbs_approx(t, SVF(p["s"]), p["depth"], budget=p["budget"])
    if cmd == "structure":
        t = _tuple_from_input(data)
        return structure_report(t, prox_len=p["max_len"])
    if cmd == "check-sep":
        t = _tuple_from_input(data)
        return check_separation(
            t,
            p["s"],
            depth=p["depth"],
            samples=p["reps"],
            seed=p["seed"],
            budget=p["budget"],
        )
    if cmd == "check-similitude":
        t = _tuple_from_input(data)
        return detect_similitude_structure(t, iters=p["reps"], tol=p["tol"])
    if cmd == "check-mult":
        t = _tuple_from_input(data)
        return spectral_radius_multiplicativity(
            t, pairs=p["reps"], max_len=p["max_len"], seed=p["seed"]
        )
    if cmd == "fw-check":
        t = _tuple_from_input(data)
        normalized = rho_form_normalize(t, p["s"])
        report = rho_form_constancy(
            normalized, p["s"], max_len=p["max_len"], samples=p["reps"], seed=p["seed"]
        )
        return {
            "normalized_matrices": normalized.mats,
            "per_generator_form_defect": [
                abs(rho_form(a, p["s"]) - 1.0) for a in normalized.mats
            ],
            "constancy": report,
        }
    if cmd == "dualize":
        t = _tuple_from_input(data)
        res = dualize(t, p["s"])
        return {"matrices": res.tuple.mats, "s_dual": res.s_dual}
    if cmd == "sample-attractor":
        t = _tuple_from_input(data)
        if "translations" not in data:
            raise InputError('missing field "translations"')
        mu = _bernoulli_from_input(data)
        ifs = AffineIFS(
            tuple=t, translations=np.asarray(data["translations"], dtype=float)
        )
        pts = sample_self_affine(ifs, mu, p["reps"], burn=p["depth"], seed=p["seed"])
        csv_path = job.output_path + ".points.csv"
        write_point_cloud_csv(csv_path, pts)
        return {
            "points_csv": csv_path,
            "points": int(pts.shape[0]),
            "burn": p["depth"],
            "bounding_box": {
                "min": pts.min(axis=0),
                "max": pts.max(axis=0),
            },
        }
    if cmd == "lemma3":
        c = _tuple_from_input(data)
        if "weights" not in data:
            raise InputError('missing field "weights" (scalar block entries)')
        b = np.asarray(data["weights"], dtype=float)
        return block_split_residual(
            b, c, p["s"], n_words=p["reps"], max_len=p["max_len"], seed=p["seed"]
        )
    raise InputError(f"unknown command {cmd!r}")


def run(job: JobSpec) -> dict[str, Any]:
    """Execute one job and write its JSON report atomically."""
    data = load_input(job.input_path)
    started = time.perf_counter()
    result = _run_command(job, data)
    elapsed = time.perf_counter() - started
    report = {
        "command": job.command,
        "library_version": __version__,
        "input": data,
        "params": jsonable(job.params),
        "seed": job.params.get("seed"),
        "wall_clock_s": elapsed,
        "result": jsonable(result),
    }
    _atomic_write_text(job.output_path, json.dumps(report, indent=2) + "\n")
    return report


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affpress",
        description=(
            "Batch computations for affine iterated function systems: "
            "singular value functions, pressure, affinity dimension, Gibbs "
            "approximants, Lyapunov spectra, and structural checkers."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--input", required=True, help="input tuple/IFS JSON file")
        sp.add_argument("--output", required=True, help="output report JSON file")
        sp.add_argument("--s", type=float, default=None, help="exponent parameter")
        sp.add_argument(
            "--depth",
            type=int,
            default=None,
            help="enumeration depth / horizon / burn-in, per command",
        )
        sp.add_argument(
            "--max-len", dest="max_len", type=int, default=None, help="word-length bound"
        )
        sp.add_argument(
            "--reps",
            type=int,
            default=None,
            help="replicas / samples / points / iterations, per command",
        )
        sp.add_argument("--seed", type=int, default=None, help="PRNG seed (uint64)")
        sp.add_argument("--tol", type=float, default=None, help="tolerance")
        sp.add_argument(
            "--threads",
            type=int,
            default=None,
            help="advisory thread cap; results are thread-count independent",
        )
        sp.add_argument(
            "--budget", type=int, default=None, help="word-enumeration budget"
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    params = {
        key: getattr(args, key)
        for key in ("s", "depth", "max_len", "reps", "seed", "tol", "threads", "budget")
    }
    try:
        job = JobSpec(
            command=args.command,
            input_path=args.input,
            output_path=args.output,
            params=params,
        )
        run(job)
        return 0
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    except DegenerateError as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
