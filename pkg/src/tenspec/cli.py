"""Command-line front end.

Three subcommands: ``experiment`` reruns one of the canned seeded random
experiments, ``decompose`` factors a TZ1 tensor file and writes the factors
plus a manifest, ``verify`` replays a manifest through the oracle.  Outputs
are CSV (spectra), JSON (reports, manifests) and TZ1 (tensors); identical
command lines produce byte-identical files, so wall time goes to stderr
only.
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import DenseTensor, norm, random_tensor
from .decompose import (
    GroupedTensor,
    OperatorDecomposition,
    RawTriple,
    TransformDecomposition,
    TripleDecomposition,
    component_count,
    decompose_sa_nnd,
    decompose_transform,
    decompose_triple,
    gram_operator,
    is_self_adjoint,
    reconstruct,
)
from .errors import (
    GroupingMismatch,
    InvalidKeep,
    NoConvergence,
    NotNND,
    NotSelfAdjoint,
    ParseError,
    ShapeMismatch,
)
from .oracle import OracleReport, verify_decomposition
from .tz1 import read_tensor, write_tensor

DEFAULT_SEED = 42
MANIFEST_VERSION = 1
SINGULAR_TOL = 1e-8


@dataclass(frozen=True)
class ExperimentSpec:
    """One runnable experiment: a seeded random source and an algorithm.

    ``groups`` partitions the source tensor's modes.  With ``gram_source``
    the decomposed operator is the gram of the grouped source (the way the
    canned SA-NND experiment builds its input); otherwise the source itself
    is decomposed.  ``scale`` multiplies the source, so 0.0 exercises the
    degenerate zero-tensor path.
    """

    name: str
    source_dims: tuple
    groups: tuple
    algorithm: str
    seed: int = DEFAULT_SEED
    tolerance: float = 1e-8
    gram_source: bool = False
    scale: float = 1.0


EXPERIMENTS = {
    "exp1": dict(
        source_dims=(16, 16, 3, 16, 16, 3),
        groups=(3, 3),
        algorithm="op",
        gram_source=True,
        tolerance=1e-8,
    ),
    "exp2": dict(
        source_dims=(64, 8, 4),
        groups=(1, 2),
        algorithm="transform",
        tolerance=1e-8,
    ),
    "exp3": dict(
        source_dims=(64, 16, 3),
        groups=(1, 1, 1),
        algorithm="triple",
        tolerance=1e-10,
    ),
}


def experiment_spec(name, seed=DEFAULT_SEED, tolerance=None):
    """Spec for one of the canned experiments, with optional overrides."""
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}")
    cfg = dict(EXPERIMENTS[name])
    if tolerance is not None:
        cfg["tolerance"] = tolerance
    return ExperimentSpec(name=name, seed=int(seed), **cfg)


@dataclass(frozen=True)
class RunReport:
    """Result summary of one experiment or decompose run.

    ``wall_time_ms`` is informational only and is never written into the
    report file (outputs must be byte-reproducible); it is logged to stderr.
    """

    name: str
    algorithm: str
    seed: Optional[int]
    dims: tuple
    groups: tuple
    rank: int
    spectrum: np.ndarray
    reconstruction_relative_error: float
    tolerance: float
    passed: bool
    wall_time_ms: int
    oracle: Optional[OracleReport] = None


def relative_error(reference, candidate):
    """Relative Frobenius error, with 0/0 counted as 0."""
    scale = norm(reference)
    diff = norm(DenseTensor(reference.data - candidate.data, check_finite=False))
    if scale == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return diff / scale


def _decompose_by_name(a, algorithm):
    if algorithm == "op":
        return decompose_sa_nnd(a)
    if algorithm == "transform":
        return decompose_transform(a)
    if algorithm == "triple":
        return decompose_triple(a)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run_experiment(spec, out_dir):
    """Run one experiment and write input.tz1, spectrum.csv, report.json."""
    source = random_tensor(spec.source_dims, spec.seed)
    if spec.scale != 1.0:
        source = source * spec.scale
    if spec.gram_source:
        a = gram_operator(GroupedTensor(source, spec.groups), side="right")
    else:
        a = GroupedTensor(source, spec.groups)

    started = time.perf_counter()
    dec = _decompose_by_name(a, spec.algorithm)
    rebuilt = reconstruct(dec)
    wall_ms = int(round(1000.0 * (time.perf_counter() - started)))

    err = relative_error(a.tensor, rebuilt)
    report = RunReport(
        name=spec.name,
        algorithm=spec.algorithm,
        seed=spec.seed,
        dims=a.tensor.dims,
        groups=a.group_orders,
        rank=component_count(dec),
        spectrum=np.asarray(dec.spectrum, dtype=np.float64),
        reconstruction_relative_error=err,
        tolerance=spec.tolerance,
        passed=bool(err <= spec.tolerance),
        wall_time_ms=wall_ms,
    )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_tensor(out_dir / "input.tz1", a.tensor)
    _write_spectrum_csv(out_dir / "spectrum.csv", report.spectrum)
    _write_report_json(out_dir / "report.json", report)
    return report


_FAMILY_BY_ALGORITHM = {
    "op": ("u",),
    "transform": ("u", "v"),
    "triple": ("u", "z", "w"),
}


def _component_families(dec):
    if isinstance(dec, OperatorDecomposition):
        return dec.eigenvalues, {"u": dec.eigentensors}
    if isinstance(dec, TransformDecomposition):
        return dec.singulars, {"u": dec.left, "v": dec.right}
    return dec.weights, {"u": dec.factors_u, "z": dec.factors_z, "w": dec.factors_w}


def run_decompose(path, groups, algorithm="auto", keep=None, out_dir="tenspec-out"):
    """Decompose a TZ1 file; write factor files, manifest.json, report.json."""
    tensor = read_tensor(path)
    a = GroupedTensor(tensor, groups)
    if algorithm == "auto":
        if a.group_count == 3:
            algorithm = "triple"
        elif is_self_adjoint(a):
            algorithm = "op"
        else:
            algorithm = "transform"
    elif algorithm == "op":
        check = is_self_adjoint(a)
        if not check:
            raise NotSelfAdjoint(check.reason)
    elif algorithm not in ("transform", "triple"):
        raise ValueError(f"unknown algorithm {algorithm!r}")

    started = time.perf_counter()
    dec = _decompose_by_name(a, algorithm)
    count = component_count(dec)
    kept = count if keep is None else int(keep)
    rebuilt = reconstruct(dec, kept)
    wall_ms = int(round(1000.0 * (time.perf_counter() - started)))

    err = relative_error(tensor, rebuilt)
    tolerance = 1e-10 if algorithm == "triple" else 1e-8
    report = RunReport(
        name="decompose",
        algorithm=algorithm,
        seed=None,
        dims=tensor.dims,
        groups=a.group_orders,
        rank=count,
        spectrum=np.asarray(dec.spectrum, dtype=np.float64),
        reconstruction_relative_error=err,
        tolerance=tolerance,
        passed=bool(err <= tolerance),
        wall_time_ms=wall_ms,
    )

    weights, families = _component_families(dec)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    factor_names = {}
    for family in _FAMILY_BY_ALGORITHM[algorithm]:
        names = []
        for m in range(kept):
            fname = f"{family}-{m + 1:04d}.tz1"
            write_tensor(out_dir / fname, families[family][m])
            names.append(fname)
        factor_names[family] = names
    manifest = {
        "version": MANIFEST_VERSION,
        "algorithm": algorithm,
        "shapes": [list(s.dims) for s in a.group_shapes],
        "groups": list(a.group_orders),
        "weights": [float(w) for w in weights[:kept]],
        "factors": factor_names,
        "tolerances": {
            "rank_tol": 1e-10,
            "reconstruction_tol": tolerance,
            "singular_tol": SINGULAR_TOL,
        },
    }
    if algorithm == "triple":
        manifest["pairMap"] = [
            [int(p) + 1, int(s) + 1] for p, s in dec.pair_map[:kept]
        ]
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    _write_spectrum_csv(out_dir / "spectrum.csv", report.spectrum)
    _write_report_json(out_dir / "report.json", report)
    return report


def run_verify(tensor_path, manifest_path):
    """Replay a manifest's factors against the tensor via the oracle."""
    tensor = read_tensor(tensor_path)
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{manifest_path}: {exc}") from exc
    try:
        algorithm = manifest["algorithm"]
        groups = tuple(int(g) for g in manifest["groups"])
        weights = np.array([float(w) for w in manifest["weights"]])
        factor_names = manifest["factors"]
        tolerances = manifest.get("tolerances", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{manifest_path}: bad manifest field: {exc}") from exc

    if algorithm not in _FAMILY_BY_ALGORITHM:
        raise ParseError(f"{manifest_path}: unknown algorithm {algorithm!r}")
    base = manifest_path.parent
    loaded = {}
    for family in _FAMILY_BY_ALGORITHM[algorithm]:
        try:
            loaded[family] = [read_tensor(base / n) for n in factor_names[family]]
        except (KeyError, FileNotFoundError) as exc:
            raise ParseError(f"{manifest_path}: missing factor file: {exc}") from exc

    a = GroupedTensor(tensor, groups)
    declared = manifest.get("shapes")
    if declared is not None:
        actual = [list(s.dims) for s in a.group_shapes]
        if [list(map(int, s)) for s in declared] != actual:
            raise ParseError(
                f"{manifest_path}: declared shapes {declared} do not match "
                f"tensor groups {actual}"
            )
    shapes = a.group_shapes
    if algorithm == "op":
        result = OperatorDecomposition(
            eigenvalues=weights,
            eigentensors=loaded["u"],
            operand_shape=shapes[0],
            spectrum=weights,
        )
    elif algorithm == "transform":
        result = TransformDecomposition(
            singulars=weights,
            left=loaded["u"],
            right=loaded["v"],
            left_shape=shapes[0],
            right_shape=shapes[1],
            spectrum=weights,
        )
    else:
        pair_map = np.array(
            [[int(p) - 1, int(s) - 1] for p, s in manifest.get("pairMap", [])],
            dtype=np.intp,
        ).reshape(-1, 2)
        result = TripleDecomposition(
            weights=weights,
            factors_u=loaded["u"],
            factors_z=loaded["z"],
            factors_w=loaded["w"],
            shapes=shapes,
            raw=RawTriple(
                sigma=np.array([]),
                gamma=np.array([]),
                u_basis=[],
                z_basis=[],
                coupling=[],
                w_joint=None,
                pair_map=pair_map,
            ),
        )
    return verify_decomposition(
        a,
        result,
        singular_tol=float(tolerances.get("singular_tol", SINGULAR_TOL)),
        reconstruction_tol=float(tolerances.get("reconstruction_tol", 1e-8)),
    )


def _write_spectrum_csv(path, spectrum):
    lines = ["index,weight"]
    for i, w in enumerate(spectrum, start=1):
        lines.append(f"{i},{float(w)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _report_dict(report):
    oracle = None
    if report.oracle is not None:
        oracle = {
            "singulars_reference": [float(s) for s in report.oracle.singulars_reference],
            "max_singular_deviation": report.oracle.max_singular_deviation,
            "max_reconstruction_error": report.oracle.max_reconstruction_error,
            "passed": report.oracle.passed,
        }
    return {
        "name": report.name,
        "algorithm": report.algorithm,
        "seed": report.seed,
        "dims": list(report.dims),
        "groups": list(report.groups),
        "rank": report.rank,
        "spectrum": [float(w) for w in report.spectrum],
        "reconstruction_relative_error": report.reconstruction_relative_error,
        "tolerance": report.tolerance,
        "passed": report.passed,
        "oracle": oracle,
    }


def _write_report_json(path, report):
    Path(path).write_text(
        json.dumps(_report_dict(report), indent=2) + "\n", encoding="utf-8"
    )


def _cmd_experiment(args):
    spec = experiment_spec(args.name, seed=args.seed, tolerance=args.tol)
    report = run_experiment(spec, args.out)
    print(
        f"[tenspec] {spec.name}: rank {report.rank}, reconstruction error "
        f"{report.reconstruction_relative_error:.3e} (tolerance {report.tolerance:.1e}), "
        f"wall time {report.wall_time_ms} ms",
        file=sys.stderr,
    )
    return 0 if report.passed else 1


def _parse_groups(text):
    try:
        groups = tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise GroupingMismatch(f"bad --groups value {text!r}") from exc
    return groups


def _cmd_decompose(args):
    report = run_decompose(
        args.file,
        _parse_groups(args.groups),
        algorithm=args.algorithm,
        keep=args.keep,
        out_dir=args.out,
    )
    print(
        f"[tenspec] decompose: {report.algorithm}, rank {report.rank}, "
        f"reconstruction error {report.reconstruction_relative_error:.3e}, "
        f"wall time {report.wall_time_ms} ms",
        file=sys.stderr,
    )
    return 0


def _cmd_verify(args):
    report = run_verify(args.file, args.manifest)
    print(
        json.dumps(
            {
                "singulars_reference": [float(s) for s in report.singulars_reference],
                "max_singular_deviation": report.max_singular_deviation,
                "max_reconstruction_error": report.max_reconstruction_error,
                "passed": report.passed,
            },
            indent=2,
        )
    )
    return 0 if report.passed else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tenspec",
        description="Exact decomposition of dense tensors: operators, "
        "transformations, and three-group tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser("experiment", help="run a canned seeded experiment")
    p_exp.add_argument("name", choices=sorted(EXPERIMENTS))
    p_exp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_exp.add_argument("--tol", type=float, default=None,
                       help="override the pass/fail reconstruction tolerance")
    p_exp.add_argument("--out", default="tenspec-out", help="output directory")
    p_exp.set_defaults(func=_cmd_experiment)

    p_dec = sub.add_parser("decompose", help="decompose a TZ1 tensor file")
    p_dec.add_argument("file")
    p_dec.add_argument("--groups", required=True,
                       help="mode counts per group, e.g. 1,2 or 1,1,1")
    p_dec.add_argument("--algorithm", default="auto",
                       choices=["auto", "op", "transform", "triple"])
    p_dec.add_argument("--keep", type=int, default=None,
                       help="write only the leading K components")
    p_dec.add_argument("--out", default="tenspec-out", help="output directory")
    p_dec.set_defaults(func=_cmd_decompose)

    p_ver = sub.add_parser("verify", help="replay a manifest against its tensor")
    p_ver.add_argument("file")
    p_ver.add_argument("manifest")
    p_ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        ParseError,
        GroupingMismatch,
        NotSelfAdjoint,
        NotNND,
        InvalidKeep,
        ShapeMismatch,
        NoConvergence,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"tenspec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
