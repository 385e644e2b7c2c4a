"""Command line: experiments, decompose/verify round trips, determinism."""

import json

import numpy as np
import pytest

from tenspec import (
    DenseTensor,
    GroupedTensor,
    norm,
    outer,
    random_tensor,
    read_tensor,
    write_tensor,
)
from tenspec.cli import (
    ExperimentSpec,
    experiment_spec,
    main,
    run_experiment,
    run_verify,
)


def unit(dims, seed):
    t = random_tensor(dims, seed)
    return t * (1.0 / norm(t))


def read_json(path):
    return json.loads(path.read_text())


# ------------------------------------------------------------- experiment


def test_experiment_exp2_via_main(tmp_path):
    out = tmp_path / "run"
    code = main(["experiment", "exp2", "--seed", "7", "--out", str(out)])
    assert code == 0
    report = read_json(out / "report.json")
    assert report["name"] == "exp2"
    assert report["seed"] == 7
    assert report["rank"] == 32
    assert report["passed"] is True
    assert report["reconstruction_relative_error"] < 1e-8
    assert report["oracle"] is None
    assert "wall_time_ms" not in report

    lines = (out / "spectrum.csv").read_text().strip().splitlines()
    assert lines[0] == "index,weight"
    weights = [float(line.split(",")[1]) for line in lines[1:]]
    assert weights == sorted(weights, reverse=True)
    assert int(lines[1].split(",")[0]) == 1

    saved = read_tensor(out / "input.tz1")
    assert saved.dims == (64, 8, 4)
    assert np.array_equal(saved.data, random_tensor((64, 8, 4), 7).data)


def test_experiment_exp3_via_main(tmp_path):
    out = tmp_path / "run3"
    code = main(["experiment", "exp3", "--out", str(out)])
    assert code == 0
    report = read_json(out / "report.json")
    assert report["rank"] == len(report["spectrum"])
    assert report["reconstruction_relative_error"] < 1e-10
    assert report["tolerance"] == 1e-10


def test_experiment_determinism_bytes(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["experiment", "exp2", "--seed", "7", "--out", str(out1)]) == 0
    assert main(["experiment", "exp2", "--seed", "7", "--out", str(out2)]) == 0
    for name in ("spectrum.csv", "report.json", "input.tz1"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_experiment_custom_zero_tensor(tmp_path):
    spec = ExperimentSpec(
        name="custom",
        source_dims=(2, 2, 2),
        groups=(1, 2),
        algorithm="transform",
        seed=5,
        tolerance=1e-8,
        scale=0.0,
    )
    report = run_experiment(spec, tmp_path / "zero")
    assert report.rank == 0
    assert report.reconstruction_relative_error == 0.0
    assert report.passed


def test_experiment_tolerance_failure_exit_code(tmp_path):
    code = main(
        ["experiment", "exp2", "--seed", "7", "--tol", "1e-18", "--out", str(tmp_path / "t")]
    )
    assert code == 1


def test_experiment_rejects_unknown_name(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "exp9", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_experiment_spec_registry():
    spec = experiment_spec("exp1")
    assert spec.source_dims == (16, 16, 3, 16, 16, 3)
    assert spec.groups == (3, 3)
    assert spec.gram_source
    with pytest.raises(ValueError):
        experiment_spec("nope")


# -------------------------------------------------------------- decompose


def test_decompose_rank_one_round_trip(tmp_path):
    u = unit((2, 2), 60)
    v = unit((3,), 61)
    t = 2.5 * outer(u, v)
    src = tmp_path / "rank1.tz1"
    write_tensor(src, t)
    out = tmp_path / "fac"
    code = main(["decompose", str(src), "--groups", "2,1", "--out", str(out)])
    assert code == 0
    manifest = read_json(out / "manifest.json")
    assert manifest["algorithm"] == "transform"
    assert len(manifest["weights"]) == 1
    assert manifest["weights"][0] == pytest.approx(2.5, abs=1e-10)
    loaded_u = read_tensor(out / manifest["factors"]["u"][0])
    assert abs(float(np.dot(loaded_u.values, u.values))) == pytest.approx(1.0, abs=1e-10)


def test_decompose_matches_experiment_report(tmp_path):
    exp_out = tmp_path / "exp"
    assert main(["experiment", "exp2", "--seed", "11", "--out", str(exp_out)]) == 0
    dec_out = tmp_path / "dec"
    code = main(
        ["decompose", str(exp_out / "input.tz1"), "--groups", "1,2", "--out", str(dec_out)]
    )
    assert code == 0
    exp_report = read_json(exp_out / "report.json")
    dec_report = read_json(dec_out / "report.json")
    assert dec_report["spectrum"] == exp_report["spectrum"]
    assert dec_report["rank"] == exp_report["rank"]
    assert dec_report["reconstruction_relative_error"] == pytest.approx(
        exp_report["reconstruction_relative_error"], abs=1e-15
    )


def test_decompose_auto_picks_operator(tmp_path):
    src = GroupedTensor(random_tensor((3, 3), 62), (1, 1))
    g = (src.tensor.data.T @ src.tensor.data)
    path = tmp_path / "op.tz1"
    write_tensor(path, DenseTensor(g))
    out = tmp_path / "opout"
    assert main(["decompose", str(path), "--groups", "1,1", "--out", str(out)]) == 0
    assert read_json(out / "manifest.json")["algorithm"] == "op"


def test_decompose_triple_manifest_has_pair_map(tmp_path):
    from tenspec import GroupedTensor as GT, decompose_triple

    t = random_tensor((3, 2, 2), 63)
    path = tmp_path / "t3.tz1"
    write_tensor(path, t)
    out = tmp_path / "t3out"
    assert main(["decompose", str(path), "--groups", "1,1,1", "--out", str(out)]) == 0
    manifest = read_json(out / "manifest.json")
    assert manifest["algorithm"] == "triple"
    assert manifest["shapes"] == [[3], [2], [2]]
    pair_map = [tuple(p) for p in manifest["pairMap"]]
    assert len(pair_map) == len(manifest["weights"])
    assert min(min(p) for p in pair_map) == 1  # reported 1-based
    # emitted factor files round-trip bit-exactly against the decomposition
    dec = decompose_triple(GT(t, (1, 1, 1)))
    families = {"u": dec.factors_u, "z": dec.factors_z, "w": dec.factors_w}
    for family in ("u", "z", "w"):
        for m, name in enumerate(manifest["factors"][family]):
            loaded = read_tensor(out / name)
            assert loaded.values.tobytes() == families[family][m].values.tobytes()


def test_decompose_op_on_non_self_adjoint_exits_2(tmp_path):
    path = tmp_path / "asym.tz1"
    write_tensor(path, random_tensor((3, 3), 64))
    code = main(
        ["decompose", str(path), "--groups", "1,1", "--algorithm", "op",
         "--out", str(tmp_path / "x")]
    )
    assert code == 2


def test_decompose_keep_truncates(tmp_path):
    path = tmp_path / "full.tz1"
    write_tensor(path, random_tensor((4, 3), 65))
    out = tmp_path / "kept"
    assert main(
        ["decompose", str(path), "--groups", "1,1", "--keep", "2", "--out", str(out)]
    ) == 0
    manifest = read_json(out / "manifest.json")
    assert len(manifest["weights"]) == 2
    assert len(manifest["factors"]["u"]) == 2
    report = read_json(out / "report.json")
    assert report["reconstruction_relative_error"] > 1e-8  # truncated on purpose


def test_decompose_keep_out_of_range_exit_2(tmp_path):
    path = tmp_path / "k.tz1"
    write_tensor(path, random_tensor((4, 3), 69))
    code = main(
        ["decompose", str(path), "--groups", "1,1", "--keep", "99", "--out", str(tmp_path / "o")]
    )
    assert code == 2


def test_decompose_bad_groups_exit_2(tmp_path):
    path = tmp_path / "g.tz1"
    write_tensor(path, random_tensor((4, 3), 66))
    assert main(["decompose", str(path), "--groups", "1,1,1", "--out", str(tmp_path / "o")]) == 2
    assert main(["decompose", str(path), "--groups", "banana", "--out", str(tmp_path / "o")]) == 2
    assert main(["decompose", str(tmp_path / "missing.tz1"), "--groups", "1,1",
                 "--out", str(tmp_path / "o")]) == 2


# ----------------------------------------------------------------- verify


def make_verified_run(tmp_path, seed=67):
    src = tmp_path / "in.tz1"
    write_tensor(src, random_tensor((4, 3, 2), seed))
    out = tmp_path / "fac"
    assert main(["decompose", str(src), "--groups", "1,2", "--out", str(out)]) == 0
    return src, out / "manifest.json"


def test_verify_round_trip_passes(tmp_path):
    src, manifest = make_verified_run(tmp_path)
    assert main(["verify", str(src), str(manifest)]) == 0
    report = run_verify(src, manifest)
    assert report.passed
    assert report.max_singular_deviation <= 1e-8


def test_verify_triple_round_trip(tmp_path):
    src = tmp_path / "in3.tz1"
    write_tensor(src, random_tensor((3, 3, 2), 68))
    out = tmp_path / "fac3"
    assert main(["decompose", str(src), "--groups", "1,1,1", "--out", str(out)]) == 0
    assert main(["verify", str(src), str(out / "manifest.json")]) == 0


def test_verify_corrupted_weight_fails(tmp_path):
    src, manifest = make_verified_run(tmp_path)
    data = json.loads(manifest.read_text())
    data["weights"][0] *= 1.1
    bad = manifest.parent / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["verify", str(src), str(bad)]) == 1


def test_verify_truncated_factor_exits_2(tmp_path):
    src, manifest = make_verified_run(tmp_path)
    factor = manifest.parent / json.loads(manifest.read_text())["factors"]["u"][0]
    factor.write_bytes(factor.read_bytes()[:-8])
    assert main(["verify", str(src), str(manifest)]) == 2


def test_verify_missing_factor_exits_2(tmp_path):
    src, manifest = make_verified_run(tmp_path)
    factor = manifest.parent / json.loads(manifest.read_text())["factors"]["v"][0]
    factor.unlink()
    assert main(["verify", str(src), str(manifest)]) == 2


def test_verify_bad_manifest_exits_2(tmp_path):
    src, manifest = make_verified_run(tmp_path)
    broken = manifest.parent / "broken.json"
    broken.write_text("{not json")
    assert main(["verify", str(src), str(broken)]) == 2
    nofield = manifest.parent / "nofield.json"
    nofield.write_text(json.dumps({"algorithm": "transform"}))
    assert main(["verify", str(src), str(nofield)]) == 2
