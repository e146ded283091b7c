"""End-to-end checks of the command line front end."""

import json
from fractions import Fraction

import pytest

from diffchar.builders import circle, moebius_kuehnel_torus
from diffchar.cli import canonical_json, main
from diffchar.cohomology import cohomology_generators
from diffchar.lowdegree import gerbe_from_global, star_cover
from diffchar.sparks import Spark, spark_to_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_tables_md_contains_golden_row(capsys):
    code, out = run(capsys, "tables", "--space", "torus", "--format", "md")
    assert code == 0
    assert "(S1)^2 x Q^13 x Z" in out
    assert "S1 x Q^6 x Z^2" in out


def test_json_output_is_deterministic(capsys):
    code1, out1 = run(capsys, "characters", "--space", "rp3")
    code2, out2 = run(capsys, "characters", "--space", "rp3")
    assert code1 == code2 == 0
    assert out1 == out2


def test_kunneth_tables(capsys):
    code, data = run_json(capsys, "tables", "--space", "kunneth:cp2,cp2")
    assert code == 0
    rows = {r["degree"]: r["structure"] for r in data["results"]["table"]}
    assert rows[4] == "(S1)^3"
    assert rows[3] == "Z^3"
    assert rows[8] == "S1"


def test_unknown_space_is_input_error(capsys):
    code = main(["cohomology", "--space", "klein_bottle", "--k", "0"])
    assert code == 3


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_dual_mismatch_gives_exit_one(capsys):
    code, data = run_json(capsys, "dual", "--space", "rp2")
    assert code == 1
    assert data["checks"]["duality_match"] is False
    by_k = {r["degree"]: r["match"] for r in data["results"]["table"]}
    assert by_k[0] is False


def test_verify_small_fixture(capsys):
    code, data = run_json(capsys, "verify", "--space", "circle4", "--trials", "5")
    assert code == 0
    assert data["checks"] and all(data["checks"].values())
    assert data["residuals"]["hodge_max"] == "0"


def test_spark_equiv_distinguishes(tmp_path, capsys):
    K = circle(3)
    half = Spark(K.cochain(0, (Fraction(1, 2), 0, 0)), K.zero_cochain(1))
    zero = Spark(K.zero_cochain(0), K.zero_cochain(1))
    p1, p2 = tmp_path / "half.json", tmp_path / "zero.json"
    p1.write_text(canonical_json(spark_to_json(half)))
    p2.write_text(canonical_json(spark_to_json(zero)))
    code, data = run_json(capsys, "spark", "equiv", "--space", "circle3", str(p1), str(p1))
    assert code == 0 and data["checks"]["equivalent"] is True
    code, data = run_json(capsys, "spark", "equiv", "--space", "circle3", str(p1), str(p2))
    assert code == 1 and data["checks"]["equivalent"] is False


def test_spark_from_cocycle_and_d2(tmp_path, capsys):
    K = moebius_kuehnel_torus()
    free, _ = cohomology_generators(K, 1)
    cofile = tmp_path / "gen.json"
    cofile.write_text(
        canonical_json(
            {"degree": 1, "values": [str(v) for v in free[0].values]}
        )
    )
    sfile = tmp_path / "s.json"
    code, data = run_json(
        capsys, "spark", "new", "--space", "torus",
        "--cocycle", str(cofile), "--out", str(sfile),
    )
    assert code == 0 and data["results"]["written"] == str(sfile)
    code, data = run_json(capsys, "spark", "d2", "--space", "torus", str(sfile))
    assert code == 0
    assert sorted(abs(c) for c in data["results"]["free"]) == [0, 1]


def test_spark_link_rp3(capsys):
    code, data = run_json(capsys, "spark", "link", "--space", "rp3", "--p", "2", "--q", "2")
    assert code == 0
    assert data["results"]["matrix"] == [["1/2"]]


def test_hodge_decompose_exact(tmp_path, capsys):
    cochain = tmp_path / "u.json"
    cochain.write_text(
        canonical_json({"degree": 1, "values": ["1/2", "3", "-2", "0", "1/3", "7"]})
    )
    code, data = run_json(
        capsys, "hodge", "decompose", "--space", "sphere2", "--cochain", str(cochain)
    )
    assert code == 0
    assert data["results"]["method"] == "exact"
    assert set(data["residuals"].values()) == {"0"}


def test_hodge_aj_grid(capsys):
    code, data = run_json(
        capsys, "hodge", "aj", "--space", "torus_grid3", "--src", "0", "--dst", "7"
    )
    assert code == 0
    # values in the default generator basis; a fixed order for a fixed build
    assert sorted(data["results"]["values"]) == ["1/3", "2/3"]


def test_morse_commands(capsys):
    code, data = run_json(capsys, "morse", "homology", "--space", "rp2")
    assert code == 0
    assert data["checks"]["homology_match"] is True
    assert any(r["morse"] == "Z_2" for r in data["results"]["table"])
    code, data = run_json(capsys, "morse", "verify", "--space", "rp2")
    assert code == 0 and data["checks"]["homotopy_identity"] is True


def test_lowdeg_conn_monopole(tmp_path, capsys):
    theta = tmp_path / "theta.json"
    theta.write_text(
        canonical_json({"edges": ["1/4", "0", "0", "0", "1/2", "1/4"]})
    )
    code, data = run_json(
        capsys, "lowdeg", "conn", "--space", "sphere2", "--theta", str(theta)
    )
    assert code == 0
    assert data["results"]["total_flux"] == 1
    assert data["results"]["field_strength"]["values"] == ["1/4", "-1/4", "1/4", "-1/4"]
    assert data["results"]["integral_part"]["values"] == ["0", "1", "0", "0"]
    assert data["checks"]["integer_flux"] is True


def test_lowdeg_flux_alias_and_cochain_form(tmp_path, capsys):
    theta = tmp_path / "theta.json"
    theta.write_text(
        canonical_json({"degree": 1, "values": ["1/4", "0", "0", "0", "1/2", "1/4"]})
    )
    code, data = run_json(
        capsys, "lowdeg", "flux", "--space", "sphere2", "--theta", str(theta)
    )
    assert code == 0
    assert data["command"] == "lowdeg conn"
    assert data["results"]["total_flux"] == 1


def test_lowdeg_circle_round_trip(tmp_path, capsys):
    vals = tmp_path / "vals.json"
    vals.write_text(canonical_json(["0", "1/4", "1/2", "3/4"]))
    code, data = run_json(
        capsys, "lowdeg", "circle", "--space", "circle4", "--values", str(vals)
    )
    assert code == 0
    assert data["checks"]["round_trip"] is True
    assert data["results"]["recovered"] == ["0", "1/4", "1/2", "3/4"]


def test_lowdeg_gerbe_holonomy(tmp_path, capsys):
    gerbe = tmp_path / "t.json"
    gerbe.write_text(
        canonical_json({"degree": 2, "values": ["1/3"] + ["0"] * 13})
    )
    code, data = run_json(
        capsys, "lowdeg", "gerbe", "--space", "torus", "--gerbe", str(gerbe)
    )
    assert code == 0
    assert data["results"]["model"] == "global"
    assert data["results"]["holonomy"] == "1/3"
    assert data["results"]["flat"] is True


def test_lowdeg_gerbe_cover_form(tmp_path, capsys):
    # the same one-third gerbe written as patch data over the star
    # cover; same surface holonomy, no gluing obstruction
    K = moebius_kuehnel_torus()
    g = gerbe_from_global(star_cover(K), K.cochain(2, ("1/3",) + ("0",) * 13))
    payload = {
        "cover": "star",
        "patch": [[str(v) for v in c.values] for c in g.patch_part],
    }
    path = tmp_path / "g.json"
    path.write_text(canonical_json(payload))
    code, data = run_json(
        capsys, "lowdeg", "gerbe", "--space", "torus", "--gerbe", str(path)
    )
    assert code == 0
    assert data["results"]["model"] == "cover"
    assert data["results"]["n_patches"] == 7
    assert data["results"]["holonomy"] == "1/3"
    assert data["results"]["flat"] is True
    assert data["results"]["obstruction"] == {}


def test_lowdeg_gerbe_triple_layer(tmp_path, capsys):
    # pure gluing data on the one triple overlap of the triangle circle
    payload = {"triple": {"0,1,2": ["1/3", "0", "0"]}}
    path = tmp_path / "g.json"
    path.write_text(canonical_json(payload))
    code, data = run_json(
        capsys, "lowdeg", "gerbe", "--space", "circle3", "--gerbe", str(path)
    )
    assert code == 0
    assert data["results"]["flat"] is True
    assert data["results"]["obstruction"] == {}
    assert data["results"]["n_patches"] == 3


def test_lowdeg_gerbe_obstruction_is_input_error(tmp_path):
    # the same gluing datum on the tetrahedron sphere leaves a
    # fractional residue on the quadruple overlap
    payload = {"triple": {"0,1,2": ["1/3", "0", "0", "0"]}}
    path = tmp_path / "g.json"
    path.write_text(canonical_json(payload))
    code = main(["lowdeg", "gerbe", "--space", "sphere2", "--gerbe", str(path)])
    assert code == 3


def test_malformed_json_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(
        ["hodge", "decompose", "--space", "sphere2", "--cochain", str(bad)]
    )
    assert code == 3


def test_build_writes_and_reloads(tmp_path, capsys):
    out = tmp_path / "c4.json"
    code, data = run_json(
        capsys, "build", "--space", "circle4", "--out", str(out)
    )
    assert code == 0
    stored = json.loads(out.read_text())
    assert stored["vertices"] == 4
    code, data = run_json(capsys, "build", "--input", str(out))
    assert code == 0
    assert data["results"]["dimension"] == 1
    assert data["results"]["closed_oriented"] is True


def test_characters_csv(capsys):
    code, out = run(capsys, "characters", "--space", "torus", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("degree,")
    assert len(lines) == 1 + 4
