import json
from fractions import Fraction

import pytest
from hypothesis import given, reject, settings
from hypothesis import strategies as st

from hypertoric import cli, io
from hypertoric.config import FlatConfiguration, FlatFamily, ImQuaternion, TailLaw, builtin_goto
from hypertoric.errors import SchemaError

FOUR_LINES = {"rank": 2, "families": [
    {"generator": [1, 0], "prefix": [[0, 0, 0], [2, 0, 0]]},
    {"generator": [0, 1], "prefix": [[0, 0, 0]]},
    {"generator": [1, 1], "prefix": [[1, 0, 0]]},
]}


def write(path, obj):
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# --- io ---------------------------------------------------------------------


rational = st.fractions(min_value=-20, max_value=20, max_denominator=6)


@st.composite
def configs(draw):
    fams = []
    for gen in ((1, 0), (0, 1), (1, -1)):
        levels = draw(st.lists(rational, min_size=1, max_size=4, unique=True))
        cx = draw(st.sampled_from([0, Fraction(1, 2)]))
        tail = None
        if gen == (1, 0) and draw(st.booleans()):
            tail = TailLaw("power", c=Fraction(1, 2), delta=2, lambda0=0, sign=draw(st.sampled_from([1, -1])))
        try:
            fams.append(FlatFamily(gen, tuple(ImQuaternion(l, cx, 0) for l in levels), tail))
        except SchemaError:
            reject()  # tail level collides with a prefix level
    return FlatConfiguration(2, tuple(fams))


@settings(max_examples=100, deadline=None)
@given(configs())
def test_config_round_trip(cfg):
    text = io.dump_config(cfg)
    back = io.config_from_dict(json.loads(text))
    assert back == cfg
    assert io.dump_config(back) == text


def test_yaml_loading(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("rank: 1\nfamilies:\n  - generator: [1]\n    prefix: [[1/2, 0, 0], [-1, 0, 0]]\n")
    cfg = io.load_config(p)
    assert cfg.families[0].prefix[0].re == Fraction(1, 2)


@pytest.mark.parametrize("data,match", [
    ({"families": []}, r"config\.rank: missing"),
    ({"rank": 1, "families": [{"generator": [1], "prefix": [[0, 0]]}]}, r"families\[0\]\.prefix\[0\]"),
    ({"rank": 1, "families": [{"generator": [1], "prefix": [["x", 0, 0]]}]}, r"families\[0\]\.prefix\[0\]"),
    ({"rank": 1, "families": [{"generator": [2], "prefix": [[0, 0, 0]]}]}, r"families\[0\]"),
    ({"rank": 1, "families": [{"generator": [1], "tail": {"kind": "power", "q": 1}}]}, "unknown keys"),
])
def test_config_diagnostics(data, match):
    with pytest.raises(SchemaError, match=match):
        io.config_from_dict(data)


def test_malformed_json_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "rank": 2,\n  "families": [\n')
    with pytest.raises(SchemaError, match="line"):
        io.load_config(p)


def test_load_points(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("a1,a2,re_b1,im_b2\n0.5,1/2,1,2\n")
    pt, = io.load_points(p, 2)
    assert pt.a == (0.5, Fraction(1, 2)) and pt.b == (1, 2j)
    p.write_text("1,2\n1,2,3,4,5,6\n")
    short, full = io.load_points(p, 2)
    assert short.b == (0, 0) and full.b == (3 + 5j, 4 + 6j)
    p.write_text("1,2,3\n")
    with pytest.raises(SchemaError, match="line 1"):
        io.load_points(p, 2)


def test_load_periodic_and_problem(tmp_path):
    rank, fams = io.load_periodic(write(tmp_path / "f.json", {
        "rank": 2, "periodic_families": [{"generator": [1, 0]},
                                         {"generator": [0, 1], "spacing": 2, "cx_level": [0.1, 0]}]}))
    assert rank == 2 and fams[1].spacing == 2 and fams[1].cx_level == 0.1
    with pytest.raises(SchemaError):
        io.load_periodic(write(tmp_path / "g.json", {"rank": 1, "periodic_families": [{"generator": [1, 0]}]}))
    prob = io.load_moment_problem(write(tmp_path / "m.json", {
        "z": [1, [0, 1]], "w": [1, 1], "lambda1": [0, 0], "target": [0], "generators": [[1], [1]]}))
    assert prob.z == (1, 1j) and len(prob.kernel_basis) == 1
    with pytest.raises(SchemaError):
        io.load_moment_problem(write(tmp_path / "n.json", {"z": [1], "w": [1], "lambda1": [0], "target": []}))


def test_run_manifest_validation():
    m = io.RunManifest("eval", {"config": "c.json"}, {"trunc": 3}, 7)
    assert m.as_dict()["seed"] == 7
    with pytest.raises(SchemaError):
        io.RunManifest("frobnicate")
    with pytest.raises(SchemaError):
        io.RunManifest("identities", parameters={"tol": 0})
    with pytest.raises(SchemaError):
        io.RunManifest("validate", parameters={"window": -1})


def test_render_report_is_sorted_json():
    text = io.render_report(io.RunManifest("validate"), {"z": Fraction(1, 3), "a": 1j})
    data = json.loads(text)
    assert data["z"] == "1/3" and data["a"] == [0.0, 1.0]
    assert list(data) == sorted(data)


# --- cli --------------------------------------------------------------------


def test_export_goto(tmp_path, capsys):
    out = tmp_path / "goto.json"
    code, _, _ = run(["export-builtin", "goto", "--n", "2", "--K", "8", "--out", str(out)], capsys)
    assert code == 0
    cfg = io.load_config(out)
    assert len(set(cfg.generators)) == 3
    code, text, _ = run(["export-builtin", "goto"], capsys)
    assert code == 0 and io.config_from_dict(json.loads(text)) == builtin_goto(2, 8)


def test_validate_exit_codes(tmp_path, capsys):
    good = write(tmp_path / "fig.json", FOUR_LINES)
    code, out, err = run(["validate", good, "--window", "5"], capsys)
    assert code == 0 and json.loads(out)["status"] == "PASS" and err.startswith("PASS")

    bad = write(tmp_path / "det2.json", {"rank": 2, "families": [
        {"generator": [1, 1], "prefix": [[0, 0, 0]]}, {"generator": [1, -1], "prefix": [[0, 0, 0]]}]})
    code, out, err = run(["validate", bad], capsys)
    assert code == 1 and "det = -2" in err

    broken = write(tmp_path / "broken.json", '{\n "rank": 2,\n "families": [}\n')
    code, out, err = run(["validate", broken], capsys)
    assert code == 2 and "line 3" in err and out == ""


def test_cli_determinism(tmp_path, capsys):
    cfg = tmp_path / "goto.json"
    run(["export-builtin", "goto", "--out", str(cfg)], capsys)
    outputs = []
    for _ in range(2):
        code, out, _ = run(["--seed", "3", "identities", str(cfg), "--trunc", "3", "--samples", "3"], capsys)
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]
    assert json.loads(outputs[0])["manifest"]["seed"] == 3


def test_topology_and_plot_data(tmp_path, capsys):
    cfg = write(tmp_path / "fig.json", FOUR_LINES)
    plot = tmp_path / "plot.json"
    code, out, err = run(["topology", cfg, "--box", "5", "--plot-data", str(plot)], capsys)
    assert code == 0
    body = json.loads(out)
    assert len(body["homotopy"]["polytopes"]) == 2 and len(body["chambers"]) == 10
    assert len(json.loads(plot.read_text())["bounded_chambers"]) == 2
    code, _, err = run(["topology", cfg, "--box", "1"], capsys)
    assert code == 2


def test_eval_with_csv(tmp_path, capsys):
    cfg = write(tmp_path / "one.json", {"rank": 1, "families": [{"generator": [1], "prefix": [[0, 0, 0]]}]})
    pts = tmp_path / "p.csv"
    pts.write_text("0.5\n1.5\n")
    table = tmp_path / "out.csv"
    code, out, _ = run(["eval", cfg, str(pts), "--gram", "--csv", str(table)], capsys)
    assert code == 0
    rows = json.loads(out)["results"]
    assert rows[0]["phi"] == [[1.0]] and rows[0]["exact"]
    assert table.read_text().splitlines()[0].startswith("point,phi_11")
    pts.write_text("0\n")
    code, _, err = run(["eval", cfg, str(pts)], capsys)
    assert code == 2 and "singularity" in err


def test_solve_moment_cli(tmp_path, capsys):
    prob = write(tmp_path / "m.json", {"z": [1, 1], "w": [1, 1], "lambda1": [1, -1], "target": [0],
                                       "generators": [[1], [1]]})
    code, out, _ = run(["solve-moment", prob], capsys)
    assert code == 0 and json.loads(out)["residual"] <= 1e-10
    stuck = write(tmp_path / "s.json", {"z": [1, 1], "w": [0, 0], "lambda1": [0, 0], "target": [1],
                                        "generators": [[1], [1]]})
    code, _, err = run(["solve-moment", stuck], capsys)
    assert code == 2 and "unbounded" in err


def test_periodic_cli(tmp_path, capsys):
    fams = write(tmp_path / "f.json", {"rank": 1, "periodic_families": [{"generator": [1]}]})
    pts = tmp_path / "p.csv"
    pts.write_text("a1,re_b1\n0.3,0.4\n")
    code, out, _ = run(["periodic", fams, str(pts), "--trunc", "2000"], capsys)
    assert code == 0
    row = json.loads(out)["results"][0]
    assert row["periodicity_residuals"][0] <= 2 * row["tail_bound"]
    assert row["fibration"]["fiber"] == "generic fiber T^2"
    pts.write_text("0.3,1.5,0\n")
    code, _, _ = run(["periodic", fams, str(pts)], capsys)
    assert code == 2


def test_bad_arguments(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["identities", "x.json", "--tol", "-1"])
    assert info.value.code == 2
