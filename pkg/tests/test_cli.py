import io
import json
import subprocess
import sys

import pytest

from newton_strata import cli
from newton_strata.checks import CHECKS


def run(*argv):
    buf = io.StringIO()
    code = cli.main(list(argv), out=buf)
    return code, buf.getvalue()


B2 = '{"family":"B","rank":2,"factors":1,"twist":1,"mu":{"l":1}}'


def test_parse_group_spec_examples(tmp_path):
    f = tmp_path / "b3.json"
    f.write_text('{"family":"B","rank":3,"factors":1,"twist":1,"mu":{"l":1}}')
    datum, mu = cli.parse_group_spec(str(f))
    assert datum.label() == "B3x1" and mu.l == 1
    datum, mu = cli.parse_group_spec('{"family":"GSp","rank":2,"mu":"siegel"}')
    assert datum.family == "GSp" and datum.n == 1 and mu.label == "siegel"
    with pytest.raises(cli.InputError):
        cli.parse_group_spec('{"family":"A","rank":1,"twist":2,"mu":{"l":1}}')


@pytest.mark.parametrize("text,needle", [
    ('{"family":"B"}', "rank"),
    ('{"family":"B","rank":"2"}', "wrong type"),
    ('{"family":"B",\n"rank":2,,}', "line 2"),
    ('[1,2]', "JSON object"),
    ('{"family":"B","rank":2,"mu":"bogus"}', "mu"),
])
def test_parse_errors_have_diagnostics(tmp_path, text, needle):
    f = tmp_path / "bad.json"
    f.write_text(text)
    with pytest.raises(cli.InputError, match=needle):
        cli.parse_group_spec(str(f))


def test_missing_file_is_usage_error():
    assert run("strata", "/nonexistent/spec.json")[0] == cli.EXIT_USAGE


def test_strata_csv():
    code, out = run("strata", B2, "--format", "csv")
    assert code == cli.EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "nu,polygon,representative,count"
    assert lines[1:] == [
        "0:0,0:5,-1:2,4",
        "1/2:1/2,-1/2:2;0:1;1/2:2,2:1,2",
        "1:0,-1:1;0:3;1:1,1:2,2",
    ]


def test_strata_vertices_and_jsonl():
    code, out = run("strata", B2, "--format", "jsonl", "--vertices")
    rows = [json.loads(l) for l in out.splitlines()]
    assert len(rows) == 3 and rows[2]["vertices"] == "0:0;1:-1;4:-1;5:0"


def test_strata_gsp_rows():
    code, out = run("strata", '{"family":"GSp","rank":2,"mu":"siegel"}', "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 4


def test_strata_byte_stable_across_threads():
    spec = '{"family":"C","rank":5,"factors":2,"mu":{"l":1}}'
    a = run("strata", spec, "--format", "csv", "--threads", "1")[1]
    b = run("strata", spec, "--format", "csv", "--threads", "2")[1]
    c = run("strata", spec, "--format", "csv", "--threads", "1")[1]
    assert a == b == c


def test_full_flag_matches_composite():
    spec = '{"family":"B","rank":2,"factors":2,"mu":{"l":1}}'
    comp = run("strata", spec, "--format", "csv")[1].splitlines()
    full = run("strata", spec, "--format", "csv", "--full")[1].splitlines()
    strip = lambda rows: [",".join(r.split(",")[:2]) for r in rows]
    assert strip(comp) == strip(full)


def test_resource_bound_exit(monkeypatch):
    monkeypatch.setenv("NEWTON_STRATA_MAX_ELEMENTS", "5")
    assert run("strata", B2)[0] == cli.EXIT_BOUND


def test_polygon_command():
    op = '{"size":4,"permutation":[2,3,4,1],"exponents":[0,0,2,2]}'
    code, out = run("polygon", op)
    assert code == 0 and "polygon: 1:4" in out
    paired = '{"permutation":[1,2],"exponents":[1,0],"pairing":[2,1]}'
    assert run("polygon", paired)[0] == cli.EXIT_FAIL
    code, out = run("polygon", '{"permutation":[1,2],"exponents":[0,1],"pairing":[2,1],"similitude_slope":1}',
                    "--format", "jsonl")
    assert code == 0 and json.loads(out)["pairing_symmetric"] is True
    assert run("polygon", '{"permutation":[1,1],"exponents":[0,0]}')[0] == cli.EXIT_USAGE


def test_basic_command():
    code, out = run("basic", '{"family":"D","rank":3}', "--format", "jsonl")
    rec = json.loads(out)
    assert code == 0 and rec["basic"] is True and rec["nu"] == "0:0:0"


def test_verify_known_and_unknown():
    code, out = run("verify", "integer-slope")
    assert code == 0 and out.startswith("PASS integer-slope")
    assert run("verify", "no-such-check")[0] == cli.EXIT_USAGE
    code, out = run("verify", "manin", "--max-rank", "3")
    assert code == 0 and "expected=[2, 3, 5] actual=[2, 3, 5]" in out


def test_verify_failure_exit():
    # l = 2 with a single factor is ill-posed, so the check reports a failure
    code, out = run("verify", "strata-count-l2", "--max-rank", "2", "--factors", "1")
    assert code == cli.EXIT_FAIL and out.startswith("FAIL")


def test_every_check_is_registered():
    assert set(CHECKS) == {
        "strata-count-l1", "strata-count-l2", "integer-slope", "manin", "basic-elements",
        "admissibility", "dual-oracle", "pairing-symmetry", "splitting", "operator-invariants",
    }


def test_split_command():
    rec = '{"p":5,"precision":3,"blocks":[1,1],"slopes":[0,1],"phi":[[1,0],[0,5]],"u":[[1,0],[1,1]]}'
    code, out = run("split", rec, "--format", "jsonl")
    data = json.loads(out)
    assert code == 0 and data["residual_valuation"] >= 3
    assert data["h"][1][0] == "94"
    bad = '{"p":5,"precision":3,"blocks":[1,1],"slopes":[0,1],"phi":[[1,0],[0,5]],"u":[[1,1],[0,1]]}'
    assert run("split", bad)[0] == cli.EXIT_USAGE


def test_argparse_usage_exit():
    with pytest.raises(SystemExit) as exc:
        cli.main(["strata"])
    assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "newton_strata", "strata", B2, "--format", "csv"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "nu,polygon,representative,count"
    assert "wall time" in res.stderr
