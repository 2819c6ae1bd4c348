"""End-to-end checks of the command-line interface."""

import json
import os

import pytest

from pdk import cli
from pdk.formats import dumps, graph_to_json, system_to_json
from pdk.geometry import ContactSegment, ContactSegmentSystem, PseudoDisk, PseudoDiskSystem
from pdk.graphs import IntersectionGraph


def rect(id_, x0, y0, x1, y1):
    return PseudoDisk(id_, [(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(dumps(doc))
    return str(path)


def run(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, argv):
    code, out = run(capsys, argv)
    return code, json.loads(out)


@pytest.fixture
def edgeless(tmp_path):
    system = PseudoDiskSystem([
        rect("a", 0, 0, 10, 10),
        rect("b", 100, 0, 110, 10),
        rect("c", 200, 0, 210, 10),
    ])
    return write(tmp_path, "edgeless.json", system_to_json(system))


@pytest.fixture
def five_cycle(tmp_path):
    g = IntersectionGraph(list(range(5)), [(i, (i + 1) % 5) for i in range(5)])
    return write(tmp_path, "c5.json", graph_to_json(g))


def test_solve_fvs_on_an_edgeless_system_with_zero_budget(capsys, edgeless):
    code, doc = run_json(capsys, ["solve", "fvs", "--input", edgeless, "--k", "0"])
    assert code == 0
    assert doc["answer"] == "yes"
    assert doc["solution"] == []
    assert set(doc["stats"]) == {"branches", "rule_hits", "kernel_size", "width", "p"}


def test_oracle_fvs_on_a_five_cycle(capsys, five_cycle):
    code, doc = run_json(capsys, ["oracle", "fvs", "--input", five_cycle, "--k", "0"])
    assert code == 0
    assert doc == {"answer": "no", "opt": 1, "witness": ["0"]}


def test_oracle_th_on_a_five_cycle(capsys, five_cycle):
    code, doc = run_json(capsys, ["oracle", "th", "--input", five_cycle, "--k", "0"])
    assert code == 0
    assert doc["answer"] == "yes"
    assert doc["opt"] == 0


def test_solve_th_accepts_graph_input(capsys, tmp_path):
    g = IntersectionGraph(list(range(4)),
                          [(a, b) for a in range(4) for b in range(a + 1, 4)])
    path = write(tmp_path, "k4.json", graph_to_json(g))
    code, doc = run_json(capsys, ["solve", "th", "--input", path, "--k", "1"])
    assert code == 0
    assert doc["answer"] == "no"
    code, doc = run_json(capsys, ["solve", "th", "--input", path, "--k", "2"])
    assert code == 0
    assert doc["answer"] == "yes"
    assert len(doc["solution"]) <= 2


def test_gen_validate_solve_round_trip(capsys, tmp_path):
    out = str(tmp_path / "sys.json")
    code, _ = run(capsys, ["gen", "squares", "--n", "9", "--seed", "5",
                           "--out", out])
    assert code == 0 and os.path.exists(out)
    code, doc = run_json(capsys, ["validate", out])
    assert code == 0 and doc["ok"] and doc["issues"] == []
    code, solved = run_json(capsys, ["solve", "fvs", "--input", out,
                                     "--k", "4", "--cert"])
    assert code == 0
    if solved["answer"] == "yes":
        assert solved["certified"] is True


def test_gen_is_deterministic_for_a_fixed_seed(capsys):
    code1, out1 = run(capsys, ["gen", "mixed", "--n", "8", "--seed", "11"])
    code2, out2 = run(capsys, ["gen", "mixed", "--n", "8", "--seed", "11"])
    assert code1 == code2 == 0
    assert out1 == out2
    assert json.loads(out1)["format"] == "pds-1"


def test_gen_contact_emits_css(capsys, tmp_path):
    out = str(tmp_path / "css.json")
    code, text = run(capsys, ["gen", "contact", "--n", "7", "--seed", "2",
                              "--out", out])
    assert code == 0
    assert json.loads(text)["format"] == "css-1"
    code, doc = run_json(capsys, ["validate", out])
    assert code == 0 and doc["ok"]


def test_solve_agrees_with_oracle_on_contact_input(capsys, tmp_path):
    out = str(tmp_path / "css.json")
    run(capsys, ["gen", "contact", "--n", "8", "--seed", "4", "--out", out])
    _, truth = run_json(capsys, ["oracle", "fvs", "--input", out, "--k", "0"])
    opt = truth["opt"]
    for k, want in ((max(0, opt - 1), "no"), (opt, "yes")):
        if k == opt and want == "no":
            continue
        code, doc = run_json(capsys, ["solve", "fvs", "--input", out,
                                      "--k", str(k)])
        assert code == 0
        if k < opt:
            assert doc["answer"] == "no"
        else:
            assert doc["answer"] == "yes"


def test_graph_only_flag_matches_the_geometric_pipeline(capsys, tmp_path):
    out = str(tmp_path / "sys.json")
    run(capsys, ["gen", "disks", "--n", "10", "--seed", "9", "--out", out])
    for k in (1, 2, 3):
        _, a = run_json(capsys, ["solve", "fvs", "--input", out, "--k", str(k)])
        _, b = run_json(capsys, ["solve", "fvs", "--input", out, "--k", str(k),
                                 "--graph-only"])
        assert a["answer"] == b["answer"]


def test_missing_input_file_is_a_usage_error(capsys):
    code = cli.main(["solve", "fvs", "--input", "/nonexistent.json", "--k", "1"])
    assert code == 2


def test_malformed_json_reports_position_and_exits_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"format": "pds-1", "disks": [}')
    code = cli.main(["solve", "fvs", "--input", str(path), "--k", "1"])
    err = capsys.readouterr().err
    assert code == 2
    assert "line 1" in err and "col" in err


def test_missing_required_flag_is_a_usage_error(capsys, edgeless):
    assert cli.main(["solve", "fvs", "--input", edgeless]) == 2
    capsys.readouterr()


def test_conflicting_flags_are_a_usage_error(capsys, edgeless):
    code = cli.main(["solve", "fvs", "--input", edgeless, "--k", "1",
                     "--no-kernel", "--fallback-k"])
    assert code == 2
    capsys.readouterr()


def test_oversized_oracle_input_is_a_refusal(capsys, tmp_path):
    g = IntersectionGraph(list(range(25)),
                          [(i, (i + 1) % 25) for i in range(25)])
    path = write(tmp_path, "c25.json", graph_to_json(g))
    code = cli.main(["oracle", "fvs", "--input", path, "--k", "1"])
    assert code == 3
    capsys.readouterr()


def test_validate_reports_crossing_segments_without_failing(capsys, tmp_path):
    css = ContactSegmentSystem([
        ContactSegment("p", (0, 0), (10, 10)),
        ContactSegment("q", (0, 10), (10, 0)),
    ])
    from pdk.formats import contact_to_json
    path = write(tmp_path, "cross.json", contact_to_json(css))
    code, doc = run_json(capsys, ["validate", path])
    assert code == 0
    assert doc["ok"] is False
    assert doc["issues"][0]["code"] == "segments-cross"


def test_validate_passes_graph_files_through(capsys, five_cycle):
    code, doc = run_json(capsys, ["validate", five_cycle])
    assert code == 0 and doc["ok"] and doc["kind"] == "graph"


def test_kernel_stats_reports_rule_hits_and_ratios(capsys, tmp_path):
    out = str(tmp_path / "sys.json")
    run(capsys, ["gen", "squares", "--n", "10", "--seed", "3", "--out", out])
    code, doc = run_json(capsys, ["kernel-stats", "--input", out, "--k", "3"])
    assert code == 0
    assert set(doc) >= {"p", "k", "n", "branches", "rule_hits", "tuples"}
    assert set(doc["rule_hits"]) == {"R%d" % i for i in range(11)}
    for row in doc["tuples"]:
        assert set(row) >= {"initial_n", "final_n", "size_ratio", "mode"}


def test_bench_runs_are_byte_identical_for_the_same_seed(capsys):
    args = ["bench", "--suite", "safeness", "--seed", "7", "--scale", "0.12"]
    code1, out1 = run(capsys, args)
    code2, out2 = run(capsys, args)
    assert code1 == code2 == 0
    assert out1 == out2
    assert "| rule |" in out1 and "| R8 |" in out1


def test_bench_writes_report_and_csv(capsys, tmp_path):
    out = str(tmp_path / "bench")
    code, text = run(capsys, ["bench", "--suite", "kernel", "--seed", "0",
                              "--scale", "0.25", "--out", out])
    assert code == 0
    md = (tmp_path / "bench" / "report.md").read_text()
    csv = (tmp_path / "bench" / "data.csv").read_text()
    assert md == text
    assert csv.splitlines()[0] == "suite,row,field,value"
    assert any(line.startswith("kernel,summary,") for line in csv.splitlines())


def test_negative_k_is_rejected_by_the_parser(capsys, edgeless):
    assert cli.main(["solve", "fvs", "--input", edgeless, "--k", "-1"]) == 2
    capsys.readouterr()
