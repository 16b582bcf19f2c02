import json
import math

import numpy as np

from chshkit.cli import main
from chshkit.configio import load_strategy, save_strategy, strategy_config
from chshkit.game import NSBox, box_of_strategy, expected_score
from chshkit.tsirelson import TSIRELSON_SCORE, canonical_setup


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def report_of(capsys):
    out = {}
    for line in capsys.readouterr().out.strip().splitlines():
        key, _, value = line.partition("=")
        out[key] = value
    return out


def test_score_ns_box_half(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "ns_box", "e": 0.5})
    assert main(["score", "--config", cfg]) == 0
    report = report_of(capsys)
    assert float(report["exact_win_probability"]) == 0.75
    assert float(report["exact_score"]) == 0.5
    assert report["ns_check"] == "pass"


def test_score_pr_box(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "ns_box", "e": 1.0})
    assert main(["score", "--config", cfg]) == 0
    assert float(report_of(capsys)["exact_win_probability"]) == 1.0


def test_score_with_inputs_flag(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "deterministic", "q_of_x": [0, 0], "r_of_y": [0, 0]})
    assert main(["score", "--config", cfg, "--inputs", "1,0,0,0"]) == 0
    assert float(report_of(capsys)["exact_score"]) == 1.0


def test_score_out_of_range_parameter_is_invariant_violation(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "ns_box", "e": 1.5})
    assert main(["score", "--config", cfg]) == 3
    assert "[-1, 1]" in capsys.readouterr().err


def test_score_missing_field_is_parse_error(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "ns_box"})
    assert main(["score", "--config", cfg]) == 2
    assert "missing field 'e'" in capsys.readouterr().err


def test_score_invalid_json_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "ns_box",\n  "e": }')
    assert main(["score", "--config", str(path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_score_missing_file_is_io_error(tmp_path, capsys):
    assert main(["score", "--config", str(tmp_path / "nope.json")]) == 4


def test_report_values_roundtrip_to_full_precision(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "ns_box", "e": 1 / math.sqrt(2)})
    assert main(["score", "--config", cfg]) == 0
    report = report_of(capsys)
    exact = expected_score(box_of_strategy(NSBox(1 / math.sqrt(2))))
    assert float(report["exact_score"]) == exact


def test_simulate_deterministic_rounds(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "deterministic", "q_of_x": [0, 0], "r_of_y": [0, 0]})
    out = tmp_path / "records.csv"
    assert main(["simulate", "--config", cfg, "--n", "8", "--seed", "1", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "round_index,x,y,q,r,win"
    assert len(lines) == 9
    for line in lines[1:]:
        idx, x, y, q, r, win = (int(v) for v in line.split(","))
        assert (q, r) == (0, 0)
        assert win == (1 if x * y == 0 else 0)
    report = report_of(capsys)
    assert report["n_rounds"] == "8"
    assert report["seed"] == "1"


def test_simulate_reruns_byte_identical(tmp_path):
    cfg = write_json(tmp_path / "s.json", {"kind": "ns_box", "e": 0.5})
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--config", cfg, "--n", "5000", "--seed", "77"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_simulate_near_ceiling_box_converges(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "ns_box", "e": 1 / math.sqrt(2)})
    out = tmp_path / "r.csv"
    assert main(["simulate", "--config", cfg, "--n", "100000", "--seed", "3", "--out", str(out)]) == 0
    report = report_of(capsys)
    assert abs(float(report["empirical_win_rate"]) - math.cos(math.pi / 8) ** 2) < 0.005


def test_simulate_unwritable_path(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "ns_box", "e": 0.0})
    missing = tmp_path / "no" / "such" / "dir" / "r.csv"
    assert main(["simulate", "--config", cfg, "--n", "4", "--seed", "1", "--out", str(missing)]) == 4


def test_audit_ns_box_passes(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "ns_box", "e": 0.9})
    assert main(["audit", "--config", cfg]) == 0
    assert report_of(capsys)["ns_check"] == "pass"


def test_audit_handwritten_signaling_box(tmp_path, capsys):
    # Alice echoes Bob's input: P(q=y, r | x, y) = 1/2.
    table = np.zeros((2, 2, 2, 2))
    for x in (0, 1):
        for y in (0, 1):
            for r in (0, 1):
                table[y, r, x, y] = 0.5
    cfg = write_json(tmp_path / "s.json", {"kind": "box", "table": table.tolist()})
    assert main(["audit", "--config", cfg]) == 0
    report = report_of(capsys)
    assert report["ns_check"] == "fail"
    assert report["ns_witness_side"] == "alice"
    assert report["ns_witness_remote_settings"] == "0,1"
    assert float(report["ns_witness_delta"]) == 1.0


def test_audit_quantum_reports_margin_and_factorization(tmp_path, capsys):
    cfg_path = tmp_path / "q.json"
    save_strategy(canonical_setup(), cfg_path)
    assert main(["audit", "--config", str(cfg_path)]) == 0
    report = report_of(capsys)
    assert report["ns_check"] == "pass"
    assert report["factorization"] == "pass"
    assert float(report["bound_margin"]) >= -1e-9


def test_quantum_config_roundtrip(tmp_path):
    setup = canonical_setup()
    path = tmp_path / "q.json"
    save_strategy(setup, path)
    loaded = load_strategy(path)
    assert np.array_equal(loaded.state, setup.state)
    for name in ("a0", "a1", "b0", "b1"):
        assert np.array_equal(getattr(loaded, name), getattr(setup, name))
    assert strategy_config(loaded) == strategy_config(setup)


def test_quantum_config_with_non_unitary_matrix_is_invariant_violation(tmp_path, capsys):
    setup = canonical_setup()
    payload = strategy_config(setup)
    payload["a0"] = [[[1.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
    cfg = write_json(tmp_path / "q.json", payload)
    assert main(["score", "--config", cfg]) == 3
    assert "unitary" in capsys.readouterr().err


def test_optimize_writes_reloadable_config_and_trace(tmp_path, capsys):
    out = tmp_path / "best.json"
    args = ["optimize", "--dims", "2,2", "--restarts", "3", "--seed", "7", "--out", str(out)]
    assert main(args) == 0
    report = report_of(capsys)
    best = float(report["best_score"])
    assert best <= TSIRELSON_SCORE + 1e-9
    trace = (tmp_path / "best.json.trace.csv").read_text().splitlines()
    assert trace[0] == "restart,score,best_so_far"
    assert len(trace) == 4

    assert main(["score", "--config", str(out)]) == 0
    rescored = float(report_of(capsys)["exact_score"])
    assert abs(rescored - best) <= 1e-10


def test_optimize_rerun_identical_trace(tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    base = ["optimize", "--dims", "2,2", "--restarts", "2", "--seed", "5"]
    assert main(base + ["--out", str(out1)]) == 0
    assert main(base + ["--out", str(out2)]) == 0
    assert (tmp_path / "a.json.trace.csv").read_text() == (tmp_path / "b.json.trace.csv").read_text()
    assert out1.read_text() == out2.read_text()


def test_process_qcor(tmp_path, capsys):
    def rot(theta):
        c, s = math.cos(theta), math.sin(theta)
        return [[[c, 0.0], [-s, 0.0]], [[s, 0.0], [c, 0.0]]]

    cfg = write_json(
        tmp_path / "m.json",
        {"u_total": rot(math.pi / 4), "u_first": rot(math.pi / 8)},
    )
    assert main(["process", "--tool", "qcor", "--config", cfg]) == 0
    report = report_of(capsys)
    result = np.array(json.loads(report["result"]))
    assert np.max(np.abs(result - [[-0.25, 0.25], [0.25, -0.25]])) <= 1e-12


def test_process_dilate(tmp_path, capsys):
    cfg = write_json(tmp_path / "m.json", {"gamma": [[0.5, 0.5], [0.5, 0.5]]})
    assert main(["process", "--tool", "dilate", "--config", cfg, "--seed", "1"]) == 0
    report = report_of(capsys)
    assert report["verdict"] == "found"
    assert float(report["residual"]) <= 1e-8
    result = np.array([[complex(re, im) for re, im in row] for row in json.loads(report["result"])])
    assert np.max(np.abs(np.abs(result) ** 2 - 0.5)) <= 1e-8


def test_process_divide_not_divisible(tmp_path, capsys):
    cfg = write_json(
        tmp_path / "m.json",
        {"gamma_total": [[1.0, 0.0], [0.0, 1.0]], "gamma_first": [[0.5, 0.5], [0.5, 0.5]]},
    )
    assert main(["process", "--tool", "divide", "--config", cfg]) == 0
    report = report_of(capsys)
    assert report["verdict"] == "not_divisible"
    assert float(report["residual"]) > 0.4


def test_process_divide_success(tmp_path, capsys):
    first = [[0.9, 0.2], [0.1, 0.8]]
    total = (np.array([[0.7, 0.4], [0.3, 0.6]]) @ np.array(first)).tolist()
    cfg = write_json(tmp_path / "m.json", {"gamma_total": total, "gamma_first": first})
    assert main(["process", "--tool", "divide", "--config", cfg]) == 0
    report = report_of(capsys)
    assert report["verdict"] == "divisible"
    quotient = np.array(json.loads(report["result"]))
    assert np.max(np.abs(quotient - [[0.7, 0.4], [0.3, 0.6]])) <= 1e-8


def test_process_invariant_violation(tmp_path, capsys):
    cfg = write_json(tmp_path / "m.json", {"gamma": [[0.5, 0.6], [0.5, 0.4]]})
    assert main(["process", "--tool", "dilate", "--config", cfg]) == 3
    assert "doubly stochastic" in capsys.readouterr().err


def test_unknown_kind_is_parse_error(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"kind": "telepathy"})
    assert main(["score", "--config", cfg]) == 2
