import csv
import io
import json
import subprocess
import sys

import pytest

from weakstab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog")
    names = [s["name"] for s in json.loads(out)["systems"]]
    assert code == 0 and names == ["free_particle", "l4_linear", "cherry", "variation_like"]


@pytest.mark.parametrize("argv, verdict", [
    (["l4_linear"], "WEAKLY_UNSTABLE"),
    (["cherry", "--sigma", "1"], "UNSTABLE_WITH_ASYMPTOTIC_MOTION"),
    (["variation_like", "--sigma", "1"], "WEAKLY_UNSTABLE"),
])
def test_analyze_verdicts(capsys, argv, verdict):
    code, out, _ = run(capsys, "analyze", *argv)
    report = json.loads(out)
    assert code == 0 and report["composite_verdict"] == verdict
    assert {"spectrum", "classification", "certificate"} <= set(report)


def test_analyze_variation_isochrony_section(capsys):
    _, out, _ = run(capsys, "analyze", "variation_like", "--sigma", "1")
    iso = json.loads(out)["isochrony"]
    assert iso["residual"] == "-20/3" and iso["verdict"]["verdict"] == "UNSTABLE"


def test_integrate_csv(capsys):
    code, out, _ = run(capsys, "integrate", "l4_linear", "--initial", "1,0,0,0", "--t1", "1", "--step", "0.1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["t", "q1", "q2", "p1", "p2", "H"] and len(rows) == 12


def test_integrate_json(capsys):
    code, out, _ = run(capsys, "integrate", "free_particle", "--initial", "0,1", "--t1", "5", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["terminated_by"] == "time_end"
    assert d["final_state"] == pytest.approx([5.0, 1.0], abs=1e-12)


def test_numerical_failure_exit_code(capsys):
    code, out, _ = run(capsys, "integrate", "cherry", "--initial", "2,2,2,2", "--step", "2", "--t1", "5")
    d = json.loads(out)
    assert code == 3 and d["error"] == "CorrectorFailure" and d["terminated_by"] == "corrector_failure"


def test_probe_and_certify(capsys):
    code, out, _ = run(capsys, "probe", "l4_linear", "--epsilons", "0.5,0.1")
    assert code == 0 and json.loads(out)["verdict"] == "UNSTABLE_WITNESSED"
    code, out, _ = run(capsys, "certify", "cherry")
    assert code == 0 and json.loads(out)["verdict"] == "NOT_CERTIFIED"


def test_period_scan(capsys):
    code, out, _ = run(capsys, "period-scan", "--g-coeffs", "1,1", "--amplitudes", "0.1,0.2", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["amplitude", "period", "method"]
    code, out, _ = run(capsys, "period-scan", "--g-coeffs", "1,1,10/9", "--amplitudes", "0.1")
    assert code == 0 and json.loads(out)["verdict"]["residual"] == "0"


@pytest.mark.parametrize("argv", [
    ["analyze", "pendulum"],
    ["integrate", "l4_linear", "--t0", "1", "--t1", "1"],
    ["integrate", "l4_linear", "--step", "-1"],
    ["integrate", "l4_linear", "--initial", "1,0"],
    ["probe", "l4_linear", "--epsilons", "2"],
    ["period-scan", "--g-coeffs", "1,1", "--amplitudes", "0.9"],
    ["period-scan", "--g-coeffs", "0,1"],
    ["period-scan", "--sigma", "1", "--g-coeffs", "1"],
    ["certify", "cherry", "--samples", "5"],
    ["plot", "cherry-asymptotic", "--coords", "q1,q1"],
    ["plot", "cherry-asymptotic", "--t0", "-1", "--t1", "-5"],
    ["integrate", "l4_linear", "--initial", "a,b"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == 2


def test_zero_span_plot_writes_nothing(tmp_path, capsys):
    out = tmp_path / "fig.svg"
    code = main(["plot", "cherry-asymptotic", "--t0", "-5", "--t1", "-5", "--out", str(out)])
    assert code == 2 and list(tmp_path.iterdir()) == []
    code = main(["plot", "variation-unbounded", "--tmax", "0", "--out", str(out)])
    assert code == 2 and list(tmp_path.iterdir()) == []


def test_missing_output_directory(tmp_path, capsys):
    assert main(["plot", "variation-unbounded", "--out", str(tmp_path / "nope" / "f.svg")]) == 2


def test_variation_figure(tmp_path, capsys):
    svg = tmp_path / "fig2.svg"
    code, out, _ = run(capsys, "plot", "variation-unbounded", "--sigma", "1", "--tmax", "200", "--out", str(svg))
    summary = json.loads(out)
    assert code == 0 and svg.exists() and svg.with_suffix(".csv").exists()
    assert summary["q2_extent"] >= 5 * summary["q1_extent"]
    assert svg.read_text().lstrip().startswith("<?xml")


def test_cherry_figure(tmp_path, capsys):
    svg = tmp_path / "fig1.svg"
    code, out, _ = run(capsys, "plot", "cherry-asymptotic", "--sigma", "1", "--t0", "-60", "--t1", "-1",
                       "--out", str(svg))
    summary = json.loads(out)
    assert code == 0 and summary["radius_monotone"]
    assert summary["radius_first"] < summary["radius_last"]
    header = svg.with_suffix(".csv").read_text().splitlines()[0]
    assert header == "t,q1,q2,p1,p2,H"


def test_plot_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for path in (a, b):
        assert main(["plot", "cherry-asymptotic", "--coords", "q1,p2", "--out", str(path)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".csv").read_bytes() == b.with_suffix(".csv").read_bytes()


@pytest.mark.parametrize("argv", [
    ["certify", "variation_like", "--seed", "7"],
    ["probe", "cherry", "--epsilons", "0.5,0.2"],
    ["integrate", "cherry", "--t1", "2", "--step", "0.01"],
    ["period-scan", "--amplitudes", "0.1,0.2"],
])
def test_output_deterministic(capsys, argv):
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second and first


def test_out_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "cert.json"
    assert main(["certify", "l4_linear", "--out", str(target)]) == 0
    assert json.loads(target.read_text())["verdict"] == "CERTIFIED_NO_ASYMPTOTIC_MOTION"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "weakstab", "catalog"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "cherry" in proc.stdout
