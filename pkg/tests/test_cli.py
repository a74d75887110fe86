import json
import subprocess
import sys

import pytest

from ccgraph.cli import main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_graph_stats(capsys):
    code, out, _ = run(["graph-stats", "--norb", "5", "--nelec", "2"], capsys)
    assert code == 0
    rows = {line.split()[0]: line.split()[1:] for line in out.splitlines() if line.startswith("|")}
    assert rows["|L|"][:2] == ["10", "10"]
    assert rows["|E|"][:2] == ["21", "21"]


def test_graph_stats_json(capsys):
    code, out, _ = run(["graph-stats", "--norb", "5", "--nelec", "2", "--json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["mismatches"] == []


def test_fci(capsys):
    code, out, _ = run(["fci", "--model", "pairing", "--norb", "4", "--nelec", "2", "--g", "0.5"], capsys)
    assert code == 0
    assert "E = -0.618033988750" in out


def test_selfcheck(capsys):
    code, out, _ = run(["selfcheck", "--norb", "4", "--nelec", "2", "--seed", "7"], capsys)
    assert code == 0
    assert out.strip().splitlines()[-1].startswith("all ") and out.strip().endswith("checks passed")


def test_cc_json_and_amplitudes(tmp_path, capsys):
    amp = tmp_path / "t.json"
    code, out, _ = run(["cc", "--model", "pairing", "--norb", "6", "--nelec", "2", "--json",
                        "--amplitudes-out", str(amp)], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["converged"]
    fci = json.loads(run(["fci", "--model", "pairing", "--norb", "6", "--nelec", "2", "--json"], capsys)[1])
    assert doc["energy"] == pytest.approx(fci["energies"][0], abs=1e-9)
    saved = json.loads(amp.read_text())
    assert saved["ref"] == 1 and 0 < len(saved["t"]) <= 14


def test_cc_from_integral_file(tmp_path, capsys):
    from ccgraph.hamiltonian import pairing_model, write_integrals

    path = tmp_path / "FCIDUMP"
    write_integrals(pairing_model(4, 0.5), path, nelec=2)
    code, out, _ = run(["solve", "--integrals", str(path), "--graph", '{"kind":"ranks","ranks":[1,2]}', "--json"], capsys)
    assert code == 0
    assert json.loads(out)["energy"] == pytest.approx(-0.6180339887498948, abs=1e-9)


def test_nonconvergence_exit_code(capsys):
    code, _, _ = run(["cc", "--model", "pairing", "--norb", "6", "--nelec", "2", "--max-iter", "0"], capsys)
    assert code == 3


def test_mrcc(capsys):
    code, out, _ = run(["mrcc", "--model", "hubbard-chain", "--sites", "3", "--basis", "mo", "--field", "0.3",
                        "--nelec", "2", "--refs", "[[1,2],[1,3]]", "--json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["converged"] and len(doc["energies"]) == 2


def test_select_refs(tmp_path, capsys):
    targets = tmp_path / "targets.json"
    targets.write_text("[[1,2,3],[4,5,6]]")
    costs = tmp_path / "costs.json"
    costs.write_text('[{"det": [1,2,4], "cost": 0}, {"det": [1,2,3], "cost": null}]')
    code, out, _ = run(["select-refs", "--norb", "6", "--nelec", "3", "--rank", "1", "--targets", str(targets),
                        "--costs", str(costs), "--json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["verified"] and doc["optimal"]
    assert [1, 2, 4] in doc["references"] and [1, 2, 3] not in doc["references"]


def test_export_dot(tmp_path, capsys):
    path = tmp_path / "g.dot"
    code, _, _ = run(["export-dot", "--norb", "4", "--nelec", "2", "--refs", "[[1,2],[3,4]]", "-o", str(path)], capsys)
    assert code == 0 and path.read_text().startswith("digraph")


@pytest.mark.parametrize("args", [
    ["cc", "--model", "pairing", "--nelec", "2"],
    ["cc", "--model", "pairing", "--norb", "6", "--nelec", "2", "--graph", "{bad"],
    ["cc", "--model", "pairing", "--norb", "6", "--nelec", "3", "--graph", '{"kind":"ranks","ranks":[1,3]}'],
    ["fci", "--integrals", "/nonexistent/FCIDUMP", "--nelec", "2"],
    ["select-refs", "--norb", "6", "--nelec", "3", "--rank", "1", "--targets", "/nonexistent.json"],
])
def test_configuration_errors(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 2
    assert err.startswith("error")


def test_unknown_flag_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["cc", "--bogus"])
    assert exc.value.code == 2


def test_deterministic_output(capsys):
    args = ["graph-stats", "--norb", "6", "--nelec", "3", "--json"]
    assert run(args, capsys)[1] == run(args, capsys)[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ccgraph", "graph-stats", "--norb", "4", "--nelec", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "|E|" in res.stdout
