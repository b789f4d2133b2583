import csv
import io
import json
import subprocess
import sys

import pytest

from cli_cases import CASES, UNIT_SET
from setcalc.cli import EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_OK, main


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def body(text):
    return "\n".join(line for line in text.splitlines() if not line.startswith("#"))


@pytest.mark.parametrize("name", sorted(CASES))
def test_every_subcommand_is_deterministic(capsys, name):
    argv = ["--seed", "7"] + CASES[name]
    first = run(capsys, argv)
    second = run(capsys, argv)
    assert first[0] in (EXIT_OK, EXIT_INCONCLUSIVE)
    assert first == second


def test_example1_output(capsys):
    code, out, _ = run(capsys, ["example1"])
    doc = json.loads(out)
    assert code == EXIT_OK and doc["count"] == 6
    assert doc["functions"][0] == {"name": "F1", "symbol": "σ1^2 + σ2^3"}


def test_pareto_csv(capsys):
    code, out, _ = run(capsys, ["pareto", "--h", "0.05", "--lambdas", "1,2,4"])
    rows = list(csv.reader(io.StringIO(body(out))))
    assert code == EXIT_OK and len(rows) == 4
    assert [float(r[0]) for r in rows[1:]] == [1, 2, 4]


def test_pareto_rejects_bad_lambdas(capsys):
    assert run(capsys, ["pareto", "--lambdas", ""])[0] == EXIT_ERROR
    assert run(capsys, ["pareto", "--a", "1", "--lambdas", "0.5"])[0] == EXIT_ERROR


def test_partition_json(capsys):
    code, out, _ = run(capsys, CASES["partition"])
    doc = json.loads(out)
    assert doc["sizes"] == [10, 10, 0]
    assert doc["objective"] == pytest.approx(0.25)


def test_integrate_nonconverged_is_inconclusive(capsys):
    code, out, _ = run(capsys, ["integrate", "--set", UNIT_SET, "--f", "x", "--pieces", "",
                                "--levels", "10"])
    assert code == EXIT_INCONCLUSIVE and json.loads(out)["J"] is None


def test_derivative_inconclusive_exit(capsys):
    seq = '{"builder": "shrinking_tail", "B": ["w2"], "extra": ["w3"], "step": 45}'
    code, out, _ = run(capsys, ["derivative", "--universe", "4", "--function",
                                "measure_squared", "--at", '["w1"]', "--sequence", seq])
    assert code == EXIT_INCONCLUSIVE and json.loads(out)["status"] == "inconclusive"


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["example1", "--values", "a,b"],
    ["decompose", "--function", "nope", "--values", "1,2"],
    ["limits", "--sequence", '{"builder": "spiral"}'],
    ["integrate", "--set", "{bad", "--f", "x"],
    ["example1", "--phi", "__import__('os')"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) if argv == ["nonsense"] else _noop():
        code, _, err = run(capsys, argv)
        assert code == EXIT_ERROR and "error" in err


class _noop:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def test_unknown_command_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == EXIT_ERROR


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    assert main(["--output", str(target)] + CASES["example1"]) == EXIT_OK
    assert json.loads(target.read_text())["count"] == 6


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "setcalc.cli", "gamma", "--function",
                           "measure", "--universe", "2"], capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert proc.stdout.startswith("# command=\"gamma\"")
