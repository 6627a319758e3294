import io
import json

import pytest

from pcfl.cli import EXIT_INPUT, EXIT_OK, EXIT_RESOURCE, EXIT_SEPARATED, build_parser, main

CPA_CONTEXT = r"(\p:bool * (bool -> bool). (snd p) (fst p)) ([.] true false)"


@pytest.fixture
def write(tmp_path):
    def make(name: str, text: str) -> str:
        target = tmp_path / name
        target.write_text(text, encoding="utf-8")
        return str(target)

    return make


def test_check(program_file, capsys):
    assert main(["check", program_file("not")]) == EXIT_OK
    assert capsys.readouterr().out == "bool -> bool\n"

    assert main(["check", "--json", program_file("gen")]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"term": "true (+) false", "type": "bool"}


def test_check_open(write, capsys):
    assert main(["check", write("open.pcfl", "x + 1"), "--open", "x:int"]) == EXIT_OK
    assert capsys.readouterr().out == "int\n"


def test_eval(program_file, capsys):
    assert main(["eval", program_file("gen")]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["1/2\tfalse", "1/2\ttrue", "mass 1, deficit 0 at fuel 32"]

    assert main(["eval", "--json", program_file("omega")]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["mass"] == "0"
    assert report["deficit"] == "0"
    assert report["support"] == []


def test_eval_stable(program_file, capsys):
    assert main(["eval", "--stable", "--json", "--fuel", "1", program_file("half")]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["mass"] == "1/2"
    assert report["deficit"] == "0"


def test_eval_deep_fuel(program_file, capsys):
    assert main(["eval", "--fuel", "600", program_file("geometric")]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "1/2\t0"


def test_eval_from_stdin(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO("1 + 2"))
    assert main(["eval", "-"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "1\t3"


def test_equiv(program_file, capsys):
    assert main(["equiv", program_file("exp_fst"), program_file("exp_snd")]) == EXIT_OK
    assert capsys.readouterr().out == "equivalent_up_to_bound\n"

    assert main(["equiv", "--json", program_file("m54"), program_file("n54")]) == EXIT_SEPARATED
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "not_equivalent"
    assert "witness_test" in report


def test_equiv_open(write, capsys):
    left = write("left.pcfl", "if x then true else false")
    right = write("right.pcfl", "x")
    assert main(["equiv", left, right, "--open", "x:bool"]) == EXIT_OK

    other = write("other.pcfl", "true")
    assert main(["equiv", right, other, "--open", "x:bool"]) == EXIT_SEPARATED
    assert "closure: x = false" in capsys.readouterr().out


def test_sim(program_file, capsys):
    assert main(["sim", program_file("m54"), program_file("n54")]) == EXIT_OK
    assert capsys.readouterr().out == "left ≾ right: no\nright ≾ left: no\n"


def test_distinguish(program_file, capsys):
    assert main(["distinguish", program_file("m54"), program_file("n54")]) == EXIT_SEPARATED
    first = capsys.readouterr().out.splitlines()[0]
    assert first.startswith("eval.")

    assert main(["distinguish", program_file("exp_fst"), program_file("exp_snd")]) == EXIT_OK
    assert capsys.readouterr().out == "none\n"


def test_compile_test(capsys):
    assert main(["compile-test", "eval.bool(true).w", "bool"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("program: ")
    assert out[1].startswith("value: ")


def test_embed(program_file, capsys):
    assert main(["embed", program_file("id")]) == EXIT_OK
    assert capsys.readouterr().out == "\\x. x\n"

    assert main(["embed", "--masses", "--json", program_file("half")]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["source_mass"] == report["target_mass"] == "1/2"


def test_disentangle(write, capsys):
    source = write("assignment.json", json.dumps({"p": ["1/2", "1/2"], "r": {"1": "1/2", "2": "1/2", "1,2": "0"}}))
    assert main(["disentangle", source]) == EXIT_OK
    assert capsys.readouterr().out == '{"s": {"1|1": "1", "2|2": "1"}}\n'

    invalid = write("invalid.json", json.dumps({"p": ["1", "1"], "r": {"1": "1"}}))
    assert main(["disentangle", invalid]) == EXIT_OK
    assert "invalid_cut" in json.loads(capsys.readouterr().out)


def test_spot_check(program_file, write, capsys):
    contexts = write("contexts.txt", f"# one context per line\n{CPA_CONTEXT}\n")
    argv = ["spot-check", "--json", "--contexts", contexts, program_file("cpa_fst"), program_file("cpa_snd")]
    assert main(argv) == EXIT_OK
    (row,) = json.loads(capsys.readouterr().out)["rows"]
    assert row["dist_left"] == {"true": "1"}
    assert row["dist_right"] == {"false": "1"}


def test_export(program_file, capsys):
    assert main(["export", program_file("gen")]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["roots"] == ["s0"]
    assert len(report["states"]) == 3


def test_corpus(capsys):
    assert main(["corpus", "--kind", "eval"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("ok\teval\t") for line in lines)


def test_syntax_error_exits_with_input_code(write, capsys):
    assert main(["check", write("bad.pcfl", "1 +")]) == EXIT_INPUT
    assert capsys.readouterr().err.startswith("pcfl: 1:4: ")


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "does-not-exist.pcfl"],
        ["compile-test", "w", "bool ->"],
    ],
)
def test_input_errors(argv, capsys):
    assert main(argv) == EXIT_INPUT
    assert capsys.readouterr().err.startswith("pcfl: ")


def test_type_errors(program_file, write):
    assert main(["eval", write("open.pcfl", "x")]) == EXIT_INPUT
    assert main(["equiv", "--type", "bool", program_file("not"), program_file("id")]) == EXIT_INPUT
    assert main(["equiv", "--fuel", "0", program_file("not"), program_file("id")]) == EXIT_INPUT


def test_resource_limit(program_file, capsys):
    assert main(["export", "--state-cap", "1", program_file("gen")]) == EXIT_RESOURCE
    assert "more than 1 states" in capsys.readouterr().err


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
