import json

import pytest

from finalg.cli import main
from finalg.lattice import baker_instance
from finalg.relations import BinRel, meet, rel_from_dict


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_spectrum_alias(capsys):
    code, out, _ = run(capsys, ["spectrum", "--algebra", "c2b", "--n", "2"])
    assert code == 0
    assert out.strip() == "4"


def test_spectrum_json(capsys):
    code, out, _ = run(
        capsys, ["spectrum", "--algebra", "c2u", "--n", "2", "--json"]
    )
    assert code == 0
    assert json.loads(out)["spectrum"] == 4


def test_make_baker_and_check_round_trip(capsys, tmp_path):
    inst_path = tmp_path / "inst.json"
    code, out, _ = run(
        capsys,
        ["make-baker", "--n", "2", "--sig", "b", "--out", str(inst_path)],
    )
    assert code == 0
    data = json.loads(inst_path.read_text())
    assert data["n"] == 2 and data["sig"] == "b"
    assert data["algebra"]["size"] == 11
    for key in ("alpha", "beta", "gamma", "psi", "lambda"):
        assert key in data["relations"]

    inst = baker_instance(2, "b")
    alpha = rel_from_dict(data["relations"]["alpha"])
    assert alpha == inst.alpha

    # the alternation bound 4 holds, 3 does not
    ok_args = [
        "check",
        "--algebra", str(inst_path),
        "--rels", str(inst_path),
        "--stmt", "meet(al, comp(be, ga, be, ga)) == meet(al, alt(be, ga, 4))",
        "--roles", "al:cong, be:cong, ga:cong",
    ]
    code, out, _ = run(capsys, ok_args)
    assert code == 0
    assert "holds" in out

    fail_args = [
        "check",
        "--algebra", str(inst_path),
        "--rels", str(inst_path),
        "--stmt",
        "alt(meet(al, be), meet(al, ga), 4) <= alt(meet(al, be), meet(al, ga), 3)",
        "--roles", "al:cong, be:cong, ga:cong",
        "--witness",
    ]
    code, out, _ = run(capsys, fail_args)
    assert code == 1
    assert "fails" in out and "witness" in out


def test_eval_subcommand(capsys, tmp_path):
    inst_path = tmp_path / "inst.json"
    run(capsys, ["make-baker", "--n", "2", "--sig", "u", "--out", str(inst_path)])
    code, out, _ = run(
        capsys,
        [
            "eval",
            "--algebra", str(inst_path),
            "--rels", str(inst_path),
            "--expr", "meet(be, ga)",
        ],
    )
    assert code == 0
    rel = rel_from_dict(json.loads(out))
    inst = baker_instance(2, "u")
    assert rel == meet(inst.beta, inst.gamma)


def test_find_term_exit_codes(capsys):
    code, out, _ = run(capsys, ["find-term", "--algebra", "c2u", "--kind", "nu", "--arity", "4"])
    assert code == 0
    assert "u(" in out
    code, out, _ = run(capsys, ["find-term", "--algebra", "c2b", "--kind", "majority"])
    assert code == 1
    assert out.strip() == "none"


def test_variety_check_lattice(capsys):
    code, out, _ = run(
        capsys,
        [
            "variety-check",
            "--algebra", "c2lat",
            "--stmt", "meet(T, comp(R, R)) <= pow(meet(T, R), 2)",
            "--roles", "T:cong, R:cong",
            "--n", "2",
        ],
    )
    assert code == 0


def test_input_errors_exit_two(capsys, tmp_path):
    code, _, err = run(capsys, ["spectrum", "--algebra", "c2b", "--n", "0"])
    assert code == 2 and err

    code, _, err = run(
        capsys,
        ["eval", "--algebra", "c2b", "--rels", str(tmp_path / "missing.json"),
         "--expr", "diag"],
    )
    assert code == 2 and err

    inst_path = tmp_path / "inst.json"
    run(capsys, ["make-baker", "--n", "2", "--sig", "b", "--out", str(inst_path)])
    code, _, err = run(
        capsys,
        ["eval", "--algebra", str(inst_path), "--rels", str(inst_path),
         "--expr", "meet(be,"],
    )
    assert code == 2 and "byte" in err

    code, _, err = run(capsys, ["spectrum", "--algebra", "c2b"])
    assert code == 2  # argparse usage error


def test_replicate_single_scenario_json(capsys):
    code, out, _ = run(capsys, ["replicate", "--scenario", "rem-fv3", "--json"])
    assert code == 0
    payload = json.loads(out)  # stdout is pure JSON
    reports = payload if isinstance(payload, list) else payload["reports"]
    assert all(r["status"] == "pass" for r in reports)


def test_list_scenarios(capsys):
    code, out, _ = run(capsys, ["list-scenarios"])
    assert code == 0
    for sid in ("thm-bds-positive", "rem-fact", "prop-edge"):
        assert sid in out


def test_env_cap_override(capsys, monkeypatch):
    import finalg.variety as v

    # _apply_env_caps mutates the module attribute; monkeypatch restores it
    monkeypatch.setattr(v, "MAX_FREE_ELEMENTS", v.MAX_FREE_ELEMENTS)
    monkeypatch.setenv("FINALG_MAX_FREE_ELEMENTS", "1")
    v._FREE_CACHE.clear()
    try:
        code, _, err = run(
            capsys, ["find-term", "--algebra", "c2b", "--kind", "majority"]
        )
        assert code == 3 and "cap" in err
    finally:
        v._FREE_CACHE.clear()

    monkeypatch.setenv("FINALG_MAX_NONSENSE", "1")
    code, _, err = run(capsys, ["spectrum", "--algebra", "c2b", "--n", "2"])
    assert code == 2 and err
