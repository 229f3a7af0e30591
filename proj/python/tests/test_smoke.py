"""Smoke tests for the tabench extension module."""

import json

import pytest

import tabench


def test_make_instance_shapes():
    inst = tabench.make_instance("hanoi", 3)
    assert inst["schema"] == "v1"
    assert inst["initial_state"]["pegs"] == [[3, 2, 1], [], []]
    assert inst["goal_state"]["pegs"] == [[], [], [3, 2, 1]]

    river = tabench.make_instance("river", 4)
    assert river["boat_capacity"] == 3
    assert len(river["initial_state"]["left"]) == 8

    blocks = tabench.make_instance("blocks", 3, seed=7)
    assert blocks["seed"] == 7
    # Deterministic sampling per seed.
    assert blocks == tabench.make_instance("blocks", 3, seed=7)


def test_make_instance_rejects_bad_arguments():
    with pytest.raises(ValueError):
        tabench.make_instance("hanoi", 0)
    with pytest.raises(ValueError):
        tabench.make_instance("blocks", 3)  # seed required
    with pytest.raises(ValueError):
        tabench.make_instance("warp", 3)


def test_solve_and_verify_round_trip():
    for kind, n in [("hanoi", 4), ("checker", 3), ("river", 2)]:
        result = tabench.solve(kind, n)
        assert result["status"] == "solved"
        report = tabench.verify(tabench.make_instance(kind, n), result["moves"])
        assert report["verdict"] == "valid"

    blocks = tabench.solve("blocks", 3, seed=11)
    assert blocks["status"] == "solved"
    inst = tabench.make_instance("blocks", 3, seed=11)
    assert tabench.verify(inst, blocks["moves"])["verdict"] == "valid"


def test_hanoi_solution_length():
    assert len(tabench.hanoi_solution(10).splitlines()) == 1023


def test_verify_flags_illegal_moves():
    inst = tabench.make_instance("hanoi", 3)
    report = tabench.verify(inst, "(2,0,1)\n")
    assert report["verdict"] == "illegal_move"
    assert report["failing_index"] == 0
    assert "not-top-disk" in report["reason"]

    assert tabench.verify(json.dumps(inst), "")["verdict"] == "not_at_goal"


def test_extract_and_decode():
    got = tabench.extract_moves("the answer:\n(1,0,2)\n(2,0,1)\nthanks", "hanoi")
    assert got["ok"] and got["moves"] == "(1,0,2)\n(2,0,1)\n"

    missing = tabench.extract_moves("no moves", "hanoi")
    assert not missing["ok"] and missing["error"] == "no-moves-found"

    code = tabench.extract_code("```python\nprint(1)\n```")
    assert code["ok"] and code["code"] == "print(1)\n"

    pad = tabench.decode_scratchpad(
        '{"partial_answer": "(1,0,2)", "scratchpad": "note", "finish": false}', "hanoi"
    )
    assert pad["ok"] and pad["scratchpad"] == "note" and not pad["finish"]


def test_render_prompt():
    bundle = tabench.render_prompt("direct", "hanoi", 3)
    assert "3 disks" in bundle["user"]
    assert bundle["template_id"] == "direct"
    assert bundle["hash"] == tabench.render_prompt("direct", "hanoi", 3)["hash"]

    step = tabench.render_prompt("scratchpad", "checker", 2, scratchpad="halfway there")
    assert "halfway there" in step["user"]


def test_scripted_scratchpad_trial():
    sol = tabench.hanoi_solution(3).splitlines()
    replies = [
        json.dumps({"partial_answer": "\n".join(sol[:4]), "scratchpad": "4 done", "finish": False}),
        json.dumps({"partial_answer": "\n".join(sol[4:]), "scratchpad": "", "finish": True}),
    ]
    out = tabench.run_scripted_trial("scratchpad", "hanoi", 3, replies)
    assert out["verdict"] == "valid"
    assert out["transcript"]["t_cut"] == 2
    assert len(out["transcript"]["steps"]) == 2


def test_scripted_pot_trial_runs_the_sandbox():
    program = (
        "out = []\n"
        "def solve(n, frm, to, via):\n"
        "    if n == 0:\n"
        "        return\n"
        "    solve(n - 1, frm, via, to)\n"
        "    out.append('(%d,%d,%d)' % (n, frm, to))\n"
        "    solve(n - 1, via, to, frm)\n"
        "solve(5, 0, 2, 1)\n"
        "print('\\n'.join(out))\n"
    )
    out = tabench.run_scripted_trial("pot", "hanoi", 5, ["```python\n" + program + "```"])
    assert out["verdict"] == "valid"
    assert out["transcript"]["steps"][0]["sandbox"]["status"] == "ok"


def test_run_code_sandbox():
    outcome = tabench.run_code("print('hi')")
    assert outcome["status"] == "ok" and outcome["stdout"] == "hi\n"
    failed = tabench.run_code("import sys; sys.exit(2)")
    assert failed["status"] == "nonzero-exit" and failed["exit_code"] == 2
