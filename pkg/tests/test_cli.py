import json
import subprocess
import sys

import pytest

from confblocks.cli import JobSpec, load_document, main
from confblocks.errors import InputError
from confblocks.fusion import clear_tables


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.fixture(autouse=True)
def cold_tables():
    clear_tables()
    yield
    clear_tables()


class TestRank:
    def test_genus_one(self, capsys):
        code, out = run(capsys, "rank", "--genus", "1", "--points", "0", "--rank", "2", "--level", "2")
        assert code == 0 and out["rank"] == "3"
        prov = out["provenance"]
        assert prov["r"] == "2" and prov["level"] == "2" and len(prov["graph_hash"]) == 16
        assert "cache_hits" in prov

    def test_mod_r(self, capsys):
        code, out = run(capsys, "rank", "--genus", "1", "--rank", "3", "--level", "2", "--weights", "[[1,0],[1,0]]")
        assert code == 0 and out["rank"] == "0"

    def test_graph_with_labels(self, capsys):
        graph = {"vertices": [{"genus": 1, "legs": [1, 2]}], "edges": [], "labels": {"1": [1], "2": [1]}}
        code, out = run(capsys, "rank", "--rank", "2", "--level", "2", "--graph", json.dumps(graph))
        assert code == 0 and out["rank"] == "4"

    def test_unstable_graph(self, capsys):
        graph = {"vertices": [{"genus": 0, "legs": [1, 2]}], "edges": []}
        code, out = run(capsys, "rank", "--rank", "2", "--level", "1", "--graph", json.dumps(graph))
        assert code == 2
        assert out["error"]["message"] == "stability violated at vertex 0"

    def test_graph_file(self, capsys, tmp_path):
        path = tmp_path / "g.json"
        path.write_text(json.dumps({"vertices": [{"genus": 0}, {"genus": 0}], "edges": [[0, 1]] * 3}))
        code, out = run(capsys, "rank", "--rank", "2", "--level", "1", "--graph", str(path))
        assert code == 0 and out["rank"] == "4"

    @pytest.mark.parametrize("argv", [
        ["rank", "--genus", "1", "--rank", "2"],
        ["rank", "--genus", "1", "--rank", "2", "--level", "1", "--weights", "[[3]]"],
        ["rank", "--genus", "1", "--rank", "2", "--level", "1", "--weights", "not-a-file.json"],
        ["rank", "--genus", "1", "--rank", "2", "--level", "1", "--weights", "[[1]"],
        ["rank", "--genus", "0", "--rank", "2", "--level", "1", "--points", "2", "--weights", "[[1]]"],
    ])
    def test_input_errors(self, capsys, argv):
        code, out = run(capsys, *argv)
        assert code == 2 and set(out["error"]) == {"type", "message"}

    def test_cache_does_not_change_values(self, capsys, tmp_path):
        argv = ["rank", "--genus", "2", "--rank", "3", "--level", "2", "--weights", "[[1,0],[1,1]]"]
        _, plain = run(capsys, *argv)
        clear_tables()
        _, cold = run(capsys, *argv, "--cache-dir", str(tmp_path))
        clear_tables()
        _, warm = run(capsys, *argv, "--cache-dir", str(tmp_path))
        assert plain["rank"] == cold["rank"] == warm["rank"] == "90"
        assert (tmp_path / "fusion-r3-l2.json").exists()
        assert int(warm["provenance"]["cache_misses"]) == 0

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "out.json"
        code = main(["rank", "--genus", "1", "--rank", "2", "--level", "4", "--output", str(target)])
        assert code == 0 and capsys.readouterr().out == ""
        assert json.loads(target.read_text())["rank"] == "5"


class TestWeightCommands:
    def test_walls(self, capsys):
        code, out = run(capsys, "walls", "--rank", "2", "--points", "2")
        assert code == 0 and out["count"] == "1"
        assert out["walls"][0]["equation"] == {"coeffs": ["1", "-1"], "const": "0"}

    def test_chambers(self, capsys):
        code, out = run(capsys, "chambers", "--rank", "2", "--points", "2")
        assert code == 0 and out["chambers"] == "2" and out["exact"] == "2" and out["sampled"] == "2"

    def test_chambers_large_skips_exact(self, capsys):
        code, out = run(capsys, "chambers", "--rank", "3", "--points", "3", "--samples", "200")
        assert code == 0 and out["exact"] is None

    def test_dominant(self, capsys):
        code, out = run(capsys, "dominant", "--genus", "2", "--rank", "2", "--points", "0")
        assert code == 0 and out["summary"] == "yes-by-theorem: (r-1)(g-1)+1"

    def test_dominant_with_weight(self, capsys):
        code, out = run(capsys, "dominant", "--genus", "1", "--rank", "2", "--weights", '[["1/3"]]')
        assert code == 0 and out["verdict"] == "inconclusive"

    def test_dominant_rejects_wall(self, capsys):
        code, out = run(capsys, "dominant", "--genus", "1", "--rank", "2", "--weights", '[["1/2"],["1/2"]]')
        assert code == 2 and out["error"]["type"] == "NonGeneralWeight"

    def test_invalid_weight(self, capsys):
        code, out = run(capsys, "dominant", "--genus", "1", "--rank", "2", "--weights", '[["1/2"],["3/2"]]')
        assert code == 2


class TestPicardCommands:
    def test_cone(self, capsys):
        code, out = run(capsys, "cone", "--anticanonical", "--rank", "3", "--points", "2")
        assert code == 0 and out["cone"] == "interior" and out["descends"] is True

    def test_model(self, capsys):
        code, out = run(capsys, "model", "--rank", "3", "--divisor", '{"level": 4, "d": [[1, 1]]}')
        assert code == 0 and out["weight"] == [["1/2", "1/4"]]

    def test_model_boundary(self, capsys):
        code, out = run(capsys, "model", "--divisor", '{"level": 2, "d": [[2]]}')
        assert code == 0 and out["kind"] == "boundary"
        assert out["descriptor"]["twist"] == ["O(-p^1)"]

    def test_model_outside(self, capsys):
        code, out = run(capsys, "model", "--divisor", '{"level": 1, "d": [[2]]}')
        assert code == 2 and out["error"]["type"] == "NotBig"

    def test_hilbert_two_graphs(self, capsys):
        theta = json.dumps({"vertices": [{"genus": 0}, {"genus": 0}], "edges": [[0, 1]] * 3})
        bridge = json.dumps({"vertices": [{"genus": 0}, {"genus": 0}], "edges": [[0, 0], [0, 1], [1, 1]]})
        code, out = run(capsys, "hilbert", "--rank", "2", "--graph", theta, "--graph", bridge,
                        "--max-degree", "3", "--parallel")
        assert code == 0 and out["flat"] is True
        assert out["vectors"] == [["1", "4", "10", "20"]] * 2

    def test_hilbert_mismatch(self, capsys):
        theta = json.dumps({"vertices": [{"genus": 0}, {"genus": 0}], "edges": [[0, 1]] * 3})
        loop = json.dumps({"vertices": [{"genus": 1}], "edges": []})
        code, out = run(capsys, "hilbert", "--rank", "2", "--graph", theta, "--graph", loop, "--max-degree", "1")
        assert code == 2 and out["error"]["type"] == "MismatchedType"


class TestPlumbing:
    def test_load_document(self, tmp_path):
        assert load_document("[1, 2]") == [1, 2]
        path = tmp_path / "doc.json"
        path.write_text('{"a": 1}')
        assert load_document(str(path)) == {"a": 1}
        with pytest.raises(InputError):
            load_document("{oops")

    def test_jobspec_duplicates(self):
        with pytest.raises(InputError):
            JobSpec("rank", {"weights": ["[]", "[]"]}).validate()
        JobSpec("hilbert", {"graph": ["{}", "{}"]}).validate()

    def test_deterministic_subprocess(self):
        argv = [sys.executable, "-m", "confblocks", "walls", "--rank", "3", "--points", "1"]
        first = subprocess.run(argv, capture_output=True, check=True).stdout
        second = subprocess.run(argv, capture_output=True, check=True).stdout
        assert first == second and json.loads(first)["count"] == "1"

    def test_usage_error(self):
        proc = subprocess.run([sys.executable, "-m", "confblocks", "bogus"], capture_output=True)
        assert proc.returncode == 2

    def test_invariant_breach_exit_code(self, capsys, monkeypatch):
        from confblocks import cli
        from confblocks.errors import InvariantError

        def broken(args, job):
            raise InvariantError("negative coefficient")

        monkeypatch.setitem(cli.COMMANDS, "walls", broken)
        code, out = run(capsys, "walls", "--rank", "2", "--points", "1")
        assert code == 3 and out["error"]["type"] == "InvariantError"
