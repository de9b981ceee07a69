"""End-to-end CLI pipeline: file interchange, exit codes, reproducibility."""

import json

import numpy as np
import pytest

from latticefold.cli import main


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestEncode:
    def test_coord_tet_n11(self, workdir, capsys):
        assert run(["encode", "coord-tet", "--seq", "HPPPPHPPPPH", "--L", "3",
                    "--out", "p.json"]) == 0
        out = capsys.readouterr().out
        assert "qubits=297" in out
        doc = json.loads((workdir / "p.json").read_text())
        assert doc["num_vars"] == 297
        assert doc["layout"]["type"] == "coordinate"
        assert (workdir / "p.json.manifest.json").exists()

    def test_turn_tet_short_sequence_no_gates(self, workdir):
        assert run(["encode", "turn-tet", "--seq", "HPH", "--out", "t.json"]) == 0
        doc = json.loads((workdir / "t.json").read_text())
        assert doc["layout"]["interaction_qubits"] == {}

    def test_tiny_grid_is_input_error(self, workdir):
        assert run(["encode", "coord-cart", "--seq", "HHHH", "--L", "1",
                    "--out", "x.json"]) == 2

    def test_unknown_residue_is_input_error(self, workdir):
        assert run(["encode", "coord-cart", "--seq", "HZH", "--out", "x.json"]) == 2

    def test_fasta_input(self, workdir):
        (workdir / "seq.fa").write_text(">rec\nHPPH\n")
        assert run(["encode", "turn-cart", "--fasta", "seq.fa", "--out", "f.json"]) == 0
        doc = json.loads((workdir / "f.json").read_text())
        assert doc["sequence"] == "HPPH"


class TestReduce:
    def test_degree2_pass_through_terms(self, workdir):
        assert run(["encode", "coord-tet", "--seq", "HHHH", "--L", "2",
                    "--out", "p.json"]) == 0
        assert run(["reduce", "p.json", "--out", "q.json"]) == 0
        a = json.loads((workdir / "p.json").read_text())
        b = json.loads((workdir / "q.json").read_text())
        assert a["terms"] == b["terms"]
        assert b["aux_map"] == []

    def test_turn_tet_n6_reduces_and_verifies(self, workdir):
        assert run(["encode", "turn-tet", "--seq", "HHHHHH", "--out", "h.json"]) == 0
        assert run(["reduce", "h.json", "--verify-budget", "14", "--out", "hq.json"]) == 0
        doc = json.loads((workdir / "hq.json").read_text())
        assert doc["verification"]["exhaustive"]
        assert doc["verification"]["max_discrepancy"] <= 1e-9

    def test_weak_alpha_fails_verification(self, workdir):
        (workdir / "h.json").write_text(json.dumps({
            "num_vars": 3, "offset": 0.0, "space": "boolean",
            "terms": [{"vars": [0, 1, 2], "coeff": -8.0}],
        }))
        assert run(["reduce", "h.json", "--alpha", "fixed:0.001", "--out", "bad.json"]) == 3


class TestSolve:
    def _encode_small(self, workdir):
        assert run(["encode", "coord-tet", "--seq", "HHHH", "--L", "2",
                    "--out", "p.json"]) == 0

    def test_brute_refusal_exit_code(self, workdir):
        self._encode_small(workdir)
        assert run(["solve", "p.json", "--solver", "brute", "--brute-limit", "10",
                    "--out", "b.csv"]) == 4

    def test_seed_required_for_sa(self, workdir):
        self._encode_small(workdir)
        assert run(["solve", "p.json", "--solver", "sa", "--out", "s.csv"]) == 2

    def test_sa_deterministic_across_reruns_and_jobs(self, workdir):
        self._encode_small(workdir)
        base = ["solve", "p.json", "--solver", "sa", "--seed", "5",
                "--restarts", "16", "--sweeps", "60", "--cooling-rate", "0.998",
                "--out", "s.csv"]
        assert run(base) == 0
        first = (workdir / "s.csv").read_bytes()
        assert run(base + ["--jobs", "4"]) == 0
        assert (workdir / "s.csv").read_bytes() == first
        assert run(base + ["--jobs", "8"]) == 0
        assert (workdir / "s.csv").read_bytes() == first

    def test_pt_writes_trajectory_and_summary(self, workdir):
        self._encode_small(workdir)
        assert run(["solve", "p.json", "--solver", "pt", "--seed", "3",
                    "--num-temps", "8", "--t-min", "0.5", "--t-max", "10",
                    "--sweeps", "50", "--measure-sweeps", "10", "--out", "pt.csv"]) == 0
        lines = (workdir / "pt.csv").read_text().splitlines()
        assert lines[0].startswith("# manifest=")
        assert lines[1] == "assignment,energy,replica,sweep"
        assert len(lines) == 2 + 10 + 1  # window rows + best row
        summary = json.loads((workdir / "pt.summary.json").read_text())
        assert summary["solver"] == "pt"
        assert "problem_fingerprint" in summary


class TestDecodePipeline:
    def test_folds_carry_flags_and_geometry(self, workdir):
        assert run(["encode", "coord-tet", "--seq", "HHHH", "--L", "2",
                    "--out", "p.json"]) == 0
        assert run(["solve", "p.json", "--solver", "sa", "--seed", "11",
                    "--restarts", "24", "--sweeps", "80", "--cooling-rate", "0.997",
                    "--out", "s.csv"]) == 0
        assert run(["decode", "p.json", "s.csv", "--out", "folds.json"]) == 0
        doc = json.loads((workdir / "folds.json").read_text())
        assert doc["count"] == 24
        for rec in doc["folds"]:
            if rec["physical"]:
                assert rec["geometric_energy"] == pytest.approx(
                    rec["sample_energy"], abs=1e-6
                )

    def test_reduced_problem_decodes_via_projection(self, workdir):
        assert run(["encode", "turn-tet", "--seq", "HHHHHH", "--out", "h.json"]) == 0
        assert run(["reduce", "h.json", "--out", "hq.json"]) == 0
        assert run(["solve", "hq.json", "--solver", "brute", "--out", "b.csv"]) == 0
        assert run(["decode", "hq.json", "b.csv", "--out", "f.json"]) == 0
        doc = json.loads((workdir / "f.json").read_text())
        assert doc["count"] >= 1
        assert all(rec["decode_feasible"] for rec in doc["folds"])


class TestAnalyze:
    def test_sod_pipeline(self, workdir, capsys):
        assert run(["encode", "coord-tet", "--seq", "HHHH", "--L", "2",
                    "--out", "p.json"]) == 0
        for seed, name in ((1, "a.csv"), (2, "b.csv")):
            assert run(["solve", "p.json", "--solver", "pt", "--seed", seed,
                        "--num-temps", "16", "--t-min", "1", "--t-max", "100",
                        "--sweeps", "120", "--measure-sweeps", "40",
                        "--out", name]) == 0
        assert run(["analyze", "sod", "a.csv", "b.csv", "--out", "sod.csv"]) == 0
        out = capsys.readouterr().out
        assert "classification=" in out
        rows = [ln for ln in (workdir / "sod.csv").read_text().splitlines()
                if ln and not ln.startswith(("#", "q_bin_center"))]
        assert len(rows) == 101
        counts = sum(int(r.split(",")[1]) for r in rows)
        assert counts == 40

    def test_sod_window_mismatch(self, workdir):
        assert run(["encode", "coord-tet", "--seq", "HHHH", "--L", "2",
                    "--out", "p.json"]) == 0
        assert run(["solve", "p.json", "--solver", "pt", "--seed", "1",
                    "--num-temps", "8", "--sweeps", "50", "--t-max", "100",
                    "--measure-sweeps", "10", "--out", "a.csv"]) == 0
        assert run(["solve", "p.json", "--solver", "pt", "--seed", "2",
                    "--num-temps", "8", "--sweeps", "50", "--t-max", "100",
                    "--measure-sweeps", "20", "--out", "b.csv"]) == 0
        assert run(["analyze", "sod", "a.csv", "b.csv", "--out", "s.csv"]) == 2

    def test_tts_all_hits_gives_tau(self, workdir):
        (workdir / "s.csv").write_text(
            "# manifest=-\nassignment,energy,replica,sweep\n"
            "01,-1.0,0,0\n10,-1.0,1,0\n"
        )
        assert run(["analyze", "tts", "--samples", "s.csv", "--tau", "2.5",
                    "--reference-energy", "-1.0", "--out", "t.csv"]) == 0
        row = (workdir / "t.csv").read_text().splitlines()[-1]
        assert row.endswith(",1.0,2.5")  # p_ground=1 -> tts = tau

    def test_scaling_csv_schema(self, workdir):
        assert run(["analyze", "scaling", "--models", "coord-tet",
                    "--n-min", "8", "--n-max", "10", "--out", "sc.csv"]) == 0
        lines = (workdir / "sc.csv").read_text().splitlines()
        assert lines[1] == "model,N,L,qubits,density,couplers_per_qubit,resolution"
        assert len(lines) == 2 + 3


class TestEmbedCli:
    def _fixture(self, workdir):
        (workdir / "hw.txt").write_text("0 1\n1 2\n0 2\n2 3\n3 4\n")
        (workdir / "emb.json").write_text('{"0": [0, 1], "1": [2], "2": [3]}')
        (workdir / "p.json").write_text(json.dumps({
            "num_vars": 3, "offset": 0.0, "space": "boolean",
            "terms": [{"vars": [0], "coeff": 1.0}, {"vars": [1], "coeff": -2.0},
                      {"vars": [0, 1], "coeff": 3.0}, {"vars": [1, 2], "coeff": -1.0}],
        }))

    def test_embed_unembed_roundtrip(self, workdir, capsys):
        self._fixture(workdir)
        assert run(["embed", "p.json", "--embedding", "emb.json",
                    "--hardware", "hw.txt", "--out", "e.json"]) == 0
        out = capsys.readouterr().out
        assert "chain_strength=1.5" in out  # max|Q|/2
        assert run(["solve", "e.json", "--solver", "brute", "--out", "phys.csv"]) == 0
        assert run(["unembed", "phys.csv", "--embedded", "e.json",
                    "--problem", "p.json", "--seed", "1", "--out", "log.csv"]) == 0
        lines = (workdir / "log.csv").read_text().splitlines()
        assert lines[1] == "assignment,energy,replica,sweep,chain_break_fraction"
        assert run(["solve", "p.json", "--solver", "brute", "--out", "ref.csv"]) == 0
        ref = (workdir / "ref.csv").read_text().splitlines()[2]
        got = lines[2]
        assert got.split(",")[0] == ref.split(",")[0]
        assert float(got.split(",")[1]) == float(ref.split(",")[1])
        assert got.split(",")[4] == "0.0"

    def test_invalid_embedding_rejected(self, workdir):
        self._fixture(workdir)
        (workdir / "emb.json").write_text('{"0": [0, 3], "1": [2], "2": [4]}')
        assert run(["embed", "p.json", "--embedding", "emb.json",
                    "--hardware", "hw.txt", "--out", "e.json"]) == 2


class TestDatasetAndConfig:
    def test_gen_dataset_deterministic(self, workdir):
        assert run(["gen-dataset", "--count", "4", "--len", "8", "--seed", "9",
                    "--out", "d1.json"]) == 0
        assert run(["gen-dataset", "--count", "4", "--len", "8", "--seed", "9",
                    "--out", "d2.json"]) == 0
        a = json.loads((workdir / "d1.json").read_text())
        b = json.loads((workdir / "d2.json").read_text())
        assert [r["sequence"] for r in a["sequences"]] == [r["sequence"] for r in b["sequences"]]
        seq = a["sequences"][0]["sequence"]
        assert len(seq) == 8
        assert a["sequences"][0]["prefixes"]["4"] == seq[:4]

    def test_config_file_defaults(self, workdir):
        (workdir / "conf.txt").write_text("restarts = 6\ncooling-rate = 0.99\n")
        assert run(["encode", "coord-tet", "--seq", "HHHH", "--L", "2",
                    "--out", "p.json"]) == 0
        assert run(["--config", "conf.txt", "solve", "p.json", "--solver", "sa",
                    "--seed", "1", "--sweeps", "30", "--out", "s.csv"]) == 0
        rows = (workdir / "s.csv").read_text().splitlines()
        assert len(rows) == 2 + 6  # restarts from the config file
