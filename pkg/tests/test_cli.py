"""Config files and the command line contract."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chemolab.cli import EXIT_INVALID, EXIT_MISMATCH, EXIT_OK, main
from chemolab.config import (
    ExperimentConfig,
    GeometrySpec,
    InitialData,
    Outputs,
    SweepSpec,
    dumps,
    load,
    parse,
)
from chemolab.dynamics import SolverConfig
from chemolab.errors import ConfigError
from chemolab.geometry import load_field, load_field_metadata
from chemolab.theory import ModelParams

finite = st.floats(0.05, 50, allow_nan=False)

configs = st.builds(
    ExperimentConfig,
    model=st.builds(
        ModelParams,
        n=st.integers(3, 8),
        m=finite,
        a=finite,
        b=finite,
        alpha=finite,
        beta=st.floats(1, 50),
        eta=finite,
        sign=st.sampled_from(["attractive", "repulsive"]),
    ),
    geometry=st.builds(GeometrySpec, r_max=finite, cells=st.integers(16, 4096)),
    initial_data=st.builds(
        InitialData,
        family=st.sampled_from(["gaussian", "uniform_ball", "uniform"]),
        mass=st.floats(0, 100),
        width=finite,
        center=st.none() | st.tuples(finite, finite, finite),
    ),
    solver=st.builds(
        SolverConfig,
        t_end=finite,
        cfl_safety=st.floats(0.01, 1),
        blowup_linf_threshold=st.none() | finite,
        neutralize=st.booleans(),
        p_list=st.lists(st.floats(1, 10), min_size=1, max_size=3).map(tuple),
    ),
    outputs=st.builds(Outputs, directory=st.sampled_from(["out", "a/b"]), sample_dt=st.none() | finite),
    sweep=st.builds(
        SweepSpec,
        axes=st.dictionaries(
            st.sampled_from(["m", "alpha", "beta", "mass"]),
            st.lists(finite, min_size=1, max_size=4).map(tuple),
            max_size=2,
        ),
        workers=st.none() | st.integers(1, 8),
        refine=st.booleans(),
    ),
)


@given(configs)
def test_config_round_trip(cfg):
    assert parse(dumps(cfg)) == cfg
    assert dumps(parse(dumps(cfg))) == dumps(cfg)


class TestConfigErrors:
    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            parse("[modle]\nn = 3\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            parse("[model]\nmu = 3\n")

    def test_invalid_params_named(self):
        with pytest.raises(ConfigError, match="DimensionTooLow"):
            parse("[model]\nn = 2\n")

    def test_scheme_mismatch(self):
        with pytest.raises(ConfigError):
            parse("[geometry]\nkind = box\n")

    def test_bad_number(self):
        with pytest.raises(ConfigError):
            parse("[solver]\nt_end = soon\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load(tmp_path / "nope.ini")


class TestCheck:
    ARGS = ["check", "-n", "3", "-m", "1", "--eta", "1", "--alpha", "2", "--beta", "2"]

    def test_holding_set(self, capsys, tmp_path):
        out_json = tmp_path / "r.json"
        assert main(self.ARGS + ["--expect-h1", "true", "--json", str(out_json)]) == EXIT_OK
        text = capsys.readouterr().out
        assert "h1_threshold   = 3.5" in text and "h1_holds       = true" in text
        data = json.loads(out_json.read_text())
        assert data["h1_threshold"] == 3.5 and data["p_bar"] == 3.0
        assert data["lambda_tilde"]["lambda1"] == pytest.approx(0.875)

    def test_dimension_too_low(self, capsys):
        assert main(["check", "-n", "2"]) == EXIT_INVALID
        assert "DimensionTooLow" in capsys.readouterr().err

    def test_expectation_mismatch(self):
        assert main(self.ARGS + ["--expect-h1", "false"]) == EXIT_MISMATCH
        assert main(self.ARGS + ["--expect-h2", "false"]) == EXIT_MISMATCH

    def test_from_config(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[model]\nalpha = 1\nbeta = 1\n")
        assert main(["check", "--config", str(path), "--expect-h1", "false"]) == EXIT_OK

    def test_floats_carry_17_digits(self, tmp_path):
        out_json = tmp_path / "r.json"
        main(["check", "-m", "0.1", "--json", str(out_json)])
        assert '"m": 0.10000000000000001' in out_json.read_text()


def write_config(tmp_path, body):
    path = tmp_path / "exp.ini"
    path.write_text(body + f"\n[outputs]\ndirectory = {tmp_path / 'out'}\nsample_dt = 0.05\n")
    return path


class TestRun:
    def test_zero_mass(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "[initial_data]\nmass = 0\n[solver]\nt_end = 0.2\n")
        assert main(["run", str(cfg)]) == EXIT_OK
        out = tmp_path / "out"
        summary = json.loads((out / "summary.json").read_text())
        assert summary["verdict"] == "bounded"
        rows = [r for r in (out / "norms.csv").read_text().splitlines() if not r.startswith("#")]
        data = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
        header = rows[0].split(",")
        for col in ("mass", "lp_2", "linf"):
            assert np.all(data[:, header.index(col)] == 0)

    def test_outputs_embed_config(self, tmp_path):
        cfg = write_config(tmp_path, "[solver]\nt_end = 0.1\n")
        main(["run", str(cfg)])
        out = tmp_path / "out"
        resolved = load(cfg)
        summary = json.loads((out / "summary.json").read_text())
        assert summary["config"] == json.loads(json.dumps(resolved.to_dict()))
        header = "".join(
            line[2:] + "\n" for line in (out / "norms.csv").read_text().splitlines() if line.startswith("# ")
        )
        assert parse(header) == resolved
        assert parse(load_field_metadata(out / "final.chlb")) == resolved
        assert load_field(out / "final.chlb").geometry == resolved.mesh()

    def test_deterministic(self, tmp_path):
        cfg = write_config(tmp_path, "[solver]\nt_end = 0.1\n")
        main(["run", str(cfg)])
        first = (tmp_path / "out" / "norms.csv").read_text()
        main(["run", str(cfg)])
        assert (tmp_path / "out" / "norms.csv").read_text() == first

    def test_uniform_ball_relaxes(self, tmp_path):
        body = (
            "[geometry]\nr_max = 1\ncells = 32\n"
            "[initial_data]\nfamily = uniform_ball\nmass = 0.3\nwidth = 0.8\n"
            "[solver]\nt_end = 5\nneutralize = true\n"
        )
        main(["run", str(write_config(tmp_path, body))])
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        vol = 4 * np.pi / 3
        target = (1 / vol) ** (1 / 3)
        assert summary["max_linf"] == pytest.approx(target, rel=0.01)
        assert load_field(tmp_path / "out" / "final.chlb").linf == pytest.approx(target, rel=0.01)
        # the ball fills the mesh, so the outer-boundary guard marks the run inconclusive
        assert summary["boundary_flag"]

    def test_blow_up(self, tmp_path):
        body = (
            "[model]\nm = 1.25\na = 0\nb = 0\nallow_degenerate = true\n"
            "[geometry]\nr_max = 10\ncells = 200\n"
            "[initial_data]\nmass = 50\nwidth = 0.3\n"
            "[solver]\nt_end = 1\nblowup_linf_threshold = 30000\n"
        )
        main(["run", str(write_config(tmp_path, body))])
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["verdict"] == "blow_up" and summary["t_final"] < 1

    def test_unreadable(self, tmp_path):
        assert main(["run", str(tmp_path / "missing.ini")]) == EXIT_INVALID
        bad = tmp_path / "bad.ini"
        bad.write_text("this is not ini")
        assert main(["run", str(bad)]) == EXIT_INVALID


SWEEP_BASE = (
    "[geometry]\nr_max = 6\ncells = 24\n"
    "[initial_data]\nwidth = 0.5\n"
    "[solver]\nt_end = 0.05\n"
)


class TestSweep:
    def test_five_by_five(self, tmp_path):
        axes = "[sweep.axes]\nalpha = 1, 1.5, 2, 2.5, 3\nbeta = 1, 1.5, 2, 2.5, 3\n"
        cfg = write_config(tmp_path, SWEEP_BASE + axes)
        assert main(["sweep", str(cfg), "--workers", "1"]) == EXIT_OK
        rows = [
            r for r in (tmp_path / "out" / "atlas.csv").read_text().splitlines() if not r.startswith("#")
        ]
        assert len(rows) == 26 and "consistency" not in rows[0]
        data = json.loads((tmp_path / "out" / "atlas.json").read_text())
        assert data["meta"]["config"]["sweep"]["axes"]["alpha"] == [1.0, 1.5, 2.0, 2.5, 3.0]

    def test_compare_theory_column(self, tmp_path):
        cfg = write_config(tmp_path, SWEEP_BASE + "[sweep.axes]\nbeta = 1, 3\n")
        main(["sweep", str(cfg), "--compare-theory"])
        header = [
            r for r in (tmp_path / "out" / "atlas.csv").read_text().splitlines() if not r.startswith("#")
        ][0]
        assert "consistency" in header.split(",")

    def test_single_point_equals_run_and_check(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SWEEP_BASE + "[model]\nalpha = 2.5\n[sweep.axes]\nalpha = 2.5\n")
        main(["sweep", str(cfg), "--compare-theory"])
        rec = json.loads((tmp_path / "out" / "atlas.json").read_text())["records"][0]
        main(["run", str(cfg)])
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        main(["check", "--config", str(cfg), "--json", str(tmp_path / "c.json")])
        report = json.loads((tmp_path / "c.json").read_text())
        assert rec["verdict"] == summary["verdict"]
        assert rec["max_linf"] == summary["max_linf"]
        assert rec["h1_holds"] == report["h1_holds"] and rec["predicted"] == report["predicted"]

    def test_needs_axes(self, tmp_path):
        assert main(["sweep", str(write_config(tmp_path, SWEEP_BASE))]) == EXIT_INVALID

    def test_too_many_axes(self, tmp_path):
        axes = "[sweep.axes]\nalpha = 1\nbeta = 1\nm = 1\n"
        assert main(["sweep", str(write_config(tmp_path, SWEEP_BASE + axes))]) == EXIT_INVALID


def test_paired_sweep_repulsive_region_contains_attractive(tmp_path):
    axes = "[sweep.axes]\nalpha = 0.5, 1.5, 3\nbeta = 1, 2, 3\n"
    base = (
        "[geometry]\nr_max = 10\ncells = 100\n"
        "[initial_data]\nmass = 20\nwidth = 0.3\n"
        "[solver]\nt_end = 1\nblowup_linf_threshold = 3000\n"
    )
    regions = {}
    for sign in ("attractive", "repulsive"):
        d = tmp_path / sign
        d.mkdir()
        cfg = write_config(d, base + f"[model]\nm = 1.25\nsign = {sign}\n" + axes)
        assert main(["sweep", str(cfg), "--compare-theory", "--workers", "1"]) == EXIT_OK
        recs = json.loads((d / "out" / "atlas.json").read_text())["records"]
        regions[sign] = (
            {(r["alpha"], r["beta"]) for r in recs if r["verdict"] == "bounded"},
            {(r["alpha"], r["beta"]) for r in recs if r["predicted"] == "bounded"},
        )
    for att, rep in zip(regions["attractive"], regions["repulsive"]):
        assert att <= rep
    # the concentrated attractive point with the weakest damping does blow up
    assert (0.5, 1.0) not in regions["attractive"][0] and (0.5, 1.0) in regions["repulsive"][0]
