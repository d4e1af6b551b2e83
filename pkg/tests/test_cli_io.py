import csv
import io
import json
import math
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spintunnel.bath_dynamics import BathParams
from spintunnel.cli_io import (
    ConfigError,
    GridRange,
    SweepSpec,
    SweepTable,
    ValidationError,
    emit,
    load_preset,
    parse_config,
    run_sweep,
    serialize_preset,
)
from spintunnel.cli_io.cli import main
from spintunnel.cli_io.output import format_value, render
from spintunnel.cli_io.presets import Preset
from spintunnel.core_model import SpinSystem
from spintunnel.spectra import delta_omega_instanton, instanton_splitting

DATA = Path(__file__).parent / "data"
FIG1_HEADER = "m,T_K,rate_per_s,tau_dec_s,s,A_J,B_J,Bint_J,rho_kg_m3,c_m_s"


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestPresets:
    def test_mn12(self):
        p = load_preset("mn12")
        assert (p.sys.s, p.sys.A, p.sys.B) == (10, 7.5e-24, 1.7e-26)
        assert (p.bath.B_int, p.bath.rho, p.bath.c) == (7.5e-24, 1.83e3, 2.0e3)
        assert p.bath.B_int == p.sys.A

    def test_spm(self):
        p = load_preset("spm")
        assert (p.sys.s, p.sys.A, p.sys.B) == (3222, 2.57e-27, 2.57e-30)
        assert p.sys.B == 1e-3 * p.sys.A
        assert (p.bath.B_int, p.bath.rho, p.bath.c) == (4.1e-23, 5.0e3, 3.0e3)

    def test_unknown_names_options(self):
        with pytest.raises(ConfigError, match="mn12, spm"):
            load_preset("bogus")

    @pytest.mark.parametrize("name", ["mn12", "spm"])
    def test_round_trip_bit_exact(self, name):
        p = load_preset(name)
        q = parse_config(serialize_preset(p))
        assert q == p
        assert q.sys.A.hex() == p.sys.A.hex() and q.bath.rho.hex() == p.bath.rho.hex()

    @settings(max_examples=100, deadline=None)
    @given(
        two_s=st.integers(1, 400),
        A=st.floats(1e-30, 1e-20),
        ratio=st.floats(0, 0.1),
        bint=st.floats(0, 1e-20),
        rho=st.floats(1, 1e5),
        c=st.floats(1, 1e5),
    )
    def test_round_trip_property(self, two_s, A, ratio, bint, rho, c):
        p = Preset("x", SpinSystem(two_s, A, ratio * A), BathParams(bint, rho, c))
        assert parse_config(serialize_preset(p)) == p

    def test_config_file(self, tmp_path):
        path = tmp_path / "fe8.cfg"
        path.write_text("# comment\ns = 10\nA_J = 3.8e-24\nB_J = 1e-26\nBint_J = 3.8e-24\nrho_kg_m3 = 1.9e3\nc_m_s = 2e3\n")
        p = load_preset(path)
        assert p.name == "fe8" and p.sys.A == 3.8e-24

    def test_half_integer_spin(self):
        text = serialize_preset(load_preset("mn12")).replace("s = 10", "s = 7/2")
        assert parse_config(text).sys.two_s == 7

    @pytest.mark.parametrize(
        "change, message",
        [
            (("A_J = 7.5e-24", "A_J = seven"), ":3: A_J"),
            (("A_J = 7.5e-24", "A_J 7.5e-24"), ":3: expected 'key = value'"),
            (("A_J = 7.5e-24", "AJ = 7.5e-24"), ":3: unknown key 'AJ'"),
            (("A_J = 7.5e-24", "A_J ="), ":3: empty value"),
            (("A_J = 7.5e-24\n", ""), "missing key(s) A_J"),
            (("s = 10", "s = 10\ns = 11"), ":3: duplicate key 's'"),
            (("s = 10", "s = 1/3"), "half-integer"),
            (("rho_kg_m3 = 1830.0", "rho_kg_m3 = -1"), "rho"),
        ],
    )
    def test_malformed_diagnostics(self, change, message):
        text = serialize_preset(load_preset("mn12")).replace(*change)
        with pytest.raises(ConfigError) as info:
            parse_config(text, "bad.cfg")
        assert "bad.cfg" in str(info.value) and message in str(info.value)

    def test_overrides(self):
        p = load_preset("mn12").with_overrides(s=Fraction(5, 2), B_int=0.0)
        assert p.sys.two_s == 5 and p.bath.B_int == 0.0 and p.sys.A == 7.5e-24


class TestSweep:
    def test_default_fig1_sweep(self):
        table = run_sweep(SweepSpec(load_preset("mn12")))
        assert ",".join(table.columns) == FIG1_HEADER
        assert len(table.rows) == 63
        rate = {(r["m"], r["T_K"]): r["rate_per_s"] for r in table.rows}
        for (m, T), value in rate.items():
            assert value == pytest.approx(rate[(-m, T)], rel=1e-12)
        assert [r["m"] for r in table.rows[:4]] == [-10, -10, -10, -9]

    def test_time_sweep_undamped_is_rabi(self):
        preset = load_preset("mn12").with_overrides(s=2, B=1e-25, B_int=0.0)
        dw = delta_omega_instanton(instanton_splitting(preset.sys))
        times = [k * 0.1 / dw for k in range(60)]
        table = run_sweep(SweepSpec(preset, "time", times, ("p_minus_s",), (4.0,)))
        for row, t in zip(table.rows, times):
            assert row["p_minus_s"] == math.sin(dw * t / 2) ** 2

    def test_empty_outputs_rejected_before_work(self, monkeypatch):
        import spintunnel.cli_io.sweep as sweep_mod

        monkeypatch.setattr(sweep_mod, "_evaluate_point", lambda *_: pytest.fail("evaluated"))
        with pytest.raises(ValidationError):
            run_sweep(SweepSpec(load_preset("mn12"), outputs=()))

    @pytest.mark.parametrize(
        "kw",
        [
            dict(variable="pressure"),
            dict(outputs=("colour",)),
            dict(grid=[]),
            dict(grid=[11]),
            dict(grid=[0.25]),
            dict(variable="time", grid=None),
            dict(variable="time", grid=[-1.0], outputs=("p_minus_s",)),
            dict(variable="B_over_A", grid=GridRange(0.0, 1e-2, 5, "log")),
            dict(temperatures=(-1.0,)),
            dict(form="series"),
        ],
    )
    def test_validation_errors(self, kw):
        with pytest.raises(ValidationError):
            run_sweep(SweepSpec(load_preset("mn12"), **kw))

    def test_parallel_matches_serial(self):
        spec = SweepSpec(load_preset("mn12"), outputs=("entropy_rate", "gamma"))
        assert render(run_sweep(spec, jobs=2)) == render(run_sweep(spec, jobs=1))

    def test_temperature_sweep_monotone(self):
        spec = SweepSpec(load_preset("mn12"), "temperature", GridRange(0.5, 20, 12, "log"), ("gamma", "tau_dec"))
        table = run_sweep(spec)
        gammas = [r["gamma_per_s"] for r in table.rows]
        assert all(a <= b for a, b in zip(gammas, gammas[1:]))
        assert table.columns[:2] == ["T_K", "m"]

    def test_b_over_a_sweep(self):
        spec = SweepSpec(load_preset("mn12").with_overrides(s=3), "B_over_A", GridRange(1e-3, 1e-2, 4, "log"),
                         ("delta_e_exact", "delta_e_instanton"))
        table = run_sweep(spec)
        exact = [r["delta_e_exact_J"] for r in table.rows]
        assert all(0 < a < b for a, b in zip(exact, exact[1:]))
        assert [r["B_J"] for r in table.rows] == pytest.approx([r["B_over_A"] * 7.5e-24 for r in table.rows])

    def test_point_failure_goes_to_error_column(self):
        spec = SweepSpec(load_preset("mn12").with_overrides(s=1), outputs=("gamma",), grid=[0])
        table = run_sweep(spec)
        assert table.columns[-1] == "error" and table.failed == 3
        assert "s >= 2" in table.rows[0]["error"]


class TestEmit:
    def test_infinite_time(self):
        preset = load_preset("mn12").with_overrides(B_int=0.0)
        text = render(run_sweep(SweepSpec(preset, grid=[10], temperatures=(4.0,))))
        row = rows_of(text)[0]
        assert row["tau_dec_s"] == "inf" and float(row["rate_per_s"]) == 0.0

    def test_number_format(self):
        assert format_value(1.7e-26) == "1.7000000000000001e-26"
        assert float(format_value(0.1)) == 0.1
        assert format_value(Fraction(-3, 2)) == "-1.5"
        assert format_value(Fraction(10)) == "10"
        assert (format_value(True), format_value(None), format_value(-math.inf)) == ("true", "", "-inf")

    def test_csv_round_trips_floats(self):
        table = run_sweep(SweepSpec(load_preset("spm"), grid=[3222, 0, -1], temperatures=(1.0, 10.0)))
        for row, parsed in zip(table.rows, rows_of(render(table))):
            assert float(parsed["rate_per_s"]) == row["rate_per_s"]

    def test_byte_identical_reruns(self, tmp_path):
        spec = SweepSpec(load_preset("mn12"))
        emit(run_sweep(spec), "csv", tmp_path / "a.csv")
        emit(run_sweep(spec), "csv", tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_json(self):
        table = run_sweep(SweepSpec(load_preset("mn12").with_overrides(B_int=0.0), grid=[-1, 1], temperatures=(4.0,)))
        stream = io.StringIO()
        emit(table, "json", stream)
        records = json.loads(stream.getvalue())
        assert len(records) == 2 and list(records[0]) == FIG1_HEADER.split(",")
        assert records[0]["tau_dec_s"] == "inf" and records[0]["m"] == -1

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render(SweepTable(["a"], []), "xml")

    def test_golden_file(self):
        stream = io.StringIO()
        emit(run_sweep(SweepSpec(load_preset("mn12")), jobs=1), "csv", stream)
        assert stream.getvalue() == (DATA / "fig1_mn12.csv").read_text(encoding="utf-8")


class TestCli:
    def test_sweep_default_matches_golden(self, tmp_path):
        out = tmp_path / "fig1.csv"
        assert main(["sweep", "--jobs", "1", "--out", str(out)]) == 0
        assert out.read_bytes() == (DATA / "fig1_mn12.csv").read_bytes()

    def test_splitting(self, capsys):
        assert main(["splitting", "--s", "1", "--A", "1e-24", "--B", "1e-26"]) == 0
        row = rows_of(capsys.readouterr().out)[0]
        assert float(row["delta_e_exact_J"]) == pytest.approx(4e-26, rel=1e-10)

    def test_spm_splitting_unresolved(self, capsys):
        assert main(["splitting", "--preset", "spm"]) == 0
        row = rows_of(capsys.readouterr().out)[0]
        assert row["delta_e_exact_J"] == "" and float(row["delta_e_instanton_J"]) == 0.0
        assert float(row["delta_e_instanton_log10_abs"]) < -1000

    def test_entropy_rate_json(self, capsys):
        assert main(["entropy-rate", "--T", "1,10", "--format", "json"]) == 0
        records = json.loads(capsys.readouterr().out)
        assert [r["T_K"] for r in records] == [1.0, 10.0]
        assert records[0]["rate_per_s"] < records[1]["rate_per_s"]

    def test_tunnel_prob(self, capsys):
        assert main(["tunnel-prob", "--s", "2", "--B", "1e-25", "--Bint", "0", "--t-max", "1e-9", "--steps", "10", "--jobs", "1"]) == 0
        rows = rows_of(capsys.readouterr().out)
        assert len(rows) == 11 and rows[0]["p_minus_s"].startswith("0.0")

    def test_oracle(self, capsys):
        assert main(["oracle", "--t-max", "2e-8", "--g", "0", "--steps", "100"]) == 0
        captured = capsys.readouterr()
        assert "golden-rule slope" in captured.err
        purity = [float(r["purity"]) for r in rows_of(captured.out)]
        assert max(abs(p - 1) for p in purity) < 1e-10

    @pytest.mark.parametrize(
        "argv",
        [
            ["sweep", "--outputs", ""],
            ["sweep", "--preset", "bogus"],
            ["sweep", "--m", "11", "--outputs", "gamma,tau_dec", "--variable", "temperature", "--grid", "1,2"],
            ["sweep", "--grid", "1", "--range", "1", "2", "3"],
            ["sweep", "--variable", "time", "--range", "0", "1", "x"],
            ["tunnel-prob"],
            ["tunnel-prob", "--t-max", "1", "--T", "1,2"],
            ["entropy-rate", "--T", "-4"],
            ["splitting", "--s", "0.3"],
            ["splitting", "--A", "-1"],
            ["oracle", "--preset", "mn12", "--t-max", "1e-9"],
            ["sweep", "--jobs", "0"],
            ["nonsense"],
        ],
    )
    def test_invalid_input_exits_2(self, argv, capsys):
        try:
            code = main(argv)
        except SystemExit as exc:  # argparse usage errors
            code = exc.code
        assert code == 2

    def test_unwritable_output_exits_2(self, tmp_path):
        assert main(["entropy-rate", "--out", str(tmp_path / "missing" / "x.csv")]) == 2

    def test_failed_point_exits_3(self, tmp_path, capsys):
        out = tmp_path / "x.csv"
        assert main(["sweep", "--s", "1", "--outputs", "gamma", "--grid", "0", "--T", "1", "--out", str(out)]) == 3
        assert "error" in out.read_text().splitlines()[0]

    def test_computation_failure_exits_3(self, monkeypatch):
        import spintunnel.cli_io.cli as cli

        def boom(*_):
            raise RuntimeError("no convergence")

        monkeypatch.setattr(cli, "exact_splitting", boom)
        assert main(["splitting"]) == 3

    def test_subprocess_entry_point(self, tmp_path):
        out = tmp_path / "fig1.csv"
        done = subprocess.run(
            [sys.executable, "-m", "spintunnel", "sweep", "--jobs", "2", "--out", str(out)],
            capture_output=True, text=True,
        )
        assert done.returncode == 0, done.stderr
        assert out.read_text().splitlines()[0] == FIG1_HEADER
        bad = subprocess.run([sys.executable, "-m", "spintunnel", "sweep", "--preset", "bogus"], capture_output=True, text=True)
        assert bad.returncode == 2 and "valid options" in bad.stderr
