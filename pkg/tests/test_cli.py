import json
import math
import subprocess
import sys

from hypothesis import given, settings
from hypothesis import strategies as st

from addbasis import analytics
from addbasis.cli import (
    DEFAULT_SEED,
    EXIT_IO,
    EXIT_RESOURCE,
    EXIT_VALIDATION,
    ROW_COLUMNS,
    RunConfig,
    deserialize,
    dispatch,
    main,
    serialize,
)
from addbasis.model import Mode


def _cfg(**kw):
    return RunConfig(**kw)


def test_dispatch_is_byte_deterministic():
    cfg = _cfg(subcommand="simulate", n_values=(1000,), p_values=(0.1,),
               trials=100, seed=7, out_format="json")
    status1, out1 = dispatch(cfg)
    status2, out2 = dispatch(cfg)
    assert status1 == status2 == 0
    assert out1 == out2


def test_console_script_round():
    proc = subprocess.run(
        [sys.executable, "-m", "addbasis.cli", "counts", "--n", "2", "--k", "2"],
        capture_output=True,
    )
    assert proc.returncode == 0
    lines = proc.stdout.decode().strip().splitlines()
    assert lines[0] == "n,k,j,coefficient"
    assert [row.split(",")[-1] for row in lines[1:]] == ["1", "1", "2", "1", "1"]


def test_counts_by_distinct_record():
    status, out = dispatch(_cfg(subcommand="counts", n_values=(5,), k=3, j=3))
    assert status == 0
    recs = deserialize(out, "csv")
    assert recs[0]["total"] == 3 and recs[0]["c_3"] == 1


def test_exact_reports_oracle_lambda():
    status, out = dispatch(_cfg(subcommand="exact", n_values=(4,), k=2,
                                alpha=0.5, p_values=(0.3,)))
    recs = deserialize(out, "csv")
    want = analytics.exact_mean_missing_k2(4, 0.3, 0.5, Mode.TRUNCATED)
    assert math.isclose(recs[0]["exact_lambda"], want, rel_tol=1e-15)
    assert math.isclose(recs[0]["exact_lambda"], 3.5099, abs_tol=1e-4)


def test_sweep_cli_emits_rows_and_errors(capsys):
    status, out = dispatch(_cfg(subcommand="sweep", n_values=(500, 1000),
                                a_values=(0.0, -90.0), trials=20, seed=3))
    assert status == 0
    recs = deserialize(out, "csv")
    assert len(recs) == 4
    assert [r["n"] for r in recs] == [500, 500, 1000, 1000]
    failed = [r for r in recs if r["error"]]
    assert len(failed) == 2 and all(r["p"] is None for r in failed)


def test_diagnose_record_carries_note():
    status, out = dispatch(_cfg(subcommand="diagnose", n_values=(1000,), alpha=0.5))
    recs = deserialize(out, "csv")
    assert "upper bound" in recs[0]["note"]
    assert recs[0]["tv_bound"] >= recs[0]["sigma1"]


def test_serialize_header_only_and_single_row():
    assert serialize([], "csv", ROW_COLUMNS).decode().strip() == ",".join(ROW_COLUMNS)
    rec = {c: None for c in ROW_COLUMNS} | {"n": 5, "k": 2, "mode": "truncated",
                                            "trials": 1, "seed": 9}
    data = serialize([rec], "csv", ROW_COLUMNS)
    assert len(data.decode().splitlines()) == 2
    assert data.endswith(b"\n") and b"\r" not in data


def test_nan_renders_as_missing():
    rec = {"a": float("nan"), "b": 1.5}
    assert serialize([rec], "csv", ("a", "b")) == b"a,b\n,1.5\n"
    assert json.loads(serialize([rec], "json", ("a", "b")))[0]["a"] is None


_opt_float = st.none() | st.floats(allow_nan=False, allow_infinity=False, width=64)
_row_strategy = st.fixed_dictionaries({
    "n": st.integers(1, 10**7),
    "k": st.integers(2, 6),
    "alpha": st.floats(0.01, 0.99),
    "a_n": _opt_float,
    "p": st.none() | st.floats(0, 1),
    "mode": st.sampled_from(["truncated", "modular"]),
    "trials": st.integers(0, 10**6),
    "basis_prob_hat": st.none() | st.floats(0, 1),
    "ci_lo": st.none() | st.floats(0, 1),
    "ci_hi": st.none() | st.floats(0, 1),
    "exact_lambda": _opt_float,
    "asympt_lambda": _opt_float,
    "limit_prob": st.none() | st.floats(0, 1),
    "tv_hat": st.none() | st.floats(0, 1),
    "seed": st.integers(0, 2**63 - 1),
    # an empty CSV cell reads back as None, so a present error string is non-empty;
    # NUL cannot be written by the csv module
    "error": st.none() | st.text(
        st.characters(blacklist_categories=("Cs",), blacklist_characters="\r\x00"),
        min_size=1,
        max_size=40,
    ),
})


@settings(max_examples=100, deadline=None)
@given(rows=st.lists(_row_strategy, max_size=5), fmt=st.sampled_from(["csv", "json"]))
def test_serialize_round_trip(rows, fmt):
    data = serialize(rows, fmt, ROW_COLUMNS)
    back = deserialize(data, fmt)
    assert back == [dict(r) for r in rows]


def test_main_validation_exit_code(capsys):
    code = main(["simulate", "--n", "10", "--k", "2", "--alpha", "1.5", "--p", "0.1"])
    assert code == EXIT_VALIDATION
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "alpha" in err["message"]


def test_main_resource_exit_code(monkeypatch, capsys):
    monkeypatch.setenv("ADDBASIS_MAX_BITMAP_BITS", "50")
    code = main(["simulate", "--n", "100", "--p", "0.1", "--trials", "1"])
    assert code == EXIT_RESOURCE
    capsys.readouterr()


def test_main_io_exit_code(capsys):
    code = main(["counts", "--n", "2", "--k", "2",
                 "--output", "/nonexistent-dir/out.csv"])
    assert code == EXIT_IO
    capsys.readouterr()


def test_main_writes_output_file(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    code = main(["counts", "--n", "2", "--k", "2", "--output", str(out)])
    assert code == 0
    assert out.read_bytes().splitlines()[0] == b"n,k,j,coefficient"
    capsys.readouterr()


def test_config_file_sets_defaults_but_flags_win(tmp_path, capsys):
    cfg = tmp_path / "defaults.cfg"
    cfg.write_text("seed = 99\ntrials = 5\n")
    out1 = tmp_path / "a.csv"
    code = main(["--config", str(cfg), "simulate", "--n", "100", "--p", "0.2",
                 "--output", str(out1)])
    assert code == 0
    recs = deserialize(out1.read_bytes(), "csv")
    assert recs[0]["seed"] == 99 and recs[0]["trials"] == 5
    out2 = tmp_path / "b.csv"
    code = main(["--config", str(cfg), "simulate", "--n", "100", "--p", "0.2",
                 "--seed", "7", "--output", str(out2)])
    assert code == 0
    assert deserialize(out2.read_bytes(), "csv")[0]["seed"] == 7
    capsys.readouterr()


def test_simulate_fixed_size_and_modular(tmp_path, capsys):
    out = tmp_path / "fixed.csv"
    code = main(["simulate", "--n", "200", "--mode", "modular", "--p", "0.2",
                 "--fixed-size", "40", "--trials", "50", "--output", str(out)])
    assert code == 0
    rec = deserialize(out.read_bytes(), "csv")[0]
    assert rec["mode"] == "modular" and rec["trials"] == 50
    assert 0.0 <= rec["basis_prob_hat"] <= 1.0
    capsys.readouterr()


def test_default_seed_documented_constant():
    assert DEFAULT_SEED == 271828
