import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from popuc.cli import main, parse_range, InputError
from popuc.families import table1_family
from popuc.formats import emit_table, format_parameters
from popuc.schur import random_parameters, zero_parameters


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO("".join(l + "\n" for l in text.splitlines() if not l.startswith("#")))))


# -- ranges ----------------------------------------------------------------


def test_parse_range():
    assert np.allclose(parse_range("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(parse_range("-10:20:0.05")[[0, -1]], [-10, 20])
    assert parse_range("2:2:0.1").tolist() == [2.0]
    for bad in ("0:1", "1:0:0.1", "0:1:0", "a:b:c", "0:inf:1"):
        with pytest.raises(InputError):
            parse_range(bad)


# -- spectrum --------------------------------------------------------------


def test_spectrum_shift_matrix(tmp_path, capsys):
    f = tmp_path / "p.txt"
    f.write_text(format_parameters(zero_parameters(5)))
    code, out, _ = run(capsys, "spectrum", str(f), "--format", "csv")
    assert code == 0
    theta = [float(r["theta"]) for r in rows_of(out)]
    assert np.allclose(theta, [k * math.pi / 3 for k in range(1, 7)], atol=1e-8)


def test_spectrum_random_residuals(tmp_path, capsys):
    f = tmp_path / "p.txt"
    f.write_text(format_parameters(random_parameters(6, 12)))
    code, out, _ = run(capsys, "spectrum", str(f), "--format", "csv")
    assert code == 0
    assert all(float(r["residual"]) <= 1e-8 for r in rows_of(out))


def test_spectrum_malformed(tmp_path, capsys):
    f = tmp_path / "p.txt"
    f.write_text("# bad\nalphas: [0.1, 1.5i]\ntau: 1\n")
    code, _, err = run(capsys, "spectrum", str(f))
    assert code == 2 and "line 2" in err


def test_spectrum_missing_file(capsys):
    code, _, _ = run(capsys, "spectrum", "/nonexistent/params.txt")
    assert code == 2


# -- validate --------------------------------------------------------------


def test_validate_small(capsys):
    code, out, _ = run(capsys, "validate", "1", "1", "7")
    assert code == 0 and "all 1 instances passed" in out


def test_validate_flags(capsys):
    code, _, _ = run(capsys, "validate", "--n", "3", "--trials", "5", "--seed", "2")
    assert code == 0


def test_validate_corrupt_hook_writes_replay(tmp_path, capsys):
    replay = tmp_path / "replay.txt"
    code, out, _ = run(capsys, "validate", "4", "3", "1", "--inject-corrupt-beta", "--out", str(replay))
    assert code == 1
    text = replay.read_text()
    assert "coincidence" in text and "alphas:" in text
    from popuc.formats import parse_parameters

    assert parse_parameters(text).n == 4


def test_validate_bad_arguments(capsys):
    assert run(capsys, "validate", "0", "1", "1")[0] == 2
    assert run(capsys, "validate", "1", "x", "1")[0] == 2
    assert run(capsys, "validate", "1", "2")[0] == 2


# -- classify --------------------------------------------------------------


def test_classify_table1_boundaries(capsys):
    code, out, _ = run(capsys, "classify", "--family", "table1", "--n", "5", "--t", "-10:20:0.05", "--format", "csv")
    assert code == 0
    rows = rows_of(out)
    starts = np.array([float(r["start"]) for r in rows[1:]])
    assert np.min(np.abs(starts - math.sqrt(3))) <= 1e-6
    assert np.min(np.abs(starts + math.sqrt(3))) <= 1e-6
    assert all(r["agrees"] in ("yes", "-") for r in rows)


def test_classify_hypergeom_single_interval(capsys):
    code, out, _ = run(capsys, "classify", "--family", "hypergeom", "--a", "1.5", "--n", "5", "--t", "0:10:0.1",
                       "--format", "csv")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 1
    assert rows[0]["predicted"] == "clockwise" and rows[0]["observed"] == "clockwise"


def test_classify_single_point(capsys):
    code, out, _ = run(capsys, "classify", "--family", "table1", "--t", "-9:-9:0.1", "--format", "csv")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 1 and rows[0]["classification"] == "I++&H-"
    assert rows[0]["predicted"] == "counterclockwise"


def test_classify_family_error(capsys):
    code, _, err = run(capsys, "classify", "--family", "hypergeom", "--a", "-1", "--t", "0:1:0.1")
    assert code == 3 and "family error" in err


def test_classify_unknown_family(capsys):
    assert run(capsys, "classify", "--family", "nope", "--t", "0:1:0.1")[0] == 2
    assert run(capsys, "classify", "--family", "file:/nonexistent", "--t", "0:1:0.1")[0] == 2


def test_classify_zeta_option(capsys):
    # the hypergeometric family only admits zeta = 1
    assert run(capsys, "classify", "--family", "hypergeom", "--t", "0:1:0.5", "--zeta", "1+0i")[0] == 0
    assert run(capsys, "classify", "--family", "hypergeom", "--t", "0:1:0.5", "--zeta", "0+1i")[0] == 3
    assert run(capsys, "classify", "--family", "table1", "--t", "0:1:0.5", "--zeta", "1")[0] == 2


# -- track -----------------------------------------------------------------


def test_track_table1_non_monotone_windows(capsys):
    code, out, _ = run(capsys, "track", "--family", "table1", "--t", "6.2832:21.99:0.02")
    assert code == 0
    rows = rows_of(out)
    t = np.array([float(r["t"]) for r in rows])
    theta = np.array([[float(r[f"theta_{i}"]) for i in range(1, 6)] for r in rows])
    d = np.diff(theta, axis=0)
    for lo, hi in ((3 * math.pi, 4 * math.pi), (5 * math.pi, 6 * math.pi)):
        sel = (t[1:] > lo) & (t[:-1] < hi)
        assert np.any(d[sel] > 0) and np.any(d[sel] < 0)


def test_track_constant_family_is_flat(tmp_path, capsys):
    src = tmp_path / "const.txt"
    A = np.array([[2 + 1j, 0.5], [0.5, 1 + 2j]])
    lines = ["# popuc-table kind=matrix order=2"]
    for t in (0.0, 0.5, 1.0):
        lines.append(",".join([repr(t)] + [f"{z.real}{z.imag:+}i" for z in A.reshape(-1)]))
    src.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "track", "--family", f"file:{src}", "--t", "0:1:0.5")
    assert code == 0
    rows = rows_of(out)
    for i in (1, 2):
        assert len({r[f"theta_{i}"] for r in rows}) == 1


def test_track_coarse_tabulated_is_tracking_fault(tmp_path, capsys):
    src = tmp_path / "coarse.txt"
    src.write_text(emit_table(table1_family(5), [-2.0, 2.0]))
    code, _, err = run(capsys, "track", "--family", f"file:{src}", "--t", "-2:2:4")
    assert code == 4 and "tracking fault" in err


def test_track_off_grid_query_is_family_error(tmp_path, capsys):
    src = tmp_path / "grid.txt"
    src.write_text(emit_table(table1_family(3), [0.0, 0.1, 0.2]))
    assert run(capsys, "track", "--family", f"file:{src}", "--t", "0:0.2:0.05")[0] == 3


def test_track_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run(capsys, "track", "--family", "table1", "--t", "-3:3:0.1", "--out", str(out))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_track_svg(tmp_path, capsys):
    out = tmp_path / "path.svg"
    assert run(capsys, "track", "--family", "table1", "--t", "0:2:0.1", "--format", "svg", "--out", str(out))[0] == 0
    data = out.read_bytes()
    assert data.lstrip().startswith(b"<?xml") and b"<svg" in data
    assert (tmp_path / "path.csv").exists()
    again = tmp_path / "again.svg"
    run(capsys, "track", "--family", "table1", "--t", "0:2:0.1", "--format", "svg", "--out", str(again))
    assert again.read_bytes() == data


def test_track_svg_needs_out(capsys):
    assert run(capsys, "track", "--family", "table1", "--t", "0:1:0.1", "--format", "svg")[0] == 2


# -- repro -----------------------------------------------------------------


def test_repro_table1(capsys):
    code, out, _ = run(capsys, "repro", "table1", "--format", "csv")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 18 and all(r["status"] == "ok" for r in rows)
    from popuc.reference import printed_tolerance

    expect = {-6.3: ("0.435125", "0.687466", "1.04999", "1.4372", "1.7185"),
              5.0: ("5.00418", "5.04361", "5.12066", "5.24861", "5.41438")}
    for t, printed in expect.items():
        row = next(r for r in rows if float(r["t"]) == t)
        for i, text in enumerate(printed, 1):
            assert abs(float(row[f"theta_{i}"]) - float(text)) <= printed_tolerance(text) + 5e-7


def test_repro_table1_tight_tolerance_still_passes(capsys):
    # slack is added on top of the half-unit rule
    assert run(capsys, "repro", "table1", "--tol", "0")[0] == 0


def test_repro_hypergeom(capsys):
    code, out, _ = run(capsys, "repro", "hypergeom", "--format", "csv")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 6 and all(r["status"] == "ok" for r in rows)


def test_degree_one_zero_moves_clockwise_from_pi():
    from popuc.families import hypergeometric_zeros
    from popuc.schur import normalize_angle

    th0 = normalize_angle(hypergeometric_zeros(1.0, 0.0, 1)[0])
    th1 = normalize_angle(hypergeometric_zeros(1.0, 1.0, 1)[0])
    assert th0 == pytest.approx(math.pi)
    assert th1 < th0


# -- entry points ----------------------------------------------------------


def test_argparse_errors(capsys):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "classify", "--family", "table1")[0] == 2
    assert run(capsys, "classify", "--family", "table1", "--t", "0:1:0.1", "--tol", "-1")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "popuc", "validate", "1", "1", "7"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
