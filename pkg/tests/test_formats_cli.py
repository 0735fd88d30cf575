import csv
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from fracoam import cli
from fracoam.formats import (MalformedInputError, phase_colors, read_field_csv, write_field_csv, write_pgm16,
                             write_ppm_phase)
from fracoam.propagation import ConvergenceError, FieldGrid
from fracoam.vortex import detect_vortices, net_charge


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def random_grid(n=9, extent=1.5, seed=0):
    rng = np.random.default_rng(seed)
    s = rng.standard_normal((n, n)) * 10.0 ** rng.integers(-300, 300, (n, n)) + 1j * rng.standard_normal((n, n))
    s[0, 0] = complex(-0.0, 5e-324)
    return FieldGrid(n, extent, s, 0.0123, 100.0)


# --------------------------------------------------------------- field CSV

def test_field_csv_round_trip_is_bit_exact(tmp_path):
    g = random_grid()
    p = tmp_path / "f.csv"
    write_field_csv(p, g)
    back = read_field_csv(p)
    assert back.n == g.n and back.extent == g.extent and back.z == g.z and back.k == g.k
    assert np.array_equal(back.samples.view(np.uint64), g.samples.view(np.uint64))


def test_field_csv_layout(tmp_path):
    g = random_grid(n=3, extent=1.0)
    p = tmp_path / "f.csv"
    write_field_csv(p, g)
    raw = p.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == "x,y,re,im"
    rows = list(csv.reader(lines[1:10]))
    # x varies fastest
    assert [float(r[0]) for r in rows[:3]] == [-1.0, 0.0, 1.0]
    assert [float(r[1]) for r in rows[:3]] == [-1.0, -1.0, -1.0]
    assert lines[10:] == ["# n=3", "# extent=1", "# z=0.0123", "# k=100"]


@pytest.mark.parametrize("text,line", [
    ("x,y,re\n", 1),
    ("x,y,re,im\n-1,-1,0,0\n0,-1,abc,0\n", 3),
    ("x,y,re,im\n-1,-1,0,0\n0,-1,0\n", 3),
    ("x,y,re,im\n-1,-1,nan,0\n", 2),
    ("x,y,re,im\n-1,-1,0,0\n1,-1,0,0\n-1,1,0,0\n", 4),
    ("x,y,re,im\n-1,-1,0,0\n1,-1,0,0\n-1,1,0,0\n1,1,0,0\n# extent=wide\n", 6),
    ("x,y,re,im\n-1,-1,0,0\n1,-1,0,0\n1,1,0,0\n-1,1,0,0\n", 4),
])
def test_malformed_field_csv_reports_line(tmp_path, text, line):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(MalformedInputError) as exc:
        read_field_csv(p)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


# ------------------------------------------------------------------ images

def test_pgm_parses_with_pillow(tmp_path):
    vals = np.zeros((5, 7))
    vals[4, 2] = 2.0    # largest y row
    vals[0, 0] = 1.0
    p = tmp_path / "i.pgm"
    write_pgm16(p, vals)
    assert p.read_bytes().startswith(b"P5\n7 5\n65535\n")
    im = Image.open(p)
    assert im.size == (7, 5)
    arr = np.array(im)
    assert arr[0, 2] == 65535           # top row of the image is the largest y
    assert arr[4, 0] == 32768
    assert arr.sum() == 65535 + 32768


def test_ppm_parses_with_pillow(tmp_path):
    ph = np.array([[0.0, 2 * math.pi / 3, 4 * math.pi / 3, 2 * math.pi - 1e-9]])
    p = tmp_path / "p.ppm"
    write_ppm_phase(p, ph)
    im = Image.open(p)
    assert im.mode == "RGB" and im.size == (4, 1)
    arr = np.array(im)[0]
    assert tuple(arr[0]) == (255, 0, 0)
    assert tuple(arr[1]) == (0, 255, 0)
    assert tuple(arr[2]) == (0, 0, 255)
    assert tuple(arr[3]) == tuple(arr[0])


def test_hue_wheel_is_cyclic():
    c = phase_colors(np.array([0.0, 2 * math.pi, -2 * math.pi, 4 * math.pi]))
    assert (c == c[0]).all()


# --------------------------------------------------------------------- CLI

def test_overlap_examples(capsys):
    code, out, _ = run(["overlap", "--M", "3.5", "--alpha", "0", "--Mprime", "3.5",
                        "--alphaprime", "3.141592653589793"], capsys)
    assert code == 0 and "probability 0.000000000000" in out
    code, out, _ = run(["overlap", "--M", "2", "--alpha", "0", "--Mprime", "2", "--alphaprime", "1.0"], capsys)
    assert float(out.split("probability")[1]) == 1.0
    code, out, _ = run(["overlap", "--M", "0.5", "--alpha", "0", "--Mprime", "0.5",
                        "--alphaprime", "1.5707963267948966"], capsys)
    assert float(out.split("probability")[1]) == pytest.approx(0.25, abs=1e-12)


def test_overlap_optional_csv(tmp_path, capsys):
    p = tmp_path / "o.csv"
    code, _, _ = run(["overlap", "--M", "1.5", "--Mprime", "0.5", "--out", str(p)], capsys)
    assert code == 0
    rows = list(csv.DictReader(p.open()))
    assert float(rows[0]["probability"]) < 1e-24
    assert json.loads((tmp_path / "o.csv.manifest.json").read_text())["subcommand"] == "overlap"


@pytest.mark.parametrize("argv", [
    ["overlap", "--M", "1", "--Mprime", "1", "--alpha", "7"],
    ["overlap", "--M", "1", "--Mprime", "1", "--alphaprime", "-0.1"],
    ["overlap", "--M", "nan", "--Mprime", "1"],
    ["spectrum", "--M", "1.5", "--threshold", "1.5"],
    ["variance", "--M", "1.5", "--mmax", "0"],
    ["propagate", "--M", "1.5", "--grid-n", "10", "--out-prefix", "x"],
    ["propagate", "--M", "1.5", "--regime", "fresnel", "--out-prefix", "x"],
    ["vortices", "--in", "missing.csv", "--radius", "-1"],
    ["nonsense"],
    [],
])
def test_bad_arguments_exit_2(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2
    assert capsys.readouterr().err


def test_spectrum_csv(tmp_path, capsys):
    code, out, _ = run(["spectrum", "--M", "2"], capsys)
    assert code == 0
    assert out.splitlines() == ["m,re_c,im_c,probability", "2,1,0,1", "# tail_probability=0"]
    p = tmp_path / "s.csv"
    code, _, _ = run(["spectrum", "--M", "3.5", "--threshold", "1e-4", "--out", str(p)], capsys)
    lines = p.read_text().splitlines()
    rows = list(csv.DictReader(lines[:-1]))
    assert len(rows) == 64
    m = [int(r["m"]) for r in rows]
    assert m == sorted(m)
    tail = float(lines[-1].split("=")[1])
    assert sum(float(r["probability"]) for r in rows) + tail == pytest.approx(1.0, abs=1e-9)
    man = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert man["config"]["threshold"] == 1e-4 and man["outputs"] == [str(p)]


def test_unwritable_output_exit_3(tmp_path, capsys):
    code, _, err = run(["spectrum", "--M", "2", "--out", str(tmp_path / "no" / "s.csv")], capsys)
    assert code == 3 and "I/O" in err


def test_mean_and_variance(capsys):
    assert float(run(["mean", "--M", "3.5"], capsys)[1]) == pytest.approx(3.5, abs=1e-12)
    assert round(float(run(["mean", "--M", "0.25"], capsys)[1]), 7) == 0.0908451
    v1 = float(run(["variance", "--M", "3.5", "--mmax", "100"], capsys)[1])
    v2 = float(run(["variance", "--M", "3.5", "--mmax", "1000"], capsys)[1])
    assert v2 > v1


def test_convergence_failure_exit_4(tmp_path, capsys, monkeypatch):
    def boom(config, threads=None):
        raise ConvergenceError("budget exhausted", mp=7, rho=0.25)
    monkeypatch.setattr(cli, "propagate", boom)
    code, _, err = run(["propagate", "--M", "3.5", "--out-prefix", str(tmp_path / "a")], capsys)
    assert code == 4 and "m'=7" in err and "rho=0.25" in err


PROP = ["propagate", "--M", "3.5", "--kz", "5", "--grid-n", "61", "--extent", "1.5"]


@pytest.fixture(scope="module")
def prop_runs(tmp_path_factory):
    d = tmp_path_factory.mktemp("prop")
    for tag in ("a", "b"):
        assert cli.main(PROP + ["--out-prefix", str(d / tag)]) == 0
    return d


def test_propagate_outputs_deterministic(prop_runs):
    for suffix in ("_field.csv", "_intensity.pgm", "_phase.ppm"):
        assert (prop_runs / ("a" + suffix)).read_bytes() == (prop_runs / ("b" + suffix)).read_bytes()
    ma = json.loads((prop_runs / "a_manifest.json").read_text())
    mb = json.loads((prop_runs / "b_manifest.json").read_text())
    for m in (ma, mb):
        m.pop("created")
        m.pop("argv")
        m.pop("outputs")
    assert ma == mb
    assert ma["config"]["grid_n"] == 61 and ma["config"]["quadrature_tol"] == 1e-8


def test_propagate_images_parse(prop_runs):
    im = Image.open(prop_runs / "a_intensity.pgm")
    assert im.size == (61, 61) and np.array(im).max() == 65535
    assert Image.open(prop_runs / "a_phase.ppm").mode == "RGB"


def test_manifest_replay_is_identical(prop_runs, capsys):
    ref = (prop_runs / "a_field.csv").read_bytes()
    os.remove(prop_runs / "a_field.csv")
    assert cli.main(["--from-manifest", str(prop_runs / "a_manifest.json")]) == 0
    assert (prop_runs / "a_field.csv").read_bytes() == ref


def test_vortices_from_csv_match_in_process(prop_runs, tmp_path, capsys):
    from fracoam.propagation import PropagationConfig, propagate
    g = propagate(PropagationConfig(M=3.5, kz=5.0, grid_n=61, extent=1.5))
    vs = detect_vortices(g)
    out = tmp_path / "v.csv"
    code, _, _ = run(["vortices", "--in", str(prop_runs / "a_field.csv"), "--radius", "1.0",
                      "--out", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,y,charge"
    rows = [tuple(map(float, r)) for r in csv.reader(lines[1:-1])]
    assert rows == [(v.x, v.y, float(v.charge)) for v in vs.vortices]
    assert lines[-1] == f"# net_charge_within_radius={net_charge(vs, 1.0)}"


def test_synthetic_single_vortex_fixture(tmp_path, capsys):
    n, ext = 21, 1.0
    xs = np.linspace(-ext, ext, n)
    X, Y = np.meshgrid(xs, xs)
    c = 0.05   # centre of a plaquette
    g = FieldGrid(n, ext, (X - c) + 1j * (Y - c), 0.0, 1.0)
    p = tmp_path / "one.csv"
    write_field_csv(p, g)
    code, out, _ = run(["vortices", "--in", str(p)], capsys)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 3
    x, y, q = lines[1].split(",")
    assert int(q) == 1 and float(x) == pytest.approx(c) and float(y) == pytest.approx(c)


def test_malformed_csv_exit_5(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("x,y,re,im\n0,0,1,zz\n")
    code, _, err = run(["vortices", "--in", str(p)], capsys)
    assert code == 5 and "line 2" in err


def test_console_script_is_locale_independent():
    env = dict(os.environ, LC_ALL="de_DE.UTF-8", LANG="de_DE.UTF-8")
    res = subprocess.run([sys.executable, "-m", "fracoam.cli", "overlap", "--M", "0.5", "--Mprime", "0.5",
                          "--alphaprime", "1.5707963267948966"], capture_output=True, text=True, env=env)
    assert res.returncode == 0
    assert "probability 0.250000000000" in res.stdout
