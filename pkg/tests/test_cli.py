import pytest

from sdfea.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_VALIDATION, main
from sdfea.harness import figure2_preset, load_config

CONFIG = """
seed = 3
repetitions = 2
budget = 200000
n = 16

[function]
name = "jump"
k = [2, 3]

[[algorithms]]
name = "sd-fea"

[[algorithms]]
name = "rls"
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(CONFIG)
    return path


def test_run_then_plotdata(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config_file), "--out", str(out), "--quiet"]) == EXIT_OK
    assert "8 runs" in capsys.readouterr().out
    assert (out / "summary.csv").exists()
    plot = tmp_path / "plot.csv"
    assert main(["plotdata", "--in", str(out), "--out", str(plot)]) == EXIT_OK
    assert plot.read_text().splitlines()[0] == 'k,"sd-fea(R=25.0,beta=1.5,gamma=0.25)",rls'


def test_seed_override_changes_fingerprint(tmp_path, config_file):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config_file), "--out", str(out), "--seed", "4",
                 "--quiet"]) == EXIT_OK
    assert load_config(out / "config.toml").seed == 4


def test_existing_output_is_an_io_error(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    args = ["run", "--config", str(config_file), "--out", str(out), "--quiet"]
    assert main(args) == EXIT_OK
    assert main(args) == EXIT_IO
    assert "--resume" in capsys.readouterr().err
    assert main(args + ["--resume"]) == EXIT_OK


def test_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text(CONFIG.replace("budget", "budgt"))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "budgt" in capsys.readouterr().err


def test_missing_output_directory_is_config_error(config_file):
    assert main(["run", "--config", str(config_file)]) == EXIT_CONFIG


def test_missing_config_file_is_io_error(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]) == EXIT_IO


def test_plotdata_on_missing_summary(tmp_path):
    assert main(["plotdata", "--in", str(tmp_path), "--out", str(tmp_path / "p.csv")]) == EXIT_IO


def test_plotdata_inconsistent_summary(tmp_path):
    (tmp_path / "summary.csv").write_text(
        "function,n,function_params,algorithm,algorithm_params,runs,censored,mean,stdev,"
        "median,min,max\n")
    assert main(["plotdata", "--in", str(tmp_path), "--out", str(tmp_path / "p.csv")]) \
        == EXIT_VALIDATION


def test_preset_write_config_only(tmp_path):
    assert main(["preset", "figure2", "--out", str(tmp_path), "--write-config-only"]) == EXIT_OK
    assert load_config(tmp_path / "config.toml") == figure2_preset()
    sub = tmp_path / "reduced"
    assert main(["preset", "figure2", "--reduced", "--out", str(sub), "--write-config-only"]) == 0
    assert load_config(sub / "config.toml") == figure2_preset(reduced=True)


def test_verify_suite(capsys):
    assert main(["verify", "--suite", "bounds"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[-1].endswith("checks passed")
    assert all(line.startswith("PASS") for line in out.splitlines()[:-1])


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit):
        main(["fly"])
