import csv
import json
import statistics

import pytest

from sdfea.harness import (ConfigError, PlotDataError, ResumeError, RunRecord,
                           SummaryRecord, dump_config, emit_plot_data, enumerate_tasks,
                           figure2_preset, loads_config, plot_table, read_runs_csv,
                           read_summary_csv, run_experiment, runs_csv, summarize,
                           summary_csv)

SMALL = """
seed = 11
repetitions = 3
budget = 100000
n = 24

[function]
name = "jump"
k = [2, 3]
delta = 2

[[algorithms]]
name = "sd-fea"
label = "sdfea"
beta = 1.5

[[algorithms]]
name = "oea"
"""


def small_config(**changes):
    return loads_config(SMALL).replace(**changes) if changes else loads_config(SMALL)


# --- config ------------------------------------------------------------------

def test_parse_small_config():
    c = small_config()
    assert c.function == "jump" and c.n == (24,)
    assert c.points() == [(24, {"k": 2, "delta": 2}), (24, {"k": 3, "delta": 2})]
    assert c.labels() == ["sdfea", "oea"]
    assert c.sweep_axes() == ["k"]
    assert c.repetitions == 3 and c.seed == 11 and c.budget == 100000


def test_defaults():
    c = loads_config('n = 10\n[function]\nname = "onemax"\n[[algorithms]]\nname = "rls"\n')
    assert c.repetitions == 200 and c.budget == 10 ** 9 and c.threads == 1


@pytest.mark.parametrize("text,path", [
    (SMALL.replace('beta = 1.5', 'bta = 1.5'), "algorithms[0].bta"),
    ("extra = 1\n" + SMALL, "extra"),
    (SMALL + "\nextra = 1\n", "algorithms[1].extra"),
    (SMALL.replace('delta = 2', 'delta = 2\nwidth = 3'), "function.width"),
    (SMALL.replace('name = "jump"', 'name = "twomax"'), "function.name"),
    (SMALL.replace('name = "oea"', 'name = "ga"'), "algorithms[1].name"),
    (SMALL.replace("repetitions = 3", "repetitions = 0"), "repetitions"),
    (SMALL.replace("n = 24", "n = [24, -1]"), "n[1]"),
    (SMALL.replace("k = [2, 3]", "k = []"), "function.k"),
    (SMALL.replace("k = [2, 3]", "k = [2, 30]"), "function"),
    (SMALL.replace('label = "sdfea"', 'label = "oea"'), "algorithms[1].label"),
    (SMALL.replace("beta = 1.5", "beta = 0.5"), "algorithms[0]"),
    (SMALL.replace("beta = 1.5", 'beta = "big"'), "algorithms[0].beta"),
])
def test_config_errors_name_the_key(text, path):
    with pytest.raises(ConfigError) as info:
        loads_config(text)
    assert info.value.path == path


def test_empty_algorithm_list_rejected():
    with pytest.raises(ConfigError) as info:
        loads_config('n = 10\nalgorithms = []\n[function]\nname = "onemax"\n')
    assert info.value.path == "algorithms"


def test_malformed_toml():
    with pytest.raises(ConfigError):
        loads_config("n = [")


def test_dump_round_trip():
    for c in (small_config(), figure2_preset(), figure2_preset(reduced=True)):
        again = loads_config(dump_config(c))
        assert again == c
        assert again.fingerprint() == c.fingerprint()


def test_fingerprint_ignores_threads_only():
    c = small_config()
    assert c.replace(threads=4).fingerprint() == c.fingerprint()
    assert c.replace(seed=12).fingerprint() != c.fingerprint()


def test_figure2_preset_shape():
    c = figure2_preset()
    assert len(c.algorithms) == 7
    assert c.n == (100,) and c.function_params == {"k": list(range(4, 14)), "delta": 4}
    assert c.repetitions == 200
    assert len(enumerate_tasks(c)) == 10 * 7 * 200
    names = [a.name for a in c.algorithms]
    assert names.count("sd-fea") == 3
    assert {a.params.get("beta") for a in c.algorithms if a.name == "sd-fea"} == {1.25, 1.5, 2.0}
    reduced = figure2_preset(reduced=True)
    assert reduced.function_params["k"] == [4, 6, 8, 10, 12] and reduced.repetitions == 50


def test_seeds_are_distinct_and_stable():
    tasks = enumerate_tasks(small_config())
    assert len({t.seed for t in tasks}) == len(tasks)
    assert [t.seed for t in tasks] == [t.seed for t in enumerate_tasks(small_config())]


# --- execution ---------------------------------------------------------------------

def test_run_is_deterministic_and_thread_invariant(tmp_path):
    c = small_config()
    a = run_experiment(c, tmp_path / "a", threads=1)
    b = run_experiment(c, tmp_path / "b", threads=3)
    assert len(a.records) == 2 * 2 * 3
    assert a.records == b.records
    for name in ("runs.csv", "summary.csv", "config.toml", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert not (tmp_path / "a" / "runs.partial.csv").exists()


def test_one_point_three_reps():
    c = loads_config('seed = 5\nrepetitions = 3\nn = 20\n[function]\nname = "onemax"\n'
                     '[[algorithms]]\nname = "rls"\n')
    r1 = run_experiment(c)
    r2 = run_experiment(c)
    assert len(r1.records) == 3 and r1.records == r2.records


def test_summary_recomputable_from_runs(tmp_path):
    c = small_config()
    run_experiment(c, tmp_path)
    recs = read_runs_csv(tmp_path / "runs.csv")
    assert summary_csv(summarize(recs)) == (tmp_path / "summary.csv").read_text()
    for s in read_summary_csv(tmp_path / "summary.csv"):
        ev = [r.evaluations for r in recs
              if r.success and r.algorithm == s.algorithm and r.function_params == s.function_params]
        assert s.mean == sum(ev) / len(ev)
        assert s.median == statistics.median(ev)


def test_censored_runs_are_excluded(tmp_path):
    c = loads_config('seed = 1\nrepetitions = 4\nn = 20\nbudget = 300\n[function]\nname = "jump"\n'
                     'k = 3\n[[algorithms]]\nname = "rls"\n')
    res = run_experiment(c, tmp_path)
    (s,) = res.summaries
    assert s.runs == 4
    finished = [r.evaluations for r in res.records if r.success]
    assert s.censored == 4 - len(finished)
    if finished:
        assert s.mean == sum(finished) / len(finished)
    else:
        assert s.mean is None
    rows = list(csv.DictReader(open(tmp_path / "summary.csv")))
    assert rows[0]["censored"] == str(s.censored)


def test_refuses_existing_directory(tmp_path):
    c = small_config()
    run_experiment(c, tmp_path)
    with pytest.raises(ResumeError):
        run_experiment(c, tmp_path)
    with pytest.raises(ResumeError):
        run_experiment(c.replace(seed=99), tmp_path, resume=True)
    (tmp_path / "other").mkdir()
    (tmp_path / "other" / "junk.txt").write_text("x")
    with pytest.raises(ResumeError):
        run_experiment(c, tmp_path / "other", resume=True)


def test_resume_after_interruption(tmp_path):
    c = small_config()
    full = run_experiment(c, tmp_path / "full")
    out = tmp_path / "part"
    run_experiment(c, out)
    # simulate a crash: drop the final files, keep half the runs in the partial file
    lines = (out / "runs.csv").read_text().splitlines(keepends=True)
    (out / "runs.partial.csv").write_text("".join(lines[:7]) + lines[7][:10])
    (out / "runs.csv").unlink()
    (out / "summary.csv").unlink()
    resumed = run_experiment(c, out, resume=True, threads=2)
    assert resumed.records == full.records
    assert (out / "summary.csv").read_bytes() == (tmp_path / "full" / "summary.csv").read_bytes()
    # resuming a finished directory is idempotent
    run_experiment(c, out, resume=True)
    assert (out / "runs.csv").read_bytes() == (tmp_path / "full" / "runs.csv").read_bytes()


def test_resume_rejects_foreign_records(tmp_path):
    c = small_config()
    run_experiment(c, tmp_path)
    text = (tmp_path / "runs.csv").read_text().splitlines()
    fields = text[1].split(",")
    fields[-3] = "12345"  # wrong seed
    text[1] = ",".join(fields)
    (tmp_path / "runs.csv").write_text("\n".join(text) + "\n")
    with pytest.raises(ResumeError):
        run_experiment(c, tmp_path, resume=True)


def test_manifest_contents(tmp_path):
    c = small_config()
    run_experiment(c, tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest == {"fingerprint": c.fingerprint(), "runs": 12}
    assert loads_config((tmp_path / "config.toml").read_text()) == c


# --- plot data --------------------------------------------------------------------

def summary(label, k, mean):
    return SummaryRecord("jump", 100, (("delta", 4), ("k", k)), label, "", 2, 0, mean, 1.0, mean, 1, 2)


def test_plot_two_algorithms_three_points(tmp_path):
    sums = [summary(a, k, float(k * 10 + i)) for i, a in enumerate("ab") for k in (4, 5, 6)]
    text = emit_plot_data(sums, tmp_path / "p.csv")
    lines = text.strip().splitlines()
    assert lines[0] == "k,a,b"
    assert lines[1:] == ["4,40.0,41.0", "5,50.0,51.0", "6,60.0,61.0"]
    assert (tmp_path / "p.csv").read_text() == text


def test_plot_missing_cell_named():
    sums = [summary("a", 4, 1.0), summary("a", 5, 1.0), summary("b", 4, 1.0)]
    with pytest.raises(PlotDataError, match="algorithm b at k=5"):
        plot_table(sums)


def test_plot_inconsistent_inputs():
    with pytest.raises(PlotDataError):
        plot_table([])
    odd = SummaryRecord("onemax", 100, (), "a", "", 1, 0, 1.0, None, 1.0, 1, 1)
    with pytest.raises(PlotDataError):
        plot_table([summary("a", 4, 1.0), odd])


def test_plot_all_censored_is_nan():
    s = SummaryRecord("jump", 100, (("delta", 4), ("k", 4)), "a", "", 2, 2, None, None, None, None, None)
    header, rows = plot_table([s])
    assert header == ["n", "delta", "k", "a"]
    assert rows == [["100", "4", "4", "nan"]]


def test_plot_from_experiment(tmp_path):
    c = small_config()
    res = run_experiment(c, tmp_path)
    header, rows = plot_table(read_summary_csv(tmp_path / "summary.csv"))
    assert header == ["k", "sdfea", "oea"]
    assert [r[0] for r in rows] == ["2", "3"]
    assert plot_table(res.summaries) == (header, rows)


def test_read_runs_round_trip(tmp_path):
    rec = RunRecord(0, "jump", 10, (("delta", 2), ("k", 3)), "x,y", "R=25", 0, 5, 17, True)
    runs_csv([rec], tmp_path / "r.csv")
    assert read_runs_csv(tmp_path / "r.csv") == [rec]
