import csv

import pytest

from darwinfuzz import cli


def _seeds(tmp_path, name="seeds"):
    d = tmp_path / name
    d.mkdir(parents=True, exist_ok=True)
    (d / "a").write_bytes(b"")
    (d / "b").write_bytes(b"DRWN\x00\x02hi")
    return d


def _run_args(tmp_path, *extra):
    return ["run", "-i", str(_seeds(tmp_path)), "-o", str(tmp_path / "out"),
            "--target", "builtin:magicparse", "--seed", "1", *extra]


def test_parse_duration():
    assert cli._parse_duration("300s") == 300.0
    assert cli._parse_duration("5m") == 300.0
    assert cli._parse_duration("2h") == 7200.0
    assert cli._parse_duration("42") == 42.0


def test_run_exec_budget(tmp_path, capsys):
    rc = cli.main(_run_args(tmp_path, "--execs", "300"))
    assert rc == 0
    out = capsys.readouterr().out
    assert "302 execs" in out  # budget plus two seed executions
    assert (tmp_path / "out" / "stats.csv").exists()
    assert (tmp_path / "out" / "es_log.csv").exists()


def test_run_requires_exactly_one_budget(tmp_path, capsys):
    assert cli.main(_run_args(tmp_path)) == 2
    assert "error:" in capsys.readouterr().err
    assert cli.main(_run_args(tmp_path, "--execs", "10",
                              "--duration", "1s")) == 2


def test_run_uniform_scheduler(tmp_path):
    rc = cli.main(_run_args(tmp_path, "--execs", "100",
                            "--scheduler", "uniform"))
    assert rc == 0
    assert not (tmp_path / "out" / "es_log.csv").exists()


def test_run_static_scheduler(tmp_path):
    dist = tmp_path / "dist.txt"
    dist.write_text(" ".join(["1"] * 17) + "\n")
    rc = cli.main(_run_args(tmp_path, "--execs", "100",
                            "--scheduler", f"static:{dist}"))
    assert rc == 0


def test_run_bad_scheduler_and_target(tmp_path, capsys):
    assert cli.main(_run_args(tmp_path, "--execs", "10",
                              "--scheduler", "greedy")) == 2
    args = _run_args(tmp_path / "2", "--execs", "10")
    args[args.index("builtin:magicparse")] = "builtin:nosuch"
    assert cli.main(args) == 2
    args[args.index("builtin:nosuch")] = "mystery"
    assert cli.main(args) == 2
    assert capsys.readouterr().err.count("error:") == 3


def test_run_missing_seed_dir(tmp_path, capsys):
    rc = cli.main(["run", "-i", str(tmp_path / "none"), "-o",
                   str(tmp_path / "out"), "--target", "builtin:null",
                   "--seed", "1", "--execs", "10"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_run_exec_target_requires_command(tmp_path, capsys):
    rc = cli.main(["run", "-i", str(_seeds(tmp_path)), "-o",
                   str(tmp_path / "out"), "--target", "exec",
                   "--seed", "1", "--execs", "10"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_run_seedless_prints_chosen_seed(tmp_path, capsys):
    rc = cli.main(["run", "-i", str(_seeds(tmp_path)), "-o",
                   str(tmp_path / "out"), "--target", "builtin:null",
                   "--execs", "50"])
    assert rc == 0
    assert "time-derived seed" in capsys.readouterr().out


def test_compare(tmp_path, capsys):
    header = ("elapsed_ms,execs,mutations,unique_paths,edges_covered,"
              "crashes,effectiveness,execs_per_sec\n")
    for name, paths in (("a1", 5), ("a2", 7), ("b1", 2), ("b2", 3)):
        (tmp_path / f"{name}.csv").write_text(
            header + f"100,1000,36000,1,1,0,,1000.0\n"
                     f"200,2000,72000,{paths},4,0,100.0,1000.0\n")
    rc = cli.main(["compare",
                   "--a", str(tmp_path / "a1.csv"), str(tmp_path / "a2.csv"),
                   "--b", str(tmp_path / "b1.csv"), str(tmp_path / "b2.csv")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "A median = 6.0" in out
    assert "B median = 2.5" in out
    assert "U = 4.0" in out  # complete separation, n1*n2 = 4
    assert "p (two-sided)" in out


def test_compare_empty_csv_fails(tmp_path, capsys):
    f = tmp_path / "empty.csv"
    f.write_text("elapsed_ms,execs,mutations,unique_paths,edges_covered,"
                 "crashes,effectiveness,execs_per_sec\n")
    rc = cli.main(["compare", "--a", str(f), "--b", str(f)])
    assert rc == 2


def test_parse_plan_errors(tmp_path):
    p = tmp_path / "plan"
    p.write_text("targets=builtin:null\n")
    with pytest.raises(cli.UsageError):
        cli.parse_plan(p)
    p.write_text("targets=builtin:null\nschedulers=uniform\nseeds=s\n")
    with pytest.raises(cli.UsageError):
        cli.parse_plan(p)  # no budget
    p.write_text("targets=builtin:null\nschedulers=uniform\nseeds=s\n"
                 "execs=10\nduration=1s\n")
    with pytest.raises(cli.UsageError):
        cli.parse_plan(p)  # both budgets
    p.write_text("bogus=1\n")
    with pytest.raises(cli.UsageError):
        cli.parse_plan(p)


def test_bench_matrix_and_summary(tmp_path, capsys):
    seeds = _seeds(tmp_path)
    plan = tmp_path / "plan"
    plan.write_text(
        "# desk-scale smoke plan\n"
        "targets = builtin:magicparse\n"
        "schedulers = uniform, darwin\n"
        f"seeds = {seeds}\n"
        "runs = 2\n"
        "execs = 400\n"
        "base_seed = 7\n")
    out = tmp_path / "bench"
    rc = cli.main(["bench", str(plan), "-o", str(out)])
    assert rc == 0
    for sched in ("uniform", "darwin"):
        for r in range(2):
            run_dir = out / "builtin_magicparse" / sched / f"run_{r}"
            assert (run_dir / "stats.csv").exists()
    with open(out / "summary.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    by_sched = {r["scheduler"]: r for r in rows}
    assert by_sched["uniform"]["p_vs_uniform"] == ""  # baseline row
    assert by_sched["darwin"]["p_vs_uniform"] != ""
    assert float(by_sched["darwin"]["median_paths"]) > 0


def test_bench_reruns_are_identical(tmp_path):
    seeds = _seeds(tmp_path)
    plan = tmp_path / "plan"
    plan.write_text("targets=builtin:null\nschedulers=uniform\n"
                    f"seeds={seeds}\nruns=1\nexecs=200\nbase_seed=3\n")
    assert cli.main(["bench", str(plan), "-o", str(tmp_path / "b1")]) == 0
    assert cli.main(["bench", str(plan), "-o", str(tmp_path / "b2")]) == 0
    a = (tmp_path / "b1" / "summary.csv").read_text()
    b = (tmp_path / "b2" / "summary.csv").read_text()
    assert a == b
    sa = (tmp_path / "b1" / "builtin_null" / "uniform" / "run_0" / "stats.csv")
    sb = (tmp_path / "b2" / "builtin_null" / "uniform" / "run_0" / "stats.csv")
    assert sa.read_text() == sb.read_text()


def test_external_target_via_cli(tmp_path):
    import sys
    from pathlib import Path
    stub = Path(__file__).parent / "fixtures" / "stub_target.py"
    seeds = tmp_path / "seeds"
    seeds.mkdir()
    (seeds / "a").write_bytes(b"hello")
    rc = cli.main(["run", "-i", str(seeds), "-o", str(tmp_path / "out"),
                   "--target", "exec", "--seed", "1", "--execs", "5",
                   "--", sys.executable, str(stub), "@@"])
    assert rc == 0
    assert (tmp_path / "out" / "stats.csv").exists()
