"""Drive the whole command-line pipeline into one directory."""

from pathlib import Path

from workload_lab.cli import run


def run_pipeline(root, seed=7, jobs=800, epochs=5, train_args=()):
    root = Path(root)
    steps = [
        ["synth", "--jobs", str(jobs), "--clusters", "3", "--seed", str(seed), "--out-dir", root / "trace"],
        ["ingest", "--job-events", root / "trace/job_events.csv", "--task-events", root / "trace/task_events.csv",
         "--seed", str(seed), "--out", root / "jobs.csv"],
        ["series", "--jobs", root / "jobs.csv", "--kind", "requests", "--out", root / "requests.csv"],
        ["train", "--series", root / "requests.csv", *train_args,
         "--epochs", str(epochs), "--seed", str(seed), "--out", root / "model.json"],
        ["cluster", "--jobs", root / "jobs.csv", "--seed", str(seed), "--out", root / "cluster.json"],
        ["evaluate", "--cluster", root / "cluster.json", "--jobs", root / "jobs.csv",
         "--task-events", root / "trace/task_events.csv", "--model", root / "model.json",
         "--series", root / "requests.csv", "--out", root / "evaluation.json"],
        ["report", "--cluster", root / "cluster.json", "--evaluation", root / "evaluation.json",
         "--model", root / "model.json", "--jobs", root / "jobs.csv", "--out-dir", root / "report"],
    ]
    for argv in steps:
        code = run([str(a) for a in argv])
        if code != 0:
            raise RuntimeError(f"step {argv[0]} exited with {code}")
    return root / "report"
