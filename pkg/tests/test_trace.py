import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from workload_lab.trace import (EventType, JobEvent, JobRecord, ResourceVector, SchemaConfig,
                                SchemaError, SynthConfig, TaskEvent, assemble_jobs, parse_job_events,
                                parse_task_events, read_jobs_csv, sample_jobs, synth_trace,
                                write_job_events_csv, write_jobs_csv, write_task_events_csv)


def job_row(t, job, ev=0, cls=1):
    return f"{t},,{job},{ev},user,{cls},name,lname\n"


def task_row(t, job, idx, ev=0, cpu="0.5", ram="0.03", disk="0.001"):
    return f"{t},,{job},{idx},m,{ev},user,2,9,{cpu},{ram},{disk},0\n"


def submit(job, idx, cpu, t=0, ram=0.1, disk=0.1):
    return TaskEvent(t, job, idx, EventType.SUBMIT, cpu, ram, disk)


def test_parse_three_submit_rows():
    data = "".join(job_row(t, 7 + t) for t in range(3)).encode()
    res = parse_job_events(io.BytesIO(data))
    assert len(res.events) == 3 and res.dropped == 0
    assert res.events[0] == JobEvent(0, 7, EventType.SUBMIT, 1)


def test_parse_drops_bad_timestamp():
    data = (job_row(5, 1) + job_row("abc", 2)).encode()
    res = parse_job_events(io.BytesIO(data))
    assert [e.job_id for e in res.events] == [1]
    assert res.dropped == 1


def test_parse_empty_input():
    res = parse_job_events(io.BytesIO(b""))
    assert res.events == [] and res.dropped == 0


def test_parse_accepts_text_stream():
    res = parse_job_events(io.StringIO(job_row(1, 2)))
    assert len(res.events) == 1


def test_schema_referencing_absent_column():
    schema = SchemaConfig({"timestamp": 0, "job_id": 2, "event_type": 3, "scheduling_class": 40})
    with pytest.raises(SchemaError):
        parse_job_events(io.BytesIO(job_row(1, 2).encode()), schema)


def test_task_row_with_empty_cpu_dropped():
    res = parse_task_events(io.BytesIO(task_row(1, 2, 0, cpu="").encode()))
    assert res.events == [] and res.dropped == 1


def test_task_row_values():
    res = parse_task_events(io.BytesIO(task_row(1, 2, 0).encode()))
    (ev,) = res.events
    assert (ev.cpu_request, ev.ram_request, ev.disk_request) == (0.5, 0.03, 0.001)
    assert ev.event_type is EventType.SUBMIT


def test_duplicate_task_submits_kept_by_parser():
    data = (task_row(1, 2, 0) + task_row(1, 2, 0)).encode()
    assert len(parse_task_events(io.BytesIO(data)).events) == 2


def test_schema_file_overrides(tmp_path):
    path = tmp_path / "schema.cfg"
    path.write_text("# shuffled layout\ntimestamp=1\njob_id=0\ntime_scale=1000\n")
    schema = SchemaConfig.from_file(path, SchemaConfig.job_events())
    res = parse_job_events(io.StringIO("9,4,x,0,y,3\n"), schema)
    assert res.events[0].job_id == 9 and res.events[0].timestamp == 4000


def test_assemble_sums_tasks():
    res = assemble_jobs([JobEvent(100, 7, EventType.SUBMIT)],
                        [submit(7, i, 0.1, t=100) for i in range(3)])
    (job,) = res.jobs
    assert job.arrival_us == 100 and job.parallelism == 3
    assert job.request.cpu == pytest.approx(0.3, abs=1e-15)


def test_assemble_max_aggregate():
    res = assemble_jobs([JobEvent(0, 1, EventType.SUBMIT)],
                        [submit(1, 0, 0.1), submit(1, 1, 0.4)], aggregate="max")
    assert res.jobs[0].request.cpu == 0.4


def test_assemble_excludes_job_without_tasks():
    res = assemble_jobs([JobEvent(0, 1, EventType.SUBMIT), JobEvent(5, 2, EventType.SUBMIT)],
                        [submit(1, 0, 0.1)])
    assert [j.job_id for j in res.jobs] == [1]
    assert res.excluded == 1


def test_assemble_orders_by_arrival():
    res = assemble_jobs([JobEvent(50, 1, EventType.SUBMIT), JobEvent(20, 2, EventType.SUBMIT)],
                        [submit(1, 0, 0.1), submit(2, 0, 0.1)])
    assert [j.arrival_us for j in res.jobs] == [20, 50]


def test_assemble_uses_first_submit_of_each_task():
    tasks = [submit(1, 0, 0.2, t=10), submit(1, 0, 0.9, t=30), submit(1, 1, 0.1, t=5)]
    res = assemble_jobs([JobEvent(40, 1, EventType.SUBMIT), JobEvent(3, 1, EventType.SUBMIT)], tasks)
    job = res.jobs[0]
    assert job.parallelism == 2 and job.arrival_us == 3
    assert job.request.cpu == pytest.approx(0.3)


def test_resource_vector_rejects_negative():
    with pytest.raises(ValueError):
        ResourceVector(-1.0, 0.0, 0.0)


def _jobs(n):
    return [JobRecord(i, 10 * i, 1, ResourceVector(0.1, 0.1, 0.1)) for i in range(n)]


def test_sample_identity():
    jobs = _jobs(50)
    assert sample_jobs(jobs, 1.0, 3) == jobs


def test_sample_tenth_of_66000():
    assert len(sample_jobs(_jobs(66_000), 0.1, 0)) == 6_600


def test_sample_deterministic_and_ordered():
    jobs = _jobs(500)
    a, b = sample_jobs(jobs, 0.1, 42), sample_jobs(jobs, 0.1, 42)
    assert a == b
    ids = [j.job_id for j in a]
    assert ids == sorted(ids)


@pytest.mark.parametrize("fraction", [0.0, -0.5, 1.5])
def test_sample_rejects_fraction(fraction):
    with pytest.raises(ValueError):
        sample_jobs(_jobs(3), fraction, 0)


@given(st.integers(1, 300), st.floats(0.01, 1.0), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_sample_is_subsequence(n, fraction, seed):
    jobs = _jobs(n)
    out = sample_jobs(jobs, fraction, seed)
    it = iter(jobs)
    assert all(any(j is x for x in it) for j in out)


def test_synth_counts_and_labels():
    tr = synth_trace(SynthConfig(n_jobs=100, n_clusters=3, seed=1))
    submits = {e.job_id for e in tr.job_events if e.event_type == EventType.SUBMIT}
    assert len(submits) == 100
    assert len(set(tr.labels.values())) == 3


def test_synth_byte_identical():
    def dump(seed):
        tr = synth_trace(SynthConfig(n_jobs=60, n_clusters=4, seed=seed))
        a, b = io.StringIO(), io.StringIO()
        write_job_events_csv(tr.job_events, a)
        write_task_events_csv(tr.task_events, b)
        return a.getvalue() + b.getvalue()
    assert dump(5) == dump(5)
    assert dump(5) != dump(6)


@pytest.mark.parametrize("kwargs", [{"n_jobs": 0}, {"n_jobs": 5, "n_clusters": 0},
                                    {"n_jobs": 5, "arrival_rate": 0.0}])
def test_synth_rejects_config(kwargs):
    with pytest.raises(ValueError):
        SynthConfig(**kwargs)


def _assembled(seed, n=80):
    tr = synth_trace(SynthConfig(n_jobs=n, n_clusters=3, seed=seed))
    return tr, assemble_jobs(tr.job_events, tr.task_events).jobs


@given(st.integers(0, 10_000))
@settings(max_examples=15, deadline=None)
def test_round_trip_through_csv_and_event_files(seed):
    tr, jobs = _assembled(seed)
    fh = io.StringIO()
    write_jobs_csv(jobs, fh)
    fh.seek(0)
    assert read_jobs_csv(fh) == jobs
    je, te = io.StringIO(), io.StringIO()
    write_job_events_csv(tr.job_events, je)
    write_task_events_csv(tr.task_events, te)
    je.seek(0)
    te.seek(0)
    again = assemble_jobs(parse_job_events(je).events, parse_task_events(te).events).jobs
    assert again == jobs


@given(st.integers(0, 10_000))
@settings(max_examples=15, deadline=None)
def test_assembled_sorted_and_parallelism_brute_force(seed):
    tr, jobs = _assembled(seed)
    keys = [(j.arrival_us, j.job_id) for j in jobs]
    assert all(a < b for a, b in zip(keys, keys[1:]))
    for j in jobs:
        idx = {t.task_index for t in tr.task_events if t.job_id == j.job_id and t.complete}
        assert j.parallelism == len(idx)
