"""Reading ClusterData2011_2-style event tables and assembling per-job records."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import IO, Iterable, Sequence

import numpy as np


class EventType(IntEnum):
    SUBMIT = 0
    SCHEDULE = 1
    EVICT = 2
    FAIL = 3
    FINISH = 4
    KILL = 5
    LOST = 6
    UPDATE_PENDING = 7
    UPDATE_RUNNING = 8


class SchemaError(ValueError):
    """Column map does not fit the input table."""


@dataclass(frozen=True)
class ResourceVector:
    cpu: float
    ram: float
    disk: float

    def __post_init__(self):
        for v in (self.cpu, self.ram, self.disk):
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"resource components must be finite and >= 0, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.cpu, self.ram, self.disk], dtype=float)


@dataclass(frozen=True)
class JobEvent:
    timestamp: int
    job_id: int
    event_type: EventType
    scheduling_class: int = 0


@dataclass(frozen=True)
class TaskEvent:
    timestamp: int
    job_id: int
    task_index: int
    event_type: EventType
    cpu_request: float | None
    ram_request: float | None
    disk_request: float | None

    @property
    def complete(self) -> bool:
        return all(
            v is not None and math.isfinite(v) and v >= 0
            for v in (self.cpu_request, self.ram_request, self.disk_request)
        )


@dataclass(frozen=True)
class JobRecord:
    job_id: int
    arrival_us: int
    parallelism: int
    request: ResourceVector

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError(f"job {self.job_id}: parallelism must be >= 1")
        if self.arrival_us < 0:
            raise ValueError(f"job {self.job_id}: negative arrival time")


# Column positions of the public ClusterData2011_2 tables.
JOB_EVENT_COLUMNS = {"timestamp": 0, "job_id": 2, "event_type": 3, "scheduling_class": 5}
TASK_EVENT_COLUMNS = {
    "timestamp": 0,
    "job_id": 2,
    "task_index": 3,
    "event_type": 5,
    "cpu_request": 9,
    "ram_request": 10,
    "disk_request": 11,
}


@dataclass
class SchemaConfig:
    """Column map for one table. ``time_scale`` converts the file's time unit to microseconds."""

    columns: dict[str, int]
    time_scale: float = 1.0

    @classmethod
    def job_events(cls) -> "SchemaConfig":
        return cls(dict(JOB_EVENT_COLUMNS))

    @classmethod
    def task_events(cls) -> "SchemaConfig":
        return cls(dict(TASK_EVENT_COLUMNS))

    @classmethod
    def from_file(cls, path, default: "SchemaConfig") -> "SchemaConfig":
        """Read ``key=value`` lines; keys are column names or ``time_scale``."""
        cfg = cls(dict(default.columns), default.time_scale)
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                key, value = key.strip(), value.strip()
                if not sep:
                    raise SchemaError(f"{path}:{lineno}: expected key=value")
                try:
                    if key == "time_scale":
                        cfg.time_scale = float(value)
                    elif key in cfg.columns:
                        cfg.columns[key] = int(value)
                    else:
                        raise SchemaError(f"{path}:{lineno}: unknown column {key!r}")
                except ValueError as exc:
                    if isinstance(exc, SchemaError):
                        raise
                    raise SchemaError(f"{path}:{lineno}: bad value {value!r}") from None
        return cfg

    @property
    def width(self) -> int:
        return max(self.columns.values()) + 1


@dataclass
class ParseResult:
    events: list
    dropped: int = 0


def _text_rows(stream: IO) -> Iterable[list[str]]:
    if isinstance(stream, io.TextIOBase):
        yield from csv.reader(stream)
        return
    text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
    try:
        yield from csv.reader(text)
    finally:
        # leave the caller's binary stream open
        text.detach()


def _to_int(s: str) -> int:
    return int(s.strip())


def _to_opt_float(s: str) -> float | None:
    s = s.strip()
    if not s:
        return None
    v = float(s)
    return v if math.isfinite(v) else None


def _parse(stream, schema: SchemaConfig, build) -> ParseResult:
    result = ParseResult([])
    width = schema.width
    checked = False
    for row in _text_rows(stream):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if not checked:
            if len(row) < width:
                raise SchemaError(
                    f"column map needs {width} columns but the first row has {len(row)}"
                )
            checked = True
        if len(row) < width:
            result.dropped += 1
            continue
        try:
            ev = build(row)
        except (ValueError, KeyError):
            ev = None
        if ev is None:
            result.dropped += 1
        else:
            result.events.append(ev)
    return result


def _timestamp(row, schema) -> int:
    ts = _to_int(row[schema.columns["timestamp"]])
    if schema.time_scale != 1.0:
        ts = int(round(ts * schema.time_scale))
    if ts < 0:
        raise ValueError("negative timestamp")
    return ts


def parse_job_events(stream: IO, schema: SchemaConfig | None = None) -> ParseResult:
    schema = schema or SchemaConfig.job_events()
    cols = schema.columns

    def build(row):
        sc = row[cols["scheduling_class"]].strip() if "scheduling_class" in cols else ""
        job_id = _to_int(row[cols["job_id"]])
        if job_id < 0:
            return None
        return JobEvent(
            timestamp=_timestamp(row, schema),
            job_id=job_id,
            event_type=EventType(_to_int(row[cols["event_type"]])),
            scheduling_class=int(sc) if sc else 0,
        )

    return _parse(stream, schema, build)


def parse_task_events(stream: IO, schema: SchemaConfig | None = None, keep_incomplete: bool = False) -> ParseResult:
    """Parse task events. Rows missing a resource field are dropped unless ``keep_incomplete``."""
    schema = schema or SchemaConfig.task_events()
    cols = schema.columns

    def build(row):
        ev = TaskEvent(
            timestamp=_timestamp(row, schema),
            job_id=_to_int(row[cols["job_id"]]),
            task_index=_to_int(row[cols["task_index"]]),
            event_type=EventType(_to_int(row[cols["event_type"]])),
            cpu_request=_to_opt_float(row[cols["cpu_request"]]),
            ram_request=_to_opt_float(row[cols["ram_request"]]),
            disk_request=_to_opt_float(row[cols["disk_request"]]),
        )
        if ev.job_id < 0 or ev.task_index < 0:
            return None
        if not keep_incomplete and not ev.complete:
            return None
        return ev

    return _parse(stream, schema, build)


@dataclass
class AssembleResult:
    jobs: list[JobRecord]
    excluded: int = 0


def assemble_jobs(
    job_events: Iterable[JobEvent],
    task_events: Iterable[TaskEvent],
    aggregate: str = "sum",
) -> AssembleResult:
    """Build one JobRecord per job with a job SUBMIT and at least one valid task SUBMIT.

    A task contributes its request at its earliest SUBMIT; the job request is the
    sum (or ``aggregate="max"``) over distinct tasks.
    """
    if aggregate not in ("sum", "max"):
        raise ValueError(f"aggregate must be 'sum' or 'max', got {aggregate!r}")
    arrival: dict[int, int] = {}
    seen_jobs: set[int] = set()
    for ev in job_events:
        seen_jobs.add(ev.job_id)
        if ev.event_type == EventType.SUBMIT:
            prev = arrival.get(ev.job_id)
            if prev is None or ev.timestamp < prev:
                arrival[ev.job_id] = ev.timestamp

    first_submit: dict[int, dict[int, TaskEvent]] = {}
    for ev in task_events:
        if ev.event_type != EventType.SUBMIT or not ev.complete:
            continue
        tasks = first_submit.setdefault(ev.job_id, {})
        prev = tasks.get(ev.task_index)
        if prev is None or ev.timestamp < prev.timestamp:
            tasks[ev.task_index] = ev

    jobs = []
    for job_id, t0 in arrival.items():
        tasks = first_submit.get(job_id)
        if not tasks:
            continue
        reqs = np.array(
            [[t.cpu_request, t.ram_request, t.disk_request] for _, t in sorted(tasks.items())],
            dtype=float,
        )
        if aggregate == "sum":
            total = [math.fsum(reqs[:, c]) for c in range(3)]
        else:
            total = reqs.max(axis=0).tolist()
        jobs.append(JobRecord(job_id, t0, len(tasks), ResourceVector(*map(float, total))))
    jobs.sort(key=lambda j: (j.arrival_us, j.job_id))
    return AssembleResult(jobs, excluded=len(seen_jobs) - len(jobs))


def sample_jobs(jobs: Sequence[JobRecord], fraction: float, seed: int) -> list[JobRecord]:
    """Uniform subsample without replacement, keeping arrival order."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    n = len(jobs)
    if fraction == 1.0:
        return list(jobs)
    m = int(math.floor(fraction * n + 0.5))
    idx = np.sort(np.random.default_rng(seed).choice(n, size=m, replace=False))
    return [jobs[i] for i in idx]


# -- CSV i/o ---------------------------------------------------------------

JOB_HEADER = ["job_id", "arrival_us", "parallelism", "cpu", "ram", "disk"]


def write_jobs_csv(jobs: Iterable[JobRecord], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(JOB_HEADER)
    for j in jobs:
        w.writerow([j.job_id, j.arrival_us, j.parallelism,
                    repr(j.request.cpu), repr(j.request.ram), repr(j.request.disk)])


def read_jobs_csv(fh: IO[str]) -> list[JobRecord]:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != JOB_HEADER:
        raise ValueError(f"expected job header {JOB_HEADER}, got {header}")
    jobs = []
    for lineno, row in enumerate(reader, 2):
        if not row:
            continue
        try:
            jobs.append(JobRecord(int(row[0]), int(row[1]), int(row[2]),
                                  ResourceVector(float(row[3]), float(row[4]), float(row[5]))))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return jobs


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def write_job_events_csv(events: Iterable[JobEvent], fh: IO[str]) -> None:
    """Headerless, in the default ClusterData2011_2 column layout."""
    w = csv.writer(fh, lineterminator="\n")
    for ev in events:
        w.writerow([ev.timestamp, "", ev.job_id, int(ev.event_type), "", ev.scheduling_class, "", ""])


def write_task_events_csv(events: Iterable[TaskEvent], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    for ev in events:
        w.writerow([ev.timestamp, "", ev.job_id, ev.task_index, "", int(ev.event_type), "", 0, 0,
                    _fmt(ev.cpu_request), _fmt(ev.ram_request), _fmt(ev.disk_request), 0])


# -- synthetic traces --------------------------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    n_jobs: int
    n_clusters: int = 3
    arrival_rate: float = 1.0  # jobs per second
    seed: int = 0

    def __post_init__(self):
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be >= 1")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if not (self.arrival_rate > 0 and math.isfinite(self.arrival_rate)):
            raise ValueError("arrival_rate must be > 0")


@dataclass
class SynthTrace:
    job_events: list[JobEvent]
    task_events: list[TaskEvent]
    labels: dict[int, int] = field(default_factory=dict)  # job_id -> generating blob


def synth_trace(config: SynthConfig) -> SynthTrace:
    """Exponential inter-arrivals, per-task requests drawn from Gaussian blobs.

    Each blob fixes a per-task (cpu, ram, disk) centre and a parallelism,
    so jobs and their tasks both separate by blob.
    """
    rng = np.random.default_rng(config.seed)
    k = config.n_clusters
    centres = rng.uniform(0.02, 0.5, size=(k, 3))
    # push centres apart: resample until every pair is well separated relative to the spread
    sd = 0.004
    for _ in range(1000):
        gaps = [np.linalg.norm(centres[i] - centres[j]) for i in range(k) for j in range(i)]
        if not gaps or min(gaps) > 20 * sd:
            break
        centres = rng.uniform(0.02, 0.5, size=(k, 3))
    typical_p = rng.integers(1, 12, size=k)

    gaps_s = rng.exponential(1.0 / config.arrival_rate, size=config.n_jobs)
    arrivals = np.floor(np.cumsum(gaps_s) * 1e6).astype(np.int64)
    blob = np.arange(config.n_jobs) % k
    rng.shuffle(blob)

    job_events: list[JobEvent] = []
    task_events: list[TaskEvent] = []
    labels: dict[int, int] = {}
    for i in range(config.n_jobs):
        job_id = 1000 + i
        c = int(blob[i])
        labels[job_id] = c
        t = int(arrivals[i])
        job_events.append(JobEvent(t, job_id, EventType.SUBMIT, int(c % 4)))
        p = int(typical_p[c])
        req = np.clip(centres[c] + rng.normal(0.0, sd, size=(p, 3)), 0.0, 1.0)
        for ti in range(p):
            task_events.append(TaskEvent(t, job_id, ti, EventType.SUBMIT,
                                         float(req[ti, 0]), float(req[ti, 1]), float(req[ti, 2])))
        job_events.append(JobEvent(t + 1_000_000, job_id, EventType.SCHEDULE, int(c % 4)))
    return SynthTrace(job_events, task_events, labels)
