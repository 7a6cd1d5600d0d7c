"""Campaign orchestration: queue cycling, havoc stage, splice fallback,
coverage absorption, scheduler feedback, and result files.

With an execution budget (`--execs`) the campaign is a pure function of
(seed, config, seed corpus): the stats clock ticks one virtual millisecond
per execution so every output file is byte-identical across runs.  Wall
clock mode (`--duration`) trades that for real elapsed timestamps.
"""

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import executor, mutators
from .corpus import DEFAULT_MAX_INPUT, load_seeds
from .coverage import GlobalCoverage, classify_counts
from .es import DEFAULT_LAMBDA, DEFAULT_MU, DEFAULT_WINDOW
from .metrics import STATS_HEADER, CampaignStats, stats_row
from .rng import Rng
from .scheduler import make_scheduler

DEFAULT_HAVOC_ROUNDS = 256
SPLICE_ATTEMPTS = 16

ES_LOG_HEADER = "generation,parent_index,candidate_index,fitness,genotype"


@dataclass
class CampaignConfig:
    seed: int
    input_dir: str
    output_dir: str
    target: executor.TargetSpec
    scheduler_kind: str = "darwin"
    static_path: Optional[str] = None
    encoding: str = "binary"
    mu: int = DEFAULT_MU
    lam: int = DEFAULT_LAMBDA
    window: int = DEFAULT_WINDOW
    execs: Optional[int] = None
    duration_s: Optional[float] = None
    havoc_rounds: int = DEFAULT_HAVOC_ROUNDS
    dict_path: Optional[str] = None
    max_len: int = DEFAULT_MAX_INPUT

    def __post_init__(self):
        if (self.execs is None) == (self.duration_s is None):
            raise ValueError("exactly one of execs or duration_s must be set")
        if self.execs is not None and self.execs < 1:
            raise ValueError("execution budget must be positive")
        if self.duration_s is not None and self.duration_s <= 0:
            raise ValueError("duration must be positive")
        if self.havoc_rounds < 1:
            raise ValueError("havoc_rounds must be >= 1")


class Campaign:
    def __init__(self, config: CampaignConfig):
        self.cfg = config
        self.rng = Rng(config.seed)
        self.extras = (mutators.parse_dictionary(config.dict_path)
                       if config.dict_path else [])
        self.scheduler = make_scheduler(
            config.scheduler_kind, self.rng, static_path=config.static_path,
            encoding=config.encoding, mu=config.mu, lam=config.lam,
            window=config.window)
        self.coverage = GlobalCoverage()
        self.stats = CampaignStats()
        self.queue = None
        self._fuzz_execs = 0
        self._crash_count = 0
        self._es_rows_written = 0
        self._start = 0.0
        self._next_flush = 0

    # -- clock and budget -------------------------------------------------

    def _elapsed_ms(self) -> int:
        if self.cfg.execs is not None:
            return self._fuzz_execs  # virtual: 1 ms per execution
        return int((time.monotonic() - self._start) * 1000)

    def _budget_left(self) -> bool:
        if self.cfg.execs is not None:
            return self._fuzz_execs < self.cfg.execs
        return (time.monotonic() - self._start) < self.cfg.duration_s

    # -- output files ------------------------------------------------------

    def _save_queue_entry(self, entry):
        (self._out / "queue" / f"id_{entry.id:06d}").write_bytes(entry.data)

    def _save_crash(self, data):
        (self._out / "crashes" / f"id_{self._crash_count:06d}").write_bytes(data)
        self._crash_count += 1

    def _flush_stats(self):
        self._stats_file.write(stats_row(self.stats, self._elapsed_ms()) + "\n")
        self._stats_file.flush()
        self._drain_es_log()

    def _drain_es_log(self):
        if self._es_log_file is None:
            return
        rows = self.scheduler.state.log
        while self._es_rows_written < len(rows):
            r = rows[self._es_rows_written]
            genotype = ";".join(str(g) for g in r.genotype)
            self._es_log_file.write(
                f"{r.generation},{r.parent_index},{r.candidate_index},"
                f"{r.fitness},{genotype}\n")
            self._es_rows_written += 1
        self._es_log_file.flush()

    # -- execution ---------------------------------------------------------

    def _execute(self, data, mutation_count, parent_id, via_splice):
        """Run one candidate, absorb coverage, report feedback, admit/record."""
        result = executor.run(self.cfg.target, data)
        classified = classify_counts(result.counts)
        feedback = self.coverage.absorb(classified)
        stats = self.stats
        stats.execs += 1
        self._fuzz_execs += 1
        stats.mutations += mutation_count
        self.scheduler.report(feedback)
        if feedback.new_edges:
            stats.edges_covered = self.coverage.edges_covered
            stats.edge_events.append((stats.execs, stats.edges_covered))
        if feedback.new_path:
            stats.unique_paths = self.coverage.unique_paths
            stats.coverage_events.append((stats.execs, stats.mutations))
            if result.status == executor.STATUS_OK:
                entry = self.queue.admit(data, feedback, parent_id=parent_id,
                                         found_at_exec=stats.execs,
                                         via_splice=via_splice)
                if entry is not None:
                    self._save_queue_entry(entry)
        if result.status == executor.STATUS_CRASH:
            stats.crashes += 1
            self._save_crash(data)
        if self._elapsed_ms() >= self._next_flush:
            self._flush_stats()
            self._next_flush = self._elapsed_ms() + 1000

    def _havoc_rounds(self, base, parent_id, via_splice=False):
        cfg = self.cfg
        for _ in range(cfg.havoc_rounds):
            if not self._budget_left():
                return
            data, used = mutators.havoc(base, self.rng, self.scheduler,
                                        self.extras, cfg.max_len)
            self._execute(data, len(used), parent_id, via_splice)

    def fuzz_entry(self, entry):
        self._havoc_rounds(entry.data, entry.id)

    def splice_stage(self):
        """Cross two random distinct entries and feed the result through havoc."""
        entries = self.queue.entries
        if len(entries) < 2:
            return
        for _ in range(SPLICE_ATTEMPTS):
            i = self.rng.below(len(entries))
            j = self.rng.below(len(entries) - 1)
            if j >= i:
                j += 1
            spliced = mutators.splice(entries[i].data, entries[j].data, self.rng)
            if spliced is not None:
                self._havoc_rounds(spliced, entries[i].id, via_splice=True)
                return

    # -- campaign ----------------------------------------------------------

    def run(self) -> CampaignStats:
        cfg = self.cfg
        self._out = Path(cfg.output_dir)
        (self._out / "queue").mkdir(parents=True, exist_ok=True)
        (self._out / "crashes").mkdir(parents=True, exist_ok=True)
        self.queue = load_seeds(cfg.input_dir, cfg.max_len)
        self._stats_file = open(self._out / "stats.csv", "w")
        self._stats_file.write(STATS_HEADER + "\n")
        self._es_log_file = None
        if cfg.scheduler_kind == "darwin":
            self._es_log_file = open(self._out / "es_log.csv", "w")
            self._es_log_file.write(ES_LOG_HEADER + "\n")
        try:
            self._start = time.monotonic()
            self._prime_seeds()
            self._flush_stats()
            self._next_flush = self._elapsed_ms() + 1000
            while self._budget_left():
                entry = self.queue.next_entry()
                wrap_finds = self.queue.pop_wrap_finds()
                if wrap_finds == 0:
                    self.splice_stage()
                self.fuzz_entry(entry)
            self._flush_stats()
            self._write_best_distribution()
        finally:
            self._stats_file.close()
            if self._es_log_file is not None:
                self._es_log_file.close()
        return self.stats

    def _prime_seeds(self):
        """Execute every seed once so its coverage and path are on record."""
        stats = self.stats
        for entry in self.queue.entries:
            result = executor.run(self.cfg.target, entry.data)
            feedback = self.coverage.absorb(classify_counts(result.counts))
            stats.execs += 1
            if feedback.new_edges:
                stats.edges_covered = self.coverage.edges_covered
                stats.edge_events.append((stats.execs, stats.edges_covered))
            stats.unique_paths = self.coverage.unique_paths
            if result.status == executor.STATUS_CRASH:
                stats.crashes += 1
                self._save_crash(entry.data)
            self._save_queue_entry(entry)

    def _write_best_distribution(self):
        if self.cfg.scheduler_kind != "darwin":
            return
        from .scheduler import format_distribution
        parent, _ = self.scheduler.state.best_parent()
        path = self._out / "best_distribution.txt"
        path.write_text(format_distribution(parent.genotype) + "\n")


def run_campaign(config: CampaignConfig) -> CampaignStats:
    return Campaign(config).run()
