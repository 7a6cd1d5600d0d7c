"""Mutation schedulers behind the three-call surface: init, select, report.

Three kinds: `uniform` (baseline), `static` (frozen distribution loaded from
a file), and `darwin` (evolution-strategy driven, adapts during the run).
"""

from pathlib import Path

from . import es
from .mutators import OPERATOR_COUNT


class SchedulerError(Exception):
    """Invalid scheduler configuration or distribution file."""


class UniformScheduler:
    kind = "uniform"
    operator_count = OPERATOR_COUNT

    def select(self, rng) -> int:
        return rng.below(OPERATOR_COUNT)

    def report(self, feedback):
        pass


def _selection_tables(weights):
    """(enabled ids, cumulative sums) for a weight vector; None cums = mask mode."""
    if all(w in (0, 1) for w in weights):
        enabled = tuple(i for i, w in enumerate(weights) if w)
        return enabled, None
    cums = []
    total = 0.0
    for w in weights:
        total += w
        cums.append(total)
    return None, tuple(cums)


def _select_weighted(rng, cums):
    total = cums[-1]
    r = (rng.next_u64() >> 11) * 2.0 ** -53 * total
    for i, c in enumerate(cums):
        if r < c:
            return i
    return OPERATOR_COUNT - 1


class StaticScheduler:
    kind = "static"
    operator_count = OPERATOR_COUNT

    def __init__(self, weights):
        weights = list(weights)
        if len(weights) != OPERATOR_COUNT:
            raise SchedulerError(
                f"distribution needs {OPERATOR_COUNT} values, got {len(weights)}")
        if any(w < 0 for w in weights):
            raise SchedulerError("distribution weights must be non-negative")
        if not any(w > 0 for w in weights):
            raise SchedulerError("distribution must have a positive weight")
        self.weights = weights
        self._enabled, self._cums = _selection_tables(weights)

    def select(self, rng) -> int:
        if self._cums is None:
            return self._enabled[rng.below(len(self._enabled))]
        return _select_weighted(rng, self._cums)

    def report(self, feedback):
        pass


class DarwinScheduler:
    kind = "darwin"
    operator_count = OPERATOR_COUNT

    def __init__(self, rng, encoding="binary", mu=es.DEFAULT_MU,
                 lam=es.DEFAULT_LAMBDA, window=es.DEFAULT_WINDOW):
        self.state = es.ESState(rng, encoding, mu, lam, window)
        # Push-based cache: the ES fires on_activate whenever the active
        # genotype changes (at most once per window), so select() — which
        # runs dozens of times per execution — carries no staleness check.
        self.state.on_activate = self._rebuild_tables
        self._rebuild_tables()

    def _rebuild_tables(self):
        self._enabled, self._cums = _selection_tables(self.state.active_genotype)
        self._n_enabled = len(self._enabled) if self._enabled is not None else 0

    def select(self, rng) -> int:
        enabled = self._enabled
        if enabled is not None:
            return enabled[rng.below(self._n_enabled)]
        return _select_weighted(rng, self._cums)

    def report(self, feedback):
        self.state.report(1 if feedback.new_path else 0)


def load_distribution(path) -> list:
    """Parse a static-distribution file: 17 whitespace-separated numbers."""
    try:
        tokens = Path(path).read_text().split()
    except OSError as exc:
        raise SchedulerError(f"cannot read distribution file {path}: {exc}") from exc
    try:
        weights = [float(t) for t in tokens]
    except ValueError as exc:
        raise SchedulerError(f"malformed distribution file {path}: {exc}") from exc
    if len(weights) != OPERATOR_COUNT:
        raise SchedulerError(
            f"{path}: expected {OPERATOR_COUNT} values, got {len(weights)}")
    return weights


def format_distribution(genotype) -> str:
    """One-line static-file form of a genotype (mask or real weights)."""
    if all(isinstance(g, int) for g in genotype):
        return " ".join(str(g) for g in genotype)
    return " ".join(repr(float(g)) for g in genotype)


def make_scheduler(kind, rng, static_path=None, encoding="binary",
                   mu=es.DEFAULT_MU, lam=es.DEFAULT_LAMBDA,
                   window=es.DEFAULT_WINDOW):
    if kind == "uniform":
        return UniformScheduler()
    if kind == "static":
        if static_path is None:
            raise SchedulerError("static scheduler requires a distribution file")
        return StaticScheduler(load_distribution(static_path))
    if kind == "darwin":
        return DarwinScheduler(rng, encoding, mu, lam, window)
    raise SchedulerError(f"unknown scheduler kind: {kind}")
