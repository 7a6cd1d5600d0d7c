"""(mu + lambda) evolution strategy over operator-probability genotypes.

The optimizer runs mu independent searches interleaved round-robin.  Each
generation re-evaluates the parent alongside lambda freshly perturbed
children, one fixed-size evaluation window apiece, then keeps the best.
"""

from dataclasses import dataclass

GENOTYPE_LEN = 17
WEIGHT_FLOOR = 1e-6
PERTURBATION_SIGMA = 0.25

DEFAULT_MU = 5
DEFAULT_LAMBDA = 4
DEFAULT_WINDOW = 512


@dataclass
class Solution:
    genotype: list
    fitness: int = 0
    evaluated: bool = False


def random_binary_genotype(rng) -> list:
    """Each flag Bernoulli(1/2); resampled until at least one flag is set."""
    while True:
        flags = [rng.below(2) for _ in range(GENOTYPE_LEN)]
        if any(flags):
            return flags


def random_real_genotype(rng) -> list:
    """Weights uniform in [0, 1], floored."""
    return [max(rng.next_u64() * 2.0 ** -64, WEIGHT_FLOOR)
            for _ in range(GENOTYPE_LEN)]


def perturb_binary(genotype, rng) -> list:
    """Flip one random flag; an all-zero result re-enables a random flag."""
    out = list(genotype)
    i = rng.below(GENOTYPE_LEN)
    out[i] ^= 1
    if not any(out):
        out[rng.below(GENOTYPE_LEN)] = 1
    return out


def perturb_real(genotype, rng) -> list:
    """Add N(0, 0.25^2) to one random weight, flooring at 1e-6."""
    out = list(genotype)
    i = rng.below(GENOTYPE_LEN)
    out[i] = max(out[i] + rng.gauss() * PERTURBATION_SIGMA, WEIGHT_FLOOR)
    return out


@dataclass
class LogRow:
    generation: int
    parent_index: int
    candidate_index: int
    fitness: int
    genotype: list


class ESState:
    """Optimizer state: mu parents, the active generation, window bookkeeping."""

    def __init__(self, rng, encoding: str = "binary", mu: int = DEFAULT_MU,
                 lam: int = DEFAULT_LAMBDA, window: int = DEFAULT_WINDOW):
        if mu < 1 or lam < 1 or window < 1:
            raise ValueError("mu, lambda and window must all be >= 1")
        if encoding not in ("binary", "real"):
            raise ValueError(f"unknown encoding: {encoding}")
        self.rng = rng
        self.encoding = encoding
        self.mu = mu
        self.lam = lam
        self.window = window
        if encoding == "binary":
            # Parent 0 starts with every operator enabled (uniform selection);
            # the rest are random masks to diversify the parallel searches.
            parents = [[1] * GENOTYPE_LEN]
            parents += [random_binary_genotype(rng) for _ in range(mu - 1)]
        else:
            parents = [random_real_genotype(rng) for _ in range(mu)]
        self.parents = [Solution(g) for g in parents]
        self.generation = [0] * mu
        self.latest_fitness: list = [None] * mu
        self.cursor = 0
        self.log: list = []
        # Bumped whenever the active genotype changes; `on_activate` (if set)
        # fires at the same moments so the scheduler can rebuild its cached
        # selection tables off the select() hot path.
        self.version = 0
        self.on_activate = None
        self._start_generation()

    def _perturb(self, genotype):
        if self.encoding == "binary":
            return perturb_binary(genotype, self.rng)
        return perturb_real(genotype, self.rng)

    def _start_generation(self):
        parent = self.parents[self.cursor]
        # Candidate 0 is the parent itself, re-evaluated on fresh executions;
        # children are all perturbed from the parent at generation start.
        self.pending = [Solution(list(parent.genotype))]
        self.pending += [Solution(self._perturb(parent.genotype))
                         for _ in range(self.lam)]
        self.eval_index = 0
        self.window_used = 0
        self.version += 1
        if self.on_activate is not None:
            self.on_activate()

    @property
    def active_genotype(self) -> list:
        return self.pending[self.eval_index].genotype

    def report(self, new_path: int):
        """Credit the active candidate for one execution's feedback."""
        self.pending[self.eval_index].fitness += new_path
        self.window_used += 1
        if self.window_used >= self.window:
            self._complete_candidate()

    def advance(self, fitness: int):
        """Close the active candidate's window with the given fitness.

        Equivalent to `window` report calls summing to `fitness`; used to
        drive the selection law directly.
        """
        self.pending[self.eval_index].fitness = fitness
        self._complete_candidate()

    def _complete_candidate(self):
        cand = self.pending[self.eval_index]
        cand.evaluated = True
        self.log.append(LogRow(self.generation[self.cursor], self.cursor,
                               self.eval_index, cand.fitness,
                               list(cand.genotype)))
        self.eval_index += 1
        self.window_used = 0
        if self.eval_index < len(self.pending):
            self.version += 1
            if self.on_activate is not None:
                self.on_activate()
            return
        # Generation complete: argmax with ties going to the latest-evaluated
        # candidate, so offspring beat the parent on equal fitness.
        best = self.pending[0]
        for cand in self.pending[1:]:
            if cand.fitness >= best.fitness:
                best = cand
        self.parents[self.cursor] = Solution(list(best.genotype), best.fitness,
                                             evaluated=True)
        self.latest_fitness[self.cursor] = best.fitness
        self.generation[self.cursor] += 1
        self.cursor = (self.cursor + 1) % self.mu
        self._start_generation()

    def best_parent(self) -> tuple:
        """(parent, evaluated): highest latest-generation fitness, lowest index wins ties."""
        best_i = None
        for i, fit in enumerate(self.latest_fitness):
            if fit is None:
                continue
            if best_i is None or fit > self.latest_fitness[best_i]:
                best_i = i
        if best_i is None:
            return self.parents[0], False
        return self.parents[best_i], True
