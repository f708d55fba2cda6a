"""Successive-halving hyperparameter search over bracketed budgets.

The schedule is pure integer arithmetic from (max_epochs, factor).
Within a bracket, every surviving trial resumes from its own live
optimizer state, so a round only pays the incremental epochs between
its budget and the previous round's. Trials that raise are scored
zero and never rejoin. The whole search is deterministic per seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Protocol, Sequence

import numpy as np

from .dataset import ImageSource
from .errors import DataError
from .model import ModelSpec, init_params
from .adam import init_adam
from .seeding import derive_seed


@dataclass(frozen=True)
class Round:
    """configs enter, each trained up to a cumulative epoch budget, keep survive."""

    configs: int
    epochs: int
    keep: int


@dataclass(frozen=True)
class Bracket:
    index: int
    rounds: tuple


@dataclass(frozen=True)
class BracketSchedule:
    max_epochs: int
    factor: int
    brackets: tuple

    def total_epochs(self) -> int:
        """Total epoch budget, counting resumed trials incrementally."""
        total = 0
        for bracket in self.brackets:
            prev = 0
            for rnd in bracket.rounds:
                total += rnd.configs * (rnd.epochs - prev)
                prev = rnd.epochs
        return total


def compute_schedule(max_epochs: int = 15, factor: int = 3) -> BracketSchedule:
    """Bracket table for the given budget and halving factor.

    With R = max_epochs and f = factor: s_max is the largest s with
    f**s <= R. Bracket s starts ceil((s_max + 1) / (s + 1) * f**s)
    configs; its round i runs floor(n / f**i) configs to a cumulative
    budget of floor(R / f**(s - i)) epochs (at least 1) and keeps the
    top floor(n / f**(i + 1)), with a single winner after the last
    round.
    """
    if max_epochs < 1:
        raise ValueError(f"max_epochs must be at least 1, got {max_epochs}")
    if factor < 2:
        raise ValueError(f"factor must be at least 2, got {factor}")
    s_max = 0
    while factor ** (s_max + 1) <= max_epochs:
        s_max += 1
    brackets = []
    for s in range(s_max, -1, -1):
        n = -(-(s_max + 1) * factor ** s // (s + 1))
        rounds = []
        for i in range(s + 1):
            configs = n // factor ** i
            epochs = max(1, max_epochs // factor ** (s - i))
            keep = n // factor ** (i + 1) if i < s else 1
            rounds.append(Round(configs=configs, epochs=epochs, keep=keep))
        brackets.append(Bracket(index=s, rounds=tuple(rounds)))
    return BracketSchedule(max_epochs=max_epochs, factor=factor,
                           brackets=tuple(brackets))


@dataclass(frozen=True)
class Assignment:
    dense_units: int
    conv_filters: int
    kernel_size: int
    learning_rate: float

    def as_dict(self) -> dict:
        return {
            "dense_units": self.dense_units,
            "conv_filters": self.conv_filters,
            "kernel_size": self.kernel_size,
            "learning_rate": self.learning_rate,
        }


@dataclass(frozen=True)
class SearchSpace:
    """Uniform choice grids, one per hyperparameter."""

    dense_units: tuple = tuple(range(32, 513, 32))
    conv_filters: tuple = (16, 32, 48, 64)
    kernel_size: tuple = (3, 5)
    learning_rate: tuple = (1e-2, 1e-3, 1e-4)

    def __post_init__(self):
        for name in ("dense_units", "conv_filters", "kernel_size", "learning_rate"):
            if not getattr(self, name):
                raise ValueError(f"search space grid {name!r} is empty")
        if any(k % 2 == 0 or k < 1 for k in self.kernel_size):
            raise ValueError(f"kernel sizes must be odd and positive, got {self.kernel_size}")

    def sample(self, rng: np.random.Generator) -> Assignment:
        return Assignment(
            dense_units=int(self.dense_units[rng.integers(len(self.dense_units))]),
            conv_filters=int(self.conv_filters[rng.integers(len(self.conv_filters))]),
            kernel_size=int(self.kernel_size[rng.integers(len(self.kernel_size))]),
            learning_rate=float(self.learning_rate[rng.integers(len(self.learning_rate))]),
        )


class Trainable(Protocol):
    """A resumable trial: train n more epochs, report best validation accuracy."""

    def train_epochs(self, n: int) -> float: ...


@dataclass(frozen=True)
class TrialResult:
    trial_id: int
    bracket: int
    assignment: Assignment
    epochs: int
    val_accuracy: float
    failed: bool


@dataclass(frozen=True)
class LogRow:
    bracket: int
    round: int
    trial_id: int
    assignment: Assignment
    epochs: int
    val_accuracy: float


@dataclass(frozen=True)
class SearchResult:
    best: Assignment
    best_accuracy: float
    trials: tuple
    log: tuple


class _Trial:
    def __init__(self, trial_id, bracket, assignment, trainable):
        self.trial_id = trial_id
        self.bracket = bracket
        self.assignment = assignment
        self.trainable = trainable
        self.epochs = 0
        self.accuracy = 0.0
        self.failed = False

    def advance(self, increment: int) -> None:
        if self.failed or increment <= 0:
            return
        try:
            self.accuracy = float(self.trainable.train_epochs(increment))
            self.epochs += increment
        except Exception:
            self.failed = True
            self.accuracy = 0.0


def search(space: SearchSpace, schedule: BracketSchedule,
           trainable_factory: Callable[[Assignment, int], Trainable],
           seed: int) -> SearchResult:
    """Run every bracket and return the best assignment seen anywhere.

    trainable_factory(assignment, trial_seed) builds one resumable
    trial. Ties in accuracy resolve to the earliest trial, both for
    survival within a round and for the final winner.
    """
    rng = np.random.default_rng(derive_seed(seed, "sample"))
    all_trials: List[_Trial] = []
    log = []
    next_id = 0
    for bracket in schedule.brackets:
        cohort = []
        for _ in range(bracket.rounds[0].configs):
            assignment = space.sample(rng)
            trainable = trainable_factory(assignment, derive_seed(seed, "trial", next_id))
            cohort.append(_Trial(next_id, bracket.index, assignment, trainable))
            next_id += 1
        all_trials.extend(cohort)
        prev_epochs = 0
        for round_index, rnd in enumerate(bracket.rounds):
            increment = rnd.epochs - prev_epochs
            for trial in cohort:
                trial.advance(increment)
                log.append(LogRow(
                    bracket=bracket.index, round=round_index,
                    trial_id=trial.trial_id, assignment=trial.assignment,
                    epochs=trial.epochs, val_accuracy=trial.accuracy,
                ))
            cohort = sorted(cohort, key=lambda t: (-t.accuracy, t.trial_id))[:rnd.keep]
            prev_epochs = rnd.epochs
    viable = [t for t in all_trials if not t.failed]
    if not viable:
        raise DataError("hyperparameter search failed: every trial raised")
    winner = min(viable, key=lambda t: (-t.accuracy, t.trial_id))
    return SearchResult(
        best=winner.assignment,
        best_accuracy=winner.accuracy,
        trials=tuple(
            TrialResult(t.trial_id, t.bracket, t.assignment, t.epochs,
                        t.accuracy, t.failed)
            for t in all_trials
        ),
        log=tuple(log),
    )


def trial_log_csv(log: Sequence[LogRow]) -> str:
    lines = ["bracket,round,trial_id,dense_units,conv_filters,kernel_size,"
             "learning_rate,epochs,val_accuracy"]
    for row in log:
        a = row.assignment
        lines.append(
            f"{row.bracket},{row.round},{row.trial_id},{a.dense_units},"
            f"{a.conv_filters},{a.kernel_size},{a.learning_rate:g},"
            f"{row.epochs},{row.val_accuracy:.6f}"
        )
    return "\n".join(lines) + "\n"


class CNNTrialFactory:
    """Builds real resumable trials: one model per assignment, shared data.

    All trials see the same fixed train/validation partition and the
    same preprocessing source, so scores are comparable. Each trial's
    weights, optimizer state, and epoch counter live on the trial, so
    survivors resume instead of restarting.
    """

    def __init__(self, train_entries, val_entries, filter_name: str = "none",
                 input_size: tuple = (100, 100), classes: int = 3,
                 dropout_rate: float = 0.0, batch_size: int = 32,
                 source: Optional[ImageSource] = None):
        if not train_entries or not val_entries:
            raise DataError("hyperparameter search needs non-empty train and val partitions")
        self.train_entries = tuple(train_entries)
        self.val_entries = tuple(val_entries)
        self.filter_name = filter_name
        self.input_size = input_size
        self.classes = classes
        self.dropout_rate = dropout_rate
        self.batch_size = batch_size
        self.source = source or ImageSource.for_filter_name(filter_name, size=input_size)

    def __call__(self, assignment: Assignment, seed: int) -> "_CNNTrial":
        spec = ModelSpec(
            conv_filters=assignment.conv_filters,
            kernel_size=assignment.kernel_size,
            dense_units=assignment.dense_units,
            dropout_rate=self.dropout_rate,
            input_height=self.input_size[0],
            input_width=self.input_size[1],
            classes=self.classes,
            raster_filter=self.filter_name,
        )
        return _CNNTrial(self, spec, assignment.learning_rate, seed)


class _CNNTrial:
    def __init__(self, factory: CNNTrialFactory, spec: ModelSpec,
                 learning_rate: float, seed: int):
        self.factory = factory
        self.spec = spec
        self.seed = seed
        self.params = init_params(spec, derive_seed(seed, "init"))
        self.state = init_adam(self.params.as_dict(), learning_rate)
        self.epochs_done = 0
        self.best = 0.0

    def train_epochs(self, n: int) -> float:
        from .training import evaluate, run_train_epoch

        for _ in range(n):
            self.epochs_done += 1
            run_train_epoch(self.spec, self.params, self.state,
                            self.factory.train_entries, self.factory.source,
                            self.factory.batch_size, self.epochs_done, self.seed)
            result = evaluate(self.spec, self.params, self.factory.val_entries,
                              self.factory.source, self.factory.batch_size)
            self.best = max(self.best, result.accuracy)
        return self.best
