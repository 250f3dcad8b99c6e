"""
Projected-gradient search over auxiliary channels p(u|x1,x2).

Three parametrizations are supported:

* ``free``: the raw channel, one simplex per (x1, x2) column.
* ``markov``: p(u), p(x1|u), p(x2|u); the induced pair pmf is pulled onto
  the source pmf by a quadratic penalty whose weight grows x10 per round.
* ``markov-symmetric``: p(u) and one shared p(x|u) for both components.

Gradients are central differences; each step is projected back onto the
simplex product and halved whenever it fails to improve. All restarts
descend together as one stack of rows, each row with its own step and
stop. Restarts use independent streams derived from (seed, restart index),
so serial and parallel runs reduce to the same answer.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from ..config import Config
from ..errors import InfeasibleOptimizationError, ValidationError
from .gray_wyner import (
    MARKOV_TOL,
    SYMMETRY_TOL,
    AuxChannel,
    aux_from_joint,
    common_part_aux,
    constant_aux,
    corner_terms,
    dsbs_p1,
    identity_aux,
    induced_joint,
    symmetry_defect,
    wyner_aux_dsbs,
)
from .info import JointPmf2, dsbs_parameter

logger = logging.getLogger(__name__)

MIN_STEP = 1e-16
# entries of p(u, x1, x2) evaluated per gradient call
MAX_STACK = 2_000_000


class Mode(str, Enum):
    FREE = "free"
    MARKOV = "markov"
    MARKOV_SYMMETRIC = "markov-symmetric"


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    max_iters: int = 2000
    step: float = 0.1
    tol: float = 1e-10
    markov_tol: float = MARKOV_TOL
    tv_tol: float = 1e-8
    seed: int = 0
    nu: int | None = None
    workers: int = 1
    grad_step: float = 1e-6
    penalty_weight: float = 10.0
    penalty_rounds: int = 9

    def __post_init__(self):
        errors = {}
        if self.restarts < 1:
            errors["restarts"] = "must be at least 1"
        if self.max_iters < 1:
            errors["max_iters"] = "must be at least 1"
        if self.step <= 0.0:
            errors["step"] = "must be positive"
        if self.seed < 0:
            errors["seed"] = "must be nonnegative"
        if self.workers < 1:
            errors["workers"] = "must be at least 1"
        if self.penalty_rounds < 1:
            errors["penalty_rounds"] = "must be at least 1"
        if errors:
            raise ValidationError("Invalid optimizer configuration", errors)

    @classmethod
    def from_config(cls, **overrides) -> "OptimizerConfig":
        """Defaults from ``Config`` (environment / .env); ``None`` overrides are ignored."""
        values = {
            "restarts": Config.RESTARTS,
            "max_iters": Config.MAX_ITERS,
            "seed": Config.SEED,
            "workers": Config.WORKERS,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def alphabet_size(self, j: JointPmf2) -> int:
        bound = j.n1 * j.n2 + 2
        nu = bound if self.nu is None else self.nu
        if not 1 <= nu <= bound:
            raise ValidationError(
                f"Auxiliary alphabet size {nu} is outside [1, {bound}].",
                {"nu": f"must lie in [1, {bound}]"},
            )
        return nu


@dataclass(frozen=True)
class Objective:
    """
    A functional of the Gray-Wyner corner.

    ``evaluate`` maps arrays (I(X1,X2;U), H(X1|U), H(X2|U)) to values and must
    be vectorized and picklable (a functools.partial of a module-level function).
    """

    name: str
    evaluate: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    maximize: bool = False

    def loss(self, common, private1, private2) -> np.ndarray:
        value = self.evaluate(common, private1, private2)
        return -value if self.maximize else value


def project_rows(c: np.ndarray) -> np.ndarray:
    """Euclidean projection of every row (last axis) of ``c`` onto the probability simplex."""
    n = c.shape[-1]
    ordered = -np.sort(-c, axis=-1)
    excess = np.cumsum(ordered, axis=-1) - 1.0
    positive = ordered - excess / np.arange(1, n + 1) > 0.0
    last = n - 1 - np.argmax(positive[..., ::-1], axis=-1)
    theta = np.take_along_axis(excess, last[..., None], axis=-1) / (last[..., None] + 1.0)
    return np.maximum(c - theta, 0.0)


@dataclass(frozen=True)
class Parametrization:
    mode: Mode
    n1: int
    n2: int
    nu: int

    @property
    def penalized(self) -> bool:
        return self.mode is not Mode.FREE

    @property
    def blocks(self) -> list[tuple[int, int, int]]:
        """(offset, rows, width) of each stack of simplices in the flat vector."""
        nu, n1, n2 = self.nu, self.n1, self.n2
        if self.mode is Mode.FREE:
            return [(0, n1 * n2, nu)]
        if self.mode is Mode.MARKOV:
            return [(0, 1, nu), (nu, nu, n1), (nu + nu * n1, nu, n2)]
        return [(0, 1, nu), (nu, nu, n1)]

    @property
    def dim(self) -> int:
        offset, rows, width = self.blocks[-1]
        return offset + rows * width

    def project(self, theta: np.ndarray) -> np.ndarray:
        out = np.empty_like(theta)
        batch = theta.shape[:-1]
        for offset, rows, width in self.blocks:
            end = offset + rows * width
            segment = theta[..., offset:end].reshape(batch + (rows, width))
            out[..., offset:end] = project_rows(segment).reshape(batch + (rows * width,))
        return out

    def random(self, rng: np.random.Generator) -> np.ndarray:
        parts = [rng.dirichlet(np.ones(width), size=rows).ravel() for _, rows, width in self.blocks]
        return np.concatenate(parts)

    def joint(self, theta: np.ndarray, p: np.ndarray) -> np.ndarray:
        """p(u, x1, x2) for a (batch of) parameter vector(s)."""
        nu, n1, n2 = self.nu, self.n1, self.n2
        theta = np.clip(theta, 0.0, None)
        batch = theta.shape[:-1]
        if self.mode is Mode.FREE:
            w = np.swapaxes(theta.reshape(batch + (n1 * n2, nu)), -1, -2)
            return w.reshape(batch + (nu, n1, n2)) * p
        pu = theta[..., :nu]
        given1 = theta[..., nu:nu + nu * n1].reshape(batch + (nu, n1))
        if self.mode is Mode.MARKOV:
            given2 = theta[..., nu + nu * n1:].reshape(batch + (nu, n2))
        else:
            given2 = given1
        return pu[..., :, None, None] * given1[..., :, :, None] * given2[..., :, None, :]

    def from_aux(self, j: JointPmf2, a: AuxChannel) -> np.ndarray | None:
        """Warm start reproducing ``a``; None if it needs more labels than ``nu``."""
        if a.nu > self.nu:
            return None
        q = np.zeros((self.nu, self.n1, self.n2))
        q[:a.nu] = induced_joint(j, a)
        if self.mode is Mode.FREE:
            w = np.zeros((self.nu, self.n1 * self.n2))
            w[:a.nu] = a.w
            return w.T.ravel()
        pu = q.sum(axis=(1, 2))
        safe = np.where(pu > 0.0, pu, 1.0)[:, None]
        given1 = np.where(pu[:, None] > 0.0, q.sum(axis=2) / safe, 1.0 / self.n1)
        if self.mode is Mode.MARKOV:
            given2 = np.where(pu[:, None] > 0.0, q.sum(axis=1) / safe, 1.0 / self.n2)
            return np.concatenate([pu, given1.ravel(), given2.ravel()])
        given = np.where(pu[:, None] > 0.0, (q.sum(axis=2) + q.sum(axis=1)) / (2.0 * safe), 1.0 / self.n1)
        return np.concatenate([pu, given.ravel()])


@dataclass
class RestartTrace:
    index: int
    value: float | None
    feasible: bool
    rounds: list[list[float]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"restart": self.index, "value": self.value, "feasible": self.feasible}


@dataclass(frozen=True)
class OptimizeResult:
    value: float
    witness: AuxChannel
    objective: str
    mode: Mode
    trace: list[RestartTrace]
    seed_value: float | None

    @property
    def beats_seed(self) -> bool:
        """True when a restart strictly improved on every seeded witness."""
        if self.seed_value is None:
            return True
        return abs(self.value - self.seed_value) > 1e-9

    def to_json(self) -> dict:
        return {
            "objective": self.objective,
            "mode": self.mode.value,
            "value": self.value,
            "witness": self.witness.to_json(),
            "trace": [restart.to_json() for restart in self.trace],
        }


@dataclass(frozen=True)
class _Problem:
    p: np.ndarray
    objective: Objective
    param: Parametrization
    cfg: OptimizerConfig

    def loss(self, theta: np.ndarray, weight: float) -> np.ndarray:
        q = self.param.joint(theta, self.p)
        common, private1, private2, _ = corner_terms(q)
        loss = self.objective.loss(common, private1, private2)
        if weight:
            mismatch = q.sum(axis=-3) - self.p
            loss = loss + weight * np.sum(mismatch * mismatch, axis=(-2, -1))
        return loss

    def gradient(self, theta: np.ndarray, weight: float) -> np.ndarray:
        """Central differences for a stack of points theta[..., dim]."""
        h = self.cfg.grad_step
        shifts = np.eye(theta.shape[-1]) * h
        forward = self.loss(theta[..., None, :] + shifts, weight)
        backward = self.loss(theta[..., None, :] - shifts, weight)
        return (forward - backward) / (2.0 * h)

    def tv_defect(self, theta: np.ndarray) -> np.ndarray:
        q = self.param.joint(theta, self.p)
        return 0.5 * np.abs(q.sum(axis=-3) - self.p).sum(axis=(-2, -1))


def _assess(j: JointPmf2, a: AuxChannel, objective: Objective, mode: Mode, cfg: OptimizerConfig):
    """Objective value of ``a`` against the source pmf, and whether it meets the mode's constraints."""
    common, private1, private2, cmi = corner_terms(induced_joint(j, a))
    value = float(objective.evaluate(common, private1, private2))
    feasible = True
    if mode is not Mode.FREE:
        feasible = float(cmi) <= cfg.markov_tol
    if feasible and mode is Mode.MARKOV_SYMMETRIC:
        feasible = symmetry_defect(j, a) <= SYMMETRY_TOL
    return value, feasible


def _descend(problem: _Problem, theta: np.ndarray) -> tuple[np.ndarray, list[list[list[float]]]]:
    """
    Projected descent of a stack of starting points theta[rows, dim].

    Rows do not interact: each has its own step, iteration budget and stop,
    and leaves a list of per-round loss traces.
    """
    param, cfg = problem.param, problem.cfg
    if param.penalized:
        weights = [cfg.penalty_weight * 10.0 ** k for k in range(cfg.penalty_rounds)]
    else:
        weights = [0.0]

    theta = theta.copy()
    rows = theta.shape[0]
    per_call = max(1, MAX_STACK // (param.dim * param.nu * param.n1 * param.n2))
    budget = np.full(rows, cfg.max_iters)
    live = np.ones(rows, dtype=bool)
    rounds = [[] for _ in range(rows)]
    for weight in weights:
        step = np.full(rows, cfg.step / max(1.0, weight / cfg.penalty_weight))
        current = problem.loss(theta, weight)
        traces = [[float(value)] for value in current]
        grad = np.zeros_like(theta)
        stale = np.ones(rows, dtype=bool)
        active = live.copy()
        while True:
            active &= (budget > 0) & (step >= MIN_STEP)
            if not active.any():
                break
            idx = np.flatnonzero(active)
            budget[idx] -= 1
            refresh = idx[stale[idx]]
            if refresh.size:
                for part in np.array_split(refresh, -(-refresh.size // per_call)):
                    grad[part] = problem.gradient(theta[part], weight)
                stale[refresh] = False
            candidate = param.project(theta[idx] - step[idx, None] * grad[idx])
            value = problem.loss(candidate, weight)

            better = value < current[idx]
            moved = idx[better]
            improvement = current[moved] - value[better]
            theta[moved] = candidate[better]
            current[moved] = value[better]
            stale[moved] = True
            for row, loss in zip(moved, value[better]):
                traces[row].append(float(loss))
            active[moved[improvement < cfg.tol]] = False
            step[idx[~better]] /= 2.0

        for row in np.flatnonzero(live):
            rounds[row].append(traces[row])
        live &= budget > 0
        if param.penalized:
            live &= problem.tv_defect(theta) > cfg.tv_tol
        if not live.any():
            break
    return theta, rounds


def _run_restarts(problem: _Problem, j: JointPmf2, tasks: list[tuple[int, np.ndarray | None]]):
    """
    A chunk of restarts descended together: each from its warm start, or from
    a Dirichlet draw on the (seed, index) stream, ending at its Bayes witness.
    """
    cfg, param = problem.cfg, problem.param
    starts = []
    for index, start in tasks:
        if start is None:
            start = param.random(np.random.default_rng([cfg.seed, index]))
        starts.append(param.project(np.asarray(start, dtype=float)))
    theta, rounds = _descend(problem, np.stack(starts))

    defects = problem.tv_defect(theta)
    outcomes = []
    for row, (index, _) in enumerate(tasks):
        witness = aux_from_joint(param.joint(theta[row], problem.p))
        value, feasible = _assess(j, witness, problem.objective, param.mode, cfg)
        if param.penalized and defects[row] > cfg.tv_tol:
            feasible = False
        outcomes.append((RestartTrace(index, value, feasible, rounds[row]), witness))
    return outcomes


def _chunks(tasks: list, count: int) -> list[list]:
    size = -(-len(tasks) // count)
    return [tasks[k:k + size] for k in range(0, len(tasks), size)]


def _reduction_key(objective: Objective, value: float, witness: AuxChannel):
    loss = -value if objective.maximize else value
    return (loss, witness.nu, tuple(witness.w.ravel()))


def seeded_witnesses(j: JointPmf2, mode: Mode | str = Mode.FREE) -> list[AuxChannel]:
    """
    Analytic warm starts that are always tried.

    Constant U and U = (X1, X2) for every pmf; the Wyner channel at a = p1 for
    a DSBS; the common-part extractor when the support graph splits. In the
    symmetric mode U = (X1, X2) is only kept when X1 = X2.
    """
    mode = Mode(mode)
    seeds = [constant_aux(j)]
    diagonal = j.n1 == j.n2 and not np.any(j.p - np.diag(np.diag(j.p)))
    if mode is not Mode.MARKOV_SYMMETRIC or diagonal:
        seeds.append(identity_aux(j))
    p0 = dsbs_parameter(j)
    if p0 is not None:
        seeds.append(wyner_aux_dsbs(p0, dsbs_p1(p0)))
    common = common_part_aux(j)
    if 1 < common.nu < j.n1 * j.n2:
        seeds.append(common)
    return seeds


def optimize(
    j: JointPmf2,
    objective: Objective,
    mode: Mode | str = Mode.FREE,
    cfg: OptimizerConfig | None = None,
    extra_witnesses: tuple[AuxChannel, ...] | list[AuxChannel] = (),
) -> OptimizeResult:
    """
    Best feasible auxiliary channel found for ``objective``.

    Args:
        j: The source pmf.
        objective: What to minimize (or maximize) over U.
        mode: Parametrization, one of free / markov / markov-symmetric.
        cfg: Optimizer settings; ``OptimizerConfig.from_config()`` when omitted.
        extra_witnesses: Channels evaluated and used as warm starts next to the seeded ones.

    Returns:
        OptimizeResult whose ``value`` is the objective re-evaluated at ``witness``.

    Raises:
        ValidationError: bad configuration, or the symmetric mode on unequal alphabets.
        InfeasibleOptimizationError: if neither seeds nor restarts meet the constraints.
    """
    cfg = cfg or OptimizerConfig.from_config()
    mode = Mode(mode)
    if mode is Mode.MARKOV_SYMMETRIC and j.n1 != j.n2:
        raise ValidationError(
            f"The symmetric parametrization needs n1 = n2, but the source is {j.n1}x{j.n2}.",
            {"mode": "markov-symmetric requires equal alphabets"},
        )
    param = Parametrization(mode, j.n1, j.n2, cfg.alphabet_size(j))
    problem = _Problem(np.array(j.p), objective, param, cfg)

    seeds = seeded_witnesses(j, mode) + list(extra_witnesses)
    candidates = []
    for a in seeds:
        value, feasible = _assess(j, a, objective, mode, cfg)
        if feasible:
            candidates.append((value, a))
    seed_value = None
    if candidates:
        seed_value = min(candidates, key=lambda c: _reduction_key(objective, c[0], c[1]))[0]

    starts = [theta for theta in (param.from_aux(j, a) for a in seeds) if theta is not None]
    tasks = [(index, starts[index] if index < len(starts) else None) for index in range(cfg.restarts)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_restarts, problem, j, chunk) for chunk in _chunks(tasks, cfg.workers)]
            outcomes = [outcome for future in futures for outcome in future.result()]
    else:
        outcomes = _run_restarts(problem, j, tasks)

    trace = []
    for restart, witness in outcomes:
        trace.append(restart)
        if restart.feasible:
            candidates.append((restart.value, witness))

    feasible_restarts = sum(restart.feasible for restart in trace)
    logger.info(
        "Optimizer %s (%s): %d/%d restarts feasible, %d seeded candidates.",
        objective.name, mode.value, feasible_restarts, len(trace), len(candidates) - feasible_restarts,
    )
    if not candidates:
        raise InfeasibleOptimizationError(
            f"No feasible auxiliary channel for '{objective.name}' in {mode.value} mode."
        )

    value, witness = min(candidates, key=lambda c: _reduction_key(objective, c[0], c[1]))
    return OptimizeResult(value, witness, objective.name, mode, trace, seed_value)
