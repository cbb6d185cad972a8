"""Low-depth amplitude estimation: schedules, damped-oscillation fits, bounds.

The marked-count response after ``l`` Grover applications is
``r(theta, l, a, f) = e^{-a l} sin^2((2l+1) theta/2) + (1 - e^{-a l}) f``
where ``a`` is the per-Grover error decay rate and ``f`` the expected marked
fraction of a scrambled shot. Fits minimize the sum of squared residuals on
count fractions with multi-start gradient descent (backtracking line search,
analytic gradients). Angles follow the eigenphase convention
``p = sin^2(theta/2)``; ``theta`` and ``2*pi - theta`` predict identical
integer-power responses, so fits always report the smaller angle.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .circuit import GroverSpec, build_grover, build_model_circuit
from .errors import FitDivergedError, ParseError, ValidationError
from .model import NetworkModel
from .sim import DEFAULT_QUBIT_CAP, NoiseSpec, apply_gates, run, sample_marked

__all__ = [
    "LowDepthTrace",
    "FitResult",
    "FitConfig",
    "predict",
    "run_schedule",
    "fit_sine",
    "fit_noise_model",
    "min_shots",
    "max_depth",
    "trace_to_text",
    "trace_from_text",
]


@dataclass(frozen=True)
class LowDepthTrace:
    """Per-power shot and marked-count record of one schedule run.

    Marked counts may be real-valued so exact expectation values can be
    fitted; schedule runs always produce integers.
    """

    schedule: tuple[int, ...]
    shots: tuple[int, ...]
    marked: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "schedule", tuple(int(x) for x in self.schedule))
        object.__setattr__(self, "shots", tuple(int(x) for x in self.shots))
        object.__setattr__(self, "marked", tuple(float(x) for x in self.marked))
        if not self.schedule:
            raise ValidationError("schedule must be nonempty", code="invalid-schedule")
        if len(self.shots) != len(self.schedule) or len(self.marked) != len(self.schedule):
            raise ValidationError("schedule, shots, and marked must align",
                                  code="invalid-schedule")
        if any(l < 0 for l in self.schedule) or len(set(self.schedule)) != len(self.schedule):
            raise ValidationError("schedule powers must be distinct and >= 0",
                                  code="invalid-schedule")
        if any(n < 1 for n in self.shots):
            raise ValidationError("shots must be >= 1 for every power", code="invalid-shots")
        if any(not 0 <= m <= n for m, n in zip(self.marked, self.shots)):
            raise ValidationError("marked counts must lie in [0, shots]",
                                  code="invalid-counts")

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(m / n for m, n in zip(self.marked, self.shots))


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters; ``probability = sin^2(theta/2)`` with theta in [0, pi]."""

    theta: float
    a: float
    f: float
    probability: float
    loss: float


@dataclass(frozen=True)
class FitConfig:
    """Multi-start grid and descent controls."""

    theta_starts: tuple[float, ...] = tuple(math.pi * i / 40 for i in range(1, 40))
    a_starts: tuple[float, ...] = (-0.1, 0.0, 0.25, 0.5, 1.0, 2.0)
    f_starts: tuple[float, ...] = (0.25, 0.5, 0.75)
    max_iters: int = 5000
    grad_tol: float = 1e-9


def predict(theta: float, power, a: float, f: float):
    """Expected marked fraction after ``power`` Grover applications.

    At a=0 this is exactly sin^2((2*power+1)*theta/2). ``power`` may be an
    array (and real-valued, for plotting the fitted curve).
    """
    if not 0.0 <= f <= 1.0:
        raise ValidationError(f"f = {f!r} outside [0, 1]", code="out-of-range")
    ell = np.asarray(power, dtype=float)
    signal = np.sin((2.0 * ell + 1.0) * theta / 2.0) ** 2
    decay = np.exp(-a * ell)
    value = decay * signal + (1.0 - decay) * f
    return float(value) if np.isscalar(power) else value


def run_schedule(model: NetworkModel, horizon: int, spec: GroverSpec, schedule,
                 shots, noise: NoiseSpec | None = None, seed=0,
                 qubit_cap: int = DEFAULT_QUBIT_CAP) -> LowDepthTrace:
    """Run the model plus each scheduled Grover power and count marked results.

    The statevector is evolved incrementally, one Grover application per
    power. Sampling at power l uses the stream seeded by (seed, l), so any
    two schedules agree on their common powers.
    """
    schedule = tuple(int(l) for l in schedule)
    if not schedule:
        raise ValidationError("schedule must be nonempty", code="invalid-schedule")
    per_shots = (tuple(int(s) for s in shots) if not isinstance(shots, int)
                 else (int(shots),) * len(schedule))
    if len(per_shots) != len(schedule):
        raise ValidationError("one shot count per schedule entry required",
                              code="invalid-shots")
    if any(n < 1 for n in per_shots):
        raise ValidationError("shots must be >= 1", code="invalid-shots")
    if any(l < 0 for l in schedule) or len(set(schedule)) != len(schedule):
        raise ValidationError("schedule powers must be distinct and >= 0",
                              code="invalid-schedule")
    base = build_model_circuit(model, horizon)
    grover = build_grover(model, horizon, spec)
    register = base.register(spec.target_step)
    epsilon = noise.per_grover_error if noise is not None else 0.0
    seed_tuple = (seed,) if isinstance(seed, int) else tuple(seed)
    wanted = dict(zip(schedule, per_shots))
    state = run(base, qubit_cap=qubit_cap)
    counts: dict[int, int] = {}
    for power in range(max(schedule) + 1):
        if power in wanted:
            rng = np.random.default_rng((*seed_tuple, power))
            counts[power] = sample_marked(state, register, spec.matches,
                                          wanted[power], (1.0 - epsilon) ** power, rng)
        if power < max(schedule):
            apply_gates(state, grover.gates, grover.n_qubits)
    return LowDepthTrace(schedule, per_shots, tuple(counts[l] for l in schedule))


# --- fitting -------------------------------------------------------------------

def _fold(theta: float) -> float:
    t = theta % (2.0 * math.pi)
    return min(t, 2.0 * math.pi - t)


def _descend(loss_fn, loss_grad_fn, starts: np.ndarray, clip_col: int | None,
             max_iters: int, grad_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Projected gradient descent with backtracking from every start row.

    All starts advance in lockstep as full-matrix operations; a start is
    frozen (step 0) once its gradient norm drops below ``grad_tol`` or its
    line search stalls. The Armijo acceptance keeps every per-start loss
    non-increasing.
    """
    final_params = starts.astype(float).copy()
    final_losses = loss_fn(final_params)
    index = np.arange(len(final_params))
    params = final_params.copy()
    losses = final_losses.copy()
    step = np.where(np.isfinite(losses), 0.25, 0.0)
    tol2 = grad_tol * grad_tol
    window = 25
    window_losses = losses.copy()
    for iteration in range(max_iters):
        if iteration % window == 0:
            if iteration:
                # monotone losses: a start whose window-wide decrease is
                # negligible against its own loss has converged for all
                # purposes (well below every reported digit)
                step[window_losses - losses < 1e-13 + 1e-8 * losses] = 0.0
            live = step > 0.0
            if not live.all():
                finished = ~live
                final_params[index[finished]] = params[finished]
                final_losses[index[finished]] = losses[finished]
                index, params, losses, step = (x[live] for x in (index, params, losses, step))
            window_losses = losses.copy()
        if index.size == 0:
            break
        grad = loss_grad_fn(params)[1]
        if clip_col is not None:
            col = params[:, clip_col]
            gcol = grad[:, clip_col]
            grad[((col <= 0.0) & (gcol > 0.0)) | ((col >= 1.0) & (gcol < 0.0)), clip_col] = 0.0
        gnorm2 = (grad * grad).sum(axis=1)
        step[gnorm2 < tol2] = 0.0
        remaining = step > 0.0
        if not remaining.any():
            continue
        for round_index in range(60):
            candidate = params - (step * remaining)[:, None] * grad
            if clip_col is not None:
                candidate[:, clip_col] = np.clip(candidate[:, clip_col], 0.0, 1.0)
            cand_loss = loss_fn(candidate)
            ok = remaining & (cand_loss <= losses - 1e-4 * step * gnorm2)
            params[ok] = candidate[ok]
            losses[ok] = cand_loss[ok]
            if round_index == 0:
                # grow only steps that worked immediately; grown-then-halved
                # steps would thrash between iterations
                step[ok] = np.minimum(step[ok] * 1.5, 8.0)
            remaining &= ~ok
            if not remaining.any():
                break
            step[remaining] *= 0.5
            stalled = remaining & (step < 1e-14)
            step[stalled] = 0.0
            remaining &= ~stalled
        step[remaining] = 0.0  # 60 halvings without decrease: local minimum
    final_params[index] = params
    final_losses[index] = losses
    return final_params, final_losses


def _fit(fractions: np.ndarray, ells: np.ndarray, starts: np.ndarray,
         free_f: bool, sine_only: bool, config: FitConfig) -> FitResult:
    y = fractions[None, :]
    odd = 2.0 * ells + 1.0

    if sine_only:
        def loss_fn(params):
            res = np.sin(odd * params[:, 0:1] / 2.0) ** 2 - y
            return (res * res).sum(axis=1)

        def loss_grad_fn(params):
            theta = params[:, 0:1]
            res = np.sin(odd * theta / 2.0) ** 2 - y
            dtheta = (2.0 * res * (odd / 2.0) * np.sin(odd * theta)).sum(axis=1)
            return (res * res).sum(axis=1), dtheta[:, None]

        clip_col = None
    else:
        def _terms(params):
            theta = params[:, 0:1]
            a = params[:, 1:2]
            f = params[:, 2:3]
            signal = np.sin(odd * theta / 2.0) ** 2
            decay = np.exp(-a * ells)
            residual = decay * (signal - f) + f - y
            return theta, f, signal, decay, residual

        def loss_fn(params):
            residual = _terms(params)[4]
            return (residual * residual).sum(axis=1)

        def loss_grad_fn(params):
            theta, f, signal, decay, residual = _terms(params)
            dtheta = (2.0 * residual * decay * (odd / 2.0) * np.sin(odd * theta)).sum(axis=1)
            da = (2.0 * residual * (-ells) * decay * (signal - f)).sum(axis=1)
            if free_f:
                df = (2.0 * residual * (1.0 - decay)).sum(axis=1)
            else:
                df = np.zeros_like(da)
            return (residual * residual).sum(axis=1), np.stack([dtheta, da, df], axis=1)

        clip_col = 2 if free_f else None

    params, losses = _descend(loss_fn, loss_grad_fn, starts, clip_col,
                              config.max_iters, config.grad_tol)
    if not np.isfinite(losses).any():
        raise FitDivergedError("no start produced a finite loss")
    losses = np.where(np.isfinite(losses), losses, np.inf)
    folded = np.array([_fold(t) for t in params[:, 0]])
    params = params.copy()
    params[:, 0] = folded
    losses = loss_fn(params)  # folding preserves the loss up to rounding
    best = np.lexsort((folded, losses))[0]
    theta = float(params[best, 0])
    if sine_only:
        a_val, f_val = 0.0, 0.0
    else:
        a_val = float(params[best, 1])
        f_val = float(min(max(params[best, 2], 0.0), 1.0))
    return FitResult(theta, a_val, f_val, math.sin(theta / 2.0) ** 2, float(losses[best]))


def fit_sine(trace: LowDepthTrace, config: FitConfig | None = None) -> FitResult:
    """Fit the undamped response sin^2((2l+1) theta/2) to the trace fractions."""
    config = config or FitConfig()
    ells = np.asarray(trace.schedule, dtype=float)
    starts = np.asarray(config.theta_starts, dtype=float)[:, None]
    return _fit(np.asarray(trace.fractions), ells, starts, free_f=False,
                sine_only=True, config=config)


def fit_noise_model(trace: LowDepthTrace, config: FitConfig | None = None,
                    fix_f: float | None = None) -> FitResult:
    """Fit (theta, a, f) of the damped response; ``fix_f`` pins the scramble level.

    ``f`` is clamped to [0, 1]; ``a`` is unconstrained (slightly negative
    rates do occur on real data) and predictions are not clamped.
    """
    config = config or FitConfig()
    if fix_f is not None and not 0.0 <= fix_f <= 1.0:
        raise ValidationError(f"fix_f = {fix_f!r} outside [0, 1]", code="out-of-range")
    ells = np.asarray(trace.schedule, dtype=float)
    thetas = np.asarray(config.theta_starts, dtype=float)
    rates = np.asarray(config.a_starts, dtype=float)
    fracs = (np.asarray(config.f_starts, dtype=float) if fix_f is None
             else np.asarray([fix_f]))
    grid = np.stack(np.meshgrid(thetas, rates, fracs, indexing="ij"), axis=-1)
    starts = grid.reshape(-1, 3)
    return _fit(np.asarray(trace.fractions), ells, starts, free_f=fix_f is None,
                sine_only=False, config=config)


# --- schedule viability bounds ---------------------------------------------------

def _signal_detectable(a: float, power: int, shots: int, f: float) -> bool:
    """Strict inequality: mean absolute deviation below the damped amplitude."""
    deviation = math.sqrt(2.0 / math.pi) * math.sqrt(f * (1.0 - f) / shots)
    return deviation < math.exp(-a * power)


def min_shots(a: float, power: int, f: float) -> int:
    """Smallest repetition count whose mean absolute deviation stays below the signal.

    Solves sqrt(2/pi) * sqrt(f(1-f)/N) < e^{-a*power} for integer N.
    """
    if not 0.0 < f < 1.0:
        raise ValidationError("bound needs f strictly inside (0, 1)", code="f-degenerate")
    if power < 0:
        raise ValidationError("power must be >= 0", code="invalid-power")
    n = max(math.ceil((2.0 / math.pi) * f * (1.0 - f) * math.exp(2.0 * a * power)), 1)
    while n > 1 and _signal_detectable(a, power, n - 1, f):
        n -= 1
    while not _signal_detectable(a, power, n, f):
        n += 1
    return n


def max_depth(a: float, shots: int, f: float) -> int:
    """Largest Grover power still above the noise floor for ``shots`` repetitions."""
    if not 0.0 < f < 1.0:
        raise ValidationError("bound needs f strictly inside (0, 1)", code="f-degenerate")
    if a <= 0.0:
        raise ValidationError("depth is unbounded for a <= 0", code="a-nonpositive")
    if shots < 1:
        raise ValidationError("shots must be >= 1", code="invalid-shots")
    depth = max(math.floor(math.log(math.pi * shots / (2.0 * f * (1.0 - f))) / (2.0 * a)), 0)
    while depth > 0 and not _signal_detectable(a, depth, shots, f):
        depth -= 1
    while _signal_detectable(a, depth + 1, shots, f):
        depth += 1
    return depth


# --- trace files -----------------------------------------------------------------

_TRACE_HEADER = ["l", "shots", "marked"]


def trace_to_text(trace: LowDepthTrace) -> str:
    """Serialize as delimited text with header ``l,shots,marked``."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_TRACE_HEADER)
    for power, shots, marked in zip(trace.schedule, trace.shots, trace.marked):
        writer.writerow([power, shots, int(marked) if marked == int(marked) else marked])
    return out.getvalue()


def trace_from_text(text: str) -> LowDepthTrace:
    """Parse a ``l,shots,marked`` file back into a trace."""
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if not rows or rows[0] != _TRACE_HEADER:
        raise ParseError("trace file must start with header 'l,shots,marked'")
    schedule, shots, marked = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise ParseError(f"trace line {lineno}: expected 3 fields, got {len(row)}")
        try:
            schedule.append(int(row[0]))
            shots.append(int(row[1]))
            marked.append(float(row[2]))
        except ValueError as exc:
            raise ParseError(f"trace line {lineno}: non-numeric field in {row!r}") from exc
    try:
        return LowDepthTrace(tuple(schedule), tuple(shots), tuple(marked))
    except ValidationError as exc:
        raise ParseError(f"trace file invalid: {exc}") from exc
