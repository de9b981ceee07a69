"""Heuristic and exact minimization: simulated annealing with multi-flip
coloring parallelism, parallel tempering, and exhaustive brute force.

All randomness is counter-based: every uniform is a pure function of
(master seed, role, restart/replica, sweep, variable), so results are
bit-identical no matter how work is distributed over workers.  Restarts
are vectorized as rows of numpy arrays; `jobs` spreads fixed-size restart
blocks across processes.
"""

from __future__ import annotations

import hashlib
import time
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import BOOLEAN, ISING, InputError, IsingProblem, PolynomialObjective, ising_to_qubo

FULL_REEVAL_FLIPS = 10_000
DRIFT_TOL = 1e-6


class ResourceRefusal(RuntimeError):
    """Raised when an exact method would exceed its enumeration budget."""


# ---------------------------------------------------------------------------
# counter-based randomness (splitmix64 mixing chain)
# ---------------------------------------------------------------------------

_M0 = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / (1 << 53)


def _mix(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def stable_seed(seed: int, role: str) -> int:
    """Deterministic sub-seed for a named role."""
    digest = hashlib.sha256(f"{seed}:{role}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def counter_uniforms(key: int, *counters) -> np.ndarray:
    """Uniforms in [0,1) indexed by broadcastable integer counters."""
    with np.errstate(over="ignore"):
        x = np.uint64(key & 0xFFFFFFFFFFFFFFFF) + _M0
        x = _mix(np.asarray(x, dtype=np.uint64))
        for c in counters:
            arr = (np.asarray(c, dtype=np.int64).astype(np.uint64) + np.uint64(1)) * _M0
            x = _mix(np.bitwise_xor(x, arr))
        return (x >> np.uint64(11)).astype(np.float64) * _INV53


# ---------------------------------------------------------------------------
# configs and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SaConfig:
    cooling_rate: float
    sweeps: int
    restarts: int
    seed: int
    t0: float | None = None  # None selects the automatic probe
    probe_flips: int | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.cooling_rate < 1.0):
            raise InputError("cooling_rate must lie strictly inside (0, 1)")
        if self.sweeps < 1 or self.restarts < 1:
            raise InputError("sweeps and restarts must be positive")
        if self.t0 is not None and self.t0 <= 0:
            raise InputError("fixed start temperature must be positive")


@dataclass(frozen=True)
class PtConfig:
    num_temps: int = 400
    t_min: float = 1.0
    t_max: float = 1e4
    sweeps: int = 1000
    measure_sweeps: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_temps < 1:
            raise InputError("need at least one temperature")
        if self.num_temps > 1 and not (0 < self.t_min < self.t_max):
            raise InputError("need 0 < t_min < t_max")
        if not (0 < self.measure_sweeps <= self.sweeps):
            raise InputError("need 0 < measure_sweeps <= sweeps")


def temperature_ladder(cfg: PtConfig) -> np.ndarray:
    """Geometric ladder T_i = t_min * r^i with r = (t_max/t_min)^(1/(M-1))."""
    if cfg.num_temps == 1:
        return np.array([cfg.t_min])
    r = (cfg.t_max / cfg.t_min) ** (1.0 / (cfg.num_temps - 1))
    return cfg.t_min * r ** np.arange(cfg.num_temps)


@dataclass
class SampleSet:
    """Solver output: one record per restart (SA) or measured sweep (PT)."""

    num_vars: int
    space: str
    bits: np.ndarray  # (records, num_vars) uint8
    energies: np.ndarray
    replicas: np.ndarray
    sweeps: np.ndarray
    run_seconds: float
    tau_seconds: float
    meta: dict = field(default_factory=dict)

    @property
    def best_energy(self) -> float:
        return float(self.energies.min()) if len(self.energies) else float("inf")

    @property
    def best_bits(self) -> np.ndarray:
        return self.bits[int(np.argmin(self.energies))]

    def ground_hits(self, reference: float, tol: float = 1e-6) -> int:
        return int(np.sum(self.energies <= reference + tol))

    def to_csv(self, path, manifest_name: str = "-") -> None:
        with open(path, "w") as fh:
            fh.write(f"# manifest={manifest_name}\n")
            fh.write("assignment,energy,replica,sweep\n")
            for row, e, rep, sw in zip(self.bits, self.energies, self.replicas, self.sweeps):
                bitstring = "".join("1" if b else "0" for b in row)
                fh.write(f"{bitstring},{float(e)!r},{int(rep)},{int(sw)}\n")

    def summary(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "space": self.space,
            "records": len(self.energies),
            "best_energy": self.best_energy,
            "run_seconds": self.run_seconds,
            "tau_seconds": self.tau_seconds,
            **self.meta,
        }


def sample_set_from_csv(path) -> SampleSet:
    bits, energies, replicas, sweeps = [], [], [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("assignment"):
                continue
            bs, e, rep, sw = line.split(",")
            bits.append([int(ch) for ch in bs])
            energies.append(float(e))
            replicas.append(int(rep))
            sweeps.append(int(sw))
    if not bits:
        raise InputError(f"no samples in {path}")
    arr = np.array(bits, dtype=np.uint8)
    return SampleSet(
        num_vars=arr.shape[1],
        space=BOOLEAN,
        bits=arr,
        energies=np.array(energies),
        replicas=np.array(replicas),
        sweeps=np.array(sweeps),
        run_seconds=0.0,
        tau_seconds=0.0,
    )


# ---------------------------------------------------------------------------
# compiled quadratic form + graph coloring
# ---------------------------------------------------------------------------

@dataclass
class ColorClasses:
    """Partition of variables into internally coupling-free classes."""

    classes: list

    def verify(self, obj: PolynomialObjective) -> bool:
        member = {}
        for ci, cls in enumerate(self.classes):
            for v in cls:
                member[v] = ci
        for key in obj.terms:
            for a_i in range(len(key)):
                for b_i in range(a_i + 1, len(key)):
                    if member[key[a_i]] == member[key[b_i]]:
                        return False
        return True


def color_graph(obj: PolynomialObjective) -> ColorClasses:
    """Greedy independence partition of the objective's conflict graph.

    Deterministic: highest-degree-first ordering with lowest-feasible-color
    assignment.  Variables sharing any term land in different classes.
    """
    n = obj.num_vars
    adj: list[set] = [set() for _ in range(n)]
    for key in obj.terms:
        for a_i in range(len(key)):
            for b_i in range(a_i + 1, len(key)):
                adj[key[a_i]].add(key[b_i])
                adj[key[b_i]].add(key[a_i])
    order = sorted(range(n), key=lambda v: (-len(adj[v]), v))
    color = [-1] * n
    for v in order:
        used = {color[u] for u in adj[v] if color[u] >= 0}
        c = 0
        while c in used:
            c += 1
        color[v] = c
    num_colors = max(color, default=-1) + 1
    classes = [
        np.array([v for v in range(n) if color[v] == c], dtype=np.int64)
        for c in range(num_colors)
    ]
    return ColorClasses(classes=classes)


class _Compiled:
    """Dense symmetric form of a quadratic problem in Boolean space."""

    def __init__(self, problem):
        if isinstance(problem, IsingProblem):
            self.space = ISING
            qubo = ising_to_qubo(problem)
        elif isinstance(problem, PolynomialObjective):
            if problem.degree > 2:
                raise InputError(
                    f"solver requires degree <= 2, got degree {problem.degree}; quadratize first"
                )
            self.space = BOOLEAN
            qubo = problem
        else:
            raise InputError(f"cannot solve a {type(problem).__name__}")
        n = qubo.num_vars
        self.n = n
        self.offset = qubo.offset
        self.c = np.zeros(n)
        self.Q = np.zeros((n, n))
        for key, coeff in qubo.terms.items():
            if len(key) == 1:
                self.c[key[0]] += coeff
            else:
                i, j = key
                self.Q[i, j] += coeff
                self.Q[j, i] += coeff
        self.colors = color_graph(qubo).classes
        self.qubo = qubo

    def energies(self, bits: np.ndarray) -> np.ndarray:
        b = bits.astype(np.float64)
        return self.offset + b @ self.c + 0.5 * np.einsum("ri,ij,rj->r", b, self.Q, b)

    def local_fields(self, bits: np.ndarray) -> np.ndarray:
        return self.c + bits.astype(np.float64) @ self.Q


# ---------------------------------------------------------------------------
# simulated annealing
# ---------------------------------------------------------------------------

def _atiqullah_t0(comp: _Compiled, rows: np.ndarray, probe_n: int, key_state: int, key_var: int):
    """Per-restart start temperature from greedy probe flips on random states."""
    n = comp.n
    bits = (counter_uniforms(key_state, rows[:, None], np.arange(n)[None, :]) < 0.5).astype(np.int8)
    fields = comp.local_fields(bits)
    samples = np.empty((len(rows), probe_n))
    accepted = np.zeros(len(rows))
    for step in range(probe_n):
        u = counter_uniforms(key_var, rows, np.full(len(rows), step))
        vars_ = np.minimum((u * n).astype(np.int64), n - 1)
        picked = bits[np.arange(len(rows)), vars_].astype(np.float64)
        delta_e = (1.0 - 2.0 * picked) * fields[np.arange(len(rows)), vars_]
        samples[:, step] = delta_e
        take = delta_e <= 0.0
        accepted += take
        flip = np.where(take, 1.0 - 2.0 * picked, 0.0)
        bits[np.arange(len(rows)), vars_] = np.where(take, 1 - bits[np.arange(len(rows)), vars_], bits[np.arange(len(rows)), vars_])
        fields += flip[:, None] * comp.Q[vars_, :]
    mean = samples.mean(axis=1)
    std = samples.std(axis=1, ddof=1) if probe_n > 1 else np.zeros(len(rows))
    chi = accepted / probe_n
    t0 = np.ones(len(rows))
    normal = (chi > 0.0) & (chi < 1.0) & (mean + 3 * std > 0.0)
    t0[normal] = (mean[normal] + 3 * std[normal]) / np.log(1.0 / chi[normal])
    all_accepted = chi >= 1.0
    t0[all_accepted] = np.maximum(1e3 * std[all_accepted], 1.0)
    return t0


def _sa_rows(comp: _Compiled, cfg: SaConfig, rows: np.ndarray):
    n = comp.n
    key_init = stable_seed(cfg.seed, "sa-init")
    key_probe_var = stable_seed(cfg.seed, "sa-probe")
    key_prop = stable_seed(cfg.seed, "sa-accept")

    if n == 0:
        zero = np.zeros((len(rows), 0), dtype=np.uint8)
        return zero, np.full(len(rows), comp.offset), np.zeros(len(rows), dtype=np.int64)

    if cfg.t0 is not None:
        temps = np.full(len(rows), float(cfg.t0))
    else:
        probe_n = cfg.probe_flips or max(100, n)
        temps = _atiqullah_t0(comp, rows, probe_n, stable_seed(cfg.seed, "sa-probe-state"), key_probe_var)

    # einsum (not BLAS @) everywhere state flows: its fixed C-loop reduction
    # order makes every row's arithmetic independent of the block shape, so
    # results cannot depend on restart chunking or worker count
    bits = (counter_uniforms(key_init, rows[:, None], np.arange(n)[None, :]) < 0.5).astype(np.int8)
    fields = comp.c + np.einsum("rn,nm->rm", bits.astype(np.float64), comp.Q)
    energies = comp.energies(bits)
    best_e = energies.copy()
    best_bits = bits.copy()
    best_sweep = np.zeros(len(rows), dtype=np.int64)

    flips_since_reeval = 0
    zeta = cfg.cooling_rate
    for sweep in range(cfg.sweeps):
        for cls in comp.colors:
            sub = bits[:, cls].astype(np.float64)
            delta_e = (1.0 - 2.0 * sub) * fields[:, cls]
            u = counter_uniforms(key_prop, rows[:, None], np.full((len(rows), len(cls)), sweep), cls[None, :])
            with np.errstate(over="ignore"):
                prob = np.where(delta_e <= 0.0, 1.0, np.exp(-np.maximum(delta_e, 0.0) / temps[:, None]))
            accepted = u < prob
            flips = np.where(accepted, 1.0 - 2.0 * sub, 0.0)
            bits[:, cls] = np.where(accepted, 1 - bits[:, cls], bits[:, cls])
            fields += np.einsum("rc,cn->rn", flips, comp.Q[cls, :])
            energies += np.sum(np.where(accepted, delta_e, 0.0), axis=1)
            # cooling is per variable proposal; a whole class advances |C| steps
            temps = temps * zeta ** len(cls)
            flips_since_reeval += len(cls)
        if flips_since_reeval >= FULL_REEVAL_FLIPS:
            exact = comp.energies(bits)
            drift = np.abs(exact - energies).max()
            if drift > DRIFT_TOL:
                raise AssertionError(f"incremental energy drift {drift} exceeds {DRIFT_TOL}")
            energies = exact
            flips_since_reeval = 0
        improved = energies < best_e
        if improved.any():
            best_e = np.where(improved, energies, best_e)
            best_bits[improved] = bits[improved]
            best_sweep[improved] = sweep
    # report exact energies, free of incremental accumulation error
    return best_bits.astype(np.uint8), comp.energies(best_bits), best_sweep


SA_BLOCK = 64


def _sa_block_task(payload):
    comp, cfg, rows = payload
    return _sa_rows(comp, cfg, rows)


def simulated_annealing(problem, cfg: SaConfig, jobs: int = 1) -> SampleSet:
    """Best-seen assignment per restart; restarts run as vectorized rows.

    Proposals sweep the color classes in a fixed order, proposing every
    variable of the active class simultaneously at the class-entry
    temperature.  Restarts are processed in fixed-size blocks whose
    randomness is keyed by absolute restart index, so results are
    bit-identical however the blocks are distributed over workers; `jobs`
    spreads blocks across processes.
    """
    comp = _Compiled(problem)
    start = time.perf_counter()
    all_rows = np.arange(cfg.restarts, dtype=np.int64)
    chunks = [all_rows[lo : lo + SA_BLOCK] for lo in range(0, cfg.restarts, SA_BLOCK)]
    workers = min(jobs, len(chunks), os.cpu_count() or 1)
    if workers <= 1:
        parts = [_sa_rows(comp, cfg, rows) for rows in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sa_block_task, [(comp, cfg, rows) for rows in chunks]))
    bits = np.concatenate([p[0] for p in parts])
    energies = np.concatenate([p[1] for p in parts])
    sweeps = np.concatenate([p[2] for p in parts])
    wall = time.perf_counter() - start
    return SampleSet(
        num_vars=comp.n,
        space=comp.space,
        bits=bits,
        energies=energies,
        replicas=all_rows,
        sweeps=sweeps,
        run_seconds=wall,
        tau_seconds=wall / cfg.restarts,
        meta={"solver": "sa", "restarts": cfg.restarts, "seed": cfg.seed,
              "cooling_rate": cfg.cooling_rate, "sa_sweeps": cfg.sweeps},
    )


# ---------------------------------------------------------------------------
# parallel tempering
# ---------------------------------------------------------------------------

@dataclass
class PtResult:
    sample_set: SampleSet
    ladder: np.ndarray
    energy_trajectory: np.ndarray  # (sweeps, num_temps) float32, post-swap
    measure_states: np.ndarray  # (measure_sweeps, n) uint8, lowest-T slot
    problem_fingerprint: str


def _problem_fingerprint(comp: _Compiled) -> str:
    h = hashlib.sha256()
    h.update(np.int64(comp.n).tobytes())
    h.update(np.round(comp.c, 12).tobytes())
    h.update(np.round(comp.Q, 12).tobytes())
    return h.hexdigest()[:16]


def parallel_tempering(problem, cfg: PtConfig, jobs: int = 1) -> PtResult:
    """Replica-exchange Monte Carlo on a fixed geometric temperature ladder.

    Every sweep performs coloring-parallel Metropolis in all replicas, then
    attempts swaps on alternating even/odd adjacent ladder pairs.  Slots are
    pinned to temperatures; a swap exchanges configurations.
    """
    comp = _Compiled(problem)
    ladder = temperature_ladder(cfg)
    m = cfg.num_temps
    n = comp.n
    key_init = stable_seed(cfg.seed, "pt-init")
    key_prop = stable_seed(cfg.seed, "pt-accept")
    key_swap = stable_seed(cfg.seed, "pt-swap")
    start = time.perf_counter()
    rows = np.arange(m, dtype=np.int64)

    if n == 0:
        bits = np.zeros((cfg.measure_sweeps, 0), dtype=np.uint8)
        energies = np.full(cfg.measure_sweeps, comp.offset)
        wall = time.perf_counter() - start
        ss = SampleSet(num_vars=0, space=comp.space, bits=bits, energies=energies,
                       replicas=np.zeros(cfg.measure_sweeps, dtype=np.int64),
                       sweeps=np.arange(cfg.sweeps - cfg.measure_sweeps, cfg.sweeps),
                       run_seconds=wall, tau_seconds=wall,
                       meta={"solver": "pt", "seed": cfg.seed})
        return PtResult(ss, ladder, np.zeros((cfg.sweeps, m), dtype=np.float32),
                        bits, _problem_fingerprint(comp))

    bits = (counter_uniforms(key_init, rows[:, None], np.arange(n)[None, :]) < 0.5).astype(np.int8)
    fields = comp.local_fields(bits)
    energies = comp.energies(bits)
    best_e = np.inf
    best_bits = bits[0].copy()
    trajectory = np.zeros((cfg.sweeps, m), dtype=np.float32)
    measure_from = cfg.sweeps - cfg.measure_sweeps
    measure_states = np.zeros((cfg.measure_sweeps, n), dtype=np.uint8)
    measure_energies = np.zeros(cfg.measure_sweeps)
    flips_since_reeval = 0

    for sweep in range(cfg.sweeps):
        for cls in comp.colors:
            sub = bits[:, cls].astype(np.float64)
            delta_e = (1.0 - 2.0 * sub) * fields[:, cls]
            u = counter_uniforms(key_prop, rows[:, None], np.full((m, len(cls)), sweep), cls[None, :])
            with np.errstate(over="ignore"):
                prob = np.where(delta_e <= 0.0, 1.0, np.exp(-np.maximum(delta_e, 0.0) / ladder[:, None]))
            accepted = u < prob
            flips = np.where(accepted, 1.0 - 2.0 * sub, 0.0)
            bits[:, cls] = np.where(accepted, 1 - bits[:, cls], bits[:, cls])
            fields += flips @ comp.Q[cls, :]
            energies += np.sum(np.where(accepted, delta_e, 0.0), axis=1)
            flips_since_reeval += len(cls)
        if flips_since_reeval >= FULL_REEVAL_FLIPS:
            exact = comp.energies(bits)
            drift = np.abs(exact - energies).max()
            if drift > DRIFT_TOL:
                raise AssertionError(f"incremental energy drift {drift} exceeds {DRIFT_TOL}")
            energies = exact
            flips_since_reeval = 0

        if m > 1:
            lows = np.arange(sweep % 2, m - 1, 2)
            highs = lows + 1
            exponent = (energies[lows] - energies[highs]) * (1.0 / ladder[lows] - 1.0 / ladder[highs])
            with np.errstate(over="ignore"):
                p_swap = np.where(exponent >= 0.0, 1.0, np.exp(exponent))
            u = counter_uniforms(key_swap, np.full(len(lows), sweep), lows)
            do = u < p_swap
            swap_lo, swap_hi = lows[do], highs[do]
            if len(swap_lo):
                bits[swap_lo], bits[swap_hi] = bits[swap_hi].copy(), bits[swap_lo].copy()
                fields[swap_lo], fields[swap_hi] = fields[swap_hi].copy(), fields[swap_lo].copy()
                energies[swap_lo], energies[swap_hi] = energies[swap_hi].copy(), energies[swap_lo].copy()

        trajectory[sweep] = energies
        sweep_best = int(np.argmin(energies))
        if energies[sweep_best] < best_e:
            best_e = float(energies[sweep_best])
            best_bits = bits[sweep_best].copy()
        if sweep >= measure_from:
            measure_states[sweep - measure_from] = bits[0]
            measure_energies[sweep - measure_from] = energies[0]

    wall = time.perf_counter() - start
    measure_energies = comp.energies(measure_states)
    best_e = float(comp.energies(best_bits[None, :])[0])
    ss = SampleSet(
        num_vars=n,
        space=comp.space,
        bits=np.vstack([measure_states, best_bits[None, :]]).astype(np.uint8),
        energies=np.concatenate([measure_energies, [best_e]]),
        replicas=np.concatenate([np.zeros(cfg.measure_sweeps, dtype=np.int64), [-1]]),
        sweeps=np.concatenate([np.arange(measure_from, cfg.sweeps), [cfg.sweeps]]),
        run_seconds=wall,
        tau_seconds=wall,
        meta={"solver": "pt", "seed": cfg.seed, "num_temps": m,
              "t_min": cfg.t_min, "t_max": cfg.t_max, "pt_sweeps": cfg.sweeps,
              "measure_sweeps": cfg.measure_sweeps},
    )
    return PtResult(ss, ladder, trajectory, measure_states, _problem_fingerprint(comp))


# ---------------------------------------------------------------------------
# brute force
# ---------------------------------------------------------------------------

def brute_force(obj, free_var_limit: int = 30, tie_tol: float = 1e-9, chunk: int = 1 << 18):
    """Exhaustive minimum and the complete set of degenerate minimizers.

    Ties are collected with an absolute tolerance: the same real coefficient
    sums arrive in different float association orders across assignments.
    """
    if isinstance(obj, IsingProblem):
        boolean = ising_to_qubo(obj)
    else:
        boolean = obj
    n = boolean.num_vars
    if n > free_var_limit:
        raise ResourceRefusal(
            f"{n} free variables exceed the brute-force limit of {free_var_limit}"
        )
    if n == 0:
        return boolean.offset, [np.zeros(0, dtype=np.uint8)]
    best = np.inf
    keep_codes: list[int] = []
    keep_energies: list[float] = []
    shifts = np.arange(n, dtype=np.uint64)
    for lo in range(0, 1 << n, chunk):
        hi = min(lo + chunk, 1 << n)
        codes = np.arange(lo, hi, dtype=np.uint64)
        bits = ((codes[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.float64)
        energies = boolean.evaluate_batch(bits)
        chunk_min = float(energies.min())
        if chunk_min < best - tie_tol:
            best = chunk_min
            near = np.flatnonzero(energies <= best + tie_tol)
            keep_codes = [int(codes[i]) for i in near]
            keep_energies = [float(energies[i]) for i in near]
        else:
            best = min(best, chunk_min)
            near = np.flatnonzero(energies <= best + tie_tol)
            keep_codes.extend(int(codes[i]) for i in near)
            keep_energies.extend(float(energies[i]) for i in near)
    final = [
        c for c, e in zip(keep_codes, keep_energies) if e <= best + tie_tol
    ]
    assignments = [
        ((np.uint64(c) >> shifts) & np.uint64(1)).astype(np.uint8) for c in sorted(final)
    ]
    return best, assignments
