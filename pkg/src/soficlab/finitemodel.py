"""Derived finite models on a sofic map: pullback names, membership, energy,
and the derived partition function by exact enumeration, transfer matrices,
or thermodynamic integration.

The derived configuration space enforces the allowed-pair relation on every
non-self edge of the labeled sofic graph (plus, for structures without a safe
symbol, window admissibility around window-good vertices).  Wherever every
vertex is window-good this coincides with enforcing window admissibility
everywhere; on small exact quotients, where wrap-around collisions leave no
window-good vertices, the edge semantics keeps Z_m equal to the transfer
trace and is what the rest of the package assumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import enumeration, groups
from .config import exact_partition_cap
from .constraints import ConstraintStructure, Pattern, Potential, detect_safe_symbol
from .constraints import Verdict, is_globally_admissible
from .errors import (
    CapExceededError,
    NoConsistentColorError,
    NoSafeSymbolError,
)
from .sampling import GlauberEngine
from .soficmaps import SoficMap, good_vertices, require_builder
from .transfer import build_transfer


@dataclass
class DerivedSpace:
    sm: SoficMap
    structure: ConstraintStructure
    potential: Potential

    def __post_init__(self):
        if not (
            self.sm.n_generators
            == self.structure.n_generators
            == self.potential.J.shape[0]
        ):
            raise ValueError("generator counts disagree")
        if self.structure.alphabet != self.potential.alphabet:
            raise ValueError("alphabet sizes disagree")

    @property
    def n(self) -> int:
        return self.sm.n

    @property
    def spec(self):
        return self.sm.spec

    @cached_property
    def safe_symbol(self):
        return detect_safe_symbol(self.structure)

    @cached_property
    def mm_ball(self):
        return groups.ball(self.spec, 2)

    @cached_property
    def mm_good(self) -> np.ndarray:
        """Window-good vertices for the doubled range B_2."""
        return good_vertices(self.sm, self.mm_ball).good_vertices

    @cached_property
    def _window_arrays(self) -> np.ndarray:
        """(L, n) vertex images of the B_2 ball elements."""
        return np.stack([self.sm.sigma_array(g) for g in self.mm_ball.elements])

    @cached_property
    def _admissible_windows(self):
        """Globally admissible total patterns on B_2, for non-safe structures.

        Patterns whose global admissibility is unknown at the search pad are
        kept, so the filter only removes certified violations.
        """
        b = self.mm_ball
        graph = enumeration.SiteGraph.from_ball(b)
        configs, _ = enumeration.all_configs(graph, self.structure, None)
        keep = set()
        for values in configs:
            pat = Pattern(b.elements, values)
            if is_globally_admissible(self.structure, self.spec, pat, pad=2) != Verdict.NO:
                keep.add(values)
        return keep


def pullback(space: DerivedSpace, x: np.ndarray, v: int, r: int) -> Pattern:
    """The B_r pullback name of x at v: pattern g -> x(sigma^g(v))."""
    b = groups.ball(space.spec, r)
    values = tuple(int(x[space.sm.sigma_array(g)[v]]) for g in b.elements)
    return Pattern(b.elements, values)


def derived_energy(space: DerivedSpace, x: np.ndarray) -> float:
    """Sum over vertices of the potential read through the pullback window."""
    x = np.asarray(x)
    total = float(space.potential.h[x].sum())
    for s in range(space.sm.n_generators):
        total += float(space.potential.J[s][x, x[space.sm.perms[s]]].sum())
    return total


def _edge_violations(space: DerivedSpace, x: np.ndarray):
    """Boolean (S, n): edge v -> sigma^s(v) exists, is not a self-loop, and is violated."""
    out = np.zeros((space.sm.n_generators, space.n), dtype=bool)
    idx = np.arange(space.n)
    for s in range(space.sm.n_generators):
        dst = space.sm.perms[s]
        real = dst != idx
        out[s] = real & ~space.structure.allowed[s][x, x[dst]]
    return out

def is_in_Xn(space: DerivedSpace, x: np.ndarray) -> bool:
    x = np.asarray(x)
    if _edge_violations(space, x).any():
        return False
    if space.safe_symbol is None:
        W = space._window_arrays
        table = space._admissible_windows
        for v in space.mm_good:
            if tuple(int(x[W[i, v]]) for i in range(W.shape[0])) not in table:
                return False
    return True


def error_set(space: DerivedSpace, x: np.ndarray) -> np.ndarray:
    """Window-good vertices whose pulled-back B_2 window is not admissible."""
    x = np.asarray(x)
    good = space.mm_good
    if good.size == 0:
        return good
    W = space._window_arrays[:, good]  # (L, n_good)
    vals = x[W]
    ok = np.ones(good.size, dtype=bool)
    for (i, s, j) in space.mm_ball.edges:
        ok &= space.structure.allowed[s][vals[i], vals[j]]
    if space.safe_symbol is None:
        table = space._admissible_windows
        for col in np.flatnonzero(ok):
            if tuple(int(v) for v in vals[:, col]) not in table:
                ok[col] = False
    return good[~ok]


def extend_locally_consistent(
    space: DerivedSpace, partial: dict, certificate=None
) -> np.ndarray:
    """Greedy extension of a consistent partial configuration to all of V_n.

    Vertices ascend, candidate symbols ascend; with a safe symbol the greedy
    step can never get stuck, which is the certificate that the result lies
    in the derived space.  Without a safe symbol a TSSM certificate must be
    supplied, and a stuck step raises NoConsistentColorError.
    """
    if space.safe_symbol is None and (certificate is None or certificate.kind == "violated"):
        raise NoSafeSymbolError(
            "greedy extension needs a safe symbol or an explicit TSSM certificate"
        )
    x = np.full(space.n, -1, dtype=np.int8)
    for v, val in partial.items():
        x[int(v)] = val
    allowed = space.structure.allowed
    out = space.sm.perms
    inn = space.sm.perms_inv
    for v in range(space.n):
        if x[v] >= 0:
            continue
        placed = False
        for c in range(space.structure.alphabet):
            ok = True
            for s in range(space.sm.n_generators):
                o = out[s, v]
                if o != v and x[o] >= 0 and not allowed[s, c, x[o]]:
                    ok = False
                    break
                i = inn[s, v]
                if i != v and x[i] >= 0 and not allowed[s, x[i], c]:
                    ok = False
                    break
            if ok:
                x[v] = c
                placed = True
                break
        if not placed:
            raise NoConsistentColorError(
                f"no admissible symbol at vertex {v}; certificate wrong or input inconsistent"
            )
    if space.safe_symbol is None and not is_in_Xn(space, x):
        raise NoConsistentColorError(
            "greedy extension left an inadmissible window; certificate wrong or input inconsistent"
        )
    return x


def correct_errors(space: DerivedSpace, x: np.ndarray) -> np.ndarray:
    """Rewrite x inside the window-neighborhood of its error set to land in X^n.

    Agrees with x off sigma^{B_2}(error_set(x)); on maps with window-bad
    vertices the rewrite region additionally absorbs endpoints of violated
    edges that no good window sees, so the output is always a member of the
    derived space.
    """
    x = np.asarray(x, dtype=np.int8)
    errs = error_set(space, x)
    mask = np.zeros(space.n, dtype=bool)
    if errs.size:
        for g in space.mm_ball.elements:
            mask[space.sm.sigma_array(g)[errs]] = True
    viol = _edge_violations(space, x)
    for s in range(space.sm.n_generators):
        bad = np.flatnonzero(viol[s])
        # edges with one masked endpoint are repaired by the greedy refill;
        # only violations entirely outside the mask need absorbing
        uncovered = bad[~(mask[bad] | mask[space.sm.perms[s][bad]])]
        if uncovered.size:
            mask[uncovered] = True
            mask[space.sm.perms[s][uncovered]] = True
    partial = {int(v): int(x[v]) for v in np.flatnonzero(~mask)}
    return extend_locally_consistent(space, partial)


@dataclass
class PartitionResult:
    log_Z: float
    method: str
    stderr: float = 0.0
    diagnostics: dict = field(default_factory=dict)


def _iter_Xn(space: DerivedSpace, visit):
    graph = enumeration.SiteGraph.from_sofic(space.sm)
    if space.safe_symbol is None:
        W = space._window_arrays
        good = space.mm_good
        table = space._admissible_windows

        def filtered(values, lw):
            for v in good:
                if tuple(values[W[i, v]] for i in range(W.shape[0])) not in table:
                    return
            visit(values, lw)

        enumeration._dfs(graph, space.structure, space.potential, {}, None, filtered)
    else:
        enumeration._dfs(graph, space.structure, space.potential, {}, None, visit)


def partition_exact(space: DerivedSpace, cap: int | None = None) -> PartitionResult:
    """Exact log Z by constraint-pruned enumeration of the derived space."""
    cap = exact_partition_cap() if cap is None else cap
    if space.n > cap:
        raise CapExceededError(f"n={space.n} exceeds exact enumeration cap {cap}")
    acc = enumeration._Stream()
    count = [0]

    def visit(values, lw):
        acc.add(lw)
        count[0] += 1

    _iter_Xn(space, visit)
    return PartitionResult(acc.logsum(), "exact", 0.0, {"n_configs": count[0]})


def partition_transfer_cycle(space: DerivedSpace) -> PartitionResult:
    """log trace(T^m) for a rank-1 torus; exact."""
    require_builder(space.sm, "torus")
    if space.spec.rank != 1:
        raise ValueError("transfer route needs d = 1")
    tm = build_transfer(space.structure, space.potential)
    return PartitionResult(tm.log_trace_power(space.n), "transfer_cycle", 0.0, {})


def partition_cycle_decomposition(space: DerivedSpace) -> PartitionResult:
    """Exact log Z for any single-generator map: the labeled graph is a
    disjoint union of directed cycles, so Z factorizes into transfer traces.

    Length-1 cycles are self-loops, which carry energy but no constraint.
    """
    if space.sm.n_generators != 1:
        raise ValueError("cycle decomposition needs a single generator")
    perm = space.sm.perms[0]
    tm = build_transfer(space.structure, space.potential)
    seen = np.zeros(space.n, dtype=bool)
    log_z = 0.0
    lengths = []
    for v0 in range(space.n):
        if seen[v0]:
            continue
        length = 0
        v = v0
        while not seen[v]:
            seen[v] = True
            v = int(perm[v])
            length += 1
        lengths.append(length)
        if length == 1:
            log_z += float(
                np.log(np.exp(space.potential.h + np.diag(space.potential.J[0])).sum())
            )
        else:
            log_z += tm.log_trace_power(length)
    return PartitionResult(log_z, "cycle_decomposition", 0.0, {"cycle_lengths": lengths})


def partition_mcmc(
    space: DerivedSpace,
    seed: int,
    grid_points: int = 64,
    samples_per_point: int = 4000,
    burn_frac: float = 0.2,
    log_u_min: float = math.log(1e-6),
) -> PartitionResult:
    """Thermodynamic integration along an interpolation that empties the model.

    The interpolated weight multiplies the derived Gibbs weight by
    exp(t * N_ns(x)) with N_ns the number of non-safe symbols.  At t -> -inf
    only the all-safe configuration survives, so

        log Z = H*(all-safe) + integral_{-inf..0} E_t[N_ns] dt,

    with the integral estimated by heat-bath sampling on a grid geometric in
    e^t (uniform in t) and Simpson/trapezoid quadrature, and the truncated
    tail bounded by n * a * e^{t_min} * e^{2 |phi|}.
    """
    safe = space.safe_symbol
    if safe is None:
        raise NoSafeSymbolError("thermodynamic integration needs a safe symbol")
    rng = np.random.default_rng(np.random.SeedSequence([seed, space.n, 0xD1CE]))
    ts = np.linspace(log_u_min, 0.0, grid_points)
    nonsafe = np.array([0.0 if a == safe else 1.0 for a in range(space.structure.alphabet)])
    engine = GlauberEngine(space.sm, space.structure, space.potential)
    x = engine.initial_state(safe)
    burn = max(1, int(burn_frac * samples_per_point))
    means = np.empty(grid_points)
    ses = np.empty(grid_points)
    for i, t in enumerate(ts):
        engine.set_bias(t * nonsafe)
        engine.sweeps(x, burn, rng)
        counts = np.empty(samples_per_point)
        for k in range(samples_per_point):
            engine.sweeps(x, 1, rng)
            counts[k] = np.count_nonzero(x != safe)
        means[i] = counts.mean()
        n_blocks = max(4, min(32, samples_per_point // 8))
        blocks = counts[: samples_per_point - samples_per_point % n_blocks]
        bm = blocks.reshape(n_blocks, -1).mean(axis=1)
        ses[i] = bm.std(ddof=1) / math.sqrt(n_blocks)
    integral, quad_w = _simpson_irregular(ts, means)
    stat_var = float(np.sum((quad_w * ses) ** 2))
    tail = space.n * space.structure.alphabet * math.exp(log_u_min) * math.exp(
        2.0 * space.potential.norm()
    )
    x0 = engine.initial_state(safe)
    log_z = derived_energy(space, x0) + integral
    return PartitionResult(
        log_z,
        "mcmc",
        math.sqrt(stat_var) + tail,
        {
            "grid": ts.tolist(),
            "mean_nonsafe": means.tolist(),
            "stderr_nonsafe": ses.tolist(),
            "tail_bound": tail,
            "seed": seed,
        },
    )


def _simpson_irregular(ts: np.ndarray, ys: np.ndarray):
    """Composite Simpson on a uniform grid (trapezoid on the leftover panel).

    Returns (integral, per-point quadrature weights) so the caller can
    propagate per-point standard errors.
    """
    m = len(ts)
    w = np.zeros(m)
    h = ts[1] - ts[0]
    pairs = (m - 1) // 2
    for p in range(pairs):
        i = 2 * p
        w[i] += h / 3.0
        w[i + 1] += 4.0 * h / 3.0
        w[i + 2] += h / 3.0
    if (m - 1) % 2:
        w[-2] += h / 2.0
        w[-1] += h / 2.0
    return float(w @ ys), w


def sample_gibbs(space: DerivedSpace, sweeps: int, seed: int) -> np.ndarray:
    """A configuration after `sweeps` heat-bath sweeps from the all-safe start."""
    safe = space.safe_symbol
    if safe is None:
        raise NoSafeSymbolError("heat-bath sampling needs a safe symbol")
    rng = np.random.default_rng(np.random.SeedSequence([seed, space.n, 0x5A3]))
    engine = GlauberEngine(space.sm, space.structure, space.potential)
    x = engine.initial_state(safe)
    engine.sweeps(x, sweeps, rng)
    return x


def pressure_estimate(
    structure: ConstraintStructure,
    potential: Potential,
    builder: dict,
    sizes,
    method: str = "auto",
    seed: int = 0,
    mcmc_kwargs: dict | None = None,
):
    """Per-size normalized log partition values for a builder family."""
    from .modelbuild import build_sofic

    rows = []
    for size in sizes:
        sm = build_sofic({**builder, "size": int(size)}, seed=seed)
        space = DerivedSpace(sm, structure, potential)
        chosen = method
        if method == "auto":
            if builder.get("builder") == "torus" and builder.get("d", 0) == 1:
                chosen = "transfer"
            elif sm.n_generators == 1:
                chosen = "cycles"
            elif space.n <= exact_partition_cap():
                chosen = "exact"
            else:
                chosen = "mcmc"
        if chosen == "transfer":
            res = partition_transfer_cycle(space)
        elif chosen == "cycles":
            res = partition_cycle_decomposition(space)
        elif chosen == "exact":
            res = partition_exact(space)
        elif chosen == "mcmc":
            res = partition_mcmc(space, seed=seed, **(mcmc_kwargs or {}))
        else:
            raise ValueError(f"unknown method {chosen!r}")
        rows.append(
            {
                "n": space.n,
                "log_Z": res.log_Z,
                "pressure_estimate": res.log_Z / space.n,
                "stderr": res.stderr / space.n,
                "method": res.method,
                "seed": seed,
            }
        )
    return rows
