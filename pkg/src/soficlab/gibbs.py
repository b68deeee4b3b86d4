"""Specifications, derived Gibbs measures, entropies, and mixing diagnostics.

Exact tables are built by enumeration; finite-window conditional kernels are
true conditionals of the Boltzmann weights (interface edge terms counted in
both directions), which is what the exact-table cross checks require.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import enumeration, groups
from .config import exact_table_cap
from .constraints import ConstraintStructure, Pattern, Potential, core_symbols
from .constraints import detect_safe_symbol
from .enumeration import SiteGraph
from .errors import CapExceededError, EmptyFiberError, NoSafeSymbolError
from .finitemodel import DerivedSpace, derived_energy, _iter_Xn
from .groups import GroupSpec
from .sampling import GlauberEngine
from .transfer import TransferMatrix, build_transfer


@dataclass
class BallDistribution:
    """Distribution over patterns on the ball B_r, keyed by value tuples in ball order."""

    spec: GroupSpec
    radius: int
    table: dict

    def check_normalized(self, tol: float = 1e-12):
        total = sum(self.table.values())
        if abs(total - 1.0) > tol:
            raise ValueError(f"distribution sums to {total}")

    def tv(self, other: "BallDistribution") -> float:
        keys = set(self.table) | set(other.table)
        return 0.5 * sum(abs(self.table.get(k, 0.0) - other.table.get(k, 0.0)) for k in keys)


def tv_tables(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def specification_ball(
    structure: ConstraintStructure,
    potential: Potential,
    spec: GroupSpec,
    r: int,
    boundary: Pattern,
) -> BallDistribution:
    """Exact conditional distribution on A^{B_r} given a boundary on the shell.

    The boundary pattern must cover the B_1-boundary of B_r (word length
    exactly r+1) and be admissible with some interior filling.
    """
    b = groups.ball(spec, r + 1)
    shell = set(groups.boundary_shell(spec, r))
    missing = shell - set(boundary.sites)
    if missing:
        raise ValueError(f"boundary must cover the whole shell; missing {sorted(missing)[:3]}")
    graph = SiteGraph.from_ball(b)
    pins = {b.index[g]: v for g, v in zip(boundary.sites, boundary.values) if g in shell}
    interior = [i for i, g in enumerate(b.elements) if g not in shell]
    dist = enumeration.joint_distribution(graph, structure, potential, interior, pins=pins)
    if not dist:
        raise EmptyFiberError("no interior completion of the given boundary")
    return BallDistribution(spec, r, dist)


@dataclass
class ExactGibbs:
    space: DerivedSpace
    configs: np.ndarray  # (N, n) int8
    log_weights: np.ndarray
    log_Z: float
    probs: np.ndarray

    def index_of(self, x) -> int:
        hit = np.flatnonzero((self.configs == np.asarray(x, dtype=np.int8)).all(axis=1))
        if hit.size != 1:
            raise KeyError("configuration not in the derived space")
        return int(hit[0])


def derived_gibbs_exact(space: DerivedSpace, cap: int | None = None) -> ExactGibbs:
    cap = exact_table_cap() if cap is None else cap
    if space.n > cap:
        raise CapExceededError(f"n={space.n} exceeds exact table cap {cap}")
    configs, logws = [], []

    def visit(values, lw):
        configs.append(tuple(values))
        logws.append(lw)

    _iter_Xn(space, visit)
    arr = np.array(configs, dtype=np.int8)
    logws = np.array(logws)
    m = logws.max()
    raw = np.exp(logws - m)
    z = raw.sum()
    return ExactGibbs(space, arr, logws, m + math.log(z), raw / z)


def shannon_entropy_exact(space: DerivedSpace, table: ExactGibbs | None = None) -> float:
    t = derived_gibbs_exact(space) if table is None else table
    p = t.probs[t.probs > 0]
    return float(-(p * np.log(p)).sum())


def mean_energy_exact(table: ExactGibbs) -> float:
    return float(
        sum(p * derived_energy(table.space, x) for p, x in zip(table.probs, table.configs))
    )


def sample_derived_gibbs(
    space: DerivedSpace, sweeps: int, seed: int, n_samples: int = 1, thin: int = 1, burn: int | None = None
) -> np.ndarray:
    """Heat-bath samples of the derived Gibbs measure, shape (n_samples, n).

    Runs `sweeps` burn-in sweeps from the all-safe configuration (default
    burn-in is the full `sweeps` budget when sampling once), then `thin`
    sweeps between retained samples.
    """
    if space.safe_symbol is None:
        raise NoSafeSymbolError("heat-bath sampling needs a safe symbol")
    rng = np.random.default_rng(np.random.SeedSequence([seed, space.n, 0x6B5]))
    engine = GlauberEngine(space.sm, space.structure, space.potential)
    x = engine.initial_state(space.safe_symbol)
    engine.sweeps(x, sweeps if burn is None else burn, rng)
    out = np.empty((n_samples, space.n), dtype=np.int8)
    out[0] = x
    for i in range(1, n_samples):
        engine.sweeps(x, thin, rng)
        out[i] = x
    return out


def empirical_distribution(x: np.ndarray, sm, r: int) -> BallDistribution:
    """Average over vertices of point masses at the B_r pullback windows."""
    b = groups.ball(sm.spec, r)
    W = np.stack([sm.sigma_array(g) for g in b.elements])  # (L, n)
    vals = np.asarray(x)[W]  # (L, n)
    table: dict[tuple, float] = {}
    inc = 1.0 / sm.n
    for v in range(sm.n):
        key = tuple(int(a) for a in vals[:, v])
        table[key] = table.get(key, 0.0) + inc
    return BallDistribution(sm.spec, r, table)


def pushforward_tables(space: DerivedSpace, r: int, probe) -> list[dict]:
    """Per-vertex window distributions (Pi_v^{sigma,r})_* mu_n.

    probe = ("exact",) uses the full table; probe = ("sampled", n_samples,
    thin, burn, seed) estimates from heat-bath samples.
    """
    b = groups.ball(space.spec, r)
    W = np.stack([space.sm.sigma_array(g) for g in b.elements])
    L = W.shape[0]
    a = space.structure.alphabet
    codes = a ** np.arange(L)
    n_codes = a**L
    if n_codes > 10**7:
        raise CapExceededError("window too large to tabulate; reduce r")
    if probe[0] == "exact":
        table = derived_gibbs_exact(space)
        weights = table.probs
        samples = table.configs
    elif probe[0] == "sampled":
        _, n_samples, thin, burn, seed = probe
        samples = sample_derived_gibbs(
            space, sweeps=burn, seed=seed, n_samples=n_samples, thin=thin, burn=burn
        )
        weights = np.full(len(samples), 1.0 / len(samples))
    else:
        raise ValueError(f"unknown probe {probe[0]!r}")
    out = []
    for v in range(space.n):
        window_codes = samples[:, W[:, v]] @ codes
        mass = np.bincount(window_codes, weights=weights, minlength=n_codes)
        nz = np.flatnonzero(mass)
        out.append(
            {tuple(int(c // codes[i] % a) for i in range(L)): float(mass[c]) for c in nz}
        )
    return out


def local_weakstar_gap(
    space: DerivedSpace, reference: BallDistribution, r: int, eps: float, probe
) -> float:
    """Fraction of vertices whose window pushforward is farther than eps in TV."""
    ref = reference.table
    tables = pushforward_tables(space, r, probe)
    bad = sum(1 for t in tables if tv_tables(t, ref) > eps)
    return bad / space.n


def ssm_profile(
    structure: ConstraintStructure,
    potential: Potential,
    spec: GroupSpec,
    r_max: int,
    method: str = "auto",
    max_boundary_patterns: int = 8192,
) -> np.ndarray:
    """Empirical strong-spatial-mixing profile beta(r), r = 1..r_max.

    beta(r) is the largest change of the center conditional when the boundary
    condition on the shell at distance r+1 is varied over admissible values;
    it lower-bounds the true decay function on the tested family.  The
    enumeration route is budgeted: shells whose pattern count exceeds
    max_boundary_patterns raise BudgetExceededError.
    """
    from .errors import BudgetExceededError

    if method == "auto":
        method = "transfer" if spec.rank == 1 else "enumeration"
    core = core_symbols(structure)
    out = np.zeros(r_max + 1)
    if method == "transfer":
        tm = build_transfer(structure, potential)
        for r in range(r_max + 1):
            lo, hi = _center_envelope_transfer(tm, core, r)
            out[r] = float(np.max(hi - lo))
        return out[1:]
    if method != "enumeration":
        raise ValueError(f"unknown method {method!r}")
    for r in range(1, r_max + 1):
        shell = groups.boundary_shell(spec, r)
        if len(core) ** len(shell) > max_boundary_patterns:
            raise BudgetExceededError(
                f"{len(core)}^{len(shell)} boundary patterns at r={r}; lower r_max"
            )
        out[r] = _beta_enumeration(structure, potential, spec, r)
    return out[1:]


def _center_envelope_transfer(tm: TransferMatrix, core, r: int):
    a = tm.alphabet
    lo = np.full(a, np.inf)
    hi = np.full(a, -np.inf)
    for bl in core:
        for br in core:
            p = tm.conditional_center({-(r + 1): bl, (r + 1): br})
            lo = np.minimum(lo, p)
            hi = np.maximum(hi, p)
    return lo, hi


def _beta_enumeration(structure, potential, spec, r) -> float:
    from itertools import product

    b = groups.ball(spec, r + 1)
    shell = groups.boundary_shell(spec, r)
    shell_idx = [b.index[g] for g in shell]
    center = b.index[groups.identity(spec)]
    graph = SiteGraph.from_ball(b)
    core = core_symbols(structure)
    lo = np.full(structure.alphabet, np.inf)
    hi = np.full(structure.alphabet, -np.inf)
    found = False
    for values in product(core, repeat=len(shell_idx)):
        pins = dict(zip(shell_idx, values))
        probs = enumeration.site_marginal(graph, structure, potential, center, pins=pins)
        if np.isnan(probs).any():
            continue
        found = True
        lo = np.minimum(lo, probs)
        hi = np.maximum(hi, probs)
    if not found:
        raise EmptyFiberError("no admissible boundary at this radius")
    return float(np.max(hi - lo))


@dataclass
class UniformBound:
    c_hat: float
    log_c_formula: float
    witness: dict = field(default_factory=dict)

    @property
    def satisfies_formula(self) -> bool:
        return math.log(self.c_hat) >= self.log_c_formula if self.c_hat > 0 else False


def uniform_bound_c(
    structure: ConstraintStructure,
    potential: Potential,
    spec: GroupSpec,
    r: int,
    max_subsets: int = 4096,
) -> UniformBound:
    """Empirical minimum single-site conditional probability over conditionings
    inside B_r, against the closed-form positive lower bound
    |A|^(-|M|^4) e^(-2|phi||M|^4) |A|^(-|M|^6) with |M| = |B_1|.

    Conditionals come from the transfer matrix on rank-1 groups, the SAW
    unfolding of a padded ball for hardcore models, and safe-boundary ball
    enumeration otherwise (budgeted by ball size).
    """
    from itertools import combinations, product

    to_pins = lambda subset, values: dict(zip(subset, values))  # noqa: E731
    if spec.rank == 1:
        tm = build_transfer(structure, potential)
        query = lambda pins: tm.conditional_center(pins)  # noqa: E731
        b = groups.ball(spec, r)
        sites = [g[0] for g in b.elements if g != groups.identity(spec)]
    else:
        from .errors import BudgetExceededError
        from .marginals import SawOracle, is_hardcore

        n_inner = len(groups.ball(spec, r).elements)
        sites = list(range(1, n_inner))  # ball-order indices, 0 is the center
        if is_hardcore(structure, potential) and spec.kind == "free":
            # ball graphs of free groups are trees, where the SAW route is
            # linear; on lattice balls the walk tree explodes, so those use
            # the enumeration branch below
            oracle = SawOracle(structure, potential, spec, r + 3)
            L = len(oracle.ball.elements)

            def query(pins):
                values = np.zeros(L, dtype=np.int64)
                mask = np.zeros(L, dtype=bool)
                for i, v in pins.items():
                    values[i] = v
                    mask[i] = True
                out = np.empty(structure.alphabet)
                for a in range(structure.alphabet):
                    values[0] = a
                    out[a] = oracle.conditional(values, mask)
                return out

        else:
            safe = detect_safe_symbol(structure)
            if safe is None:
                raise NoSafeSymbolError("generic-c estimation uses a safe outer boundary")
            b = groups.ball(spec, r + 3)
            if len(b.elements) > 45:
                raise BudgetExceededError("ball too large for enumeration-backed c estimate")
            graph = SiteGraph.from_ball(b)
            shell_pins = {b.index[g]: safe for g in groups.boundary_shell(spec, r + 2)}

            def query(pins):
                return enumeration.site_marginal(
                    graph, structure, potential, 0, pins={**shell_pins, **pins}
                )

    core = core_symbols(structure)
    c_hat = math.inf
    witness = {}
    n_checked = 0
    for size in range(0, len(sites) + 1):
        for subset in combinations(sites, size):
            n_checked += 1
            if n_checked > max_subsets:
                size = None
                break
            for values in product(core, repeat=len(subset)):
                try:
                    probs = query(to_pins(subset, values))
                except ValueError:
                    continue
                if np.isnan(probs).any():
                    continue
                for a in core:
                    p = float(probs[a])
                    if p > 0.0 and p < c_hat:
                        c_hat = p
                        witness = {"subset": subset, "values": values, "symbol": a}
        if size is None:
            break
    m_size = len(groups.ball(spec, 1))
    log_c_formula = (
        -(m_size**4 + m_size**6) * math.log(structure.alphabet)
        - 2.0 * potential.norm() * m_size**4
    )
    return UniformBound(c_hat, log_c_formula, witness)


def entropy_rate_estimate(
    structure: ConstraintStructure,
    potential: Potential,
    builder: dict,
    sizes,
    method: str = "auto",
    seed: int = 0,
    mcmc_kwargs: dict | None = None,
    sample_kwargs: dict | None = None,
):
    """Per-size H(mu_n)/n via the exact table, the transfer/cycle identities,
    or log Z (MCMC) minus a sampled energy expectation."""
    from .finitemodel import partition_mcmc, partition_transfer_cycle
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
            elif space.n <= exact_table_cap():
                chosen = "exact"
            else:
                chosen = "mcmc"
        if chosen == "exact":
            table = derived_gibbs_exact(space)
            h = shannon_entropy_exact(space, table)
            rows.append({"n": space.n, "entropy_rate": h / space.n, "stderr": 0.0, "method": "exact"})
        elif chosen == "transfer":
            tm = build_transfer(structure, potential)
            log_z = partition_transfer_cycle(space).log_Z
            mean_e = tm.mean_energy_per_site_cycle(space.n)
            rows.append(
                {
                    "n": space.n,
                    "entropy_rate": log_z / space.n - mean_e,
                    "stderr": 0.0,
                    "method": "transfer",
                }
            )
        elif chosen == "cycles":
            from .finitemodel import partition_cycle_decomposition

            tm = build_transfer(structure, potential)
            res = partition_cycle_decomposition(space)
            mean_e = sum(
                length * tm.mean_energy_per_site_cycle(length)
                for length in res.diagnostics["cycle_lengths"]
                if length > 1
            )
            for length in res.diagnostics["cycle_lengths"]:
                if length == 1:
                    w = np.exp(potential.h + np.diag(potential.J[0]))
                    p = w / w.sum()
                    mean_e += float(p @ (potential.h + np.diag(potential.J[0])))
            rows.append(
                {
                    "n": space.n,
                    "entropy_rate": (res.log_Z - mean_e) / space.n,
                    "stderr": 0.0,
                    "method": "cycles",
                }
            )
        elif chosen == "mcmc":
            res = partition_mcmc(space, seed=seed, **(mcmc_kwargs or {}))
            sk = {"sweeps": 200, "n_samples": 200, "thin": 2, **(sample_kwargs or {})}
            samples = sample_derived_gibbs(
                space, sweeps=sk["sweeps"], seed=seed + 1, n_samples=sk["n_samples"], thin=sk["thin"], burn=sk["sweeps"]
            )
            energies = np.array([derived_energy(space, s) for s in samples])
            se_e = energies.std(ddof=1) / math.sqrt(len(energies))
            rows.append(
                {
                    "n": space.n,
                    "entropy_rate": (res.log_Z - energies.mean()) / space.n,
                    "stderr": (res.stderr + se_e) / space.n,
                    "method": "mcmc",
                }
            )
        else:
            raise ValueError(f"unknown method {chosen!r}")
    return rows


def safe_boundary_reference_marginal(
    structure: ConstraintStructure,
    potential: Potential,
    spec: GroupSpec,
    r: int,
    pad: int = 3,
) -> BallDistribution:
    """Approximate infinite-volume marginal on B_r from enumeration on
    B_{r+pad} with an all-safe boundary shell; the gap to the true marginal
    is budgeted by the mixing profile at the pad distance."""
    safe = detect_safe_symbol(structure)
    if safe is None:
        raise NoSafeSymbolError("reference marginal needs a safe boundary symbol")
    big = groups.ball(spec, r + pad)
    graph = SiteGraph.from_ball(big)
    pins = {big.index[g]: safe for g in big.shell(r + pad)}
    inner = list(range(len(groups.ball(spec, r).elements)))  # ball-order prefix
    table = enumeration.joint_distribution(graph, structure, potential, inner, pins=pins)
    return BallDistribution(spec, r, table)


def transfer_reference_marginal(
    structure: ConstraintStructure, potential: Potential, spec: GroupSpec, r: int
) -> BallDistribution:
    """Infinite-volume marginal on B_r for rank-1 groups, in ball order."""
    if spec.rank != 1:
        raise ValueError("transfer reference needs rank 1")
    tm = build_transfer(structure, potential)
    by_offset = tm.window_distribution(r)
    b = groups.ball(spec, r)
    # ball order -> offset positions within [-r..r]
    positions = [g[0] + r for g in b.elements]
    table = {}
    for word, p in by_offset.items():
        key = tuple(word[pos] for pos in positions)
        table[key] = table.get(key, 0.0) + p
    return BallDistribution(spec, r, table)
