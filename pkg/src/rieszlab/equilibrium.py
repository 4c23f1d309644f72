"""Equilibrium measures and capacities, plain and relative to a domain.

The capacitary measure of a node set minimizes kernel energy among
probability measures on the nodes, rescaled so that its potential is one
on its support.  Its mass is the discrete capacity.  The same construction
over a Green Gram matrix yields the capacity of a compact relative to an
open domain.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DiscreteMeasure, KernelSpec, potential_at
from .errors import SolverFailure
from .regions import PROBE_SEED, Region, sample_points_off
from .solver import QPSolution, solve_simplex

TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class EquilibriumResult:
    """Capacitary measure of a node set with its diagnostics.

    ``gamma`` integrates to ``capacity``; its potential is 1 on charged
    nodes and at least 1 on uncharged ones, up to solver tolerance.
    """

    gamma: DiscreteMeasure
    capacity: float
    min_energy: float
    solution: QPSolution
    node_potential_min: float
    node_potential_max: float
    node_potential_mean: float
    probe_potential_max: float | None
    probe_seed: int | None


def _equilibrium_from_gram(gram, nodes, sol) -> tuple[DiscreteMeasure, float, np.ndarray]:
    min_energy = sol.objective
    capacity = 1.0 / min_energy
    gw = sol.weights / min_energy
    support = gw > 0.0
    gamma = DiscreteMeasure(nodes[support], gw[support])
    node_pot = gram.entries @ gw
    return gamma, capacity, node_pot


def riesz_equilibrium(
    spec: KernelSpec,
    region: Region,
    tol: float = 1e-10,
    n_probes: int = 0,
    probe_seed: int = PROBE_SEED,
) -> EquilibriumResult:
    """Capacitary measure and capacity of a region's node set.

    With ``n_probes`` > 0, also reports the largest potential value at
    probe points off the region, which the maximum principle keeps near 1.
    """
    gram = region.gram(spec)
    sol = solve_simplex(gram, total=1.0, tol=tol)
    if not sol.converged:
        raise SolverFailure(
            f"equilibrium solve did not converge: kkt residual "
            f"{sol.kkt_residual:.3e} ({sol.method})"
        )
    gamma, capacity, node_pot = _equilibrium_from_gram(gram, region.nodes, sol)

    probe_max = None
    seed_used = None
    if n_probes > 0:
        probes = sample_points_off(region, n_probes, probe_seed)
        probe_max = float(np.max(potential_at(spec, gamma, probes)))
        seed_used = probe_seed

    return EquilibriumResult(
        gamma=gamma,
        capacity=capacity,
        min_energy=sol.objective,
        solution=sol,
        node_potential_min=float(np.min(node_pot)),
        node_potential_max=float(np.max(node_pot)),
        node_potential_mean=float(np.mean(node_pot)),
        probe_potential_max=probe_max,
        probe_seed=seed_used,
    )


def green_equilibrium(gk, f_region: Region, tol: float = 1e-10) -> EquilibriumResult:
    """Capacitary measure of a compact node set relative to a domain.

    ``gk`` is a GreenKernel; the node set must lie strictly inside its
    domain.  The returned mass is the relative (Green) capacity.
    """
    from .green import green_gram  # deferred: green depends on balayage

    ggram = green_gram(gk, f_region.nodes, reg_radius=f_region.reg_radius)
    sol = solve_simplex(ggram, total=1.0, tol=tol)
    if not sol.converged:
        raise SolverFailure(
            f"relative equilibrium solve did not converge: kkt residual "
            f"{sol.kkt_residual:.3e} ({sol.method})"
        )
    gamma, capacity, node_pot = _equilibrium_from_gram(ggram, f_region.nodes, sol)
    return EquilibriumResult(
        gamma=gamma,
        capacity=capacity,
        min_energy=sol.objective,
        solution=sol,
        node_potential_min=float(np.min(node_pot)),
        node_potential_max=float(np.max(node_pot)),
        node_potential_mean=float(np.mean(node_pot)),
        probe_potential_max=None,
        probe_seed=None,
    )


def verify_green_minimality(
    gk,
    f_region: Region,
    result: EquilibriumResult,
    n_competitors: int = 20,
    seed: int = PROBE_SEED,
    slack: float = 1e-9,
) -> dict:
    """Check the variational characterization of the relative equilibrium.

    Random node-supported measures, rescaled so their Green potential is at
    least 1 everywhere on the nodes, must have energy at least the
    capacity.  Returns the smallest energy ratio observed.
    """
    from .green import green_gram

    ggram = green_gram(gk, f_region.nodes, reg_radius=f_region.reg_radius)
    rng = np.random.default_rng(seed)
    n = f_region.n_nodes
    ratios = []
    for _ in range(n_competitors):
        v = rng.random(n) + 1e-3
        pot = ggram.entries @ v
        v = v / float(np.min(pot))
        e = float(v @ (ggram.entries @ v))
        ratios.append(e * result.capacity)  # e / (1/capacity)
    min_ratio = float(np.min(ratios))
    return {
        "min_energy_ratio": min_ratio,
        "ok": bool(min_ratio >= 1.0 - slack),
        "n_competitors": n_competitors,
        "seed": seed,
    }
