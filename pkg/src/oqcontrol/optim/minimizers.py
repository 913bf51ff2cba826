"""Polak-Ribiere conjugate gradient and rand/1/bin differential evolution."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .problem import OptimizationProblem, OptimizationResult

ARMIJO_C = 1e-4
SHRINK = 0.5


def _line_search(fun, x, f0, g0, d, step0, max_shrink=40):
    """Armijo backtracking seeded by a quadratic-interpolation step.

    Returns ``(step, f, g, n_evals)`` or ``None`` when no decrease was found.
    """
    slope = float(g0 @ d)
    evals = 0
    step = step0
    f1, g1 = fun(x + step * d)
    evals += 1
    while not np.isfinite(f1) and evals < max_shrink:
        step *= SHRINK
        f1, g1 = fun(x + step * d)
        evals += 1
    # minimiser of the quadratic through f0, slope and f(step)
    curv = f1 - f0 - slope * step
    if curv > 0:
        q = -slope * step * step / (2 * curv)
        if 0 < q and not np.isclose(q, step, rtol=1e-12, atol=0):
            fq, gq = fun(x + q * d)
            evals += 1
            if np.isfinite(fq) and fq < f1:
                step, f1, g1 = q, fq, gq
    while f1 > f0 + ARMIJO_C * step * slope or not np.isfinite(f1):
        if evals >= max_shrink:
            return None
        step *= SHRINK
        f1, g1 = fun(x + step * d)
        evals += 1
    return step, f1, g1, evals


def conjugate_gradient_minimize(problem: OptimizationProblem, gradient_fn: Callable | None = None, x0=None,
                                max_iters: int = 200, tol: float = 1e-8, callback: Callable | None = None,
                                target: float | None = None) -> OptimizationResult:
    """PR+ nonlinear conjugate gradient with restarts on loss of descent.

    ``gradient_fn(x)`` may return either the gradient or ``(J, grad)``;
    by default the problem's own gradient is used. The trace holds the cost
    after every iteration, starting with the initial point. Stops early once
    the cost drops to ``target``.
    """
    if gradient_fn is None:
        fun = problem.evaluate
    else:
        def fun(x):
            out = gradient_fn(x)
            if isinstance(out, tuple):
                return float(out[0]), np.asarray(out[1], dtype=float)
            return float(problem.cost(x)), np.asarray(out, dtype=float)
    x = np.array(problem.x0 if x0 is None else x0, dtype=float).reshape(-1)
    f, g = fun(x)
    evals = 1
    trace = [f]
    d = -g
    step = 1.0 / max(1.0, float(np.linalg.norm(g)))
    converged = False
    message = "maximum iterations reached"
    it = 0
    while it < max_iters:
        if float(np.linalg.norm(g)) < tol:
            converged, message = True, "gradient norm below tolerance"
            break
        if target is not None and f <= target:
            converged, message = True, "target reached"
            break
        if float(g @ d) >= 0:
            d = -g
        res = _line_search(fun, x, f, g, d, step)
        if res is None:
            if np.array_equal(d, -g):
                message = "line search failed"
                break
            d = -g  # restart along steepest descent
            continue
        a, f_new, g_new, n_ev = res
        evals += n_ev
        it += 1
        x = x + a * d
        beta = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
        # next trial step keeps the predicted first-order decrease
        prev_slope = float(g @ d)
        d = -g_new + beta * d
        new_slope = float(g_new @ d)
        step = a * prev_slope / new_slope if new_slope < 0 else 1.0
        step = min(max(step, 1e-12), 1e6)
        f, g = f_new, g_new
        trace.append(f)
        if callback is not None:
            callback(it, x, f)
        if it % max(problem.n_params, 1) == 0:
            d = -g
    if not converged and float(np.linalg.norm(g)) < tol:
        converged, message = True, "gradient norm below tolerance"
    return OptimizationResult(x, f, trace, evals, problem.seed, converged, message,
                              problem.field_samples(x), it)


def differential_evolution_minimize(problem: OptimizationProblem, population: int = 64, generations: int = 300,
                                    F_weight: float = 0.7, CR: float = 0.9, seed: int | None = None,
                                    map_fn: Callable = map, init=None, target: float | None = None
                                    ) -> OptimizationResult:
    """Elitist rand/1/bin with clipping to the box bounds.

    Fitness evaluations for one generation go through ``map_fn`` so a process
    pool's ``map`` parallelises them; the result does not depend on it.
    ``init`` optionally seeds individuals (rows are clipped into the box).
    Stops early once the best cost drops to ``target``.
    """
    problem.check_bounds_finite()
    if population < 4:
        raise ValueError("differential evolution needs a population of at least 4")
    seed = problem.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    lo, hi = problem.bounds[:, 0], problem.bounds[:, 1]
    dim = problem.n_params
    pop = lo + rng.random((population, dim)) * (hi - lo)
    if init is not None:
        seeds = np.atleast_2d(np.asarray(init, dtype=float))[:population]
        pop[: len(seeds)] = np.clip(seeds, lo, hi)
    fit = np.array(list(map_fn(problem.cost, list(pop))), dtype=float)
    fit[~np.isfinite(fit)] = np.inf
    evals = population
    best = int(np.argmin(fit))
    trace = [float(fit[best])]
    gen = 0
    for gen in range(1, generations + 1):
        if target is not None and fit[best] <= target:
            gen -= 1
            break
        trials = np.empty_like(pop)
        for i in range(population):
            r1, r2, r3 = rng.choice(np.delete(np.arange(population), i), 3, replace=False)
            mutant = np.clip(pop[r1] + F_weight * (pop[r2] - pop[r3]), lo, hi)
            cross = rng.random(dim) < CR
            cross[rng.integers(dim)] = True
            trials[i] = np.where(cross, mutant, pop[i])
        tf = np.array(list(map_fn(problem.cost, list(trials))), dtype=float)
        tf[~np.isfinite(tf)] = np.inf
        evals += population
        better = tf <= fit
        pop[better] = trials[better]
        fit[better] = tf[better]
        best = int(np.argmin(fit))
        trace.append(float(fit[best]))
    x = pop[best].copy()
    converged = target is not None and fit[best] <= target
    message = "target reached" if converged else "generation budget exhausted"
    return OptimizationResult(x, float(fit[best]), trace, evals, seed, bool(converged), message,
                              problem.field_samples(x), gen)
