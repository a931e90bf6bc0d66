"""
Bounded least-squares search over a subset of :class:`ModelParams`, in log space:
a coarse multiplicative grid scan followed by a Nelder-Mead simplex refinement, with
curvature-based uncertainties.
"""
import itertools
import logging
import math
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
import scipy.optimize

from lzsmcap.errors import InvalidArgumentError
from lzsmcap.structures import FitResult, ModelParams

logger = logging.getLogger(__name__)

DEFAULT_BOUNDS = {
    "t1": (1.0, 1000.0),
    "t2": (1e-3, 1.0),
    "t_r": (1e-3, 1.0),
    "alpha_minus": (0.01, 0.3),
    "delta": (0.1, 100.0),
}

ALIASES = {"tr": "t_r"}

# returned for parameter sets the model cannot evaluate
FAILED_OBJECTIVE = 1e12

GRID_POINTS_PER_DECADE = 4
MAX_ITERATIONS = 2000
RELATIVE_TOLERANCE = 1e-10
SIMPLEX_STEP = 0.25
HESSIAN_STEP = 1e-3
NO_EFFECT_TOLERANCE = 1e-9


def canonical_name(name):
    return ALIASES.get(name, name)


def parameter_value(params: ModelParams, name):
    if name == "alpha_minus":
        return params.alpha_minus
    return getattr(params, name)


def with_parameters(params: ModelParams, values: Dict[str, float]) -> ModelParams:
    overrides = {k: float(v) for k, v in values.items() if k != "alpha_minus"}
    if "alpha_minus" in values:
        overrides["alpha2"] = params.alpha1 + 2.0 * float(values["alpha_minus"])
    return params.shallow_clone_with_overrides(**overrides)


def _log_grid(low, high):
    decades = math.log10(high / low)
    count = max(2, int(math.ceil(decades * GRID_POINTS_PER_DECADE)) + 1)
    return np.linspace(math.log(low), math.log(high), count)


class LogSpaceProblem:
    """
    Minimizes Σ r² for a residual function of the model parameters.

    Arguments:
        init(ModelParams): starting point; parameters that are not free keep its values
        free: names of the free parameters (t1, t2, t_r, alpha_minus, delta)
        residuals: callable mapping a ModelParams to a residual vector
        bounds: optional per-parameter (low, high) overrides of DEFAULT_BOUNDS
    """

    def __init__(
        self,
        init: ModelParams,
        free: Sequence[str],
        residuals: Callable[[ModelParams], np.ndarray],
        bounds: Dict[str, Tuple[float, float]] = None,
    ):
        free = [canonical_name(n) for n in free]
        if not free:
            raise InvalidArgumentError("free: Expected at least one free parameter")
        unknown = [n for n in free if n not in DEFAULT_BOUNDS]
        if unknown:
            raise InvalidArgumentError(
                "free: Got {}; Expected names from {}".format(
                    ", ".join(unknown), ", ".join(sorted(DEFAULT_BOUNDS))
                )
            )
        if len(set(free)) != len(free):
            raise InvalidArgumentError("free: Got duplicate names {}".format(", ".join(free)))
        self.init = init
        self.free = free
        self.residuals = residuals
        merged = dict(DEFAULT_BOUNDS)
        merged.update({canonical_name(k): v for k, v in (bounds or {}).items()})
        self.bounds = [merged[n] for n in free]
        for name, (low, high) in zip(free, self.bounds):
            if not 0 < low < high:
                raise InvalidArgumentError(
                    "{}: Got bounds ({}, {}); Expected 0 < low < high".format(name, low, high)
                )
            value = parameter_value(init, name)
            if not low <= value <= high:
                raise InvalidArgumentError(
                    "{}: Got {}; Expected an initial value within [{}, {}]".format(
                        name, value, low, high
                    )
                )
        self.theta_init = np.array([math.log(parameter_value(init, n)) for n in free])
        self.log_bounds = [(math.log(low), math.log(high)) for low, high in self.bounds]
        self._cache = {}
        self.evaluations = 0

    def params_at(self, theta) -> ModelParams:
        if np.array_equal(theta, self.theta_init):
            return self.init
        return with_parameters(
            self.init, {n: math.exp(t) for n, t in zip(self.free, theta)}
        )

    def residual_vector(self, theta):
        try:
            return np.asarray(self.residuals(self.params_at(theta)), dtype=float)
        except (ValueError, TypeError, ArithmeticError) as ex:
            logger.debug("model evaluation failed at %s: %s", self._describe(theta), ex)
            return None

    def objective(self, theta):
        key = tuple(np.asarray(theta, dtype=float))
        if key not in self._cache:
            self.evaluations += 1
            residual = self.residual_vector(np.asarray(theta, dtype=float))
            if residual is None or residual.size == 0 or not np.all(np.isfinite(residual)):
                value = FAILED_OBJECTIVE
            else:
                value = float(np.dot(residual, residual))
            self._cache[key] = value
        return self._cache[key]

    def _describe(self, theta):
        return ", ".join("{}={:.6g}".format(n, math.exp(t)) for n, t in zip(self.free, theta))

    def grid_scan(self):
        """
        Best point of the initial value and a multiplicative grid over the bounds.
        The initial value wins ties.
        """
        best_theta = self.theta_init
        best_value = self.objective(best_theta)
        axes = [_log_grid(low, high) for low, high in self.bounds]
        for point in itertools.product(*axes):
            theta = np.array(point)
            value = self.objective(theta)
            if value < best_value:
                best_theta, best_value = theta, value
        logger.info(
            "grid scan: %d points, best objective %.6g at %s",
            int(np.prod([len(a) for a in axes])),
            best_value,
            self._describe(best_theta),
        )
        return best_theta, best_value

    def _initial_simplex(self, theta):
        simplex = [theta]
        for i, (low, high) in enumerate(self.log_bounds):
            vertex = theta.copy()
            step = SIMPLEX_STEP if theta[i] + SIMPLEX_STEP <= high else -SIMPLEX_STEP
            vertex[i] = min(max(theta[i] + step, low), high)
            simplex.append(vertex)
        return np.array(simplex)

    def simplex(self, theta, value, max_iterations=MAX_ITERATIONS):
        history = [value]

        def record(xk):
            history.append(self.objective(xk))

        result = scipy.optimize.minimize(
            self.objective,
            theta,
            method="Nelder-Mead",
            bounds=self.log_bounds,
            callback=record,
            options=dict(
                maxiter=max_iterations,
                initial_simplex=self._initial_simplex(theta),
                xatol=1e-9,
                fatol=RELATIVE_TOLERANCE * max(value, 1e-300),
            ),
        )
        best = np.asarray(result.x, dtype=float)
        best_value = self.objective(best)
        if best_value > value:
            best, best_value = theta, value
        return best, best_value, bool(result.success), int(result.nit), history

    def hessian(self, theta):
        n = len(theta)
        h = HESSIAN_STEP
        f0 = self.objective(theta)
        hess = np.zeros((n, n))

        def f(*shifts):
            point = theta.copy()
            for index, sign in shifts:
                point[index] += sign * h
            return self.objective(point)

        for i in range(n):
            hess[i, i] = (f((i, 1)) - 2 * f0 + f((i, -1))) / h ** 2
            for j in range(i):
                hess[i, j] = hess[j, i] = (
                    f((i, 1), (j, 1)) - f((i, 1), (j, -1)) - f((i, -1), (j, 1)) + f((i, -1), (j, -1))
                ) / (4 * h ** 2)
        return hess

    def uncertainties(self, theta, value, points):
        """
        One-sigma uncertainties from cov(log θ) = 2 s² H⁻¹, s² = SSR/(N - p)
        """
        values = [math.exp(t) for t in theta]
        dof = points - len(theta)
        if value == 0:
            return [0.0] * len(theta), []
        if dof <= 0:
            return [math.inf] * len(theta), ["no degrees of freedom left for uncertainties"]
        s2 = value / dof
        try:
            cov = 2.0 * s2 * np.linalg.inv(self.hessian(theta))
        except np.linalg.LinAlgError:
            return [math.inf] * len(theta), ["singular curvature matrix; uncertainties undefined"]
        variances = np.diag(cov)
        if np.any(variances < 0) or not np.all(np.isfinite(variances)):
            return [math.inf] * len(theta), ["curvature matrix not positive definite"]
        return [v * math.sqrt(var) for v, var in zip(values, variances)], []

    def identifiability_warnings(self, theta):
        warnings = []
        if "t1" in self.free and "delta" in self.free:
            warnings.append("t1 and delta enter the model only through T1*delta^2; fix one of them")
        reference = self.residual_vector(theta)
        for i, name in enumerate(self.free):
            shifted = theta.copy()
            shifted[i] += math.log(1.1)
            moved = self.residual_vector(shifted)
            if reference is None or moved is None or moved.shape != reference.shape:
                continue
            if np.max(np.abs(moved - reference), initial=0) < NO_EFFECT_TOLERANCE:
                warnings.append("{} has no effect on the fitted data".format(name))
        return warnings

    def solve(self, max_iterations=MAX_ITERATIONS) -> FitResult:
        theta, value = self.grid_scan()
        if value == 0:
            logger.info("exact fit at %s; skipping the simplex", self._describe(theta))
            converged, iterations, history = True, 0, [value]
        else:
            theta, value, converged, iterations, history = self.simplex(theta, value, max_iterations)
        warnings = self.identifiability_warnings(theta)
        if not converged:
            warnings.append("no convergence after {} iterations".format(iterations))
        residual = self.residual_vector(theta)
        points = 0 if residual is None else residual.size
        sigmas, notes = self.uncertainties(theta, value, points)
        warnings.extend(notes)
        for message in warnings:
            logger.warning(message)

        params = self.params_at(theta)
        values = {n: float(parameter_value(params, n)) for n in self.free}
        logger.info(
            "fit finished after %d evaluations: objective %.6g, %s",
            self.evaluations,
            value,
            self._describe(theta),
        )
        return FitResult(
            params=params,
            free=list(self.free),
            values=values,
            uncertainties={n: float(s) for n, s in zip(self.free, sigmas)},
            residual_norm=math.sqrt(value),
            converged=converged,
            iterations=iterations,
            objective_history=[float(v) for v in history],
            warnings=warnings,
        )
