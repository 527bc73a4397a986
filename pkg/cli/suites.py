"""
Experiment suites behind ``manage.py run <subcommand>``.

Each suite reads an ExperimentConfig, runs its experiment and records
checks and tables on a SuiteResult. Grids not fixed by the config fall back
to the suite's default, sized so every suite runs at desk scale.
"""
import logging

import numpy as np

from ccr_algebra.elements import AlgebraElement, OneParticleBasis, adjoint, commutator, mul
from ccr_algebra.kinematic import gen, kinematic_subspace
from deformation.chains import SYMPLECTIC_TOL, cauchy_chain_through, interpolate, transport_state
from deformation.rigidity import RIGIDITY_TOL, verify_causality_rigidity
from dynamics.locality import dynamical_vs_kinematic
from dynamics.rce import default_band, rce, rce_derivative, rce_testfunction, rce_transport
from dynamics.stress_energy import conservation_study, diffeomorphism_covariance_residual, stress_energy_pairing
from field_eq.convergence import dalembert_convergence
from field_eq.data import TestFunction, random_test_function
from field_eq.green import (
    advanced_array,
    commutator_function,
    retarded_array,
    to_quotient,
    transfer_matrix,
)
from field_eq.operator import apply_P_array
from field_eq.timeslice import timeslice_representative
from geometry.causal import causal_complement, causal_future, causal_hull, causal_past, cauchy_development, causally_disjoint
from geometry.perturbations import MetricPerturbation, bump_perturbation
from geometry.regions import Region, diamond, slab, static_worldline, surface_interval
from geometry.spacetime import KGParams, bump
from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import ConfigError
from report.artifacts import SuiteResult
from states.energy import gaussian_sampling, optimal_qei_state, qei_check, total_energy
from states.quasifree import bogoliubov_transport, expectation, mode_occupations, n_point
from states.vacuum import excited_state, random_gaussian_family, semidiscrete_frequencies, squeezed_state, ultrastatic_vacuum

logger = logging.getLogger(__name__)

AXIOM_FAMILIES = ("flat", "bump", "cosmological")

# default (n_x, n_t) per suite
GREEN_GRID = (24, 40)
AXIOM_GRID = (8, 24)
CAUSALITY_GRID = (16, 24)
TIMESLICE_GRID = (24, 40)
RCE_GRID = (16, 40)
DYNLOC_GRID = (40, 32)
STATE_GRID = (16, 48)
RIGIDITY_GRID = (32, 48)

# dt / dx for the mode energies; dt^2 lambda / 4 stays below 0.02 for modes 1..5 at the default dx
MODE_DT_OVER_DX = 0.25


# ============================
# HELPERS
# ============================

def _value(section: dict, key: str, default):
    value = section.get(key)
    return default if value is None else value


def _relative(a, b) -> float:
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))


def _spacetime(config, grid, **overrides):
    section = config["spacetime"]
    return config.spacetime(n_x=_value(section, "n_x", grid[0]), n_t=_value(section, "n_t", grid[1]), **overrides)


def _families(config):
    """The configured family, or all three axiom families when none is given."""
    if "family" in config.given.get("spacetime", {}):
        return [config["spacetime"]["family"]]
    return list(AXIOM_FAMILIES)


def _ultrastatic_start(config, grid, dt_over_dx=None):
    """The configured ultrastatic spacetime; ``dt_over_dx`` refines dt unless [spacetime] dt is set."""
    overrides = {}
    if dt_over_dx is not None and config["spacetime"].get("dt") is None:
        overrides["dt"] = dt_over_dx * _value(config["spacetime"], "dx", workbench_setting("DEFAULT_DX"))
    M = _spacetime(config, grid, **overrides)
    if not M.is_ultrastatic:
        raise ConfigError(f"[spacetime] family '{config['spacetime']['family']}' is not ultrastatic; use flat or ultrastatic")
    return M


def _perturbation(config, M, center, widths) -> MetricPerturbation:
    p = config["perturbation"]
    if p["amp_beta"] == 0.0 and p["amp_a"] == 0.0:
        raise ConfigError("[perturbation] amp_beta and amp_a are both zero")
    center = (_value(p, "center_t", center[0]), _value(p, "center_x", center[1]))
    widths = (_value(p, "width_t", widths[0]), _value(p, "width_x", widths[1]))
    return bump_perturbation(M, center, widths, amp_beta=p["amp_beta"], amp_a=p["amp_a"])


def _disjoint_point(M, O1, inner, touching, rng):
    """A cell of ``inner`` outside the causal hull of O1; on its boundary when ``touching``."""
    allowed = Region(~causal_hull(M, O1, dilate=not touching).mask) & inner
    if touching:
        allowed = allowed - causal_complement(M, O1)
    candidates = sorted(allowed.points)
    if not candidates:
        return None
    return Region.from_points(M, [candidates[int(rng.integers(0, len(candidates)))]])


# ============================
# FIELD EQUATION
# ============================

def green_suite(config, result: SuiteResult):
    levels, orders = dalembert_convergence(levels=config["run"]["refine"], dx0=workbench_setting("DEFAULT_DX"))
    result.table(
        "convergence",
        ["dx", "value", "exact", "error", "order"],
        [[lvl.dx, lvl.value, lvl.exact, lvl.error, "" if k == 0 else orders[k - 1]] for k, lvl in enumerate(levels)],
    )
    result.check("flat massless E: lowest observed order", min(orders), 1.8, ">=")

    samples = _value(config["run"], "samples", 20)
    rng = np.random.default_rng(result.seed)
    rows = []
    for name in _families(config):
        M = _spacetime(config, GREEN_GRID, family=name)
        antisymmetry, outside = 0.0, 0
        for _ in range(samples):
            f, h = random_test_function(M, rng), random_test_function(M, rng)
            antisymmetry = max(
                antisymmetry,
                abs(commutator_function(M, f, h) + commutator_function(M, h, f)),
                abs(commutator_function(M, f, f)),
            )
            outside += int(np.count_nonzero(retarded_array(M, f)[~causal_future(M, f.support).mask]))
            outside += int(np.count_nonzero(advanced_array(M, f)[~causal_past(M, f.support).mask]))
        rows.append([name, samples, antisymmetry, outside])
        result.check(f"{name}: E antisymmetry", antisymmetry, 1e-12)
        result.check(f"{name}: Green values outside the dilated cone", outside, 0, "==", scaled=False)
    result.table("green_structure", ["family", "samples", "antisymmetry", "cells_outside_cone"], rows)


def ccr_suite(config, result: SuiteResult):
    samples = _value(config["run"], "samples", 100)
    n_pad = workbench_setting("N_PAD")
    rng = np.random.default_rng(result.seed)
    rows = []
    for name in _families(config):
        M = _spacetime(config, AXIOM_GRID, family=name)
        basis = OneParticleBasis.for_spacetime(M, _value(config["run"], "surface", M.n_t // 2 - 2))
        lo, hi = n_pad + 2, M.n_t - n_pad - 2
        worst = {"linearity": 0.0, "hermiticity": 0.0, "field equation": 0.0, "commutation": 0.0}
        for _ in range(samples):
            f = random_test_function(M, rng, complex_valued=True)
            h, k = random_test_function(M, rng), random_test_function(M, rng)
            alpha = complex(*rng.standard_normal(2))
            lhs = gen(M, alpha * f + h, basis)
            rhs = alpha * gen(M, f, basis) + gen(M, h, basis)
            worst["linearity"] = max(worst["linearity"], lhs.distance(rhs) / max(lhs.max_coefficient(), 1.0))
            hermiticity = adjoint(gen(M, f, basis)).distance(gen(M, f.conj(), basis))
            worst["hermiticity"] = max(worst["hermiticity"], hermiticity)
            g = np.zeros(M.shape)
            g[lo:hi] = rng.standard_normal((hi - lo, M.n_x))
            image = gen(M, TestFunction(apply_P_array(M, g)), basis).max_coefficient() / max(np.abs(g).max(), 1.0)
            worst["field equation"] = max(worst["field equation"], image)
            c = commutator(gen(M, h, basis), gen(M, k, basis))
            expected = AlgebraElement.unit(basis, 1j * commutator_function(M, h, k))
            worst["commutation"] = max(worst["commutation"], c.distance(expected))
        bounds = {"linearity": 1e-12, "hermiticity": 1e-13, "field equation": 1e-12, "commutation": 1e-11}
        for axiom, value in worst.items():
            entry = result.check(f"{name}: {axiom}", value, bounds[axiom])
            rows.append([name, axiom, samples, value, entry.bound, "PASS" if entry.passed else "FAIL"])
    result.table("axioms", ["family", "axiom", "samples", "max_residual", "bound", "status"], rows)


def causality_suite(config, result: SuiteResult):
    """Random causally disjoint pairs, every other one touching the hull boundary."""
    samples = _value(config["run"], "samples", 50)
    n_pad = workbench_setting("N_PAD")
    rng = np.random.default_rng(result.seed)
    rows = []
    for name in _families(config):
        M = _spacetime(config, CAUSALITY_GRID, family=name)
        lo, hi = n_pad + 2, M.n_t - n_pad - 3
        inner = slab(M, lo, hi)
        worst, checked, attempts = 0.0, 0, 0
        while checked < samples and attempts < 50 * samples:
            attempts += 1
            O1 = diamond(M, int(rng.integers(lo + 1, hi)), int(rng.integers(0, M.n_x)), 1) & inner
            touching = checked % 2 == 1
            O2 = _disjoint_point(M, O1, inner, touching, rng)
            if O2 is None:
                continue
            f1, f2 = random_test_function(M, rng, O1), random_test_function(M, rng, O2)
            residual = abs(commutator_function(M, f1, f2))
            worst = max(worst, residual)
            (t2, x2), = O2.points
            rows.append([name, checked, O1.min_row, O1.max_row, t2, x2, int(touching), residual])
            checked += 1
        result.check(f"{name}: disjoint pairs checked", checked, samples, "==", scaled=False)
        result.check(f"{name}: max |E(f,h)| over disjoint pairs", worst, 1e-11)
    result.table("pairs", ["family", "pair", "t1_min", "t1_max", "t2", "x2", "touching", "residual"], rows)


def timeslice_suite(config, result: SuiteResult):
    samples = _value(config["run"], "samples", 50)
    region = config["region"]
    rng = np.random.default_rng(result.seed)
    rows, development = [], []
    for name in _families(config):
        M = _spacetime(config, TIMESLICE_GRID, family=name)
        mid = M.n_t // 2
        band = (mid - 4, mid)
        t_ref = _value(config["run"], "surface", workbench_setting("N_PAD") + 6)
        outside, quotient, pairing = 0, 0.0, 0.0
        for _ in range(samples):
            f, h = random_test_function(M, rng), random_test_function(M, rng)
            g = timeslice_representative(M, f, band)
            support = g.support.rows
            outside += int(np.count_nonzero((support < band[0]) | (support > band[1])))
            data = to_quotient(M, f, t_ref)
            quotient = max(quotient, (to_quotient(M, g, t_ref) - data).max_norm() / max(data.max_norm(), 1.0))
            pairing = max(pairing, abs(commutator_function(M, g, h) - commutator_function(M, f, h)))
        rows.append([name, band[0], band[1], samples, outside, quotient, pairing])
        result.check(f"{name}: representative rows outside the band", outside, 0, "==", scaled=False)
        result.check(f"{name}: representative quotient data (relative)", quotient, 1e-12)
        result.check(f"{name}: E(f', h) - E(f, h)", pairing, 1e-11)

        t0, x0 = _value(region, "center_t", mid), _value(region, "center_x", M.n_x // 2)
        base = surface_interval(M, t0, x0 - region["radius"], x0 + region["radius"])
        D = cauchy_development(M, base)
        S_rows = kinematic_subspace(M, D.restrict_rows(t0, t0 + 1), t_ref)
        S_dev = kinematic_subspace(M, D, t_ref)
        angle = float(S_rows.principal_angles(S_dev).max()) if S_rows.dim == S_dev.dim else float("nan")
        development.append([name, len(base), len(D), S_rows.dim, S_dev.dim, angle])
        result.check(f"{name}: dim K(O) - dim K(D(O))", S_rows.dim - S_dev.dim, 0, "==", scaled=False)
        result.check(f"{name}: principal angle K(O) vs K(D(O))", angle, 1e-6)
    result.table("representatives", ["family", "band_start", "band_stop", "samples", "rows_outside", "quotient", "pairing"], rows)
    result.table("development", ["family", "base_cells", "development_cells", "dim_two_rows", "dim_development", "max_angle"], development)


# ============================
# DYNAMICS
# ============================

def rce_suite(config, result: SuiteResult):
    M = _spacetime(config, RCE_GRID)
    h = _perturbation(config, M, center=(0.45 * M.n_t, M.n_x / 2), widths=(3, 3))
    t_ref = _value(config["run"], "surface", 3 * M.n_t // 4)
    n = 2 * M.n_x

    zero = rce(M, MetricPerturbation.zero(M), t_ref)
    identity_gap = float(np.abs(zero.matrix - np.eye(n)).max())
    first = rce(M, h, t_ref)
    shifted = rce(M, h, t_ref, band=default_band(M, h, offset=1))
    transport = rce_transport(M, h, t_ref)
    wide = rce_transport(
        M, h, t_ref,
        sigma_minus=max(0, transport.surfaces["sigma_minus"] - 4),
        sigma_plus=min(M.n_t - 2, transport.surfaces["sigma_plus"] + 4),
    )

    t_c = int(round(_value(config["perturbation"], "center_t", 0.45 * M.n_t)))
    x_c = int(round(_value(config["perturbation"], "center_x", M.n_x / 2)))
    O = diamond(M, t_c, (x_c + M.n_x // 2) % M.n_x, 1)
    if not causally_disjoint(M, O, h.support):
        raise ConfigError("[perturbation] leaves no causally disjoint region for the locality check")
    span = kinematic_subspace(M, O, t_ref).span
    locality = float(np.abs(transport.matrix @ span - span).max())

    values = [
        ("rce[0] distance to identity", identity_gap, 0.0, "=="),
        ("band independence", _relative(shifted.matrix, first.matrix), 1e-10, "<="),
        ("surface independence", _relative(wide.matrix, transport.matrix), 1e-10, "<="),
        ("symplectic defect", transport.symplectic_defect() / M.dx, 1e-10, "<="),
        ("locality on a disjoint kinematic subspace", locality, 1e-11, "<="),
        ("test-function route vs transport", _relative(first.matrix, transport.matrix), 1e-10, "<="),
    ]
    for name, value, bound, relation in values:
        result.check(name, value, bound, relation, scaled=relation != "==")
    result.table("rce", ["quantity", "value", "bound"], [[name, value, bound] for name, value, bound, _ in values])
    result.note(f"surfaces {transport.surfaces}, band {first.surfaces['band']}, t_ref {t_ref}")


def stress_energy_suite(config, result: SuiteResult):
    M = _spacetime(config, RCE_GRID)
    h = _perturbation(config, M, center=(0.45 * M.n_t, M.n_x / 2), widths=(3, 3))
    h = h.scaled(1.0 / max(np.abs(h.d_beta).max(), np.abs(h.d_a).max()))
    t_ref = _value(config["run"], "surface", 3 * M.n_t // 4)
    rng = np.random.default_rng(result.seed)
    top = h.support.max_row
    f = random_test_function(M, rng, slab(M, top + 3, top + 5))

    pairing = stress_energy_pairing(M, h, f, t_ref).vector
    derivative = rce_derivative(M, h, f, t_ref, s0=1e-2).vector
    result.check("rce derivative vs stress-energy pairing (relative)", _relative(derivative, pairing), 1e-6)

    rows, errors = [], []
    for k in range(3):
        s = 0.1 / 2 ** k
        plus = to_quotient(M, rce_testfunction(M, h.scaled(s), f), t_ref)
        minus = to_quotient(M, rce_testfunction(M, h.scaled(-s), f), t_ref)
        errors.append(_relative((plus - minus).vector / (2 * s), pairing))
        rows.append([s, errors[-1], "" if k == 0 else float(np.log2(errors[-2] / errors[-1]))])
    result.table("amplitude_convergence", ["amplitude", "relative_error", "order"], rows)
    result.check("central difference: lowest order in the amplitude", min(r[2] for r in rows[1:]), 1.8, ">=")

    t = np.arange(M.n_t)
    center = int(round(_value(config["perturbation"], "center_t", 0.45 * M.n_t)))
    n_pad = workbench_setting("N_PAD")
    half = min(12, center - n_pad - 4, M.n_t - n_pad - 4 - center)
    profile = np.where(np.abs(t - center) < half, np.cos(0.5 * np.pi * (t - center) / half) ** 2, 0.0)
    X_t = np.tile(profile[:, None], (1, M.n_x)) * M.dt
    covariance = diffeomorphism_covariance_residual(M, h.scaled(0.05), X_t, np.zeros(M.shape), s=0.05, t_ref=t_ref)
    result.check("diffeomorphism covariance residual", covariance, 0.1)


def conserve_suite(config, result: SuiteResult):
    study = conservation_study(levels=config["run"]["refine"], dx0=workbench_setting("DEFAULT_DX"), kg=config.kg())
    orders = study.orders
    result.table(
        "conservation",
        ["dx", "lie_norm", "residual", "order"],
        [[lvl.dx, lvl.lie_norm, lvl.residual, "" if k == 0 else orders[k - 1]] for k, lvl in enumerate(study.levels)],
    )
    result.check("coarsest residual relative to a generic perturbation", study.residuals[0], 2e-3)
    result.check("lowest order under refinement", min(orders), 1.8, ">=")
    result.note("lattice diffeomorphisms are not stencil symmetries; conservation holds to O(dx^2)")


def dynloc_suite(config, result: SuiteResult):
    M = _spacetime(config, DYNLOC_GRID)
    region = config["region"]
    O = diamond(M, _value(region, "center_t", M.n_t // 2), _value(region, "center_x", M.n_x // 2), region["radius"])
    t_ref = _value(config["run"], "surface", M.n_t // 2)
    samples = _value(config["run"], "samples", 20)
    massless = KGParams(0.0, 0.0)
    fields = [M.kg] if M.kg == massless else [M.kg, massless]
    rows, dims = [], []
    for kg in fields:
        label = f"m_sq={kg.m_sq:g} xi={kg.xi:g}"
        report = dynamical_vs_kinematic(M.with_kg(kg), O, t_ref, samples, result.seed, margin=config["dynloc"]["margin"])
        rows.append([label, report.dim_fixed, report.dim_dual, report.dim_kinematic,
                     report.max_angle, report.zero_mode_fixed, report.verdict])
        dims += [[label, k + 1, d] for k, d in enumerate(report.dims_by_sample)]
        surplus = report.dim_fixed - report.dim_dual
        if kg == massless:
            result.check(f"{label}: fixed dimension surplus", surplus, 1, ">=", scaled=False)
            result.check(f"{label}: zero mode fixed", report.zero_mode_fixed, True, "==", scaled=False)
        else:
            result.check(f"{label}: fixed dimension surplus", surplus, 0, "==", scaled=False)
            result.check(f"{label}: max principal angle", report.max_angle, 1e-3)
            result.check(f"{label}: verdict", report.verdict, "match", "==", scaled=False)
    result.table("dynloc", ["field", "dim_fixed", "dim_dual_kinematic", "dim_kinematic", "max_angle", "zero_mode_fixed", "verdict"], rows)
    result.table("fixed_dims", ["field", "samples", "dim_fixed"], dims)


# ============================
# STATES
# ============================

def _point_generator(M, basis, rng) -> tuple:
    """A random source on one column of rows t, t+1 of the basis surface and its smeared field."""
    t, j = basis.surface_t, int(rng.integers(0, M.n_x))
    values = np.zeros(M.shape)
    values[t:t + 2, j] = rng.standard_normal(2)
    f = TestFunction(values)
    coords = to_quotient(M, f, t).vector
    # data stay on column j; drop rounding elsewhere so the field has two words
    coords = np.where(np.abs(coords) > 1e-14 * np.abs(coords).max(), coords, 0.0)
    return f, AlgebraElement.from_vector(basis, coords)


def vacuum_suite(config, result: SuiteResult):
    M = _ultrastatic_start(config, STATE_GRID, dt_over_dx=MODE_DT_OVER_DX)
    surface = _value(config["run"], "surface", 0)
    vac = ultrastatic_vacuum(M, surface)
    result.check("vacuum CCR defect", vac.ccr_defect(), 1e-11)
    result.check("vacuum lowest eigenvalue", vac.min_eigenvalue(), -1e-10, ">=", scaled=False)
    moved = bogoliubov_transport(vac, transfer_matrix(M, surface, surface + 1))
    result.check("one-step invariance (relative)", _relative(moved.W, vac.W), 1e-10)

    omega = semidiscrete_frequencies(M)
    rows = []
    for k in range(1, min(6, M.n_x)):
        energy = total_energy(excited_state(vac, k), vac)
        rows.append([k, M.dt, omega[k], vac.frequencies[k], energy, energy / omega[k]])
        result.check(f"mode {k}: one-particle energy / frequency - 1", abs(energy / omega[k] - 1.0), 0.02)
        result.check(f"mode {k}: one-particle energy vs transfer frequency", abs(energy - vac.frequencies[k]) / energy, 1e-9)
    result.table("modes", ["mode", "dt", "semidiscrete_frequency", "transfer_frequency", "energy", "ratio"], rows)

    rng = np.random.default_rng(result.seed)
    basis = OneParticleBasis.for_spacetime(M, surface)
    samples = _value(config["run"], "samples", 100)
    lowest, imaginary = np.inf, 0.0
    for _ in range(samples):
        words = {}
        for degree in range(4):
            word = tuple(int(i) for i in rng.integers(0, basis.size, size=degree))
            words[word] = complex(rng.standard_normal(), rng.standard_normal())
        A = AlgebraElement.from_words(basis, words)
        value = expectation(vac, mul(adjoint(A), A))
        lowest = min(lowest, value.real / max(1.0, abs(value)))
        imaginary = max(imaginary, abs(value.imag) / max(1.0, abs(value)))
    result.check("positivity: lowest omega(A*A)", lowest, -1e-9, ">=", scaled=False)
    result.check("positivity: imaginary part of omega(A*A)", imaginary, 1e-9)

    t_ref = workbench_setting("N_PAD") + 2
    vac_ref = ultrastatic_vacuum(M, t_ref)
    basis_ref = OneParticleBasis.for_spacetime(M, t_ref)
    rows = []
    for order in range(1, 7):
        fs, fields = zip(*(_point_generator(M, basis_ref, rng) for _ in range(order)))
        wick = n_point(vac_ref, *fs)
        product = fields[0]
        for field in fields[1:]:
            product = mul(product, field)
        oracle = expectation(vac_ref, product)
        residual = abs(wick - oracle) / max(1.0, abs(oracle))
        rows.append([order, wick.real, wick.imag, oracle.real, oracle.imag, residual])
        if order % 2:
            result.check(f"{order}-point function vanishes", abs(wick), 0.0, "==", scaled=False)
        else:
            result.check(f"{order}-point: Wick pairing vs normal ordering", residual, 1e-11)
    result.table("correlations", ["n", "wick_re", "wick_im", "oracle_re", "oracle_im", "residual"], rows)


def qei_suite(config, result: SuiteResult):
    M = _ultrastatic_start(config, STATE_GRID)
    vac = ultrastatic_vacuum(M, _value(config["run"], "surface", 0))
    line = config["worldline"]
    gamma = static_worldline(M, _value(line, "x", M.n_x // 2), _value(line, "t0", 2), _value(line, "t1", M.n_t - 4))
    f = gaussian_sampling(gamma, config["sampling"]["width"])
    section = config["states"]
    family = random_gaussian_family(vac, section["count"], seed=result.seed, n_modes=section["n_modes"], strength=section["strength"])
    family += [
        squeezed_state(vac, k, r, angle)
        for k in (1, 2, 3) if k < M.n_x
        for r in (0.3, 1.0)
        for angle in (0.0, 0.8)
    ]
    report = qei_check(family, vac, gamma, f)
    result.table("qei", ["state", "averaged_energy", "bound"], report.rows())
    result.check("bound is finite", bool(np.isfinite(report.bound)), True, "==", scaled=False)
    result.check("bound", report.bound, 0.0, "<", scaled=False)
    result.check("bound minus lowest averaged energy", report.bound - report.minimum, 1e-8)
    result.check("lowest averaged energy", report.minimum, 0.0, "<", scaled=False)

    best = optimal_qei_state(vac, gamma, f)
    value = qei_check([best], vac, gamma, f).values[0]
    result.check("optimal state: bound minus its averaged energy", report.bound - value, 1e-6 * abs(report.bound))
    result.check("optimal state: fraction of the bound reached", value / report.bound, 0.5, ">=", scaled=False)
    result.note(f"{len(family)} states, sampling normalisation {report.normalization:.6g}")
    result.notes.extend(report.notes)


# ============================
# DEFORMATION
# ============================

def deform_suite(config, result: SuiteResult):
    M = _ultrastatic_start(config, RIGIDITY_GRID)
    section = config["deform"]
    N = bump(n_x=M.n_x, n_t=M.n_t, dx=M.dx, dt=M.dt, kg=M.kg, amplitude=section["amplitude"],
             center=(0.7 * M.n_t, M.n_x / 2), widths=(M.n_t / 6, M.n_x / 4))
    band = (_value(section, "band_start", M.n_t // 4), _value(section, "band_stop", M.n_t // 4 + 6))
    n = 2 * M.n_x

    trivial = interpolate(M, M, band)
    result.check("trivial chain distance to identity", float(np.abs(trivial.matrix - np.eye(n)).max()), 1e-12)
    chain = interpolate(M, N, band)
    result.check("chain symplectic defect", chain.symplectic_defect(), SYMPLECTIC_TOL)
    I = chain.interpolant
    below = max(np.abs(I.beta[:band[0] + 1] - M.beta[:band[0] + 1]).max(), np.abs(I.a[:band[0] + 1] - M.a[:band[0] + 1]).max())
    above = max(np.abs(I.beta[band[1]:] - N.beta[band[1]:]).max(), np.abs(I.a[band[1]:] - N.a[band[1]:]).max())
    result.check("interpolant vs source below the band", float(below), 0.0, "==", scaled=False)
    result.check("interpolant vs target above the band", float(above), 0.0, "==", scaled=False)
    ends = (1, M.n_t - 2)
    long_chain = interpolate(M, N, band, source_surface=ends[0], target_surface=ends[1])
    direct = transfer_matrix(long_chain.interpolant, *ends)
    result.check("composite vs evolution in the interpolant", _relative(long_chain.matrix, direct), 1e-9)
    result.table("links", ["link", "domain", "codomain", "first_row", "last_row"],
                 [[l.name, l.domain, l.codomain, l.rows[0], l.rows[1]] for l in chain.links])

    rng = np.random.default_rng(result.seed)
    n_pad = workbench_setting("N_PAD")
    inner = slab(M, n_pad + 1, M.n_t - n_pad - 2)
    pairs, attempts = [], 0
    while len(pairs) < section["pairs"] and attempts < 50 * section["pairs"]:
        attempts += 1
        O1 = Region.from_points(M, [(int(rng.integers(n_pad + 1, M.n_t - n_pad - 1)), int(rng.integers(0, M.n_x)))])
        O2 = _disjoint_point(M, O1, inner, len(pairs) % 2 == 1, rng)
        if O2 is not None:
            pairs.append((O1, O2))
    report = verify_causality_rigidity(M, N, pairs, band)
    header, body = report.rows()
    result.table("rigidity", header, body)
    result.check("rigidity pairs checked", len(report.pairs), section["pairs"], "==", scaled=False)
    result.check("rigidity: max commutator residual", report.max_residual, RIGIDITY_TOL)
    result.check("rigidity: failing pairs", sum(not p.passed for p in report.pairs), 0, "==", scaled=False)


def no_natural_state_suite(config, result: SuiteResult):
    """Vacuum pulled back along Cauchy chains through a metric bump and through nothing."""
    M = _ultrastatic_start(config, STATE_GRID)
    h = _perturbation(config, M, center=(M.n_t / 2, M.n_x / 2), widths=(6, 4))
    bumped = cauchy_chain_through(M, h)
    chains = [("trivial", cauchy_chain_through(M, MetricPerturbation.zero(M))), ("bump", bumped)]
    wider = (bumped.band[0], bumped.band[1] + 4)
    if wider[1] + 3 <= M.n_t - 2:
        chains.append(("bump, wider band", cauchy_chain_through(M, h, band=wider)))

    rows, transported = [], {}
    for label, chain in chains:
        out = transport_state(chain, ultrastatic_vacuum(M, chain.target_surface))
        transported[label] = (chain, out)
        rows.append([label, chain.band[0], chain.band[1], out.particle_number,
                     out.state.min_eigenvalue(), out.state.ccr_defect(), out.hadamard.classification])
    result.table("transport", ["chain", "band_start", "band_stop", "particle_number", "min_eigenvalue",
                               "ccr_defect", "hadamard"], rows)

    result.check("trivial chain: particle number", abs(transported["trivial"][1].particle_number), 1e-10)
    for label, (chain, out) in transported.items():
        if label == "trivial":
            continue
        result.check(f"{label}: particle number", out.particle_number, 1e-6, ">", scaled=False)
        result.check(f"{label}: lowest eigenvalue", out.state.min_eigenvalue(), -1e-10, ">=", scaled=False)
        result.check(f"{label}: CCR defect", out.state.ccr_defect(), 1e-11)

    chain, out = transported["bump"]
    native = ultrastatic_vacuum(M, chain.source_surface)
    occupations = mode_occupations(native, out.state)
    result.table("occupations", ["mode", "frequency", "occupation"],
                 [[k, native.frequencies[k], occupations[k]] for k in range(M.n_x)])
    result.note("a state fixed by every Cauchy chain would show zero particle number on both chains")


SUITES = {
    "green": green_suite,
    "ccr": ccr_suite,
    "causality": causality_suite,
    "timeslice": timeslice_suite,
    "rce": rce_suite,
    "stress-energy": stress_energy_suite,
    "conserve": conserve_suite,
    "dynloc": dynloc_suite,
    "vacuum": vacuum_suite,
    "qei": qei_suite,
    "deform": deform_suite,
    "no-natural-state": no_natural_state_suite,
}


def run_suite(name: str, config) -> SuiteResult:
    try:
        suite = SUITES[name]
    except KeyError:
        raise ConfigError(f"unknown subcommand '{name}'")
    result = SuiteResult(name, seed=config.seed, tol_scale=config["run"]["tol_scale"])
    logger.info(f"[Suite] Running '{name}' (seed {result.seed}, tol_scale {result.tol_scale:g})")
    suite(config, result)
    status = "PASS" if result.passed else "FAIL"
    logger.info(f"[Suite] '{name}': {status}, {len(result.failures)} of {len(result.checks)} checks failed")
    return result
