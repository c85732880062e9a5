"""The fitting pipelines: parameter preparation, quality estimation, learning.

Parameter preparation composes eigenvalue-arithmetic passes over the
Hermitian embedding H of the design matrix.  Two equivalent pipelines
are provided and cross-checked:

* three-stage: a multiply pass (apply H, which plants F^dag y in the
  parameter sector) followed by two invert passes (apply H^-2, the
  inverse Gram operator on both sectors).
* fused: a single pseudo-inverse pass, using that H^-2 * H equals the
  pseudo-inverse of H on its nonzero eigenspace.

Either way the parameter sector of the output is proportional to the
least-squares solution F^+ y, which is checked against the classical
reference on every run.

Quality estimation applies one more multiply pass, turning the parameter
state into the normalized projection of y onto the column space of F,
and swap-tests it against the data state.  The residual bound reported
is 2 * (1 - overlap); the exact normalized residual 1 - overlap^2 is
attached for reference.

Learning samples the parameter state to find the heaviest support,
refits on that support alone, reconstructs the reduced parameter state
by tomography, and re-reports quality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tomography
from .cost import ALG_LEARN, ALG_QUALITY, CostQuery, CostReport, cost_model
from .exceptions import ConfigError, DimensionError, PostselectionError
from .linalg import (
    EigDecomposition,
    EmbeddedOperator,
    condition_estimate,
    eig_hermitian,
    embed,
    sparsity_profile,
)
from .problems import FitProblem, classical_fit, restrict_columns
from .seeding import STREAM_SUPPORT, STREAM_TOMOGRAPHY, derive_seed
from .sim import (
    MODE_INVERT,
    MODE_MULTIPLY,
    WINDOW_UNIFORM,
    PhaseEstimationConfig,
    PhaseEstimationPass,
    QuantumState,
    RegisterLayout,
    SwapTestPlan,
    SwapTestResult,
    apply_hermitian_via_pe,
    data_state_vector,
    default_rotation_scale,
    exact_overlap_sq,
    extract_system_vector,
    measure_computational,
    prepare_data_state,
    swap_test,
)

REPORT_SCHEMA_VERSION = 1

VARIANT_THREE_STAGE = "three-stage"
VARIANT_FUSED = "fused"

_VARIANT_MODES = {
    VARIANT_THREE_STAGE: (MODE_MULTIPLY, MODE_INVERT, MODE_INVERT),
    VARIANT_FUSED: (MODE_INVERT,),
}

# Support-selection shot rule: ceil(alpha * m' * ln(m' + 1)).
DEFAULT_SUPPORT_ALPHA = 20.0


@dataclass(frozen=True)
class RunSettings:
    """User-facing pipeline knobs; None means resolve automatically."""

    clock_size: int = 1024
    t0: float | None = None
    rotation_scale: float | None = None
    variant: str = VARIANT_THREE_STAGE
    window: str = WINDOW_UNIFORM
    epsilon: float = 0.01

    def __post_init__(self):
        if self.variant not in _VARIANT_MODES:
            raise ConfigError(f"unknown pipeline variant {self.variant!r}")
        if not 0 < self.epsilon <= 1:
            raise ConfigError("epsilon must lie in (0, 1]")


@dataclass(frozen=True)
class PipelineSpec:
    variant: str
    stages: tuple[PhaseEstimationConfig, ...]


@dataclass(frozen=True)
class PreparationResult:
    """Output of the parameter-preparation pipeline plus diagnostics."""

    state: QuantumState
    system_vector: np.ndarray
    passes: tuple[PhaseEstimationPass, ...]
    fidelity_vs_oracle: float
    lambda_exact: np.ndarray


def auto_t0(sigma_max: float, kappa: float, epsilon: float, clock_size: int) -> float:
    """Resolve t0 ~ 2*pi*kappa/eps, snapped so sigma_max sits exactly on a bin.

    The bin index is clamped to the anti-aliasing limit T/2 - 1, so very
    small epsilon degrades gracefully to the finest legal resolution.
    """
    bins_raw = sigma_max * kappa / epsilon
    bins = int(np.clip(round(bins_raw), 1, clock_size // 2 - 1))
    return 2.0 * np.pi * bins / sigma_max


def make_pipeline_spec(
    eig: EigDecomposition, settings: RunSettings, kappa: float | None = None
) -> PipelineSpec:
    """Instantiate per-stage configs for a spectrum and user settings."""
    abs_nonzero = np.abs(eig.eigenvalues[np.abs(eig.eigenvalues) > 1e-12])
    if abs_nonzero.size == 0:
        raise ConfigError("operator has no nonzero eigenvalues")
    sigma_max = float(abs_nonzero.max())
    sigma_min = float(abs_nonzero.min())
    if kappa is None:
        kappa = sigma_max / sigma_min
    t0 = settings.t0
    if t0 is None:
        t0 = auto_t0(sigma_max, kappa, settings.epsilon, settings.clock_size)
    stages = []
    for mode in _VARIANT_MODES[settings.variant]:
        scale = settings.rotation_scale
        if scale is None:
            scale = default_rotation_scale(mode, eig.eigenvalues)
        stages.append(
            PhaseEstimationConfig(
                clock_size=settings.clock_size,
                t0=t0,
                rotation_scale=scale,
                mode=mode,
                window=settings.window,
            )
        )
    return PipelineSpec(variant=settings.variant, stages=tuple(stages))


def _embedded_lambda_direction(problem: FitProblem, lam: np.ndarray) -> np.ndarray:
    vec = np.zeros(problem.m + problem.n, dtype=complex)
    vec[: problem.m] = lam
    norm = np.linalg.norm(vec)
    if norm <= 0:
        raise PostselectionError(
            "exact fit parameters are zero; the parameter state is unreachable"
        )
    return vec / norm


def prepare_fit_parameters(
    problem: FitProblem,
    spec: PipelineSpec,
    op: EmbeddedOperator | None = None,
    eig: EigDecomposition | None = None,
) -> PreparationResult:
    """Run the parameter-preparation pipeline on a normalized problem."""
    if op is None:
        op = embed(problem.design_matrix)
    if eig is None:
        eig = eig_hermitian(op)
    layout = RegisterLayout(
        clock_size=spec.stages[0].clock_size, system_dim=op.dim, flag_count=1
    )
    state = prepare_data_state(problem, layout)
    passes: list[PhaseEstimationPass] = []
    for config in spec.stages:
        state, info = apply_hermitian_via_pe(state, op, config, eig=eig)
        passes.append(info)
    out_vec = extract_system_vector(state)
    lam = classical_fit(problem).lambda_
    target = _embedded_lambda_direction(problem, lam)
    fidelity = float(abs(np.vdot(target, out_vec)) ** 2)
    return PreparationResult(
        state=state,
        system_vector=out_vec,
        passes=tuple(passes),
        fidelity_vs_oracle=fidelity,
        lambda_exact=lam,
    )


# --- fit quality ----------------------------------------------------------------


@dataclass(frozen=True)
class FitReport:
    """Everything a quality-estimation run measured and assumed."""

    overlap_sq_estimate: float
    std_error: float
    e_bound: float
    exact_overlap_sq: float
    exact_normalized_residual: float
    lambda_fidelity: float
    swap: SwapTestResult
    passes: tuple[PhaseEstimationPass, ...]
    degenerate_fit: bool
    total_shots: int
    swap_seed: int
    cost: CostReport
    settings: RunSettings
    delta: float

    @property
    def e_exact_reference(self) -> float:
        return self.exact_normalized_residual


def _quality_cost(problem: FitProblem, settings: RunSettings, delta: float) -> CostReport:
    cond = condition_estimate(problem.design_matrix)
    prof = sparsity_profile(problem.design_matrix, tol=1e-12)
    return cost_model(
        CostQuery(
            n=max(problem.n, 2),
            s=prof.s,
            kappa=max(cond.kappa, 1.0),
            epsilon=settings.epsilon,
            delta=delta,
            algorithm=ALG_QUALITY,
        )
    )


def estimate_fit_quality(
    problem: FitProblem, settings: RunSettings, plan: SwapTestPlan
) -> FitReport:
    """Prepare the fitted state, swap-test it against the data, report.

    If y is orthogonal to the column space of F the fitted state is
    physically unreachable (the postselection succeeds with probability
    exactly zero); the report then samples the swap test at its known
    p1 = 1/2 and flags the degeneracy.
    """
    op = embed(problem.design_matrix)
    eig = eig_hermitian(op)
    y_vec = data_state_vector(problem)

    f_dag_y = problem.design_matrix.conj().T @ problem.y
    degenerate = bool(np.linalg.norm(f_dag_y) < 1e-12)
    if degenerate:
        fitted_vec = np.zeros_like(y_vec)
        fitted_vec[0] = 1.0  # orthogonal placeholder; overlap with y is 0
        passes: tuple[PhaseEstimationPass, ...] = ()
        lambda_fidelity = float("nan")
    else:
        spec = make_pipeline_spec(eig, settings)
        prep = prepare_fit_parameters(problem, spec, op=op, eig=eig)
        project_config = PhaseEstimationConfig(
            clock_size=settings.clock_size,
            t0=spec.stages[0].t0,
            rotation_scale=default_rotation_scale(MODE_MULTIPLY, eig.eigenvalues),
            mode=MODE_MULTIPLY,
            window=settings.window,
        )
        fitted_state, project_info = apply_hermitian_via_pe(
            prep.state, op, project_config, eig=eig
        )
        fitted_vec = extract_system_vector(fitted_state)
        passes = prep.passes + (project_info,)
        lambda_fidelity = prep.fidelity_vs_oracle

    overlap_exact = exact_overlap_sq(y_vec, fitted_vec)
    swap = swap_test(fitted_vec, y_vec, plan)
    overlap_abs = math.sqrt(max(swap.overlap_sq_estimate, 0.0))
    e_bound = 2.0 * (1.0 - overlap_abs)
    exact_residual = 1.0 - overlap_exact
    # Bound identity 2*(1-ov) - (1-ov^2) = (1-ov)^2 >= 0, checked on the
    # exact values every run.
    ov = math.sqrt(max(overlap_exact, 0.0))
    assert 2.0 * (1.0 - ov) >= (1.0 - ov**2) - 1e-12

    return FitReport(
        overlap_sq_estimate=swap.overlap_sq_estimate,
        std_error=swap.std_error,
        e_bound=e_bound,
        exact_overlap_sq=overlap_exact,
        exact_normalized_residual=exact_residual,
        lambda_fidelity=lambda_fidelity,
        swap=swap,
        passes=passes,
        degenerate_fit=degenerate,
        total_shots=plan.shots,
        swap_seed=plan.seed,
        cost=_quality_cost(problem, settings, plan.delta),
        settings=settings,
        delta=plan.delta,
    )


# --- sparse learning --------------------------------------------------------------


@dataclass(frozen=True)
class LearnReport:
    recovered_support: tuple[int, ...]
    support_counts: tuple[int, ...]
    support_shots: int
    reconstruction: tomography.ReconstructedState
    setting_records: tuple[tomography.SettingRecord, ...]
    budget: tomography.TomographyBudget
    preparations_consumed: int
    fit_report: FitReport
    exact_full_residual: float
    exact_reduced_residual: float
    truncation_degraded: bool
    seed: int
    cost: CostReport


def support_shot_count(m_prime: int, alpha: float = DEFAULT_SUPPORT_ALPHA) -> int:
    return int(math.ceil(alpha * m_prime * math.log(m_prime + 1)))


def select_support(counts: np.ndarray, m_prime: int) -> tuple[int, ...]:
    """Indices of the m' largest counts; ties go to the smaller index."""
    order = np.lexsort((np.arange(len(counts)), -np.asarray(counts)))
    return tuple(sorted(int(i) for i in order[:m_prime]))


def learn_sparse_fit(
    problem: FitProblem,
    m_prime: int,
    settings: RunSettings,
    plan: SwapTestPlan,
    seed: int,
    budget: tomography.TomographyBudget | None = None,
    alpha: float = DEFAULT_SUPPORT_ALPHA,
    tomography_epsilon: float = 0.05,
) -> LearnReport:
    """Find the m' most relevant fit functions, refit, and reconstruct."""
    if not 1 <= m_prime <= problem.m:
        raise DimensionError(f"m' must lie in 1..{problem.m}, got {m_prime}")
    if budget is None:
        budget = tomography.plan_budget(m_prime, tomography_epsilon)

    op = embed(problem.design_matrix)
    eig = eig_hermitian(op)
    spec = make_pipeline_spec(eig, settings)
    prep = prepare_fit_parameters(problem, spec, op=op, eig=eig)

    shots = support_shot_count(m_prime, alpha)
    histogram = measure_computational(
        prep.state, shots, derive_seed(seed, STREAM_SUPPORT)
    )
    param_counts = histogram[: problem.m]
    support = select_support(param_counts, m_prime)

    reduced = restrict_columns(problem, support)  # raises if F'^dag F' singular
    red_op = embed(reduced.design_matrix)
    red_eig = eig_hermitian(red_op)
    red_spec = make_pipeline_spec(red_eig, settings)
    red_prep = prepare_fit_parameters(reduced, red_spec, op=red_op, eig=red_eig)

    param_vec = red_prep.system_vector[:m_prime]
    param_norm = np.linalg.norm(param_vec)
    if param_norm < 1e-9:
        raise PostselectionError("reduced parameter sector carries no weight")
    param_vec = param_vec / param_norm

    # The simulator is deterministic, so repeated preparations yield the
    # same amplitudes; preparations are counted rather than recomputed.
    consumed = 0

    def preparer() -> np.ndarray:
        nonlocal consumed
        consumed += 1
        return param_vec

    lam_red = classical_fit(reduced).lambda_
    oracle_dir = lam_red / np.linalg.norm(lam_red)
    reconstruction, records = tomography.reconstruct_pure_state(
        preparer, budget, derive_seed(seed, STREAM_TOMOGRAPHY), oracle=oracle_dir
    )

    fit_report = estimate_fit_quality(reduced, settings, plan)
    full_residual = classical_fit(problem).residual_energy
    reduced_residual = classical_fit(reduced).residual_energy
    cond = condition_estimate(problem.design_matrix)
    prof = sparsity_profile(problem.design_matrix, tol=1e-12)
    learn_cost = cost_model(
        CostQuery(
            n=max(problem.n, 2),
            s=prof.s,
            kappa=max(cond.kappa, 1.0),
            epsilon=settings.epsilon,
            delta=plan.delta,
            m_prime=m_prime,
            algorithm=ALG_LEARN,
        )
    )
    return LearnReport(
        recovered_support=support,
        support_counts=tuple(int(c) for c in param_counts),
        support_shots=shots,
        reconstruction=reconstruction,
        setting_records=tuple(records),
        budget=budget,
        preparations_consumed=consumed,
        fit_report=fit_report,
        exact_full_residual=full_residual,
        exact_reduced_residual=reduced_residual,
        truncation_degraded=bool(reduced_residual > full_residual + 1e-9),
        seed=seed,
        cost=learn_cost,
    )


# --- report serialization ----------------------------------------------------------


def _passes_to_json(passes) -> list[dict]:
    return [
        {
            "flagProbability": p.flag_probability,
            "clockZeroProbability": p.clock_zero_probability,
            "oracleDistance": None if math.isnan(p.oracle_distance) else p.oracle_distance,
        }
        for p in passes
    ]


def _settings_to_json(settings: RunSettings) -> dict:
    return {
        "clockSize": settings.clock_size,
        "t0": settings.t0,
        "rotationScale": settings.rotation_scale,
        "variant": settings.variant,
        "window": settings.window,
        "epsilon": settings.epsilon,
    }


def fit_report_to_json(report: FitReport, extra: dict | None = None) -> dict:
    from .cost import cost_report_to_json

    obj = {
        "schemaVersion": REPORT_SCHEMA_VERSION,
        "kind": "fit-report",
        "overlapSqEstimate": report.overlap_sq_estimate,
        "stdError": report.std_error,
        "eBound": report.e_bound,
        "exactOverlapSq": report.exact_overlap_sq,
        "exactNormalizedResidual": report.exact_normalized_residual,
        "lambdaFidelity": None
        if math.isnan(report.lambda_fidelity)
        else report.lambda_fidelity,
        "degenerateFit": report.degenerate_fit,
        "swap": {
            "onesObserved": report.swap.ones_observed,
            "shots": report.swap.shots,
            "pOneEstimate": report.swap.p_one_estimate,
        },
        "successProbabilities": _passes_to_json(report.passes),
        "totalShots": report.total_shots,
        "seeds": {"swap": report.swap_seed},
        "delta": report.delta,
        "settings": _settings_to_json(report.settings),
        "costModel": cost_report_to_json(report.cost),
    }
    if extra:
        obj.update(extra)
    return obj


def learn_report_to_json(report: LearnReport, extra: dict | None = None) -> dict:
    from .cost import cost_report_to_json

    rec = report.reconstruction
    obj = {
        "schemaVersion": REPORT_SCHEMA_VERSION,
        "kind": "learn-report",
        "recoveredSupport": list(report.recovered_support),
        "supportCounts": list(report.support_counts),
        "supportShots": report.support_shots,
        "reconstructedAmplitudes": [
            [float(z.real), float(z.imag)] for z in rec.amplitudes
        ],
        "reconstructionFidelity": rec.fidelity_vs_oracle,
        "budget": {
            "settings": report.budget.settings,
            "shotsPerSetting": report.budget.shots_per_setting,
            "epsilon": report.budget.epsilon,
            "totalShots": report.budget.total_shots,
        },
        "preparationsConsumed": report.preparations_consumed,
        "settingRecords": [
            {
                "kind": r.kind,
                "index": r.index,
                "phase": r.phase,
                "repetitions": r.repetitions,
                "shots": r.shots,
                "counts": list(r.counts),
            }
            for r in report.setting_records
        ],
        "fitReport": fit_report_to_json(report.fit_report),
        "exactFullResidual": report.exact_full_residual,
        "exactReducedResidual": report.exact_reduced_residual,
        "truncationDegraded": report.truncation_degraded,
        "seeds": {"master": report.seed},
        "costModel": cost_report_to_json(report.cost),
    }
    if extra:
        obj.update(extra)
    return obj
