"""Dense state-vector simulator for the eigenvalue-arithmetic pipeline.

Registers and layout
--------------------
A simulator state spans three registers, stored as a complex array of
shape (T, D, 2**flags):

* clock: T basis states (T a power of two >= 2), axis 0.  Before the
  Fourier transform the index is the time step tau; after it, the
  frequency bin k.
* system: D = M + N basis states, axis 1.  Indices 0..M-1 are the
  parameter sector, M..M+N-1 the data sector (matching ``linalg.embed``).
* flag: a single qubit, axis 2, used by the eigenvalue-controlled
  rotation.

Conventions
-----------
* Conditional evolution applies exp(-i * H * tau * t0 / T) on the clock
  branch tau, computed exactly from the spectral decomposition of H.
* The forward clock Fourier transform uses the kernel
  exp(+2*pi*i*k*tau/T)/sqrt(T).
* Frequency bins decode to signed eigenvalue estimates: bins k >= T/2
  wrap to k - T, so the Hermitian embedding's negative eigenvalues
  decode unambiguously provided sigma_max * t0 / (2*pi) < T/2 (the
  anti-aliasing bound enforced on every config).
* Clock windows: "uniform" (amplitude 1/sqrt(T) everywhere) makes phase
  estimation exact whenever every populated eigenvalue satisfies
  E * t0 / (2*pi) integral; "sine" (amplitude
  sqrt(2/T)*sin(pi*(tau+1/2)/T)) trades that exactness for much faster
  tail decay on incommensurate spectra.  Window preparation and its
  adjoint are one self-inverse reflection exchanging clock state |0> and
  the window vector, so both directions are exactly unitary.

Every operation is pure: states are treated as immutable and new arrays
are returned.  Only postselection is non-unitary; it reports the exact
branch probability instead of sampling.  Physical sampling happens only
where statistics are the point: the swap test and computational-basis
measurement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DimensionError, PostselectionError
from .linalg import (
    EigDecomposition,
    EmbeddedOperator,
    apply_matrix_function,
    as_complex_vector,
    eig_hermitian,
)
from .problems import FitProblem

DEFAULT_AMPLITUDE_CAP = 1 << 22

WINDOW_UNIFORM = "uniform"
WINDOW_SINE = "sine"

MODE_MULTIPLY = "multiply"
MODE_INVERT = "invert"

# Slack for validating rotation-scale bounds against the spectrum.
_C_BOUND_SLACK = 1e-9


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class RegisterLayout:
    clock_size: int
    system_dim: int
    flag_count: int = 1

    def __post_init__(self):
        if not _is_power_of_two(self.clock_size) or self.clock_size < 2:
            raise ConfigError(f"clock size {self.clock_size} must be a power of two >= 2")
        if self.system_dim < 1:
            raise DimensionError("system dimension must be >= 1")
        if self.flag_count not in (0, 1):
            raise ConfigError("flag count must be 0 or 1")
        if self.total_amplitudes > DEFAULT_AMPLITUDE_CAP:
            raise DimensionError(
                f"state of {self.total_amplitudes} amplitudes exceeds cap "
                f"{DEFAULT_AMPLITUDE_CAP}"
            )

    @property
    def total_amplitudes(self) -> int:
        return self.clock_size * self.system_dim * (1 << self.flag_count)


@dataclass(frozen=True)
class QuantumState:
    layout: RegisterLayout
    amplitudes: np.ndarray  # shape (T, D, 2**flag_count); do not mutate

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class PhaseEstimationConfig:
    """Knobs of one eigenvalue-arithmetic pass.

    ``rotation_scale`` is the constant C of the flag rotation; in
    multiply mode the flag-1 weight per bin is C * E_k, in invert mode
    C / E_k (zero on the k = 0 bin, matching pseudo-inverse semantics).
    """

    clock_size: int
    t0: float
    rotation_scale: float
    mode: str
    window: str = WINDOW_UNIFORM

    def __post_init__(self):
        if not _is_power_of_two(self.clock_size) or self.clock_size < 2:
            raise ConfigError(f"clock size {self.clock_size} must be a power of two >= 2")
        if self.t0 < 0:
            raise ConfigError("t0 must be nonnegative")
        if self.rotation_scale <= 0:
            raise ConfigError("rotation scale C must be positive")
        if self.mode not in (MODE_MULTIPLY, MODE_INVERT):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.window not in (WINDOW_UNIFORM, WINDOW_SINE):
            raise ConfigError(f"unknown window {self.window!r}")


@dataclass(frozen=True)
class PhaseEstimationPass:
    """Exact diagnostics of one pass.

    ``flag_probability`` is the exact postselection probability of the
    flag reading 1; ``clock_zero_probability`` the probability, given
    that, of the clock having returned to |0>; their shortfall from 1 is
    the phase-estimation leakage.  ``oracle_distance`` is the Euclidean
    distance (minimized over global phase) between the produced system
    state and the exact spectral result.
    """

    flag_probability: float
    clock_zero_probability: float
    oracle_distance: float

    @property
    def success_probability(self) -> float:
        return self.flag_probability


def validate_config(config: PhaseEstimationConfig, eigenvalues) -> None:
    """Check anti-aliasing and rotation-scale bounds against a spectrum."""
    if config.t0 <= 0:
        raise ConfigError("a full pass needs t0 > 0")
    energies = np.asarray(eigenvalues, dtype=float)
    abs_nonzero = np.abs(energies[np.abs(energies) > 1e-12])
    if abs_nonzero.size == 0:
        return
    e_max = float(abs_nonzero.max())
    e_min = float(abs_nonzero.min())
    if e_max * config.t0 / (2 * np.pi) >= config.clock_size / 2:
        raise ConfigError(
            f"aliasing: sigma_max*t0/(2*pi) = {e_max * config.t0 / (2 * np.pi):.3f} "
            f"must stay below T/2 = {config.clock_size / 2}"
        )
    if config.mode == MODE_MULTIPLY and config.rotation_scale > 1 / e_max + _C_BOUND_SLACK:
        raise ConfigError(
            f"multiply-mode C = {config.rotation_scale:.3g} exceeds 1/sigma_max "
            f"= {1 / e_max:.3g}; the rotated state would not be normalizable"
        )
    if config.mode == MODE_INVERT and config.rotation_scale > e_min + _C_BOUND_SLACK:
        raise ConfigError(
            f"invert-mode C = {config.rotation_scale:.3g} exceeds sigma_min "
            f"= {e_min:.3g}; the rotated state would not be normalizable"
        )


def default_rotation_scale(mode: str, eigenvalues) -> float:
    """Largest C the normalization constraint allows for the spectrum."""
    energies = np.asarray(eigenvalues, dtype=float)
    abs_nonzero = np.abs(energies[np.abs(energies) > 1e-12])
    if abs_nonzero.size == 0:
        raise ConfigError("operator has no nonzero eigenvalues")
    if mode == MODE_MULTIPLY:
        return 1.0 / float(abs_nonzero.max())
    if mode == MODE_INVERT:
        return float(abs_nonzero.min())
    raise ConfigError(f"unknown mode {mode!r}")


# --- state preparation --------------------------------------------------------


def prepare_data_state(problem: FitProblem, layout: RegisterLayout) -> QuantumState:
    """Full-register state holding y in the data sector, clock and flag at |0>."""
    m = problem.m
    dim = problem.m + problem.n
    if layout.system_dim != dim:
        raise DimensionError(
            f"layout system dim {layout.system_dim} != problem dim {dim}"
        )
    amp = np.zeros((layout.clock_size, dim, 1 << layout.flag_count), dtype=complex)
    amp[0, m : m + problem.n, 0] = problem.y
    return QuantumState(layout=layout, amplitudes=amp)


def state_from_system_vector(vector, layout: RegisterLayout) -> QuantumState:
    v = as_complex_vector(vector)
    if v.size != layout.system_dim:
        raise DimensionError("system vector length does not match layout")
    amp = np.zeros((layout.clock_size, v.size, 1 << layout.flag_count), dtype=complex)
    amp[0, :, 0] = v
    return QuantumState(layout=layout, amplitudes=amp)


def data_state_vector(problem: FitProblem) -> np.ndarray:
    """System-register vector (0, y): the data state without clock/flag."""
    v = np.zeros(problem.m + problem.n, dtype=complex)
    v[problem.m :] = problem.y
    return v


def prepare_sine_clock(clock_size: int) -> np.ndarray:
    """Sine-tapered clock window sqrt(2/T) * sin(pi*(tau+1/2)/T)."""
    if clock_size < 2:
        raise ConfigError("sine window needs T >= 2 (normalization fails at T=1)")
    tau = np.arange(clock_size)
    return np.sqrt(2.0 / clock_size) * np.sin(np.pi * (tau + 0.5) / clock_size)


def prepare_uniform_clock(clock_size: int) -> np.ndarray:
    if clock_size < 2:
        raise ConfigError("clock needs T >= 2")
    return np.full(clock_size, 1.0 / np.sqrt(clock_size))


def clock_window(clock_size: int, window: str) -> np.ndarray:
    if window == WINDOW_SINE:
        return prepare_sine_clock(clock_size)
    if window == WINDOW_UNIFORM:
        return prepare_uniform_clock(clock_size)
    raise ConfigError(f"unknown window {window!r}")


def reflect_clock_window(state: QuantumState, window: np.ndarray) -> QuantumState:
    """Self-inverse reflection exchanging clock |0> and the window vector.

    Used for both window preparation (clock at |0>) and its adjoint during
    uncomputation; being a Householder reflection it is exactly unitary.
    """
    t = state.layout.clock_size
    if window.shape != (t,):
        raise DimensionError("window length does not match clock size")
    v = window.astype(complex).copy()
    v[0] -= 1.0
    vnorm_sq = float(np.vdot(v, v).real)
    amp = state.amplitudes
    if vnorm_sq < 1e-30:  # window is |0> itself
        return QuantumState(layout=state.layout, amplitudes=amp.copy())
    overlap = np.tensordot(v.conj(), amp, axes=([0], [0]))  # shape (D, F)
    new_amp = amp - (2.0 / vnorm_sq) * v[:, None, None] * overlap[None, :, :]
    return QuantumState(layout=state.layout, amplitudes=new_amp)


# --- pipeline primitives -------------------------------------------------------


def conditional_evolution(
    state: QuantumState,
    eig: EigDecomposition,
    config: PhaseEstimationConfig,
    inverse: bool = False,
) -> QuantumState:
    """Apply exp(-i*H*tau*t0/T) on each clock branch tau (exact, spectral)."""
    t = state.layout.clock_size
    if eig.eigenvectors.shape[0] != state.layout.system_dim:
        raise DimensionError("operator dimension does not match system register")
    sign = 1.0 if inverse else -1.0
    tau = np.arange(t)
    phases = np.exp(1j * sign * np.outer(tau, eig.eigenvalues) * (config.t0 / t))
    vecs = eig.eigenvectors
    in_eigen = np.einsum("tdf,dj->tjf", state.amplitudes, vecs.conj())
    in_eigen *= phases[:, :, None]
    new_amp = np.einsum("tjf,dj->tdf", in_eigen, vecs)
    return QuantumState(layout=state.layout, amplitudes=new_amp)


def qft_clock(state: QuantumState, direction: str = "forward") -> QuantumState:
    """Unitary DFT on the clock register, kernel exp(2*pi*i*k*tau/T)/sqrt(T)."""
    if direction == "forward":
        new_amp = np.fft.ifft(state.amplitudes, axis=0, norm="ortho")
    elif direction == "inverse":
        new_amp = np.fft.fft(state.amplitudes, axis=0, norm="ortho")
    else:
        raise ConfigError(f"unknown QFT direction {direction!r}")
    return QuantumState(layout=state.layout, amplitudes=new_amp)


def decode_eigenvalue(k, clock_size: int, t0: float):
    """Signed eigenvalue estimate 2*pi*k_signed/t0 for frequency bin k.

    Bins at or above T/2 represent negative frequencies (k - T), which is
    what the +/- paired spectrum of the Hermitian embedding needs.
    """
    if t0 <= 0:
        raise ConfigError("decoding needs t0 > 0")
    k_arr = np.asarray(k)
    if np.any(k_arr < 0) or np.any(k_arr >= clock_size):
        raise ConfigError(f"bin index out of range 0..{clock_size - 1}")
    signed = np.where(k_arr < clock_size // 2, k_arr, k_arr - clock_size)
    result = 2.0 * np.pi * signed / t0
    return float(result) if np.isscalar(k) else result


def rotation_weights(config: PhaseEstimationConfig) -> np.ndarray:
    """Flag-1 amplitude factor per frequency bin.

    Invert mode assigns weight 0 to the k = 0 bin (pseudo-inverse) and
    clips magnitudes to 1 on leakage bins whose decoded estimate falls
    below C; populated bins of a valid config are never clipped.
    """
    k = np.arange(config.clock_size)
    energies = decode_eigenvalue(k, config.clock_size, config.t0)
    if config.mode == MODE_MULTIPLY:
        weights = config.rotation_scale * energies
    else:
        with np.errstate(divide="ignore"):
            weights = config.rotation_scale / energies
        weights[0] = 0.0
    return np.clip(weights, -1.0, 1.0)


def controlled_rotation(state: QuantumState, config: PhaseEstimationConfig) -> QuantumState:
    """Rotate the flag qubit by the per-bin eigenvalue weight.

    Maps |0> -> c|0> + w|1> and |1> -> -w|0> + c|1> with c = sqrt(1-w^2),
    so the operation is unitary regardless of the incoming flag state.
    """
    if state.layout.flag_count != 1:
        raise ConfigError("controlled rotation needs a flag qubit")
    w = rotation_weights(config)[:, None]
    c = np.sqrt(1.0 - w**2)
    amp = state.amplitudes
    new_amp = np.empty_like(amp)
    new_amp[:, :, 0] = c * amp[:, :, 0] - w * amp[:, :, 1]
    new_amp[:, :, 1] = w * amp[:, :, 0] + c * amp[:, :, 1]
    return QuantumState(layout=state.layout, amplitudes=new_amp)


def uncompute_clock(
    state: QuantumState, eig: EigDecomposition, config: PhaseEstimationConfig
) -> QuantumState:
    """Reverse the phase-estimation front end.

    Inverse QFT, inverse conditional evolution, then the window
    reflection.  When every populated eigenvalue sits exactly on a bin
    (E*t0/(2*pi) integral, uniform window) the clock returns exactly to
    |0>; otherwise the weight left outside |0> measures the leakage.
    """
    s = qft_clock(state, "inverse")
    s = conditional_evolution(s, eig, config, inverse=True)
    return reflect_clock_window(s, clock_window(config.clock_size, config.window))


def postselect_flag(state: QuantumState, value: int = 1) -> tuple[QuantumState, float]:
    """Project onto the given flag value and renormalize; exact probability."""
    if state.layout.flag_count != 1:
        raise ConfigError("state has no flag qubit")
    if value not in (0, 1):
        raise ConfigError("flag value must be 0 or 1")
    branch = state.amplitudes[:, :, value]
    prob = float(np.vdot(branch, branch).real)
    if prob <= 1e-300:
        raise PostselectionError(f"flag={value} branch has zero probability")
    new_amp = np.zeros_like(state.amplitudes)
    new_amp[:, :, value] = branch / np.sqrt(prob)
    return QuantumState(layout=state.layout, amplitudes=new_amp), prob


def postselect_clock_zero(state: QuantumState) -> tuple[QuantumState, float]:
    """Project the clock onto |0> and renormalize; exact probability."""
    branch = state.amplitudes[0]
    prob = float(np.vdot(branch, branch).real)
    if prob <= 1e-300:
        raise PostselectionError("clock |0> branch has zero probability")
    new_amp = np.zeros_like(state.amplitudes)
    new_amp[0] = branch / np.sqrt(prob)
    return QuantumState(layout=state.layout, amplitudes=new_amp), prob


def clock_zero_weight(state: QuantumState) -> float:
    """Probability weight of the clock |0> branch (1 - leakage)."""
    branch = state.amplitudes[0]
    return float(np.vdot(branch, branch).real) / max(state.norm_sq(), 1e-300)


def extract_system_vector(state: QuantumState) -> np.ndarray:
    """System-register vector of a state whose clock and flag are definite."""
    amp = state.amplitudes
    collapsed = amp.sum(axis=(0, 2))  # valid once only one branch is populated
    norm = np.linalg.norm(collapsed)
    if abs(norm - 1.0) > 1e-6:
        raise DimensionError(
            "state is entangled with clock or flag; postselect before extracting"
        )
    return collapsed / norm


# --- full pass -----------------------------------------------------------------


def _mode_function(mode: str):
    if mode == MODE_MULTIPLY:
        return lambda e: e
    return lambda e: 1.0 / e


def phase_distance(a, b) -> float:
    """Euclidean distance between unit vectors, minimized over global phase.

    Computed from the aligned difference vector rather than as
    sqrt(2 - 2*overlap), which would lose half the significant digits to
    cancellation precisely when the states agree.
    """
    av = as_complex_vector(a)
    bv = as_complex_vector(b)
    overlap = np.vdot(bv, av)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(av - phase * bv))


def apply_hermitian_via_pe(
    state: QuantumState,
    op: EmbeddedOperator,
    config: PhaseEstimationConfig,
    eig: EigDecomposition | None = None,
) -> tuple[QuantumState, PhaseEstimationPass]:
    """One full eigenvalue-arithmetic pass on a clock-and-flag-fresh state.

    Window preparation, conditional evolution, clock QFT, flag rotation,
    uncomputation, then postselection of flag = 1 followed by clock = |0>.
    The result is a fresh state (clock |0>, flag |0>) whose system register
    approximates f(H)|psi> / ||f(H)|psi>|| with f set by the mode, together
    with exact pass diagnostics.
    """
    if eig is None:
        eig = eig_hermitian(op)
    validate_config(config, eig.eigenvalues)
    psi_in = extract_system_vector(state)

    window = clock_window(config.clock_size, config.window)
    s = reflect_clock_window(state, window)
    s = conditional_evolution(s, eig, config)
    s = qft_clock(s, "forward")
    s = controlled_rotation(s, config)
    s = uncompute_clock(s, eig, config)
    s, flag_prob = postselect_flag(s, 1)
    s, clock_prob = postselect_clock_zero(s)

    out_vec = s.amplitudes[0, :, 1]
    exact = apply_matrix_function(eig, _mode_function(config.mode), psi_in)
    exact_norm = np.linalg.norm(exact)
    if exact_norm > 0:
        distance = phase_distance(out_vec, exact / exact_norm)
    else:  # input entirely in the kernel; any output direction is leakage
        distance = float("nan")

    fresh = state_from_system_vector(out_vec, state.layout)
    info = PhaseEstimationPass(
        flag_probability=flag_prob,
        clock_zero_probability=clock_prob,
        oracle_distance=distance,
    )
    return fresh, info


# --- sampling-based measurements ------------------------------------------------


@dataclass(frozen=True)
class SwapTestPlan:
    shots: int
    delta: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ConfigError("swap test needs at least one shot")


@dataclass(frozen=True)
class SwapTestResult:
    ones_observed: int
    shots: int
    p_one_estimate: float
    overlap_sq_estimate: float
    std_error: float


def swap_test(state_a, state_b, plan: SwapTestPlan) -> SwapTestResult:
    """Sampled swap test between two normalized system vectors.

    The outcome-1 probability is (1 - |<a|b>|^2)/2; shots are Bernoulli
    draws from the exact probability, so the estimator statistics are
    genuine while the underlying overlap is computed from amplitudes.
    """
    a = as_complex_vector(state_a)
    b = as_complex_vector(state_b)
    if a.size != b.size:
        raise DimensionError("swap test requires equal system dimensions")
    overlap_sq = float(abs(np.vdot(a, b)) ** 2)
    p_one = min(max((1.0 - overlap_sq) / 2.0, 0.0), 0.5)
    rng = np.random.default_rng(plan.seed)
    ones = int(rng.binomial(plan.shots, p_one))
    p_hat = ones / plan.shots
    estimate = min(max(1.0 - 2.0 * p_hat, 0.0), 1.0)
    std_error = 2.0 * float(np.sqrt(p_hat * (1.0 - p_hat) / plan.shots))
    return SwapTestResult(
        ones_observed=ones,
        shots=plan.shots,
        p_one_estimate=p_hat,
        overlap_sq_estimate=estimate,
        std_error=std_error,
    )


def exact_overlap_sq(state_a, state_b) -> float:
    a = as_complex_vector(state_a)
    b = as_complex_vector(state_b)
    return float(abs(np.vdot(a, b)) ** 2)


def measure_computational(state, shots: int, seed: int) -> np.ndarray:
    """Histogram of system-basis measurement outcomes.

    Accepts a QuantumState (marginalizing over clock and flag) or a bare
    system vector.  Returns integer counts per basis index, reproducible
    under the seed.
    """
    if shots < 1:
        raise ConfigError("need at least one shot")
    if isinstance(state, QuantumState):
        probs = np.abs(state.amplitudes) ** 2
        marginal = probs.sum(axis=(0, 2))
    else:
        marginal = np.abs(as_complex_vector(state)) ** 2
    total = marginal.sum()
    if total <= 0:
        raise DimensionError("state has zero norm")
    rng = np.random.default_rng(seed)
    return rng.multinomial(shots, marginal / total)


def state_to_json(state: QuantumState) -> dict:
    """Debug dump: layout plus flattened amplitudes (clock, system, flag order)."""
    flat = state.amplitudes.reshape(-1)
    return {
        "layout": {
            "clockSize": state.layout.clock_size,
            "systemDim": state.layout.system_dim,
            "flagCount": state.layout.flag_count,
        },
        "amplitudes": [[float(z.real), float(z.imag)] for z in flat],
    }
