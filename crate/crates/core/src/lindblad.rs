//! Lindblad master-equation engine for a time-independent generator.
//!
//! The equation of motion is
//!
//! ```text
//! rho' = -i [H, rho] + sum_i Gamma_i (L_i rho L_i^dag - 1/2 {L_i^dag L_i, rho})
//! ```
//!
//! with `H` in rad/ns (hbar absorbed into the units) and jump operators
//! dimensionless. Two independent evaluation routes are kept side by side:
//! the structured right-hand side ([`liouvillian_apply`]) drives the adaptive
//! integrator, while the vectorized superoperator built by Kronecker algebra
//! ([`build_liouvillian_matrix`]) feeds the matrix-exponential oracle
//! ([`propagate_expm`]). Agreement between the two is asserted by the
//! validation suites.
//!
//! Expected emitted-photon counts are accumulated per channel alongside the
//! state as `Gamma_i * integral Tr(L_i^dag L_i rho) dt`, using the same step
//! sequence and interpolant as the state itself. No trace renormalization is
//! ever applied; drift beyond tolerance is an error.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::ode::{solve_sampled, StepControl};
use crate::quantum::{pack_matrix, unpack_matrix, ComplexOperator, DensityMatrix};

/// One incoherent process: jump operator, rate, and whether its emission
/// lands in the collected broadband signal.
#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub operator: ComplexOperator,
    /// Decay rate in rad/ns. Must be non-negative.
    pub rate: f64,
    /// True if this channel's emission contributes to the detected signal.
    pub collected: bool,
    pub name: String,
}

impl JumpChannel {
    pub fn new(operator: ComplexOperator, rate: f64, collected: bool, name: &str) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "rate",
                constraint: "must be >= 0",
                value: rate,
            });
        }
        Ok(Self {
            operator,
            rate,
            collected,
            name: name.to_string(),
        })
    }
}

/// Error-control settings for [`integrate`]. Times in ns.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 100.0,
            initial_step: 1e-3,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("initial_step", self.initial_step),
        ] {
            if !(v > 0.0) {
                return Err(CoreError::InvalidParameter {
                    name,
                    constraint: "must be > 0",
                    value: v,
                });
            }
        }
        if self.initial_step > self.max_step {
            return Err(CoreError::InvalidParameter {
                name: "initial_step",
                constraint: "must be <= max_step",
                value: self.initial_step,
            });
        }
        Ok(())
    }
}

/// Sampled solution of one integration run.
///
/// `emitted[k][c]` is the cumulative expected photon number of channel `c`
/// up to `times[k]`; it is nondecreasing in `k` for every channel.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub emitted: Vec<Vec<f64>>,
    pub channel_names: Vec<String>,
    pub collected: Vec<bool>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory has at least one sample")
    }

    /// Sum of emitted counts over the collected channels at sample `k`.
    pub fn collected_emitted_at(&self, k: usize) -> f64 {
        self.emitted[k]
            .iter()
            .zip(&self.collected)
            .filter(|(_, coll)| **coll)
            .map(|(e, _)| e)
            .sum()
    }

    /// Sum of emitted counts over all channels at sample `k`.
    pub fn total_emitted_at(&self, k: usize) -> f64 {
        self.emitted[k].iter().sum()
    }
}

struct PreparedChannel {
    op: DMatrix<Complex64>,
    op_dag: DMatrix<Complex64>,
    opdag_op: DMatrix<Complex64>,
    rate: f64,
}

fn prepare_channels(channels: &[JumpChannel], dim: usize) -> Result<Vec<PreparedChannel>> {
    channels
        .iter()
        .map(|ch| {
            if ch.operator.dim() != dim {
                return Err(CoreError::DimensionMismatch {
                    context: "jump operator vs system",
                    expected: dim,
                    got: ch.operator.dim(),
                });
            }
            let op = ch.operator.matrix().clone();
            let op_dag = op.adjoint();
            let opdag_op = &op_dag * &op;
            Ok(PreparedChannel {
                op,
                op_dag,
                opdag_op,
                rate: ch.rate,
            })
        })
        .collect()
}

/// Structured right-hand side on a raw matrix; linear in `rho`, no
/// Hermiticity assumption on the input.
fn apply_generator(
    h: &DMatrix<Complex64>,
    channels: &[PreparedChannel],
    rho: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let minus_i = Complex64::new(0.0, -1.0);
    let mut out = (h * rho - rho * h) * minus_i;
    let half = Complex64::new(0.5, 0.0);
    for ch in channels {
        if ch.rate == 0.0 {
            continue;
        }
        let sandwich = &ch.op * rho * &ch.op_dag;
        let anti = (&ch.opdag_op * rho + rho * &ch.opdag_op) * half;
        out += (sandwich - anti) * Complex64::new(ch.rate, 0.0);
    }
    out
}

fn check_hamiltonian(h: &ComplexOperator) -> Result<()> {
    let dev = h.hermiticity_deviation();
    if dev > 1e-10 {
        return Err(CoreError::NotHermitian {
            deviation: dev,
            tolerance: 1e-10,
        });
    }
    Ok(())
}

/// Right-hand side of the master equation at `state`. The result is traceless
/// and Hermitian to round-off when the input is a valid density matrix.
pub fn liouvillian_apply(
    h: &ComplexOperator,
    channels: &[JumpChannel],
    state: &DensityMatrix,
) -> Result<ComplexOperator> {
    let dim = state.dim();
    if h.dim() != dim {
        return Err(CoreError::DimensionMismatch {
            context: "Hamiltonian vs state",
            expected: dim,
            got: h.dim(),
        });
    }
    check_hamiltonian(h)?;
    let prepared = prepare_channels(channels, dim)?;
    Ok(ComplexOperator::from_matrix(apply_generator(
        h.matrix(),
        &prepared,
        state.matrix(),
    )))
}

/// The `dim^2 x dim^2` superoperator `M` with `vec(rho') = M vec(rho)`
/// (column-major vectorization), assembled by Kronecker algebra:
///
/// ```text
/// M = -i (I x H - H^T x I)
///   + sum_i Gamma_i (conj(L_i) x L_i - 1/2 I x L_i^dag L_i - 1/2 (L_i^dag L_i)^T x I)
/// ```
pub fn build_liouvillian_matrix(
    h: &ComplexOperator,
    channels: &[JumpChannel],
) -> Result<ComplexOperator> {
    check_hamiltonian(h)?;
    let dim = h.dim();
    let prepared = prepare_channels(channels, dim)?;
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let minus_i = Complex64::new(0.0, -1.0);

    let hm = h.matrix();
    let mut m = (id.kronecker(hm) - hm.transpose().kronecker(&id)) * minus_i;
    let half = Complex64::new(0.5, 0.0);
    for ch in &prepared {
        if ch.rate == 0.0 {
            continue;
        }
        let conj_l = ch.op_dag.transpose();
        let mut term = conj_l.kronecker(&ch.op);
        term -= id.kronecker(&ch.opdag_op) * half;
        term -= ch.opdag_op.transpose().kronecker(&id) * half;
        m += term * Complex64::new(ch.rate, 0.0);
    }
    Ok(ComplexOperator::from_matrix(m))
}

/// Largest real part over the spectrum of a complex matrix, computed through
/// the real embedding (whose spectrum is the union of the matrix's and its
/// conjugate's). A Lindblad generator must return a value <= 0 up to round-off.
pub fn spectral_abscissa(m: &ComplexOperator) -> f64 {
    let n = m.dim();
    let mut embed = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m.matrix()[(i, j)];
            embed[(i, j)] = z.re;
            embed[(i + n, j + n)] = z.re;
            embed[(i, j + n)] = -z.im;
            embed[(i + n, j)] = z.im;
        }
    }
    embed
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn validate_samples(sample_times: &[f64], t_end: f64) -> Result<Vec<f64>> {
    if !(t_end > 0.0) {
        return Err(CoreError::InvalidParameter {
            name: "t_end",
            constraint: "must be > 0",
            value: t_end,
        });
    }
    let mut samples: Vec<f64> = Vec::with_capacity(sample_times.len() + 1);
    if sample_times.first() != Some(&0.0) {
        samples.push(0.0);
    }
    samples.extend_from_slice(sample_times);
    if samples.len() == 1 {
        samples.push(t_end);
    }
    for w in samples.windows(2) {
        if !(w[1] > w[0]) {
            return Err(CoreError::InvalidSampleTimes {
                reason: format!("times must be strictly increasing, got {} after {}", w[1], w[0]),
            });
        }
    }
    let last = *samples.last().unwrap();
    if last > t_end || samples[0] < 0.0 {
        return Err(CoreError::InvalidSampleTimes {
            reason: format!("times must lie within [0, {t_end}], got up to {last}"),
        });
    }
    Ok(samples)
}

/// Assemble the real linear generator acting on
/// `y = [Re vec(rho); Im vec(rho); emitted_0 .. emitted_{nc-1}]`, one column
/// at a time from the structured right-hand side.
fn real_generator(
    h: &DMatrix<Complex64>,
    channels: &[PreparedChannel],
    dim: usize,
) -> DMatrix<f64> {
    let n2 = dim * dim;
    let nc = channels.len();
    let m = 2 * n2 + nc;
    let mut gen = DMatrix::<f64>::zeros(m, m);
    let mut basis = DVector::<f64>::zeros(2 * n2);
    for col in 0..2 * n2 {
        basis[col] = 1.0;
        let b = unpack_matrix(&basis, dim);
        basis[col] = 0.0;

        let db = apply_generator(h, channels, &b);
        let packed = pack_matrix(&db);
        for row in 0..2 * n2 {
            gen[(row, col)] = packed[row];
        }
        for (c, ch) in channels.iter().enumerate() {
            // d emitted_c / dt = rate * Re Tr(L^dag L rho)
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                for j in 0..dim {
                    tr += ch.opdag_op[(i, j)] * b[(j, i)];
                }
            }
            gen[(2 * n2 + c, col)] = ch.rate * tr.re;
        }
    }
    gen
}

/// Integrate the master equation from `rho0` to `t_end`, sampling states and
/// cumulative per-channel emission at `sample_times` (a leading 0 is added if
/// absent). State invariants are checked at every sample.
pub fn integrate(
    rho0: &DensityMatrix,
    h: &ComplexOperator,
    channels: &[JumpChannel],
    t_end: f64,
    cfg: &IntegratorConfig,
    sample_times: &[f64],
) -> Result<Trajectory> {
    cfg.validate()?;
    check_hamiltonian(h)?;
    let dim = rho0.dim();
    if h.dim() != dim {
        return Err(CoreError::DimensionMismatch {
            context: "Hamiltonian vs initial state",
            expected: dim,
            got: h.dim(),
        });
    }
    let samples = validate_samples(sample_times, t_end)?;
    let prepared = prepare_channels(channels, dim)?;

    let n2 = dim * dim;
    let nc = channels.len();
    let gen = real_generator(h.matrix(), &prepared, dim);

    let mut y0 = DVector::<f64>::zeros(2 * n2 + nc);
    y0.rows_mut(0, 2 * n2).copy_from(&pack_matrix(rho0.matrix()));

    let ctrl = StepControl {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_step: cfg.max_step,
        initial_step: cfg.initial_step,
    };
    let span = *samples.last().unwrap();
    let raw = solve_sampled(|_, y| &gen * y, &y0, span, &samples, &ctrl)?;

    let mut states = Vec::with_capacity(samples.len());
    let mut emitted: Vec<Vec<f64>> = Vec::with_capacity(samples.len());
    let mut prev: Vec<f64> = vec![0.0; nc];
    for (t, y) in samples.iter().zip(&raw) {
        let rho_part = DVector::from_iterator(2 * n2, y.iter().take(2 * n2).copied());
        let mat = unpack_matrix(&rho_part, dim);
        let state = DensityMatrix::new(mat).map_err(|e| CoreError::InvariantViolation {
            t: *t,
            what: e.to_string(),
        })?;
        states.push(state);

        let mut row = Vec::with_capacity(nc);
        for (c, p) in prev.iter_mut().enumerate() {
            let raw_val = y[2 * n2 + c];
            // The dense interpolant of a nondecreasing component may dip by
            // an amount below the error tolerance; clamp it to monotone.
            debug_assert!(raw_val >= *p - 1e-9 * (1.0 + (*p).abs()));
            let v = raw_val.max(*p);
            row.push(v);
            *p = v;
        }
        emitted.push(row);
    }

    Ok(Trajectory {
        times: samples,
        states,
        emitted,
        channel_names: channels.iter().map(|c| c.name.clone()).collect(),
        collected: channels.iter().map(|c| c.collected).collect(),
    })
}

/// Matrix-exponential propagation of the vectorized state: the independent
/// oracle for [`integrate`]. Returns `unvec(exp(M t) vec(rho0))`.
pub fn propagate_expm(
    rho0: &DensityMatrix,
    h: &ComplexOperator,
    channels: &[JumpChannel],
    t: f64,
) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return Err(CoreError::InvalidParameter {
            name: "t",
            constraint: "must be >= 0",
            value: t,
        });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let m = build_liouvillian_matrix(h, channels)?;
    let dim = rho0.dim();
    let n2 = dim * dim;
    if m.dim() != n2 {
        return Err(CoreError::DimensionMismatch {
            context: "Liouvillian vs state",
            expected: n2,
            got: m.dim(),
        });
    }

    // exp of the complex matrix through its real embedding, which commutes
    // with the exponential.
    let mut embed = DMatrix::<f64>::zeros(2 * n2, 2 * n2);
    for i in 0..n2 {
        for j in 0..n2 {
            let z = m.matrix()[(i, j)] * Complex64::new(t, 0.0);
            embed[(i, j)] = z.re;
            embed[(i + n2, j + n2)] = z.re;
            embed[(i, j + n2)] = -z.im;
            embed[(i + n2, j)] = z.im;
        }
    }
    let propagator = embed.exp();
    let v = propagator * pack_matrix(rho0.matrix());
    DensityMatrix::new(unpack_matrix(&v, dim))
}
