//! Eight-level quantum dot molecule model: transition taxonomy, rate set,
//! jump channels, and rotating-frame Hamiltonians.
//!
//! The basis is `{S, T0, T+, T-, X-, X+, X1, X2}`. Spin-conserving optical
//! transitions decay fast (Gamma_O); heavy-light hole mixing weakly enables
//! the forbidden set (Gamma_F). The isolated pairs T+<->X+ and T-<->X- are the
//! cycling transitions of the readout stage; X+/X- leak to S only through the
//! forbidden channels, which is what ultimately bounds the photon budget.
//!
//! Rotating-frame conventions: bare level energies are eliminated (every
//! driven transition is taken at resonance unless a detuning is given), a
//! drive on one level pair couples no other pair, and a resonantly driven
//! pair oscillates with period 2pi/Omega under `H = (Omega/2) sigma_x`, so
//! `t_pi = pi/Omega`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::lindblad::JumpChannel;
use crate::quantum::{ComplexOperator, Level};
use crate::units::angular_from_ghz;

/// Physical rates in internal units (rad/ns). See [`crate::units`] for the
/// conversion conventions; [`RateSet::default`] carries the reference
/// parameter set (Gamma_O = 1 GHz, Gamma_F = 1 MHz, 1/Gamma_1 = 100 us,
/// 1/Gamma_2,ST = 200 ns, 1/Gamma_2,T = 5 ns, Omega_C = 1 GHz,
/// Omega_MW = 100 MHz).
#[derive(Debug, Clone, PartialEq)]
pub struct RateSet {
    /// Allowed optical decay rate.
    pub gamma_o: f64,
    /// Forbidden optical decay rate.
    pub gamma_f: f64,
    /// Ground-state depolarization rate (total leave rate per state).
    pub gamma_1: f64,
    /// Singlet-triplet qubit dephasing rate (S-T0 coherence decay).
    pub gamma_2_st: f64,
    /// Triplet-manifold dephasing rate; the T0-T+/T0-T- coherences decay at
    /// a quarter of this value, matching the (Delta m)^2 weighting of
    /// magnetic dephasing across the Zeeman-split manifold.
    pub gamma_2_t: f64,
    /// Optical cycling Rabi frequency.
    pub omega_c: f64,
    /// Microwave Rabi frequency.
    pub omega_mw: f64,
    /// Optional per-pair ground depolarization rates; `None` uses the uniform
    /// infinite-temperature split `gamma_1 / 3` on every pair.
    pub depol_pairs: Option<DepolPairs>,
}

/// Symmetric per-pair depolarization rates among the four ground states
/// (rad/ns, applied in both directions of each pair).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolPairs {
    pub s_t0: f64,
    pub s_tp: f64,
    pub s_tm: f64,
    pub t0_tp: f64,
    pub t0_tm: f64,
    pub tp_tm: f64,
}

impl Default for RateSet {
    fn default() -> Self {
        Self {
            gamma_o: angular_from_ghz(1.0),
            gamma_f: angular_from_ghz(1e-3),
            gamma_1: 1e-5,
            gamma_2_st: 5e-3,
            gamma_2_t: 0.2,
            omega_c: angular_from_ghz(1.0),
            omega_mw: angular_from_ghz(0.1),
            depol_pairs: None,
        }
    }
}

impl RateSet {
    /// Validate the rate set. Returns warnings for physically suspicious but
    /// admissible values (currently only `gamma_f > gamma_o`).
    pub fn validate(&self) -> Result<Vec<String>> {
        let fields = [
            ("gamma_O", self.gamma_o),
            ("gamma_F", self.gamma_f),
            ("gamma_1", self.gamma_1),
            ("gamma_2_ST", self.gamma_2_st),
            ("gamma_2_T", self.gamma_2_t),
            ("omega_C", self.omega_c),
            ("omega_MW", self.omega_mw),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) {
                return Err(CoreError::InvalidParameter {
                    name,
                    constraint: "must be >= 0 and finite",
                    value: v,
                });
            }
        }
        if let Some(p) = &self.depol_pairs {
            for v in [p.s_t0, p.s_tp, p.s_tm, p.t0_tp, p.t0_tm, p.tp_tm] {
                if !(v >= 0.0) {
                    return Err(CoreError::InvalidParameter {
                        name: "depol pair rate",
                        constraint: "must be >= 0 and finite",
                        value: v,
                    });
                }
            }
        }
        let mut warnings = Vec::new();
        if self.gamma_f > self.gamma_o {
            warnings.push(format!(
                "gamma_F ({:.3e} rad/ns) exceeds gamma_O ({:.3e} rad/ns); the forbidden set is normally much slower",
                self.gamma_f, self.gamma_o
            ));
        }
        Ok(warnings)
    }
}

/// One coherent drive between a level pair, in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveTerm {
    pub lower: Level,
    pub upper: Level,
    /// Angular Rabi frequency, rad/ns.
    pub rabi: f64,
    /// Detuning added on the upper level, rad/ns.
    pub detuning: f64,
}

impl DriveTerm {
    pub fn resonant(lower: Level, upper: Level, rabi: f64) -> Self {
        Self {
            lower,
            upper,
            rabi,
            detuning: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.lower == self.upper {
            return Err(CoreError::DuplicateDrive {
                a: self.lower.label(),
                b: self.upper.label(),
            });
        }
        if !(self.rabi >= 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "rabi",
                constraint: "must be >= 0",
                value: self.rabi,
            });
        }
        Ok(())
    }
}

/// One optical transition from an excited state to a ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub excited: Level,
    pub ground: Level,
}

impl Transition {
    /// True when the ground state lies in the triplet manifold, i.e. the
    /// emission falls inside the broadband collection window.
    pub fn is_triplet_decaying(&self) -> bool {
        self.ground.is_triplet()
    }

    pub fn name(&self) -> String {
        format!("{}->{}", self.excited.label(), self.ground.label())
    }
}

/// The fixed optical transition taxonomy of the level diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    pub allowed: Vec<Transition>,
    pub forbidden: Vec<Transition>,
}

impl TransitionTable {
    /// Number of transitions whose emission is collected.
    pub fn collected_count(&self) -> usize {
        self.allowed
            .iter()
            .chain(&self.forbidden)
            .filter(|t| t.is_triplet_decaying())
            .count()
    }

    /// Drop the weak cross-connections between X1/X2 and the outer triplet
    /// states, keeping only the X+/X- -> S leakage in the forbidden set.
    pub fn without_cross_forbidden(mut self) -> Self {
        self.forbidden
            .retain(|t| matches!(t.excited, Level::XPlus | Level::XMinus));
        self
    }
}

/// The transition taxonomy of the level diagram: spin-conserving decays at
/// `Gamma_O` (the isolated pairs plus the four lines from X1/X2 into the
/// qubit subspace) and the hole-mixing-enabled forbidden set at `Gamma_F`
/// (X+/X- leakage into S plus the weak X1/X2 <-> T+/T- cross-connections).
pub fn build_transition_table() -> TransitionTable {
    use Level::*;
    let allowed = [
        (XPlus, TPlus),
        (XMinus, TMinus),
        (X1, S),
        (X1, T0),
        (X2, S),
        (X2, T0),
    ];
    let forbidden = [
        (XPlus, S),
        (XMinus, S),
        (X1, TPlus),
        (X1, TMinus),
        (X2, TPlus),
        (X2, TMinus),
    ];
    let tr = |pairs: &[(Level, Level)]| {
        pairs
            .iter()
            .map(|&(excited, ground)| Transition { excited, ground })
            .collect()
    };
    TransitionTable {
        allowed: tr(&allowed),
        forbidden: tr(&forbidden),
    }
}

const DIM: usize = Level::COUNT;

fn ketbra(to: Level, from: Level) -> ComplexOperator {
    ComplexOperator::ketbra(to.index(), from.index(), DIM).expect("level index < 8")
}

fn projector(l: Level) -> DMatrix<Complex64> {
    ComplexOperator::projector(l.index(), DIM)
        .expect("level index < 8")
        .into_matrix()
}

/// Assemble the full channel list for Eq.-of-motion integration:
///
/// * one radiative channel `|g><e|` per transition, `Gamma_O` on the allowed
///   set and `Gamma_F` on the forbidden set, collected iff the ground state
///   is in the triplet manifold;
/// * pairwise ground-state depolarization `|b><a|` at `Gamma_1/3` per
///   directed pair (uniform infinite-temperature model, overridable per
///   pair), so each ground population leaves at total rate `Gamma_1` and the
///   ground manifold relaxes to the uniform mixture;
/// * the singlet-triplet dephasing channel `L = |S><S| - |T0><T0|` at rate
///   `Gamma_2,ST / 2`, giving S-T0 coherence decay at exactly `Gamma_2,ST`;
/// * the triplet-manifold dephasing channel
///   `L = |T0><T0| - |T+><T+| - |T-><T-|` at rate `Gamma_2,T / 8`, giving
///   T0-T+/- coherence decay at `Gamma_2,T / 4` (the (Delta m)^2 = 1 share of
///   the manifold's dephasing budget) and leaving populations untouched.
pub fn build_channels(rates: &RateSet, table: &TransitionTable) -> Vec<JumpChannel> {
    let mut channels = Vec::new();

    for (set, rate) in [(&table.allowed, rates.gamma_o), (&table.forbidden, rates.gamma_f)] {
        for t in set.iter() {
            channels.push(
                JumpChannel::new(
                    ketbra(t.ground, t.excited),
                    rate,
                    t.is_triplet_decaying(),
                    &t.name(),
                )
                .expect("rates validated as non-negative"),
            );
        }
    }

    let grounds = [Level::S, Level::T0, Level::TPlus, Level::TMinus];
    let pair_rate = |a: Level, b: Level| -> f64 {
        let Some(p) = &rates.depol_pairs else {
            return rates.gamma_1 / 3.0;
        };
        match (a.index().min(b.index()), a.index().max(b.index())) {
            (0, 1) => p.s_t0,
            (0, 2) => p.s_tp,
            (0, 3) => p.s_tm,
            (1, 2) => p.t0_tp,
            (1, 3) => p.t0_tm,
            (2, 3) => p.tp_tm,
            _ => unreachable!("ground pairs only"),
        }
    };
    for &a in &grounds {
        for &b in &grounds {
            if a != b {
                channels.push(
                    JumpChannel::new(
                        ketbra(b, a),
                        pair_rate(a, b),
                        false,
                        &format!("depol {}->{}", a.label(), b.label()),
                    )
                    .expect("rates validated as non-negative"),
                );
            }
        }
    }

    let st_op = projector(Level::S) - projector(Level::T0);
    channels.push(
        JumpChannel::new(
            ComplexOperator::from_matrix(st_op),
            rates.gamma_2_st / 2.0,
            false,
            "dephasing S/T0",
        )
        .expect("rates validated as non-negative"),
    );

    let triplet_op = projector(Level::T0) - projector(Level::TPlus) - projector(Level::TMinus);
    channels.push(
        JumpChannel::new(
            ComplexOperator::from_matrix(triplet_op),
            rates.gamma_2_t / 8.0,
            false,
            "dephasing triplet",
        )
        .expect("rates validated as non-negative"),
    );

    channels
}

/// Rotating-frame Hamiltonian for a set of drives:
/// `H = sum_d (rabi_d/2)(|u><l| + |l><u|) + detuning_d |u><u|`.
/// Level pairs must be distinct as unordered pairs.
pub fn build_hamiltonian(drives: &[DriveTerm], dim: usize) -> Result<ComplexOperator> {
    let mut seen: Vec<(usize, usize)> = Vec::new();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for d in drives {
        d.validate()?;
        let (lo, up) = (d.lower.index(), d.upper.index());
        if lo >= dim || up >= dim {
            return Err(CoreError::IndexOutOfRange {
                index: lo.max(up),
                dim,
            });
        }
        let key = (lo.min(up), lo.max(up));
        if seen.contains(&key) {
            return Err(CoreError::DuplicateDrive {
                a: d.lower.label(),
                b: d.upper.label(),
            });
        }
        seen.push(key);
        let half = Complex64::new(d.rabi / 2.0, 0.0);
        h[(up, lo)] += half;
        h[(lo, up)] += half;
        h[(up, up)] += Complex64::new(d.detuning, 0.0);
    }
    Ok(ComplexOperator::from_matrix(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{propagate_expm, IntegratorConfig};
    use crate::quantum::{mixed, pure_state, DensityMatrix};
    use crate::units::angular_from_ghz;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    #[test]
    fn table_has_isolated_transitions_marked_collected() {
        let table = build_transition_table();
        let iso = Transition {
            excited: Level::XPlus,
            ground: Level::TPlus,
        };
        assert!(table.allowed.contains(&iso));
        assert!(iso.is_triplet_decaying());
        assert!(table.allowed.contains(&Transition {
            excited: Level::XMinus,
            ground: Level::TMinus,
        }));
    }

    #[test]
    fn table_has_forbidden_leak_to_singlet() {
        let table = build_transition_table();
        assert!(table.forbidden.contains(&Transition {
            excited: Level::XPlus,
            ground: Level::S,
        }));
        assert!(table.forbidden.contains(&Transition {
            excited: Level::XMinus,
            ground: Level::S,
        }));
    }

    #[test]
    fn x1_x2_decay_to_both_qubit_states() {
        let table = build_transition_table();
        for x in [Level::X1, Level::X2] {
            for g in [Level::S, Level::T0] {
                assert!(table.allowed.contains(&Transition { excited: x, ground: g }));
            }
        }
    }

    #[test]
    fn collected_channel_count_matches_table() {
        let table = build_transition_table();
        let channels = build_channels(&RateSet::default(), &table);
        let collected = channels.iter().filter(|c| c.collected).count();
        assert_eq!(collected, table.collected_count());
        assert_eq!(collected, 8);
    }

    #[test]
    fn default_rates_on_radiative_channels() {
        let table = build_transition_table();
        let channels = build_channels(&RateSet::default(), &table);
        let iso = channels.iter().find(|c| c.name == "X+->T+").unwrap();
        assert_eq!(iso.rate, angular_from_ghz(1.0));
        assert!(iso.collected);
        let leak = channels.iter().find(|c| c.name == "X+->S").unwrap();
        assert_eq!(leak.rate, angular_from_ghz(1e-3));
        assert!(!leak.collected);
    }

    #[test]
    fn zero_rates_give_zero_channels() {
        let rates = RateSet {
            gamma_o: 0.0,
            gamma_f: 0.0,
            gamma_1: 0.0,
            gamma_2_st: 0.0,
            gamma_2_t: 0.0,
            ..RateSet::default()
        };
        let channels = build_channels(&rates, &build_transition_table());
        assert!(channels.iter().all(|c| c.rate == 0.0));
    }

    #[test]
    fn depolarization_relaxes_to_uniform_ground_mixture() {
        // Populations-only initial state: the deviation from the uniform
        // 4-level mixture decays at exactly Gamma_1 * 4/3.
        let gamma_1 = 0.05;
        let rates = RateSet {
            gamma_o: 0.0,
            gamma_f: 0.0,
            gamma_1,
            gamma_2_st: 0.0,
            gamma_2_t: 0.0,
            ..RateSet::default()
        };
        let channels = build_channels(&rates, &build_transition_table());
        let h = ComplexOperator::zeros(8);
        let rho0 = pure_state(Level::S, 8).unwrap();

        let mut uniform = DMatrix::<Complex64>::zeros(8, 8);
        for g in [Level::S, Level::T0, Level::TPlus, Level::TMinus] {
            uniform[(g.index(), g.index())] = Complex64::new(0.25, 0.0);
        }
        let d0 = (rho0.matrix() - &uniform).norm();
        for t in [5.0, 20.0, 60.0] {
            let rho_t = propagate_expm(&rho0, &h, &channels, t).unwrap();
            let d = (rho_t.matrix() - &uniform).norm();
            let expected = d0 * (-gamma_1 * 4.0 / 3.0 * t).exp();
            assert_abs_diff_eq!(d, expected, epsilon = 1e-6);
        }
    }

    #[test]
    fn per_pair_depolarization_override() {
        let rates = RateSet {
            depol_pairs: Some(DepolPairs {
                s_t0: 0.0,
                s_tp: 0.0,
                s_tm: 0.0,
                t0_tp: 0.5,
                t0_tm: 0.5,
                tp_tm: 0.0,
            }),
            ..RateSet::default()
        };
        let channels = build_channels(&rates, &build_transition_table());
        let find = |n: &str| channels.iter().find(|c| c.name == n).unwrap().rate;
        assert_eq!(find("depol S->T0"), 0.0);
        assert_eq!(find("depol T0->T+"), 0.5);
        assert_eq!(find("depol T+->T0"), 0.5);
    }

    fn superposition(a: Level, b: Level) -> DensityMatrix {
        let mut m = DMatrix::<Complex64>::zeros(8, 8);
        let half = Complex64::new(0.5, 0.0);
        m[(a.index(), a.index())] = half;
        m[(b.index(), b.index())] = half;
        m[(a.index(), b.index())] = half;
        m[(b.index(), a.index())] = half;
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn st_dephasing_decays_qubit_coherence_at_quoted_rate() {
        let rates = RateSet {
            gamma_o: 0.0,
            gamma_f: 0.0,
            gamma_1: 0.0,
            gamma_2_t: 0.0,
            gamma_2_st: 0.05,
            ..RateSet::default()
        };
        let channels = build_channels(&rates, &build_transition_table());
        let h = ComplexOperator::zeros(8);
        let rho0 = superposition(Level::S, Level::T0);
        for t in [3.0, 10.0, 40.0] {
            let rho_t = propagate_expm(&rho0, &h, &channels, t).unwrap();
            let c = rho_t.coherence(Level::S.index(), Level::T0.index()).norm();
            assert_abs_diff_eq!(c, 0.5 * (-rates.gamma_2_st * t).exp(), epsilon = 1e-6);
            // Populations are exactly invariant under pure dephasing.
            assert_abs_diff_eq!(rho_t.population(Level::S.index()), 0.5, epsilon = 1e-9);
            assert_abs_diff_eq!(rho_t.population(Level::T0.index()), 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn triplet_dephasing_rates_within_manifold() {
        let rates = RateSet {
            gamma_o: 0.0,
            gamma_f: 0.0,
            gamma_1: 0.0,
            gamma_2_st: 0.0,
            gamma_2_t: 0.2,
            ..RateSet::default()
        };
        let channels = build_channels(&rates, &build_transition_table());
        let h = ComplexOperator::zeros(8);

        // T0-T+ coherence decays at Gamma_2,T / 4.
        let rho0 = superposition(Level::T0, Level::TPlus);
        for t in [2.0, 10.0] {
            let rho_t = propagate_expm(&rho0, &h, &channels, t).unwrap();
            let c = rho_t.coherence(Level::T0.index(), Level::TPlus.index()).norm();
            assert_abs_diff_eq!(c, 0.5 * (-rates.gamma_2_t / 4.0 * t).exp(), epsilon = 1e-6);
        }

        // The T+-T- coherence sees equal channel weights and does not decay;
        // the S-T0 qubit coherence is untouched by the triplet channel.
        let rho0 = superposition(Level::TPlus, Level::TMinus);
        let rho_t = propagate_expm(&rho0, &h, &channels, 10.0).unwrap();
        let c = rho_t.coherence(Level::TPlus.index(), Level::TMinus.index()).norm();
        assert_abs_diff_eq!(c, 0.5, epsilon = 1e-9);
        let rho0 = superposition(Level::S, Level::T0);
        let rho_t = propagate_expm(&rho0, &h, &channels, 10.0).unwrap();
        let c = rho_t.coherence(Level::S.index(), Level::T0.index()).norm();
        assert_abs_diff_eq!(c, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn dephasing_leaves_all_populations_invariant() {
        let rates = RateSet {
            gamma_o: 0.0,
            gamma_f: 0.0,
            gamma_1: 0.0,
            ..RateSet::default()
        };
        let channels = build_channels(&rates, &build_transition_table());
        let h = ComplexOperator::zeros(8);
        let tp = pure_state(Level::TPlus, 8).unwrap();
        let t0 = pure_state(Level::T0, 8).unwrap();
        let s = pure_state(Level::S, 8).unwrap();
        let rho0 = mixed(&[(0.2, s), (0.3, t0), (0.5, tp)]).unwrap();
        let rho_t = propagate_expm(&rho0, &h, &channels, 25.0).unwrap();
        for i in 0..8 {
            assert_abs_diff_eq!(rho_t.population(i), rho0.population(i), epsilon = 1e-9);
        }
    }

    #[test]
    fn hamiltonian_single_resonant_drive() {
        let omega = TAU;
        let h = build_hamiltonian(
            &[DriveTerm::resonant(Level::TPlus, Level::XPlus, omega)],
            8,
        )
        .unwrap();
        let (tp, xp) = (Level::TPlus.index(), Level::XPlus.index());
        assert_eq!(h.matrix()[(xp, tp)], Complex64::new(omega / 2.0, 0.0));
        assert_eq!(h.matrix()[(tp, xp)], Complex64::new(omega / 2.0, 0.0));
        let nonzero = h.matrix().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn hamiltonian_empty_drives_is_zero() {
        let h = build_hamiltonian(&[], 8).unwrap();
        assert!(h.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn hamiltonian_disjoint_blocks_commute() {
        let omega = TAU;
        let ha = build_hamiltonian(
            &[DriveTerm::resonant(Level::TPlus, Level::XPlus, omega)],
            8,
        )
        .unwrap();
        let hb = build_hamiltonian(
            &[DriveTerm::resonant(Level::TMinus, Level::XMinus, omega)],
            8,
        )
        .unwrap();
        let comm = ha.matrix() * hb.matrix() - hb.matrix() * ha.matrix();
        assert!(comm.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn hamiltonian_is_exactly_hermitian() {
        let h = build_hamiltonian(
            &[
                DriveTerm {
                    lower: Level::T0,
                    upper: Level::TPlus,
                    rabi: 0.37,
                    detuning: 0.11,
                },
                DriveTerm::resonant(Level::T0, Level::TMinus, 0.37),
            ],
            8,
        )
        .unwrap();
        assert_eq!(h.matrix().adjoint(), *h.matrix());
    }

    #[test]
    fn hamiltonian_rejects_duplicate_pair() {
        let r = build_hamiltonian(
            &[
                DriveTerm::resonant(Level::TPlus, Level::XPlus, 1.0),
                DriveTerm::resonant(Level::XPlus, Level::TPlus, 2.0),
            ],
            8,
        );
        assert!(matches!(r, Err(CoreError::DuplicateDrive { .. })));
    }

    #[test]
    fn rate_set_warns_on_inverted_hierarchy() {
        let rates = RateSet {
            gamma_f: angular_from_ghz(2.0),
            ..RateSet::default()
        };
        let warnings = rates.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("gamma_F"));
    }

    #[test]
    fn cross_forbidden_filter() {
        let table = build_transition_table().without_cross_forbidden();
        assert_eq!(table.forbidden.len(), 2);
        assert!(table.forbidden.iter().all(|t| t.ground == Level::S));
    }
}
