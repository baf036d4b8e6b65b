//! Built-in verification suites: invariant checks and closed-form
//! cross-checks over the whole library, runnable as `esd-adapt verify`.

use esd_adapt_core::adaptation::{
    loss_mixture_concurrence, loss_mixture_state, loss_mixture_threshold,
    post_channel_filter_limit, run_pipeline, sufficient_filter_bound, LocalFilter, PipelineInput,
    PipelineSpec, StageOp,
};
use esd_adapt_core::channels::{
    amplitude_damping, depolarizing, ket0, ket1, replace_channel, KrausChannel,
};
use esd_adapt_core::entanglement::{concurrence, is_entangled, partial_transpose_a};
use esd_adapt_core::linalg::{eig_hermitian, CMat4};
use esd_adapt_core::sampling::{random_channel, random_state, random_unitary2};
use esd_adapt_core::states::{bell, embed, werner, BellKind, Side, TwoQubitState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUITE_SEED: u64 = 0xADA7;

/// Verification tolerances. `corrupt` shrinks every bound by 1e6, a hook used
/// to demonstrate that the harness actually fails when thresholds break.
#[derive(Clone, Copy)]
pub struct Tolerances {
    scale: f64,
}

impl Tolerances {
    pub fn standard() -> Self {
        Self { scale: 1.0 }
    }

    pub fn corrupted() -> Self {
        Self { scale: 1e-6 }
    }

    fn t(&self, base: f64) -> f64 {
        base * self.scale
    }
}

pub struct SuiteOutcome {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
    pub notes: Vec<String>,
}

struct Checker {
    checks: usize,
    failures: usize,
    notes: Vec<String>,
}

impl Checker {
    fn new() -> Self {
        Self {
            checks: 0,
            failures: 0,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, note: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.notes.len() < 3 {
                self.notes.push(note());
            }
        }
    }

    fn finish(self, name: &'static str) -> SuiteOutcome {
        SuiteOutcome {
            name,
            checks: self.checks,
            failures: self.failures,
            notes: self.notes,
        }
    }
}

pub struct VerifyReport {
    pub suites: Vec<SuiteOutcome>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.suites.iter().all(|s| s.failures == 0)
    }
}

pub fn run_all(tols: &Tolerances) -> VerifyReport {
    let suites = vec![
        kraus_completeness(tols),
        apply_preservation(tols),
        pt_involution(tols),
        concurrence_lu_invariance(tols),
        ppt_concurrence_agreement(tols),
        mixture_concurrence_formula(tols),
        mixture_boundary(tols),
        swap_adaptation(tols),
        limit_filtration(tols),
        werner_boundary(tols),
        depolarizing_werner_identity(tols),
        damping_preserves_bell(tols),
        filter_bound_soundness(tols),
    ];
    VerifyReport { suites }
}

fn kraus_completeness(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    let tol = tols.t(1e-10);
    for k in 0..=20 {
        let x = k as f64 / 20.0;
        for ch in [
            depolarizing(x).unwrap(),
            amplitude_damping(x).unwrap(),
            replace_channel(x, ket0()).unwrap(),
            replace_channel(x, ket1()).unwrap(),
        ] {
            let dev = ch.completeness_deviation();
            c.check(dev < tol, || format!("{}: deviation {dev:.3e}", ch.label()));
        }
    }
    let composed = KrausChannel::compose(
        &depolarizing(0.6).unwrap(),
        &amplitude_damping(0.4).unwrap(),
    );
    let dev = composed.completeness_deviation();
    c.check(dev < tol, || format!("composed: deviation {dev:.3e}"));
    c.finish("kraus-completeness")
}

fn apply_preservation(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    for trial in 0..1000 {
        let ch = random_channel(&mut rng, 1 + trial % 4);
        let state = random_state(&mut rng);
        let side = if rng.random::<bool>() {
            Side::A
        } else {
            Side::B
        };
        let out = match ch.apply(&state, side) {
            Ok(out) => out,
            Err(e) => {
                c.check(false, || format!("trial {trial}: apply failed: {e}"));
                continue;
            }
        };
        c.check((out.trace() - 1.0).abs() < tols.t(1e-10), || {
            format!("trial {trial}: trace {}", out.trace())
        });
        c.check(out.rho().hermiticity_deviation() < tols.t(1e-10), || {
            format!("trial {trial}: hermiticity")
        });
        let min_ev = eig_hermitian(&out.rho().hermitized())
            .map(|e| e.eigenvalues[3])
            .unwrap_or(f64::NEG_INFINITY);
        c.check(min_ev > -tols.t(1e-9), || {
            format!("trial {trial}: min eigenvalue {min_ev:.3e}")
        });
    }
    c.finish("apply-preservation")
}

fn pt_involution(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED + 1);
    for trial in 0..200 {
        let s = random_state(&mut rng);
        let once = partial_transpose_a(&s);
        let mut back = CMat4::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        back[(2 * j + k, 2 * i + l)] = once[(2 * i + k, 2 * j + l)];
                    }
                }
            }
        }
        // a pure entry permutation: exact equality, corruption-independent
        let _ = tols;
        c.check(back.max_abs_diff(s.rho()) == 0.0, || {
            format!("trial {trial}: double transpose drifted")
        });
    }
    c.finish("pt-involution")
}

fn concurrence_lu_invariance(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED + 2);
    for trial in 0..200 {
        let s = random_state(&mut rng);
        let base = match concurrence(&s) {
            Ok(v) => v,
            Err(e) => {
                c.check(false, || format!("trial {trial}: {e}"));
                continue;
            }
        };
        let u = random_unitary2(&mut rng);
        let v = random_unitary2(&mut rng);
        let big = embed(&u, Side::A) * embed(&v, Side::B);
        let rotated = TwoQubitState::from_matrix(big * *s.rho() * big.adjoint());
        let rotated_c = rotated.and_then(|st| concurrence(&st)).unwrap_or(f64::NAN);
        c.check((rotated_c - base).abs() < tols.t(1e-9), || {
            format!("trial {trial}: {rotated_c} vs {base}")
        });
    }
    c.finish("concurrence-lu-invariance")
}

fn ppt_concurrence_agreement(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED + 3);
    let dead_band = tols.t(1e-8);
    for trial in 0..1000 {
        let s = random_state(&mut rng);
        let report = match is_entangled(&s, 1e-10) {
            Ok(r) => r,
            Err(e) => {
                c.check(false, || format!("trial {trial}: {e}"));
                continue;
            }
        };
        if report.concurrence.abs() <= dead_band || report.min_pt_eigenvalue.abs() <= dead_band {
            continue;
        }
        c.check(
            (report.concurrence > dead_band) == (report.min_pt_eigenvalue < -dead_band),
            || {
                format!(
                    "trial {trial}: C={} minPT={}",
                    report.concurrence, report.min_pt_eigenvalue
                )
            },
        );
    }
    c.finish("ppt-concurrence-agreement")
}

fn mixture_concurrence_formula(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED + 4);
    for _ in 0..200 {
        let p1 = rng.random::<f64>();
        let p2 = rng.random::<f64>();
        let state = loss_mixture_state(p1, p2).unwrap();
        let formula = loss_mixture_concurrence(p1, p2);
        if formula >= 1e-6 {
            let numeric = concurrence(&state).unwrap_or(f64::NAN);
            c.check((numeric - formula).abs() < tols.t(1e-9), || {
                format!("({p1:.4}, {p2:.4}): {numeric} vs {formula}")
            });
        }
    }
    // pipeline equivalence on a subsample
    for _ in 0..50 {
        let p1 = rng.random::<f64>();
        let p2 = rng.random::<f64>();
        let run = run_pipeline(&PipelineSpec::asymmetric(
            BellKind::PsiMinus,
            vec![
                StageOp::Channel(replace_channel(p1, ket0()).unwrap()),
                StageOp::Channel(replace_channel(p2, ket1()).unwrap()),
            ],
        ))
        .unwrap();
        let diff = run
            .outcome
            .state
            .rho()
            .max_abs_diff(loss_mixture_state(p1, p2).unwrap().rho());
        c.check(diff < tols.t(1e-12), || {
            format!("pipeline mismatch {diff:.3e} at ({p1:.4}, {p2:.4})")
        });
    }
    c.finish("mixture-concurrence-formula")
}

fn mixture_boundary(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    for k in 1..=9 {
        let p1 = k as f64 / 10.0;
        let (mut lo, mut hi) = (1e-6, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if concurrence(&loss_mixture_state(p1, mid).unwrap()).unwrap_or(0.0) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let found = 0.5 * (lo + hi);
        c.check(
            (found - loss_mixture_threshold(p1)).abs() < tols.t(1e-6),
            || format!("p1={p1}: {found} vs {}", loss_mixture_threshold(p1)),
        );
    }
    c.finish("mixture-boundary")
}

fn swap_adaptation(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED + 5);
    for _ in 0..200 {
        let p1 = 1.0 - rng.random::<f64>();
        let p2 = 1.0 - rng.random::<f64>();
        let run = run_pipeline(&PipelineSpec::asymmetric(
            BellKind::PsiMinus,
            vec![
                StageOp::Channel(replace_channel(p1, ket0()).unwrap()),
                StageOp::Filter(LocalFilter::swap()),
                StageOp::Channel(replace_channel(p2, ket1()).unwrap()),
            ],
        ))
        .unwrap();
        c.check(
            (run.report.concurrence - p1 * p2).abs() < tols.t(1e-9) && run.report.concurrence > 0.0,
            || format!("({p1:.4}, {p2:.4}): C = {}", run.report.concurrence),
        );
    }
    c.finish("swap-adaptation")
}

fn limit_filtration(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    for (p1, p2) in [(0.5f64, 0.5f64), (0.8, 0.3), (0.9, 0.9)] {
        let target = (p1 * p2).sqrt();
        let mut last = 0.0;
        let mut monotone = true;
        for eps in [1e-1, 1e-2, 1e-3] {
            let out = post_channel_filter_limit(p1, p2, eps).unwrap();
            monotone &= out.concurrence > last;
            last = out.concurrence;
        }
        c.check(monotone, || format!("({p1}, {p2}): not monotone"));
        c.check((last - target).abs() / target < tols.t(0.02), || {
            format!("({p1}, {p2}): {last} vs target {target}")
        });
    }
    c.finish("limit-filtration")
}

fn werner_boundary(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let report = is_entangled(&werner(BellKind::PsiMinus, mid).unwrap(), 0.0).unwrap();
        if report.min_pt_eigenvalue < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let found = 0.5 * (lo + hi);
    c.check((found - 1.0 / 3.0).abs() < tols.t(1e-6), || {
        format!("werner boundary {found}")
    });
    c.finish("werner-boundary")
}

fn depolarizing_werner_identity(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    for k in 0..20 {
        let p = (k as f64 + 0.5) / 20.0;
        let out = depolarizing(p)
            .unwrap()
            .apply(&bell(BellKind::PsiMinus), Side::B)
            .unwrap();
        let diff = out
            .rho()
            .max_abs_diff(werner(BellKind::PsiMinus, p).unwrap().rho());
        c.check(diff < tols.t(1e-12), || format!("p={p}: diff {diff:.3e}"));
    }
    c.finish("depolarizing-werner-identity")
}

fn damping_preserves_bell(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    for k in 1..=19 {
        let gamma = k as f64 / 20.0;
        for kind in [BellKind::PsiMinus, BellKind::PhiMinus] {
            let run = run_pipeline(&PipelineSpec::symmetric(
                PipelineInput::Bell(kind),
                vec![StageOp::Channel(amplitude_damping(gamma).unwrap())],
            ))
            .unwrap();
            c.check(run.report.min_pt_eigenvalue < -tols.t(1e-10), || {
                format!(
                    "{kind:?} γ={gamma}: min PT {}",
                    run.report.min_pt_eigenvalue
                )
            });
        }
    }
    c.finish("damping-preserves-bell")
}

fn filter_bound_soundness(tols: &Tolerances) -> SuiteOutcome {
    let mut c = Checker::new();
    let p_lo = 1.0 / 3.0 + 0.01;
    let p_hi = 0.99;
    let g_lo = 0.05;
    let g_hi = 1.0;
    for kp in 0..10 {
        let p = p_lo + (kp as f64 + 1.0) * (p_hi - p_lo) / 11.0;
        for kg in 0..10 {
            let gamma = g_lo + (kg as f64 + 1.0) * (g_hi - g_lo) / 11.0;
            let sqrt_r = (0.5 * sufficient_filter_bound(p, gamma).unwrap()).min(1.0);
            let run = run_pipeline(&PipelineSpec::symmetric(
                PipelineInput::Werner {
                    kind: BellKind::PsiMinus,
                    p,
                },
                vec![
                    StageOp::Filter(LocalFilter::diagonal(sqrt_r * sqrt_r).unwrap()),
                    StageOp::Channel(amplitude_damping(gamma).unwrap()),
                ],
            ))
            .unwrap();
            c.check(run.report.min_pt_eigenvalue < -tols.t(1e-12), || {
                format!(
                    "(p={p:.3}, γ={gamma:.3}): min PT {}",
                    run.report.min_pt_eigenvalue
                )
            });
        }
    }
    c.finish("filter-bound-soundness")
}
