//! Exact-algebra checks on `Z_8` with the full dual as window.

use std::fmt;
use std::str::FromStr;

use psido_core::{
    compose, fourier, fourier_direct, inv_fourier, involution, op_apply, op_quantize, sch, Complex64, CrossedElement,
    DualVec, Group, GroupSpec, LinOp, SpaceVec, Symbol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 8;
pub const DEFAULT_TRIALS: usize = 100;
pub const TOLERANCE: f64 = 1e-10;
const FAULT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Plancherel,
    Diagram,
    Homomorphism,
    Involution,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::Plancherel, Check::Diagram, Check::Homomorphism, Check::Involution];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Plancherel => "plancherel",
            Self::Diagram => "diagram",
            Self::Homomorphism => "homomorphism",
            Self::Involution => "involution",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(Check::name).collect();
            format!("unknown check `{s}`, expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: Check,
    pub residual: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub trials: usize,
    pub results: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn lines(&self) -> Vec<String> {
        self.results
            .iter()
            .map(|r| {
                format!(
                    "{:<13} {}  residual={:.3e}  tol={:.0e}",
                    r.check.name(),
                    if r.passed { "PASS" } else { "FAIL" },
                    r.residual,
                    r.tol
                )
            })
            .collect()
    }
}

fn random_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_symbol(group: &Group, rng: &mut ChaCha8Rng) -> Symbol {
    let (w, n) = (group.window_len(), group.grid_len());
    let table: Vec<Complex64> = (0..w * n).map(|_| random_c(rng)).collect();
    let g = group.clone();
    Symbol::new("random", move |x, xi| {
        let (i, j) = (g.window_index(xi).expect("window"), g.grid_index(x).expect("grid"));
        table[j * w + i]
    })
}

fn perturbed(op: &LinOp) -> LinOp {
    let mut m = op.to_dense();
    m[(0, 0)] += FAULT;
    LinOp::dense(m, op.side()).expect("square")
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

fn plancherel(g: &Group, rng: &mut ChaCha8Rng, fault: bool) -> f64 {
    let u = SpaceVec((0..g.grid_len()).map(|_| random_c(rng)).collect());
    let mut w = fourier(g, &u).expect("fourier");
    if fault {
        w.0[0] += FAULT;
    }
    let direct = fourier_direct(g, &u).expect("fourier");
    let back = inv_fourier(g, &w).expect("inverse");
    let norm_gap = (w.norm() - u.norm()).abs();
    norm_gap.max(max_diff(&back.0, &u.0)).max(max_diff(&w.0, &direct.0))
}

/// `op(f)` against `F Op(f) F^{-1}` assembled column by column.
fn diagram(g: &Group, rng: &mut ChaCha8Rng, fault: bool) -> f64 {
    let f = random_symbol(g, rng).sample(g);
    let mut a = op_quantize(g, &f).expect("quantize");
    if fault {
        a = perturbed(&a);
    }
    let n = g.window_len();
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        let u = inv_fourier(g, &DualVec(e)).expect("inverse");
        let col = fourier(g, &op_apply(g, &f, &u).expect("apply")).expect("fourier");
        for (i, c) in col.0.iter().enumerate() {
            worst = worst.max((a.entry(i, j) - c).norm());
        }
    }
    worst
}

fn pair(g: &Group, rng: &mut ChaCha8Rng) -> (CrossedElement, CrossedElement) {
    let radius = g.window_len() as i64 / 2;
    let s1: u64 = rng.random();
    let s2: u64 = rng.random();
    let points = rng.random_range(1..=4);
    (
        CrossedElement::random(g, radius, points, s1).expect("random element"),
        CrossedElement::random(g, radius, points, s2).expect("random element"),
    )
}

fn homomorphism(g: &Group, rng: &mut ChaCha8Rng, fault: bool) -> f64 {
    let (phi, psi) = pair(g, rng);
    let mut lhs = sch(g, &compose(g, &phi, &psi).expect("compose"));
    if fault {
        lhs = perturbed(&lhs);
    }
    let rhs = sch(g, &phi).mul(&sch(g, &psi)).expect("mul");
    lhs.max_abs_diff(&rhs).expect("shape")
}

fn involution_check(g: &Group, rng: &mut ChaCha8Rng, fault: bool) -> f64 {
    let (phi, _) = pair(g, rng);
    let star = involution(g, &phi);
    let mut lhs = sch(g, &star);
    if fault {
        lhs = perturbed(&lhs);
    }
    let adj = lhs.max_abs_diff(&sch(g, &phi).adjoint()).expect("shape");
    adj.max(involution(g, &star).max_abs_diff(&phi))
}

/// Runs `trials` random instances of every check on `Z_8`.
pub fn run(seed: u64, trials: usize, fault: Option<Check>) -> SelftestReport {
    let g = Group::new(GroupSpec::cyclic(8)).expect("Z_8");
    let results = Check::ALL
        .iter()
        .map(|&check| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (check as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let inject = fault == Some(check);
            let residual = (0..trials)
                .map(|_| match check {
                    Check::Plancherel => plancherel(&g, &mut rng, inject),
                    Check::Diagram => diagram(&g, &mut rng, inject),
                    Check::Homomorphism => homomorphism(&g, &mut rng, inject),
                    Check::Involution => involution_check(&g, &mut rng, inject),
                })
                .fold(0.0, f64::max);
            CheckResult { check, residual, tol: TOLERANCE, passed: residual <= TOLERANCE }
        })
        .collect();
    SelftestReport { seed, trials, results }
}
