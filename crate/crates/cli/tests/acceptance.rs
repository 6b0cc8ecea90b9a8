//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use psido_cli::runner::{run_path, RunOptions};
use psido_cli::selftest;
use psido_core::gohberg::{
    ideal_decay_check, make_test_vectors, osc_l2_oracle, sandwich, symbol_freeze_check, SandwichConfig, Verdict,
};
use psido_core::symbols::gallery::{self, SymbolSpec};
use psido_core::{
    dual_osc, hs_norm, ideal_membership, inv_fourier, op_quantize, upper_d_omega, vo_diagnostic, Complex64,
    CoronaFilter, DualFunction, DualPoint, DualVec, Group, GroupSpec, SpaceFunction, SpaceVec, Symbol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rc(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn torus(m: i64) -> Group {
    Group::new(GroupSpec::torus(1, m)).unwrap()
}

fn exact_algebra() -> Check {
    let report = selftest::run(selftest::DEFAULT_SEED, 100, None);
    let worst = report.results.iter().map(|r| r.residual).fold(0.0, f64::max);
    ensure(report.passed() && worst <= 1e-10, || report.lines().join("; "))?;
    Ok(format!("100 trials per check, worst residual {worst:.2e}"))
}

fn hilbert_schmidt() -> Check {
    let g = torus(31);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let band = rng.random_range(0..=4i64);
        let coeffs: Vec<Vec<Complex64>> =
            (0..g.window_len()).map(|_| (0..=2 * band).map(|_| rc(&mut rng)).collect()).collect();
        // Parseval in x: mean_x sum_xi |f|^2 = sum_xi sum_j |c_j(xi)|^2
        let parseval: f64 = coeffs.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let (gg, cs) = (g.clone(), coeffs.clone());
        let f = Symbol::new("band", move |x, xi| {
            let row = &cs[gg.window_index(xi).unwrap()];
            let t = x.coord(0);
            row.iter()
                .enumerate()
                .map(|(j, c)| c * Complex64::from_polar(1.0, std::f64::consts::TAU * (j as i64 - band) as f64 * t))
                .sum()
        })
        .sample(&g);
        let hs = hs_norm(&g, &f).map_err(|e| e.to_string())?;
        worst = worst.max((hs - parseval).abs() / parseval).max((f.l2_norm() - parseval).abs() / parseval);
    }
    ensure(worst <= 1e-8, || format!("relative error {worst:.2e}"))?;
    Ok(format!("20 symbols, worst relative error {worst:.2e}"))
}

fn freeze_decay() -> Check {
    let g = torus(1200);
    let f = gallery::by_name("cos_sqrt", &g).map_err(|e| e.to_string())?;
    let zeta = DualPoint(vec![1]);
    let ks = [4i64, 16, 64, 256, 1024];
    let xi: Vec<DualPoint> = ks.iter().map(|&k| DualPoint(vec![k])).collect();
    let fam = make_test_vectors(&g, &SpaceVec::character(&g, &zeta), &g.identity_point(), &xi)
        .map_err(|e| e.to_string())?;
    let seq = symbol_freeze_check(&g, &f.sample(&g), &fam, 0.02).map_err(|e| e.to_string())?;
    let oracle = osc_l2_oracle(&g, &f, &zeta, &xi);
    let mut gap = 0.0f64;
    for ((v, o), &k) in seq.values.iter().zip(&oracle).zip(&ks) {
        let closed = (((k + 1) as f64).sqrt().cos() - (k as f64).sqrt().cos()).abs();
        gap = gap.max((v - o).abs()).max((o - closed).abs());
    }
    ensure(seq.strictly_decreasing(), || format!("not strictly decreasing: {:?}", seq.values))?;
    ensure(seq.decays(), || format!("final value {:?} > 0.02", seq.final_value()))?;
    ensure(gap <= 1e-12, || format!("oracle gap {gap:.2e}"))?;
    Ok(format!("values {:.4?}, oracle gap {gap:.1e}", seq.values))
}

fn finite_support_kills() -> Check {
    let g = torus(40);
    let phi = SpaceFunction::new("1+cos", |x| Complex64::new(1.0 + (std::f64::consts::TAU * x.coord(0)).cos(), 0.0));
    let psi_rule = |k: i64| if k.abs() <= 8 { 1.0 - k.abs() as f64 / 9.0 } else { 0.0 };
    let psi = DualFunction::new("bump", move |xi| Complex64::new(psi_rule(xi.0[0]), 0.0));
    let l = op_quantize(&g, &Symbol::separable(&phi, &psi).sample(&g)).map_err(|e| e.to_string())?;
    let radius = 2i64;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let coeffs: Vec<Complex64> = (-radius..=radius).map(|_| rc(&mut rng)).collect();
    let mut w = vec![Complex64::new(0.0, 0.0); g.window_len()];
    for (j, c) in (-radius..=radius).zip(&coeffs) {
        w[g.window_index(&DualPoint(vec![j])).unwrap()] = *c;
    }
    let u = inv_fourier(&g, &DualVec(w)).map_err(|e| e.to_string())?;
    let ks: Vec<i64> = (-30..=30).collect();
    let xi: Vec<DualPoint> = ks.iter().map(|&k| DualPoint(vec![k])).collect();
    let fam = make_test_vectors(&g, &u, &g.identity_point(), &xi).map_err(|e| e.to_string())?;
    let seq = ideal_decay_check(&g, &l, &fam, 1e-12).map_err(|e| e.to_string())?;
    let (mut far, mut oracle_gap) = (0.0f64, 0.0f64);
    for (&k, v) in ks.iter().zip(&seq.values) {
        // direct evaluation of phi * sum_eta psi(eta + k) c_eta e_{eta + k} on the grid
        let direct: Vec<Complex64> = (0..g.grid_len())
            .map(|x| {
                let t = g.grid_point(x).coord(0);
                let s: Complex64 = (-radius..=radius)
                    .zip(&coeffs)
                    .map(|(j, c)| c * psi_rule(j + k) * Complex64::from_polar(1.0, std::f64::consts::TAU * (j + k) as f64 * t))
                    .sum();
                s * (1.0 + (std::f64::consts::TAU * t).cos())
            })
            .collect();
        oracle_gap = oracle_gap.max((grid_norm(&direct) - v).abs());
        if k.abs() > 8 + radius {
            far = far.max(*v);
        } else if k.abs() <= 8 - radius {
            ensure(*v > 1e-3, || format!("|xi| = {k} inside the support gave {v:.2e}"))?;
        }
    }
    // grid test vectors carry roundoff-level coefficients inside the support
    ensure(far <= 1e-12, || format!("beyond 8 + {radius}: max ||L u_i|| = {far:.2e}"))?;
    ensure(oracle_gap <= 1e-12, || format!("direct evaluation gap {oracle_gap:.2e}"))?;
    Ok(format!("max ||L u_i|| = {far:.1e} for |xi_i| > {}, direct gap {oracle_gap:.1e}", 8 + radius))
}

fn grid_norm(u: &[Complex64]) -> f64 {
    (u.iter().map(|z| z.norm_sqr()).sum::<f64>() / u.len() as f64).sqrt()
}

fn standard_case() -> Check {
    let g = torus(64);
    let f = gallery::by_name("sign", &g).map_err(|e| e.to_string())?;
    let rep = sandwich(&g, &f, &CoronaFilter::full_corona(&g), &SandwichConfig::default()).map_err(|e| e.to_string())?;
    ensure(rep.verdict == Verdict::Pass, || format!("verdict {:?}: {:?}", rep.verdict, rep.notes))?;
    ensure(rep.d_estimate == Some(1.0), || format!("D estimate {:?}", rep.d_estimate))?;
    let lower = rep.lower_final.unwrap_or(f64::NAN);
    let upper = rep.upper_final.unwrap_or(f64::NAN);
    ensure(lower >= 0.95, || format!("lower {lower}"))?;
    ensure((upper - 1.0).abs() <= 1e-8, || format!("upper {upper}"))?;
    for l in &rep.levels {
        let svd: Vec<_> = l.approximants.iter().filter(|a| a.label.starts_with("svd_rank")).collect();
        ensure(svd.len() == 6, || format!("level {}: {} svd candidates", l.level, svd.len()))?;
        // every singular value of the sign multiplier beyond rank 16 equals 1
        ensure(svd.iter().all(|a| (a.value - 1.0).abs() <= 1e-8), || format!("level {}: {svd:?}", l.level))?;
        if let (Some(lo), Some(up)) = (l.lower, l.upper) {
            ensure(lo <= up + 1e-8, || format!("level {}: lower {lo} > upper {up}", l.level))?;
        }
    }
    Ok(format!("D = 1, lower {lower:.4}, upper {upper:.10}, {} levels ordered", rep.levels.len()))
}

fn anisotropic_case() -> Check {
    let g = Group::new(GroupSpec::torus(2, 32)).unwrap();
    let spec = SymbolSpec::Cone { direction: vec![1.0, 0.0], inner_angle: 0.5, outer_angle: 0.8 };
    let f = gallery::build(&spec, &g).map_err(|e| e.to_string())?;
    let toward = CoronaFilter::cone(&g, vec![vec![1.0, 0.0]], 0.2);
    let away = CoronaFilter::cone(&g, vec![vec![-1.0, 0.0]], 0.2);
    let rep = sandwich(&g, &f, &toward, &SandwichConfig::default()).map_err(|e| e.to_string())?;
    ensure(rep.d_estimate == Some(1.0), || format!("supporting cone D {:?}", rep.d_estimate))?;
    let lower = rep.lower_final.unwrap_or(f64::NAN);
    ensure(lower >= 0.9, || format!("supporting cone lower {lower}"))?;
    ensure(rep.verdict == Verdict::Pass, || format!("verdict {:?}: {:?}", rep.verdict, rep.notes))?;
    let k_max = rep.k_max;
    let sampled = f.sample(&g);
    let d_away = upper_d_omega(&g, &sampled, &away, k_max).estimate();
    ensure(d_away.is_some_and(|d| d <= 0.05), || format!("opposite cone D {d_away:?}"))?;
    let member = ideal_membership(&g, &sampled, &away, k_max, 0.05);
    ensure(member.member, || "not a member of the opposite-cone ideal".into())?;
    Ok(format!("toward: D = 1, lower {lower:.4}; away: D = {:.3}, member", d_away.unwrap()))
}

fn compactness() -> Check {
    let g = torus(64);
    let f = gallery::by_name("decay", &g).map_err(|e| e.to_string())?;
    let rep = sandwich(&g, &f, &CoronaFilter::full_corona(&g), &SandwichConfig::default()).map_err(|e| e.to_string())?;
    let mut cut = Vec::new();
    let mut gap = 0.0f64;
    for l in &rep.levels {
        let label = format!("cutoff@{}", l.level);
        let c = l.approximants.iter().find(|a| a.label == label).ok_or_else(|| format!("missing {label}"))?;
        let bound = 1.0 / (1.0 + l.level as f64);
        ensure(c.value <= bound + 1e-8, || format!("level {}: {} > {bound}", l.level, c.value))?;
        gap = gap.max((c.value - bound).abs());
        cut.push(c.value);
    }
    ensure(cut.windows(2).all(|w| w[1] <= w[0]), || format!("not nonincreasing: {cut:?}"))?;
    let last = *cut.last().ok_or("no levels")?;
    ensure(last < cut[0] && last <= 1.0 / cut.len() as f64, || format!("no trend to 0: {cut:?}"))?;
    Ok(format!("{} levels, final {last:.4}, max gap to 1/(1+k) {gap:.1e}", cut.len()))
}

fn negative_control() -> Check {
    let mut out = Vec::new();
    for (g, filter) in [
        (torus(32), None),
        (Group::new(GroupSpec::torus(2, 12)).unwrap(), Some(vec![vec![1.0, 0.0]])),
    ] {
        let filter = match filter {
            None => CoronaFilter::full_corona(&g),
            Some(d) => CoronaFilter::cone(&g, d, 0.2),
        };
        let f = gallery::by_name("alternating", &g).map_err(|e| e.to_string())?;
        let cfg = SandwichConfig::default();
        let vo = vo_diagnostic(&g, &f, &filter, &g.default_generators(), cfg.vo_tol, cfg.levels(&g));
        ensure(!vo.consistent, || format!("{}: VO reported consistent", filter.name()))?;
        let rep = sandwich(&g, &f, &filter, &cfg).map_err(|e| e.to_string())?;
        ensure(rep.verdict == Verdict::Skip, || format!("{}: verdict {:?}", filter.name(), rep.verdict))?;
        out.push(format!("{} worst OSC {:?}", filter.name(), vo.worst_final()));
    }
    Ok(format!("SKIP on both: {}", out.join(", ")))
}

fn oscillation_algebra() -> Check {
    let g = torus(30);
    let wide = torus(40);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let table = |rng: &mut ChaCha8Rng| {
        let t: Vec<Complex64> = (0..97).map(|_| rc(rng)).collect();
        let sup = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let rule = t.clone();
        (DualFunction::new("table", move |xi| rule[xi.0[0].rem_euclid(97) as usize]), t, sup)
    };
    let mut worst = 0.0f64;
    let mut bound_ratio = 0.0f64;
    for _ in 0..100 {
        let (psi, raw, sup) = table(&mut rng);
        let (phi, _, _) = table(&mut rng);
        let zeta = DualPoint(vec![rng.random_range(-5..=5)]);
        let eta = DualPoint(vec![rng.random_range(-5..=5)]);
        let osc_psi = dual_osc(&g, &psi, &zeta);
        let osc_phi = dual_osc(&g, &phi, &zeta);
        let osc_prod = dual_osc(&g, &psi.product(&phi), &zeta);
        let osc_shift = dual_osc(&g, &psi.translated(&g, &eta), &zeta);
        let shift_osc = osc_psi.translated(&g, &eta);
        for xi in g.window_points() {
            let xz = DualPoint(vec![xi.0[0] + zeta.0[0]]);
            let definition = raw[xz.0[0].rem_euclid(97) as usize] - raw[xi.0[0].rem_euclid(97) as usize];
            let leibniz = psi.eval(&xz) * osc_phi.eval(&xi) + osc_psi.eval(&xi) * phi.eval(&xi);
            worst = worst
                .max((osc_psi.eval(&xi) - definition).norm())
                .max((osc_prod.eval(&xi) - leibniz).norm())
                .max((osc_shift.eval(&xi) - shift_osc.eval(&xi)).norm());
        }
        let osc_sup = osc_psi.sup_on_window(&wide);
        ensure(osc_sup <= 2.0 * sup + 1e-12, || format!("sup osc {osc_sup} > 2 * {sup}"))?;
        bound_ratio = bound_ratio.max(osc_sup / (2.0 * sup));
    }
    ensure(worst <= 1e-12, || format!("identity residual {worst:.2e}"))?;
    Ok(format!("100 draws, identity residual {worst:.1e}, max sup ratio {bound_ratio:.3}"))
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Check {
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/standard.json");
    let mut runs = Vec::new();
    for workers in [1, 4, 4] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let opts = RunOptions { out_dir: Some(dir.path().to_path_buf()), seed: Some(17), workers: Some(workers) };
        let summary = run_path(&config, &opts).map_err(|e| e.to_string())?;
        ensure(summary.exit_code() == 0, || format!("standard config exit {}", summary.exit_code()))?;
        runs.push(csv_files(dir.path()));
    }
    ensure(runs[0].len() == 4, || format!("{} csv files", runs[0].len()))?;
    ensure(runs.iter().all(|r| r == &runs[0]), || "CSV output differs between runs".into())?;
    Ok(format!("{} CSV files byte-identical over 3 runs", runs[0].len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact algebra on Z_8", exact_algebra),
        ("Hilbert-Schmidt isometry on T^1", hilbert_schmidt),
        ("frozen-symbol decay for cos sqrt|xi|", freeze_decay),
        ("finite dual support annihilates far test vectors", finite_support_kills),
        ("standard case: sign multiplier", standard_case),
        ("anisotropic case: cone symbol on Z^2", anisotropic_case),
        ("compactness criterion: 1/(1+|xi|)", compactness),
        ("negative control: alternating symbol", negative_control),
        ("oscillation algebra", oscillation_algebra),
        ("determinism of run", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
