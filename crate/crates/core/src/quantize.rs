//! Quantization of symbols: `Op(f)` on grid samples, its Fourier conjugate
//! `op(f)` on the window, the integral kernel and the right quantization.
//!
//! `Op(f) u (x) = sum_{xi in window} xi(x) f(x, xi) u^(xi)` and
//! `op(f)(xi, eta) = mean_x (eta xi^{-1})(x) f(x, eta)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{fft_grid, fourier, frequency_slot, grid_coefficients, SpaceVec};
use crate::group::{DualPoint, Group, GroupPoint};
use crate::linop::{LinOp, Side};
use crate::symbols::{DualFunction, SampledSymbol, Symbol};

fn check_sampled(group: &Group, f: &SampledSymbol) -> Result<()> {
    if f.grid_len() != group.grid_len() {
        return Err(Error::ShapeMismatch { expected: group.grid_len(), got: f.grid_len() });
    }
    if f.window_len() != group.window_len() {
        return Err(Error::ShapeMismatch { expected: group.window_len(), got: f.window_len() });
    }
    Ok(())
}

/// `op(f)` as a window-by-window matrix. Multipliers come out diagonal; other
/// symbols are assembled column by column from grid FFTs of `f(., eta)`.
///
/// The `x`-mean is taken over the grid, so `op(f)` is exactly the Fourier
/// conjugate of `Op(f)` acting on grid functions. It agrees with the
/// continuum integral once the grid resolves `xi - eta` plus the
/// `x`-bandwidth of `f`; on the minimal grid `2M + 1` frequencies wrap.
pub fn op_quantize(group: &Group, f: &SampledSymbol) -> Result<LinOp> {
    check_sampled(group, f)?;
    if let Some(d) = f.multiplier_values() {
        return Ok(LinOp::diagonal(d.to_vec(), Side::Dual));
    }
    let w = group.window_len();
    let points = group.window_points();
    let columns: Vec<Vec<Complex64>> = (0..w)
        .into_par_iter()
        .map(|j| {
            let coeffs = grid_coefficients(group, &f.column(j));
            points.iter().map(|xi| coeffs[frequency_slot(group, &group.difference(xi, &points[j]))]).collect()
        })
        .collect();
    LinOp::dense(DMatrix::from_vec(w, w, columns.concat()), Side::Dual)
}

/// `op(f)` by literal summation of `mean_x (eta xi^{-1})(x) f(x, eta)`.
pub fn op_quantize_direct(group: &Group, f: &SampledSymbol) -> Result<LinOp> {
    check_sampled(group, f)?;
    let w = group.window_len();
    let points = group.window_points();
    let g = group.grid_len();
    let columns: Vec<Vec<Complex64>> = (0..w)
        .into_par_iter()
        .map(|j| {
            points
                .iter()
                .map(|xi| {
                    let d = group.difference(&points[j], xi);
                    (0..g).map(|x| group.character_on_grid(&d, x) * f.value(j, x)).sum::<Complex64>() / g as f64
                })
                .collect()
        })
        .collect();
    LinOp::dense(DMatrix::from_vec(w, w, columns.concat()), Side::Dual)
}

/// `Op(f) u` on the grid.
pub fn op_apply(group: &Group, f: &SampledSymbol, u: &SpaceVec) -> Result<SpaceVec> {
    check_sampled(group, f)?;
    let uhat = fourier(group, u)?;
    if let Some(d) = f.multiplier_values() {
        let mut data = vec![Complex64::new(0.0, 0.0); group.grid_len()];
        for (i, (a, b)) in d.iter().zip(&uhat.0).enumerate() {
            data[frequency_slot(group, &group.window_point(i))] += a * b;
        }
        fft_grid(group.grid_shape(), &mut data, true);
        return Ok(SpaceVec(data));
    }
    let points = group.window_points();
    let out = (0..group.grid_len())
        .into_par_iter()
        .map(|x| {
            points
                .iter()
                .enumerate()
                .map(|(i, xi)| group.character_on_grid(xi, x) * f.value(i, x) * uhat.0[i])
                .sum()
        })
        .collect();
    Ok(SpaceVec(out))
}

/// Integral kernel `kappa(x, y) = sum_xi xi(x y^{-1}) f(x, xi)`, row-major over
/// `grid x grid`, so that `Op(f) u (x) = mean_y kappa(x, y) u(y)`.
pub fn kernel_of(group: &Group, f: &SampledSymbol) -> Result<Vec<Complex64>> {
    check_sampled(group, f)?;
    let n = group.grid_len();
    let slots: Vec<usize> = (0..group.window_len()).map(|i| frequency_slot(group, &group.window_point(i))).collect();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut g = vec![Complex64::new(0.0, 0.0); n];
            for (i, &s) in slots.iter().enumerate() {
                g[s] += f.value(i, x);
            }
            fft_grid(group.grid_shape(), &mut g, true);
            (0..n).map(|y| g[group.grid_difference(x, y)]).collect()
        })
        .collect();
    Ok(rows.concat())
}

/// `x -> mean_y kappa(x, y) u(y)`.
pub fn apply_kernel(group: &Group, kernel: &[Complex64], u: &SpaceVec) -> Result<SpaceVec> {
    u.check(group)?;
    let n = group.grid_len();
    if kernel.len() != n * n {
        return Err(Error::ShapeMismatch { expected: n * n, got: kernel.len() });
    }
    Ok(SpaceVec(
        kernel
            .par_chunks(n)
            .map(|row| row.iter().zip(&u.0).map(|(k, v)| k * v).sum::<Complex64>() / n as f64)
            .collect(),
    ))
}

/// Hilbert-Schmidt norm of the integral operator: `sqrt(mean_x mean_y |kappa|^2)`.
pub fn kernel_hs_norm(group: &Group, kernel: &[Complex64]) -> f64 {
    let n = group.grid_len() as f64;
    (kernel.iter().map(|z| z.norm_sqr()).sum::<f64>() / (n * n)).sqrt()
}

/// `||Op(f)||_HS`, computed from the kernel.
pub fn hs_norm(group: &Group, f: &SampledSymbol) -> Result<f64> {
    Ok(kernel_hs_norm(group, &kernel_of(group, f)?))
}

/// `mu(xi, x) = (x^{-1}, xi)`, from `Xi x X` to `X x Xi`.
pub fn mu(group: &Group, xi: &DualPoint, x: &GroupPoint) -> (GroupPoint, DualPoint) {
    (group.invert_point(x), xi.clone())
}

/// `mu^{-1}(x, xi) = (xi, x^{-1})`.
pub fn mu_inv(group: &Group, x: &GroupPoint, xi: &DualPoint) -> (DualPoint, GroupPoint) {
    (xi.clone(), group.invert_point(x))
}

/// Right quantization of `g` on the discrete group: `op` of the pulled-back
/// symbol `f(x, xi) = g(xi, x^{-1})`.
pub fn right_quantize(
    group: &Group,
    label: &str,
    g: impl Fn(&DualPoint, &GroupPoint) -> Complex64 + Send + Sync + 'static,
    x_independent: bool,
) -> Result<LinOp> {
    let f = if x_independent {
        let e = group.identity_point();
        Symbol::multiplier(&DualFunction::new(label.to_string(), move |xi| g(xi, &e)))
    } else {
        let grp = group.clone();
        Symbol::new(label.to_string(), move |x, xi| {
            let (eta, y) = mu_inv(&grp, x, xi);
            g(&eta, &y)
        })
    };
    op_quantize(group, &f.sample(group))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{inv_fourier, DualVec};
    use crate::group::{Factor, GroupSpec};
    use crate::linop::operator_norm;
    use crate::symbols::{gallery, SpaceFunction};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn groups() -> Vec<Group> {
        vec![
            Group::new(GroupSpec::torus(1, 5)).unwrap(),
            Group::new(GroupSpec::cyclic(6)).unwrap(),
            Group::new(GroupSpec::new(vec![Factor::Torus { grid: 7, window: 2 }, Factor::Cyclic(3)])).unwrap(),
            Group::new(GroupSpec::torus(2, 2)).unwrap(),
        ]
    }

    fn random_symbol(group: &Group, seed: u64) -> Symbol {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table: Vec<Complex64> = (0..group.grid_len() * group.window_len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let g = group.clone();
        let w = group.window_len();
        Symbol::new("random", move |x, xi| {
            let (xi_i, x_i) = (g.window_index(xi).unwrap(), g.grid_index(x).unwrap());
            table[x_i * w + xi_i]
        })
    }

    fn conjugated_op(group: &Group, f: &SampledSymbol) -> LinOp {
        let w = group.window_len();
        let cols: Vec<Vec<Complex64>> = (0..w)
            .map(|j| {
                let mut e = DualVec::zeros(group);
                e.0[j] = c(1.0);
                let u = inv_fourier(group, &e).unwrap();
                fourier(group, &op_apply(group, f, &u).unwrap()).unwrap().0
            })
            .collect();
        LinOp::dense(DMatrix::from_vec(w, w, cols.concat()), Side::Dual).unwrap()
    }

    #[test]
    fn constant_symbol_gives_identity() {
        for g in groups() {
            let one = Symbol::new("1", |_, _| c(1.0)).sample(&g);
            let a = op_quantize(&g, &one).unwrap();
            assert!(a.max_abs_diff(&LinOp::identity(g.window_len(), Side::Dual)).unwrap() < 1e-13);
        }
    }

    #[test]
    fn multiplier_gives_diagonal() {
        let g = Group::new(GroupSpec::torus(1, 4)).unwrap();
        let psi = DualFunction::new("k^2", |xi| c((xi.0[0] * xi.0[0]) as f64));
        let a = op_quantize(&g, &Symbol::multiplier(&psi).sample(&g)).unwrap();
        assert_eq!(a.diagonal_values().unwrap(), psi.sample(&g).as_slice());
        // same symbol without the multiplier flag goes through the dense path
        let b = op_quantize(&g, &Symbol::new("k^2", move |_, xi| c((xi.0[0] * xi.0[0]) as f64)).sample(&g)).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn character_multiplication_is_a_shift() {
        // grids with n > 2M + 1 resolve the shift without wrap-around
        let resolved = vec![
            Group::new(GroupSpec::torus_with_grid(1, 5, 16)).unwrap(),
            Group::new(GroupSpec::cyclic(6)).unwrap(),
            Group::new(GroupSpec::new(vec![Factor::Torus { grid: 9, window: 2 }, Factor::Cyclic(3)])).unwrap(),
            Group::new(GroupSpec::torus_with_grid(2, 2, 8)).unwrap(),
        ];
        for g in resolved {
            let zeta = g.default_generators()[0].clone();
            let f = Symbol::multiplication(&SpaceFunction::character(&g, &zeta)).sample(&g);
            let a = op_quantize(&g, &f).unwrap();
            for (i, xi) in g.window_points().iter().enumerate() {
                for (j, eta) in g.window_points().iter().enumerate() {
                    let expect = if *xi == g.translate(eta, &zeta).unwrap() { 1.0 } else { 0.0 };
                    assert!((a.entry(i, j) - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn minimal_grid_shift_wraps_around() {
        let g = Group::new(GroupSpec::torus(1, 5)).unwrap();
        let f = Symbol::multiplication(&SpaceFunction::character(&g, &DualPoint(vec![1]))).sample(&g);
        let a = op_quantize(&g, &f).unwrap();
        let n = g.window_len();
        for i in 0..n {
            for j in 0..n {
                let expect = if i == (j + 1) % n { 1.0 } else { 0.0 };
                assert!((a.entry(i, j) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fast_assembly_matches_literal_integral() {
        for (s, g) in groups().iter().enumerate() {
            let f = random_symbol(g, s as u64).sample(g);
            let fast = op_quantize(g, &f).unwrap();
            let slow = op_quantize_direct(g, &f).unwrap();
            assert!(fast.max_abs_diff(&slow).unwrap() < 1e-12);
        }
    }

    #[test]
    fn diagram_commutes() {
        for (s, g) in groups().iter().enumerate() {
            let f = random_symbol(g, 100 + s as u64).sample(g);
            let a = op_quantize(g, &f).unwrap();
            assert!(a.max_abs_diff(&conjugated_op(g, &f)).unwrap() < 1e-10);
        }
        let g = Group::new(GroupSpec::torus(1, 6)).unwrap();
        for (name, spec) in gallery::gallery(1) {
            let f = gallery::build(&spec, &g).unwrap().sample(&g);
            let a = op_quantize(&g, &f).unwrap();
            assert!(a.max_abs_diff(&conjugated_op(&g, &f)).unwrap() < 1e-10, "{name}");
        }
    }

    #[test]
    fn separable_factorizes_and_obeys_norm_bound() {
        let g = Group::new(GroupSpec::torus(1, 8)).unwrap();
        let phi = SpaceFunction::new("1+cos", |x| c(1.0 + 0.5 * (std::f64::consts::TAU * x.coord(0)).cos()));
        let psi = DualFunction::new("decay", |xi| c(1.0 / (1.0 + xi.0[0].abs() as f64)));
        let a = op_quantize(&g, &Symbol::separable(&phi, &psi).sample(&g)).unwrap();
        let q = op_quantize(&g, &Symbol::multiplication(&phi).sample(&g)).unwrap();
        let p = op_quantize(&g, &Symbol::multiplier(&psi).sample(&g)).unwrap();
        assert!(a.max_abs_diff(&q.mul(&p).unwrap()).unwrap() < 1e-10);
        let bound = 1.5 * 1.0;
        assert!(operator_norm(&a, 1e-12).value <= bound + 1e-8);
    }

    #[test]
    fn op_apply_special_cases() {
        let g = Group::new(GroupSpec::torus(1, 6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = DualVec((0..g.window_len()).map(|_| c(rng.random_range(-1.0..1.0))).collect());
        let u = inv_fourier(&g, &w).unwrap();
        let one = Symbol::new("1", |_, _| c(1.0)).sample(&g);
        let out = op_apply(&g, &one, &u).unwrap();
        assert!(out.0.iter().zip(&u.0).all(|(a, b)| (a - b).norm() < 1e-12));

        let phi = SpaceFunction::new("sin", |x| c((std::f64::consts::TAU * x.coord(0)).sin()));
        let out = op_apply(&g, &Symbol::multiplication(&phi).sample(&g), &u).unwrap();
        for (x, (a, b)) in out.0.iter().zip(&u.0).enumerate() {
            assert!((a - phi.eval(&g.grid_point(x)) * b).norm() < 1e-12);
        }

        let psi = DualFunction::new("k", |xi| c(xi.0[0] as f64));
        let out = op_apply(&g, &Symbol::multiplier(&psi).sample(&g), &u).unwrap();
        let w2 = DualVec(psi.sample(&g).iter().zip(&w.0).map(|(a, b)| a * b).collect());
        let expect = inv_fourier(&g, &w2).unwrap();
        assert!(out.0.iter().zip(&expect.0).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn kernel_reproduces_op_and_hs_norm() {
        for (s, g) in groups().iter().enumerate() {
            let f = random_symbol(g, 200 + s as u64).sample(g);
            let k = kernel_of(g, &f).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(s as u64);
            let u = SpaceVec((0..g.grid_len()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.3)).collect());
            let a = apply_kernel(g, &k, &u).unwrap();
            let b = op_apply(g, &f, &u).unwrap();
            assert!(a.0.iter().zip(&b.0).all(|(x, y)| (x - y).norm() < 1e-10));
            let hs = kernel_hs_norm(g, &k);
            assert!((hs - f.l2_norm()).abs() <= 1e-8 * f.l2_norm());
        }
    }

    #[test]
    fn kernel_examples() {
        let g = Group::new(GroupSpec::torus(1, 3)).unwrap();
        let unit = g.unit();
        let delta = Symbol::multiplier(&DualFunction::new("delta_e", move |xi| c(if *xi == unit { 1.0 } else { 0.0 })));
        let k = kernel_of(&g, &delta.sample(&g)).unwrap();
        assert!(k.iter().all(|z| (z - 1.0).norm() < 1e-12));

        // f = 1: Dirichlet kernel sum_{|k| <= M} cos(2 pi k (x - y))
        let k = kernel_of(&g, &Symbol::new("1", |_, _| c(1.0)).sample(&g)).unwrap();
        let n = g.grid_len();
        for x in 0..n {
            for y in 0..n {
                let t = (x as f64 - y as f64) / n as f64;
                let oracle: f64 = (-3..=3).map(|m| (std::f64::consts::TAU * m as f64 * t).cos()).sum();
                assert!((k[x * n + y] - oracle).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn right_quantization() {
        let g = Group::new(GroupSpec::torus(1, 5)).unwrap();
        let a = right_quantize(&g, "psi", |xi, _| c(xi.0[0] as f64), true).unwrap();
        assert!(a.is_diagonal());
        assert_eq!(a.entry(0, 0), c(-5.0));

        let phi = SpaceFunction::new("phi", |x| Complex64::new(x.coord(0), (std::f64::consts::TAU * x.coord(0)).sin()));
        let phi2 = phi.clone();
        let b = right_quantize(&g, "phi(x)", move |_, x| phi2.eval(x), false).unwrap();
        let gg = g.clone();
        let check = Symbol::multiplication(&SpaceFunction::new("phi check", move |x| phi.eval(&gg.invert_point(x))));
        let oracle = op_quantize(&g, &check.sample(&g)).unwrap();
        assert!(b.max_abs_diff(&oracle).unwrap() < 1e-12);

        for x in g.grid_points() {
            for xi in g.window_points() {
                let (eta, y) = mu_inv(&g, &x, &xi);
                let (x2, xi2) = mu(&g, &eta, &y);
                assert_eq!(xi2, xi);
                assert_eq!(g.grid_index(&x2).unwrap(), g.grid_index(&x).unwrap());
            }
        }
    }

    #[test]
    fn shape_errors() {
        let g = Group::new(GroupSpec::torus(1, 3)).unwrap();
        let h = Group::new(GroupSpec::torus(1, 4)).unwrap();
        let f = Symbol::new("1", |_, _| c(1.0)).sample(&h);
        assert!(op_quantize(&g, &f).is_err());
        assert!(kernel_of(&g, &f).is_err());
    }
}
