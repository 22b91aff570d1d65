//! Covariances, joint cumulants and the first-order temperature expansion.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{enumerate, EnumerationTable};
use crate::spin::{pair_energy, ModelParams};

/// Highest supported cumulant order.
pub const MAX_ORDER: usize = 4;

/// A probability measure on finitely many points.
pub trait FiniteMeasure: Sync {
    type Point: ?Sized + 'static;

    fn expect(&self, f: &(dyn Fn(&Self::Point) -> f64 + Sync)) -> f64;
}

impl FiniteMeasure for EnumerationTable {
    type Point = [i8];

    fn expect(&self, f: &(dyn Fn(&[i8]) -> f64 + Sync)) -> f64 {
        self.expectation(f)
    }
}

/// Points in `R^n` with normalised weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoints {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl WeightedPoints {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() || points.is_empty() {
            return Err(Error::InvalidArgument("points and weights must be non-empty and of equal length".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        Ok(WeightedPoints { points, weights: weights.into_iter().map(|w| w / total).collect() })
    }
}

impl FiniteMeasure for WeightedPoints {
    type Point = [f64];

    fn expect(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// A real function of a configuration.
pub struct RandomVariable<P: ?Sized = [i8]> {
    name: String,
    f: Arc<dyn Fn(&P) -> f64 + Send + Sync>,
}

impl<P: ?Sized> Clone for RandomVariable<P> {
    fn clone(&self) -> Self {
        RandomVariable { name: self.name.clone(), f: self.f.clone() }
    }
}

impl<P: ?Sized> std::fmt::Debug for RandomVariable<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RandomVariable({})", self.name)
    }
}

impl<P: ?Sized + 'static> RandomVariable<P> {
    pub fn new(name: impl Into<String>, f: impl Fn(&P) -> f64 + Send + Sync + 'static) -> Self {
        RandomVariable { name: name.into(), f: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Self {
        RandomVariable::new(format!("{c}"), move |_: &P| c)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let f = self.f.clone();
        RandomVariable::new(format!("{a}*{}", self.name), move |x: &P| a * f(x))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &P) -> f64 {
        (self.f)(x)
    }
}

impl RandomVariable<[i8]> {
    pub fn spin(site: usize) -> Self {
        RandomVariable::new(format!("s{site}"), move |s: &[i8]| f64::from(s[site]))
    }

    /// Product of the spins at `sites`.
    pub fn product(sites: &[usize]) -> Self {
        let sites = sites.to_vec();
        let name = sites.iter().map(|s| format!("s{s}")).collect::<Vec<_>>().join("*");
        RandomVariable::new(name, move |s: &[i8]| sites.iter().map(|&v| f64::from(s[v])).product())
    }
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 || k > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("cumulant order must be 1..={MAX_ORDER}, got {k}")));
    }
    Ok(())
}

/// `E[prod_{i in mask} f_i]` for every subset mask of `fs`.
fn subset_moments<M: FiniteMeasure>(measure: &M, fs: &[RandomVariable<M::Point>]) -> Vec<f64> {
    let k = fs.len();
    let mut m = vec![1.0; 1 << k];
    for (mask, slot) in m.iter_mut().enumerate().skip(1) {
        let members: Vec<&RandomVariable<M::Point>> =
            (0..k).filter(|i| mask >> i & 1 == 1).map(|i| &fs[i]).collect();
        *slot = measure.expect(&|x| members.iter().map(|f| f.eval(x)).product());
    }
    m
}

pub fn mean<M: FiniteMeasure>(measure: &M, f: &RandomVariable<M::Point>) -> f64 {
    measure.expect(&|x| f.eval(x))
}

/// `<f g> - <f><g>`.
pub fn covariance<M: FiniteMeasure>(measure: &M, f: &RandomVariable<M::Point>, g: &RandomVariable<M::Point>) -> f64 {
    let m = subset_moments(measure, &[f.clone(), g.clone()]);
    m[3] - m[1] * m[2]
}

/// Joint cumulant of orders 1 to 3 from the explicit moment expansion.
pub fn cumulant_direct<M: FiniteMeasure>(measure: &M, fs: &[RandomVariable<M::Point>]) -> Result<f64> {
    let m = subset_moments(measure, fs);
    Ok(match fs.len() {
        1 => m[1],
        2 => m[3] - m[1] * m[2],
        3 => m[7] - m[3] * m[4] - m[5] * m[2] - m[6] * m[1] + 2.0 * m[1] * m[2] * m[4],
        k => {
            return Err(Error::InvalidArgument(format!(
                "the explicit expansion covers orders 1..=3, got {k}"
            )))
        }
    })
}

// Product in the algebra of square-free monomials t^S, S a subset mask.
fn subset_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for (s, slot) in out.iter_mut().enumerate() {
        let mut t = s;
        loop {
            *slot += a[t] * b[s & !t];
            if t == 0 {
                break;
            }
            t = (t - 1) & s;
        }
    }
    out
}

/// Joint cumulant as the coefficient of `t_1 ... t_k` in `ln <exp(sum t_i f_i)>`,
/// expanding the logarithm of the moment series.
pub fn cumulant_from_generating<M: FiniteMeasure>(measure: &M, fs: &[RandomVariable<M::Point>]) -> Result<f64> {
    check_order(fs.len())?;
    Ok(log_series_top(&subset_moments(measure, fs)))
}

fn log_series_top(moments: &[f64]) -> f64 {
    let k = moments.len().trailing_zeros() as usize;
    let mut x = moments.to_vec();
    x[0] = 0.0;
    let mut power = x.clone();
    let full = moments.len() - 1;
    let mut total = 0.0;
    for n in 1..=k {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * power[full] / n as f64;
        power = subset_product(&power, &x);
    }
    total
}

/// Joint cumulant of 1 to 4 variables.
pub fn cumulant<M: FiniteMeasure>(measure: &M, fs: &[RandomVariable<M::Point>]) -> Result<f64> {
    check_order(fs.len())?;
    if fs.len() <= 3 {
        cumulant_direct(measure, fs)
    } else {
        cumulant_from_generating(measure, fs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratingCheck {
    /// Cumulant orders kept in the truncated series.
    pub order: usize,
    pub ts: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `residual(t) / residual(t / 2)` for consecutive scales.
    pub ratios: Vec<f64>,
    /// `2^order`.
    pub required_ratio: f64,
    pub passes: bool,
}

/// Compares `ln <exp(t sum f_i)>` with its cumulant series truncated at
/// `order`, at `t0, t0/2, ...`. The residual is `O(t^(order+1))`, so each
/// halving is required to shrink it by at least `2^order`.
pub fn verify_generating_identity<M: FiniteMeasure>(
    measure: &M,
    fs: &[RandomVariable<M::Point>],
    order: usize,
    t0: f64,
    halvings: usize,
) -> Result<GeneratingCheck> {
    check_order(order)?;
    if fs.is_empty() || fs.len() > 3 {
        return Err(Error::InvalidArgument("the identity is checked for 1 to 3 variables".into()));
    }
    if !(t0.is_finite() && t0 > 0.0) || halvings == 0 {
        return Err(Error::InvalidArgument("t0 must be positive and at least one halving is needed".into()));
    }
    // kappa_n of the sum, by multilinearity over ordered index tuples
    let mut kappa = vec![0.0; order + 1];
    for (n, slot) in kappa.iter_mut().enumerate().skip(1) {
        let mut tuple = vec![0usize; n];
        loop {
            let vars: Vec<RandomVariable<M::Point>> = tuple.iter().map(|&i| fs[i].clone()).collect();
            *slot += cumulant_from_generating(measure, &vars)?;
            if !advance(&mut tuple, fs.len()) {
                break;
            }
        }
    }
    let mut ts = Vec::new();
    let mut residuals = Vec::new();
    for i in 0..=halvings {
        let t = t0 / f64::from(1u32 << i);
        let mgf = measure.expect(&|x| (t * fs.iter().map(|f| f.eval(x)).sum::<f64>()).exp());
        if !(mgf.is_finite() && mgf > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "exponential moment is ill-conditioned at t = {t}; rescale the variables"
            )));
        }
        let mut series = 0.0;
        let mut factorial = 1.0;
        for (n, k) in kappa.iter().enumerate().skip(1) {
            factorial *= n as f64;
            series += k * t.powi(n as i32) / factorial;
        }
        ts.push(t);
        residuals.push((mgf.ln() - series).abs());
    }
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let required_ratio = f64::from(1u32 << order);
    // a residual that is already at rounding level has nothing left to shrink
    let floor = 1e-14;
    let passes = residuals
        .windows(2)
        .all(|w| w[0] <= floor || w[1] <= floor || w[0] / w[1] >= required_ratio);
    Ok(GeneratingCheck { order, ts, residuals, ratios, required_ratio, passes })
}

fn advance(tuple: &mut [usize], base: usize) -> bool {
    for digit in tuple.iter_mut().rev() {
        *digit += 1;
        if *digit < base {
            return true;
        }
        *digit = 0;
    }
    false
}

fn require_zero_field(table: &EnumerationTable) -> Result<()> {
    if table.params().field != 0.0 {
        return Err(Error::InvalidParams("the temperature expansion is implemented at zero field".into()));
    }
    Ok(())
}

/// `<f>_{b0} + db * sum_edges cov(f, -pair_energy(edge))`, the first-order
/// expansion of `<f>` at inverse temperature `b0 + db`.
pub fn first_order_correction(
    table: &EnumerationTable,
    f: &RandomVariable,
    edges: &[(usize, usize)],
    delta_beta: f64,
) -> Result<f64> {
    require_zero_field(table)?;
    let base = mean(table, f);
    if delta_beta == 0.0 {
        return Ok(base);
    }
    Ok(base + delta_beta * edge_covariance(table, f, edges)?)
}

fn edge_covariance(table: &EnumerationTable, f: &RandomVariable, edges: &[(usize, usize)]) -> Result<f64> {
    let lattice = table.lattice();
    for &(a, b) in edges {
        lattice.check_site(a)?;
        lattice.check_site(b)?;
    }
    let bond = RandomVariable::new("bonds", {
        let edges = edges.to_vec();
        move |s: &[i8]| -(edges.iter().map(|&(a, b)| pair_energy(s[a], s[b])).sum::<i64>() as f64)
    });
    Ok(covariance(table, f, &bond))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub beta: f64,
    /// `sum_edges cov(f, -pair_energy)` at `beta`.
    pub first_order: f64,
    /// Two-level Richardson extrapolation of forward differences of the
    /// exact `<f>`.
    pub richardson: f64,
    pub step: f64,
    pub gap: f64,
}

/// Checks the first-order coefficient over all lattice edges against the
/// numerical derivative of the exact expectation.
pub fn calibrate_first_order(table: &EnumerationTable, f: &RandomVariable, step: f64) -> Result<Calibration> {
    require_zero_field(table)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let params = *table.params();
    let beta = params.beta();
    if !beta.is_finite() {
        return Err(Error::ZeroTemperature);
    }
    let lattice = table.lattice().clone();
    let first_order = edge_covariance(table, f, lattice.edges())?;
    let at = |b: f64| -> Result<f64> {
        let t = enumerate(lattice.clone(), ModelParams::from_beta(params.model, b, 0.0)?)?;
        Ok(mean(&t, f))
    };
    let g0 = mean(table, f);
    let d_full = (at(beta + step)? - g0) / step;
    let d_half = (at(beta + step / 2.0)? - g0) / (step / 2.0);
    let richardson = 2.0 * d_half - d_full;
    Ok(Calibration { beta, first_order, richardson, step, gap: (first_order - richardson).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{BoundaryCondition, Lattice};
    use crate::spin::Model;
    use proptest::prelude::*;

    fn table(extents: &[usize], bc: BoundaryCondition, beta: f64) -> EnumerationTable {
        let l = Arc::new(Lattice::new(extents.to_vec(), bc).unwrap());
        enumerate(l, ModelParams::from_beta(Model::Ising, beta, 0.0).unwrap()).unwrap()
    }

    // set-partition formula: sum over partitions of (-1)^(|P|-1) (|P|-1)! prod E[block]
    fn partition_cumulant(moments: &[f64], k: usize) -> f64 {
        fn rec(rest: usize, blocks: &mut Vec<usize>, moments: &[f64], out: &mut f64) {
            if rest == 0 {
                let b = blocks.len();
                let sign = if b % 2 == 1 { 1.0 } else { -1.0 };
                let fact: f64 = (1..b).map(|i| i as f64).product();
                *out += sign * fact * blocks.iter().map(|&m| moments[m]).product::<f64>();
                return;
            }
            let low = rest & rest.wrapping_neg();
            let others = rest & !low;
            let mut sub = others;
            loop {
                blocks.push(sub | low);
                rec(others & !sub, blocks, moments, out);
                blocks.pop();
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & others;
            }
        }
        let mut out = 0.0;
        rec((1 << k) - 1, &mut Vec::new(), moments, &mut out);
        out
    }

    fn var(name: &str, f: impl Fn(&[i8]) -> f64 + Send + Sync + 'static) -> RandomVariable {
        RandomVariable::new(name, f)
    }

    fn mixed_vars() -> Vec<RandomVariable> {
        vec![
            var("a", |s| f64::from(s[0]) + 0.5 * f64::from(s[1] * s[4])),
            var("b", |s| f64::from(s[2] + s[3]).powi(2) - 0.3),
            var("c", |s| f64::from(s[4]) * 1.7 + f64::from(s[5] * s[0] * s[3])),
            var("d", |s| f64::from(s[1] - s[5]) + 0.25),
        ]
    }

    #[test]
    fn covariance_examples() {
        let t = table(&[3, 3], BoundaryCondition::Free, 0.4);
        let s = RandomVariable::spin(4);
        assert!(covariance(&t, &s, &RandomVariable::constant(2.5)).abs() < 1e-15);
        assert!((covariance(&t, &s, &s) - 1.0).abs() < 1e-12);
        let t0 = table(&[3, 3], BoundaryCondition::Free, 0.0);
        let far = RandomVariable::product(&[7, 8]);
        assert!(covariance(&t0, &RandomVariable::spin(0), &far).abs() < 1e-15);
        let edge = RandomVariable::product(&[9, 10]);
        let near_zero = table(&[12], BoundaryCondition::AllPlus, 0.01);
        let small = covariance(&near_zero, &RandomVariable::spin(1), &edge).abs();
        assert!(small > 0.0 && small < 1e-6);
        let at_zero = table(&[12], BoundaryCondition::AllPlus, 0.0);
        assert!(covariance(&at_zero, &RandomVariable::spin(1), &edge).abs() < 1e-15);
    }

    #[test]
    fn cumulants_of_independent_spins_vanish() {
        let t = table(&[3, 3], BoundaryCondition::Free, 0.0);
        let spins: Vec<RandomVariable> = [0, 4, 8, 2].iter().map(|&v| RandomVariable::spin(v)).collect();
        for k in 2..=4 {
            assert!(cumulant(&t, &spins[..k]).unwrap().abs() < 1e-12);
        }
        let mixed = [RandomVariable::product(&[0, 1]), RandomVariable::spin(5), RandomVariable::product(&[7, 8])];
        assert!(cumulant(&t, &mixed).unwrap().abs() < 1e-12);
        assert!(cumulant(&t, &spins[..3]).unwrap().abs() < 1e-12);
        assert!(cumulant(&t, &vec![spins[0].clone(); 5]).is_err());
        assert!(cumulant::<EnumerationTable>(&t, &[]).is_err());
    }

    #[test]
    fn direct_and_generating_agree() {
        let t = table(&[2, 3], BoundaryCondition::Free, 0.7);
        let vs = mixed_vars();
        for k in 1..=3 {
            let a = cumulant_direct(&t, &vs[..k]).unwrap();
            let b = cumulant_from_generating(&t, &vs[..k]).unwrap();
            assert!((a - b).abs() < 1e-12, "order {k}: {a} vs {b}");
        }
    }

    #[test]
    fn generating_matches_partition_formula() {
        let t = table(&[2, 3], BoundaryCondition::Free, 0.5);
        let vs = mixed_vars();
        for k in 1..=4 {
            let m = subset_moments(&t, &vs[..k]);
            let oracle = partition_cumulant(&m, k);
            let got = cumulant(&t, &vs[..k]).unwrap();
            assert!((got - oracle).abs() < 1e-11, "order {k}: {got} vs {oracle}");
        }
        // single variable: fourth cumulant of a +-1 spin at zero coupling is -2
        let t0 = table(&[3], BoundaryCondition::Free, 0.0);
        let s = RandomVariable::spin(1);
        assert!((cumulant(&t0, &[s.clone(), s.clone(), s.clone(), s]).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_pairs_have_no_higher_cumulants() {
        let rho: f64 = 0.6;
        let h = 0.05;
        let half = 200;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in -half..=half {
            for j in -half..=half {
                let (x, y) = (f64::from(i) * h, f64::from(j) * h);
                points.push(vec![x, y]);
                weights.push((-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * (1.0 - rho * rho))).exp());
            }
        }
        let g = WeightedPoints::new(points, weights).unwrap();
        let x = RandomVariable::<[f64]>::new("x", |p: &[f64]| p[0]);
        let y = RandomVariable::<[f64]>::new("y", |p: &[f64]| p[1]);
        assert!((cumulant(&g, &[x.clone(), y.clone()]).unwrap() - rho).abs() < 1e-6);
        for vars in [
            vec![x.clone(), x.clone(), y.clone()],
            vec![x.clone(), y.clone(), y.clone()],
            vec![x.clone(), x.clone(), y.clone(), y.clone()],
            vec![x.clone(), x.clone(), x.clone(), x.clone()],
            vec![x.clone(), y.clone(), x.clone(), y.clone()],
        ] {
            assert!(cumulant(&g, &vars).unwrap().abs() < 1e-6, "{vars:?}");
        }
    }

    #[test]
    fn generating_identity_single_variable() {
        let t = table(&[2, 3], BoundaryCondition::Free, 0.7);
        let f = var("e", |s| f64::from(s[0] * s[1] + s[1] * s[2] + s[3]) / 3.0);
        let check = verify_generating_identity(&t, std::slice::from_ref(&f), 2, 0.2, 3).unwrap();
        assert!(check.passes, "{check:?}");
        assert!(check.ratios.iter().all(|&r| r >= 8.0), "{check:?}");
        for order in 1..=4 {
            assert!(verify_generating_identity(&t, std::slice::from_ref(&f), order, 0.2, 3).unwrap().passes);
        }
    }

    #[test]
    fn generating_identity_edge_cases() {
        let t = table(&[3, 3], BoundaryCondition::Free, 0.0);
        let zero = RandomVariable::constant(0.0);
        let c = verify_generating_identity(&t, &[zero.clone(), zero], 2, 0.2, 2).unwrap();
        assert!(c.residuals.iter().all(|&r| r == 0.0) && c.passes);

        // two free spins: ln<e^{t(s1+s2)}> = 2 ln cosh t = t^2 - t^4/6 + ...
        let pair = [RandomVariable::spin(0), RandomVariable::spin(8)];
        let t0 = 0.2f64;
        let c4 = verify_generating_identity(&t, &pair, 4, t0, 3).unwrap();
        assert!(c4.passes, "{c4:?}");
        let exact = 2.0 * t0.cosh().ln();
        let series = t0 * t0 - t0.powi(4) / 6.0;
        assert!((c4.residuals[0] - (exact - series).abs()).abs() < 1e-14);

        let big = RandomVariable::new("big", |s: &[i8]| 1e4 * f64::from(s[0]));
        assert!(verify_generating_identity(&t, &[big], 2, 1.0, 2).is_err());
    }

    #[test]
    fn first_order_examples() {
        let chain = table(&[12], BoundaryCondition::Free, 0.0);
        let lattice = chain.lattice().clone();
        let s = RandomVariable::spin(3);
        assert_eq!(first_order_correction(&chain, &s, lattice.edges(), 0.1).unwrap(), 0.0);
        let bond = RandomVariable::product(&[5, 6]);
        let base = first_order_correction(&chain, &bond, lattice.edges(), 0.0).unwrap();
        assert_eq!(base, mean(&chain, &bond));
        let c = calibrate_first_order(&chain, &bond, 1e-3).unwrap();
        assert!((c.first_order - 1.0).abs() < 1e-12);
        assert!((c.richardson - 1.0).abs() < 1e-6, "{c:?}");
        let v = first_order_correction(&chain, &bond, lattice.edges(), 0.01).unwrap();
        assert!((v - 0.01f64.tanh()).abs() < 1e-6);
    }

    #[test]
    fn first_order_matches_derivative_away_from_zero() {
        let t = table(&[3, 3], BoundaryCondition::AllPlus, 0.35);
        for f in [RandomVariable::spin(4), RandomVariable::product(&[4, 5])] {
            let c = calibrate_first_order(&t, &f, 1e-3).unwrap();
            assert!(c.gap < 1e-5, "{c:?}");
        }
        let l = Arc::new(Lattice::new(vec![3], BoundaryCondition::Free).unwrap());
        let h = enumerate(l, ModelParams::new(Model::Ising, 1.0, 0.2).unwrap()).unwrap();
        assert!(first_order_correction(&h, &RandomVariable::spin(0), &[(0, 1)], 0.1).is_err());
    }

    proptest! {
        #[test]
        fn cumulants_are_symmetric(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(), k in 2usize..=4) {
            let t = table(&[2, 3], BoundaryCondition::Free, 0.6);
            let vs = mixed_vars();
            let base = cumulant(&t, &vs[..k]).unwrap();
            let picked: Vec<usize> = perm.iter().copied().filter(|&i| i < k).collect();
            let shuffled: Vec<RandomVariable> = picked.iter().map(|&i| vs[i].clone()).collect();
            let other = cumulant(&t, &shuffled).unwrap();
            prop_assert!((base - other).abs() < 1e-11 * (1.0 + base.abs()));
        }

        #[test]
        fn cumulants_are_multilinear(a in -3.0f64..3.0, k in 1usize..=4) {
            let t = table(&[2, 3], BoundaryCondition::Free, 0.6);
            let mut vs = mixed_vars();
            vs.truncate(k);
            let base = cumulant(&t, &vs).unwrap();
            vs[0] = vs[0].scaled(a);
            let scaled = cumulant(&t, &vs).unwrap();
            prop_assert!((scaled - a * base).abs() < 1e-10 * (1.0 + base.abs()));
        }
    }
}
