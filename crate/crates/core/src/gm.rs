//! Generalized mixture (GM) functions.
//!
//! A GM function is a weighted mean whose weights are themselves functions
//! of the input. The combiners built here (`h_med`, `h_arith`, `h_max`,
//! `h_min`) pick a referential point Θ(x) and weight each coordinate by how
//! close it lies to that point:
//!
//! ```text
//! w_i = (1 - |x_i - Θ| / Σ_j |x_j - Θ|) / (n - 1)
//! ```
//!
//! with uniform weights when every coordinate coincides with Θ.

use std::fmt;
use std::str::FromStr;

use crate::agg::{self, settle, UnitVector, WeightVector, WEIGHT_SUM_TOL};
use crate::error::{Error, Result};

/// Distance sums at or below this are treated as "all inputs equal".
pub const ALL_EQUAL_TOL: f64 = 1e-15;

/// A family of weight functions `f_1 … f_n` with `Σ f_i(x) = 1`.
pub trait WeightFunctionFamily {
    /// Fixed arity, or `None` when the family is defined for every `n`.
    fn arity(&self) -> Option<usize> {
        None
    }

    fn weights(&self, x: &[f64]) -> Vec<f64>;
}

/// `f_i = 1/n`; the GM function is the arithmetic mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformFamily;

impl WeightFunctionFamily for UniformFamily {
    fn weights(&self, x: &[f64]) -> Vec<f64> {
        vec![1.0 / x.len() as f64; x.len()]
    }
}

/// All mass on the largest input; the GM function is the maximum.
#[derive(Debug, Clone, Copy, Default)]
pub struct LargestInputFamily;

impl WeightFunctionFamily for LargestInputFamily {
    fn weights(&self, x: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; x.len()];
        let top = x
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > x[best] { i } else { best });
        w[top] = 1.0;
        w
    }
}

/// `f_i = x_i / Σ x_j` (uniform at the origin). Its GM function
/// `Σ x_i² / Σ x_i` satisfies the boundary condition but is not monotone.
#[derive(Debug, Clone, Copy, Default)]
pub struct RatioFamily;

impl WeightFunctionFamily for RatioFamily {
    fn weights(&self, x: &[f64]) -> Vec<f64> {
        let total: f64 = x.iter().sum();
        if total == 0.0 {
            vec![1.0 / x.len() as f64; x.len()]
        } else {
            x.iter().map(|v| v / total).collect()
        }
    }
}

/// `GM_Γ(x) = Σ f_i(x) · x_i`.
pub fn gm_apply<F>(fwf: &F, x: &UnitVector) -> Result<f64>
where
    F: WeightFunctionFamily + ?Sized,
{
    if let Some(n) = fwf.arity() {
        if n != x.len() {
            return Err(Error::Arity(format!(
                "family has arity {n}, input has {}",
                x.len()
            )));
        }
    }
    let w = fwf.weights(x.as_slice());
    if w.len() != x.len() {
        return Err(Error::Arity(format!(
            "family produced {} weights for {} inputs",
            w.len(),
            x.len()
        )));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::Domain(format!(
            "weight functions sum to {total}, expected 1"
        )));
    }
    Ok(settle(w.iter().zip(x.as_slice()).map(|(w, x)| w * x).sum()))
}

/// Θ: the per-class referential point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReferentialSelector {
    Median,
    ArithmeticMean,
    Maximum,
    Minimum,
}

impl ReferentialSelector {
    pub const ALL: [ReferentialSelector; 4] = [
        ReferentialSelector::Median,
        ReferentialSelector::ArithmeticMean,
        ReferentialSelector::Maximum,
        ReferentialSelector::Minimum,
    ];

    pub fn evaluate(self, x: &[f64]) -> f64 {
        match self {
            ReferentialSelector::Median => agg::median_of(x),
            ReferentialSelector::ArithmeticMean => agg::mean_of(x),
            ReferentialSelector::Maximum => agg::max_of(x),
            ReferentialSelector::Minimum => agg::min_of(x),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReferentialSelector::Median => "median",
            ReferentialSelector::ArithmeticMean => "arithmetic-mean",
            ReferentialSelector::Maximum => "maximum",
            ReferentialSelector::Minimum => "minimum",
        }
    }
}

impl fmt::Display for ReferentialSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReferentialSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "median" | "med" => Ok(ReferentialSelector::Median),
            "arithmetic-mean" | "arithmetic" | "arith" | "mean" => {
                Ok(ReferentialSelector::ArithmeticMean)
            }
            "maximum" | "max" => Ok(ReferentialSelector::Maximum),
            "minimum" | "min" => Ok(ReferentialSelector::Minimum),
            other => Err(Error::Config(format!(
                "unknown referential selector `{other}` (expected median, arithmetic-mean, maximum or minimum)"
            ))),
        }
    }
}

/// Intermediate quantities of one weight calculation, kept for tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightCalc {
    /// The referential point α = Θ(o).
    pub referential: f64,
    /// d = Σ |o_i − α|.
    pub distance_sum: f64,
    pub weights: WeightVector,
}

/// Writes the dynamic weights for `o` into `out` and returns `(α, d)`.
/// `o.len() >= 2` is the caller's responsibility.
pub(crate) fn fill_weights(
    o: &[f64],
    selector: ReferentialSelector,
    out: &mut [f64],
) -> (f64, f64) {
    let n = o.len();
    debug_assert!(n >= 2 && out.len() == n);
    let alpha = selector.evaluate(o);
    let d: f64 = o.iter().map(|v| (v - alpha).abs()).sum();
    if d > ALL_EQUAL_TOL {
        let scale = 1.0 / (n - 1) as f64;
        for (w, v) in out.iter_mut().zip(o) {
            *w = scale * (1.0 - (v - alpha).abs() / d);
        }
    } else {
        out.fill(1.0 / n as f64);
    }
    (alpha, d)
}

fn require_pair(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::Arity(format!(
            "GM combination needs at least 2 inputs, got {n}"
        )))
    } else {
        Ok(())
    }
}

pub fn weights_calc_traced(o: &UnitVector, selector: ReferentialSelector) -> Result<WeightCalc> {
    require_pair(o.len())?;
    let mut w = vec![0.0; o.len()];
    let (referential, distance_sum) = fill_weights(o.as_slice(), selector, &mut w);
    Ok(WeightCalc {
        referential,
        distance_sum,
        weights: WeightVector::from_vec_unchecked(w),
    })
}

/// Dynamic weights of the members for one class column.
pub fn weights_calc(o: &UnitVector, selector: ReferentialSelector) -> Result<WeightVector> {
    weights_calc_traced(o, selector).map(|c| c.weights)
}

/// A GM combiner `H_Θ` for one of the supported referential points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GmCombiner {
    selector: ReferentialSelector,
}

impl GmCombiner {
    pub const fn new(selector: ReferentialSelector) -> Self {
        Self { selector }
    }

    pub fn selector(&self) -> ReferentialSelector {
        self.selector
    }

    /// Config/CLI name: `h_med`, `h_arith`, `h_max`, `h_min`.
    pub fn name(&self) -> &'static str {
        match self.selector {
            ReferentialSelector::Median => "h_med",
            ReferentialSelector::ArithmeticMean => "h_arith",
            ReferentialSelector::Maximum => "h_max",
            ReferentialSelector::Minimum => "h_min",
        }
    }

    pub fn label(&self) -> &'static str {
        match self.selector {
            ReferentialSelector::Median => "H_Med",
            ReferentialSelector::ArithmeticMean => "H_Arith",
            ReferentialSelector::Maximum => "H_Max",
            ReferentialSelector::Minimum => "H_Min",
        }
    }
}

impl WeightFunctionFamily for GmCombiner {
    fn weights(&self, x: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; x.len()];
        if x.len() == 1 {
            w[0] = 1.0;
        } else {
            fill_weights(x, self.selector, &mut w);
        }
        w
    }
}

impl fmt::Display for GmCombiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Builds a combiner from either its combiner name (`h_med`, …) or a
/// selector name (`median`, …).
pub fn make_combiner(kind: &str) -> Result<GmCombiner> {
    let key = kind.trim().to_ascii_lowercase();
    let selector = match key.as_str() {
        "h_med" => ReferentialSelector::Median,
        "h_arith" => ReferentialSelector::ArithmeticMean,
        "h_max" => ReferentialSelector::Maximum,
        "h_min" => ReferentialSelector::Minimum,
        other => other.parse().map_err(|_| {
            Error::Config(format!(
                "unknown GM combiner `{kind}` (supported: h_med, h_arith, h_max, h_min)"
            ))
        })?,
    };
    Ok(GmCombiner::new(selector))
}

pub(crate) fn h_theta_slice(selector: ReferentialSelector, x: &[f64]) -> f64 {
    let n = x.len();
    let theta = selector.evaluate(x);
    let d: f64 = x.iter().map(|v| (v - theta).abs()).sum();
    if d <= ALL_EQUAL_TOL {
        return x[0];
    }
    let total: f64 = x.iter().map(|&v| v - v * (v - theta).abs() / d).sum();
    settle(total / (n - 1) as f64)
}

/// Closed form of `H_Θ`:
/// `x_1` when all coordinates coincide, otherwise
/// `(1/(n−1)) Σ_i (x_i − x_i |x_i − Θ(x)| / Σ_j |x_j − Θ(x)|)`.
pub fn h_theta_apply(c: &GmCombiner, x: &UnitVector) -> Result<f64> {
    require_pair(x.len())?;
    Ok(h_theta_slice(c.selector, x.as_slice()))
}

/// The median-based function H with the `1/n` leading factor:
/// `x` on constant tuples, otherwise
/// `(1/n) Σ_i (x_i − x_i |x_i − Med(x)| / Σ_j |x_j − Med(x)|)`.
///
/// Off the diagonal this equals `(n−1)/n · H_Med(x)`, so it is not
/// idempotent in the limit and does not coincide with `h_med`.
pub fn h_function_apply(x: &UnitVector) -> Result<f64> {
    require_pair(x.len())?;
    let x = x.as_slice();
    let med = agg::median_of(x);
    let d: f64 = x.iter().map(|v| (v - med).abs()).sum();
    if d <= ALL_EQUAL_TOL {
        return Ok(x[0]);
    }
    let total: f64 = x.iter().map(|&v| v - v * (v - med).abs() / d).sum();
    Ok(settle(total / x.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agg::{DirectionVector, MonotonicityOutcome};
    use proptest::prelude::*;

    fn uv(v: &[f64]) -> UnitVector {
        UnitVector::new(v.to_vec()).unwrap()
    }

    const ARITH: GmCombiner = GmCombiner::new(ReferentialSelector::ArithmeticMean);
    const MED: GmCombiner = GmCombiner::new(ReferentialSelector::Median);
    const MAX: GmCombiner = GmCombiner::new(ReferentialSelector::Maximum);

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn gm_apply_reference_families() {
        let x = uv(&[0.9, 0.3, 0.5]);
        assert!((gm_apply(&UniformFamily, &x).unwrap() - 0.566_667).abs() < 1e-6);
        assert_eq!(gm_apply(&LargestInputFamily, &x).unwrap(), 0.9);
        assert!((gm_apply(&RatioFamily, &uv(&[0.5, 0.2, 0.1])).unwrap() - 0.375).abs() < 1e-12);
        assert!((gm_apply(&RatioFamily, &uv(&[0.5, 0.22, 0.2])).unwrap() - 0.368).abs() < 5e-4);
        assert_eq!(gm_apply(&RatioFamily, &uv(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn gm_apply_rejects_bad_families() {
        struct Fixed3;
        impl WeightFunctionFamily for Fixed3 {
            fn arity(&self) -> Option<usize> {
                Some(3)
            }
            fn weights(&self, _: &[f64]) -> Vec<f64> {
                vec![0.5, 0.5, 0.5]
            }
        }
        assert!(matches!(
            gm_apply(&Fixed3, &uv(&[0.1, 0.2])),
            Err(Error::Arity(_))
        ));
        assert!(matches!(
            gm_apply(&Fixed3, &uv(&[0.1, 0.2, 0.3])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn ratio_family_is_not_monotone() {
        let r = DirectionVector::new(vec![0.0, 0.02, 0.1]).unwrap();
        let f = |x: &[f64]| gm_apply(&RatioFamily, &uv(x)).unwrap();
        let outcome =
            crate::agg::check_monotone_at(f, &r, &[uv(&[0.5, 0.2, 0.1])], &[1.0]).unwrap();
        let MonotonicityOutcome::Fail(v) = outcome else {
            panic!("expected violation")
        };
        assert_close(&v.shifted, &[0.5, 0.22, 0.2], 1e-12);
        assert!((v.value_at_x - 0.375).abs() < 1e-12);
        assert!((v.value_at_shifted - 0.367_826).abs() < 1e-6);
    }

    #[test]
    fn weights_for_worked_example() {
        let w = weights_calc(&uv(&[0.9, 0.3, 0.5]), ReferentialSelector::ArithmeticMean).unwrap();
        assert_close(w.as_slice(), &[0.25, 0.30, 0.45], 1e-9);

        // α = 0.9, d = 0 + 0.6 + 0.4 = 1.0 → w = ½(1 − d_i) = (0.5, 0.2, 0.3)
        let w = weights_calc(&uv(&[0.9, 0.3, 0.5]), ReferentialSelector::Maximum).unwrap();
        assert_close(w.as_slice(), &[0.5, 0.2, 0.3], 1e-12);

        for s in ReferentialSelector::ALL {
            let w = weights_calc(&uv(&[0.4, 0.4, 0.4]), s).unwrap();
            assert_close(w.as_slice(), &[1.0 / 3.0; 3], 0.0);
        }
    }

    #[test]
    fn weights_trace_fields() {
        let c = weights_calc_traced(&uv(&[0.9, 0.3, 0.5]), ReferentialSelector::ArithmeticMean)
            .unwrap();
        assert!((c.referential - 17.0 / 30.0).abs() < 1e-12);
        assert!((c.distance_sum - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_input_is_an_arity_error() {
        assert!(matches!(
            weights_calc(&uv(&[0.5]), ReferentialSelector::Median),
            Err(Error::Arity(_))
        ));
        assert!(matches!(
            h_theta_apply(&MED, &uv(&[0.5])),
            Err(Error::Arity(_))
        ));
        assert!(matches!(
            h_function_apply(&uv(&[0.5])),
            Err(Error::Arity(_))
        ));
    }

    #[test]
    fn h_theta_examples() {
        assert!((h_theta_apply(&ARITH, &uv(&[0.9, 0.3, 0.5])).unwrap() - 0.54).abs() < 1e-12);
        assert!((h_theta_apply(&ARITH, &uv(&[0.1, 0.7, 0.5])).unwrap() - 0.46).abs() < 1e-12);
        // H_Med: α = 0.5, d = 0.6, w = (1/6, 1/3, 1/2) → 0.15 + 0.1 + 0.25
        assert!((h_theta_apply(&MED, &uv(&[0.9, 0.3, 0.5])).unwrap() - 0.5).abs() < 1e-12);
        // H_Max: w = (0.5, 0.2, 0.3) → 0.45 + 0.06 + 0.15
        assert!((h_theta_apply(&MAX, &uv(&[0.9, 0.3, 0.5])).unwrap() - 0.66).abs() < 1e-12);
    }

    #[test]
    fn make_combiner_names() {
        assert_eq!(make_combiner("h_arith").unwrap(), ARITH);
        assert_eq!(make_combiner("median").unwrap(), MED);
        assert_eq!(make_combiner("h_min").unwrap().label(), "H_Min");
        let err = make_combiner("h_mode").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("h_med")));
        let med = make_combiner("h_med").unwrap();
        assert_eq!(h_theta_apply(&med, &uv(&[0.27, 0.27])).unwrap(), 0.27);
    }

    #[test]
    fn h_function_as_printed() {
        assert_eq!(h_function_apply(&uv(&[0.6, 0.6, 0.6])).unwrap(), 0.6);
        // Med = 0.5, d = 0.6; terms 0.9·(1−2/3) + 0.3·(1−1/3) + 0.5 = 1.0; /3
        let v = h_function_apply(&uv(&[0.9, 0.3, 0.5])).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        assert!((v - h_theta_apply(&MED, &uv(&[0.9, 0.3, 0.5])).unwrap()).abs() > 0.1);
        // Med = 0.5, d = 1; terms 0 + 0.5; /2
        let v = h_function_apply(&uv(&[0.0, 1.0])).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    fn unit_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..=1.0, 2..=max_len)
    }

    proptest! {
        #[test]
        fn weights_normalized_and_ordered_by_distance(x in unit_vec(10), s in 0usize..4) {
            let selector = ReferentialSelector::ALL[s];
            let calc = weights_calc_traced(&uv(&x), selector).unwrap();
            let w = calc.weights.as_slice();
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|&v| (0.0..=1.0).contains(&v)));
            for i in 0..x.len() {
                for j in 0..x.len() {
                    let (di, dj) = ((x[i] - calc.referential).abs(), (x[j] - calc.referential).abs());
                    if di + 1e-12 < dj {
                        prop_assert!(w[i] > w[j]);
                    }
                }
            }
        }

        #[test]
        fn two_step_equals_closed_form(x in unit_vec(10), s in 0usize..4) {
            let c = GmCombiner::new(ReferentialSelector::ALL[s]);
            let x = uv(&x);
            let w = weights_calc(&x, c.selector()).unwrap();
            let two_step: f64 = w.as_slice().iter().zip(x.as_slice()).map(|(w, v)| w * v).sum();
            prop_assert!((two_step - h_theta_apply(&c, &x).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn h_function_is_scaled_h_med(x in unit_vec(10)) {
            let x = uv(&x);
            let n = x.len() as f64;
            let d: f64 = {
                let m = agg::median_of(x.as_slice());
                x.as_slice().iter().map(|v| (v - m).abs()).sum()
            };
            prop_assume!(d > ALL_EQUAL_TOL);
            let h = h_function_apply(&x).unwrap();
            let hm = h_theta_apply(&MED, &x).unwrap();
            prop_assert!((h - (n - 1.0) / n * hm).abs() < 1e-12);
        }
    }
}
