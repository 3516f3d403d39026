//! Descriptive statistics, Pearson correlation and independent-samples
//! t-tests with two-tailed Student-t p-values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance (n - 1 denominator).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn std_dev(x: &[f64]) -> f64 {
    libm::sqrt(variance(x))
}

/// Sample Pearson correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid("correlation inputs differ in length"));
    }
    if x.len() < 3 {
        return Err(Error::invalid("correlation needs at least 3 pairs"));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Unequal variances, Welch-Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Equal variances, pooled estimate.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Independent-samples t-test of `a` against `b`, two-tailed.
pub fn ttest_independent(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("t-test needs at least 2 values per group"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (variance(a), variance(b));
    let (se, df) = match kind {
        TTestKind::Welch => {
            let (qa, qb) = (va / na, vb / nb);
            let se2 = qa + qb;
            let df = if se2 > 0.0 {
                se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
            } else {
                na + nb - 2.0
            };
            (libm::sqrt(se2), df)
        }
        TTestKind::Pooled => {
            let df = na + nb - 2.0;
            let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
            (libm::sqrt(sp2 * (1.0 / na + 1.0 / nb)), df)
        }
    };
    if ma == mb {
        return Ok(TTest { t: 0.0, df, p: 1.0 });
    }
    if se == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let t = (ma - mb) / se;
    Ok(TTest { t, df, p: student_t_two_tailed(t, df) })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = f64::from(m);
        let m2 = 2.0 * m;
        for num in [
            m * (b - m) * x / ((a + m2 - 1.0) * (a + m2)),
            -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0)),
        ] {
            d = 1.0 + num * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + num / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            h *= d * c;
            if (d * c - 1.0).abs() < EPS {
                return h;
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson_r(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_eq!(pearson_r(&[1.0, 5.0, 2.0], &[1.0, 5.0, 2.0]).unwrap(), 1.0);
        assert_eq!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::ZeroVariance));
        assert!(pearson_r(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn textbook_pooled_t() {
        let r = ttest_independent(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], TTestKind::Pooled).unwrap();
        assert!((r.t + 3.674).abs() < 1e-3, "t = {}", r.t);
        assert!((r.p - 0.0213).abs() < 5e-4, "p = {}", r.p);
        assert_eq!(r.df, 4.0);
        let w = ttest_independent(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], TTestKind::Welch).unwrap();
        assert!((w.t - r.t).abs() < 1e-12 && (w.df - 4.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_groups() {
        let a = [1.0, 2.0, 4.0];
        let r = ttest_independent(&a, &a, TTestKind::Welch).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
        let r = ttest_independent(&[2.0, 2.0], &[2.0, 2.0], TTestKind::Welch).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
        assert_eq!(ttest_independent(&[1.0, 1.0], &[2.0, 2.0], TTestKind::Welch), Err(Error::ZeroVariance));
        assert!(ttest_independent(&[1.0], &[2.0, 3.0], TTestKind::Welch).is_err());
    }

    #[test]
    fn p_matches_statrs() {
        for df in [1.0, 2.5, 4.0, 10.0, 57.3, 300.0] {
            for t in [0.01, 0.5, 1.0, 2.0, 3.674, 8.0, 25.0] {
                let oracle = 2.0 * (1.0 - StudentsT::new(0.0, 1.0, df).unwrap().cdf(t));
                let p = student_t_two_tailed(t, df);
                assert!((p - oracle).abs() < 1e-9, "df {df} t {t}: {p} vs {oracle}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn pearson_affine(x in proptest::collection::vec(-100.0f64..100.0, 3..30), a in -5.0f64..5.0, b in -5.0f64..5.0) {
            proptest::prop_assume!(a.abs() > 1e-3);
            proptest::prop_assume!(variance(&x) > 1e-6);
            let y: alloc::vec::Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let r = pearson_r(&x, &y).unwrap();
            proptest::prop_assert!((r - a.signum()).abs() < 1e-9);
        }

        #[test]
        fn ttest_symmetry(a in proptest::collection::vec(-10.0f64..10.0, 2..20), b in proptest::collection::vec(-10.0f64..10.0, 2..20)) {
            proptest::prop_assume!(variance(&a) + variance(&b) > 1e-9);
            for kind in [TTestKind::Welch, TTestKind::Pooled] {
                let ab = ttest_independent(&a, &b, kind).unwrap();
                let ba = ttest_independent(&b, &a, kind).unwrap();
                proptest::prop_assert!(ab.p > 0.0 && ab.p <= 1.0);
                proptest::prop_assert_eq!(ab.t, -ba.t);
                proptest::prop_assert_eq!(ab.p, ba.p);
            }
        }
    }
}
