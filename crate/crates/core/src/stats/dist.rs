//! Reference distributions through the regularized incomplete beta function.

use statrs::function::beta::beta_reg;

use super::StatsError;

fn check_df(d1: f64, d2: f64) -> Result<(), StatsError> {
    if !(d1 >= 1.0 && d2 >= 1.0 && d1.is_finite() && d2.is_finite()) {
        return Err(StatsError::InvalidDegreesOfFreedom { d1, d2 });
    }
    Ok(())
}

/// `P(F ≤ x)` for `F ~ F(d1, d2)`: `I_{d1 x / (d1 x + d2)}(d1/2, d2/2)`.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<f64, StatsError> {
    check_df(d1, d2)?;
    if x.is_nan() || x < 0.0 {
        return Err(StatsError::OutOfDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(beta_reg(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2)))
}

/// Upper tail `P(F > x)`, computed directly to keep precision for small
/// p-values. Non-positive `x` gives 1.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x))
}

/// Two-sided p-value of a Student t statistic with `df` degrees of freedom.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}
