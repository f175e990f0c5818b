use crate::error::{Error, Result};

/// Discount family `d_t(s)`, `0 ≤ t ≤ s ≤ T`.
#[derive(Debug, Clone, PartialEq)]
pub enum DiscountSpec {
    /// `exp(−r (s − t))`.
    ConstantRate { rate: f64 },
    /// `exp(−∫_t^s ρ(u) du)` with `ρ` piecewise constant: `rates[0]` before
    /// `breakpoints[0]`, `rates[i]` on `[breakpoints[i-1], breakpoints[i])`,
    /// and the last rate after the last breakpoint.
    VariableRate { breakpoints: Vec<f64>, rates: Vec<f64> },
    /// `1 / (1 + k (s − t))`.
    Hyperbolic { k: f64 },
}

impl DiscountSpec {
    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Error::Config(format!("discount: {what} {v} must be finite and nonnegative"));
        match self {
            Self::ConstantRate { rate } if !(rate.is_finite() && *rate >= 0.0) => Err(bad("rate", *rate)),
            Self::Hyperbolic { k } if !(k.is_finite() && *k >= 0.0) => Err(bad("k", *k)),
            Self::VariableRate { breakpoints, rates } => {
                if rates.len() != breakpoints.len() + 1 {
                    return Err(Error::Config(format!(
                        "discount: {} rates for {} breakpoints (need one more rate than breakpoints)",
                        rates.len(),
                        breakpoints.len()
                    )));
                }
                if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
                    return Err(bad("rate", *r));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) || breakpoints.iter().any(|b| !b.is_finite()) {
                    return Err(Error::Config("discount: breakpoints must be finite and strictly increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, t: f64, s: f64) -> f64 {
        match self {
            Self::ConstantRate { rate } => (-rate * (s - t)).exp(),
            Self::VariableRate { .. } => (-(self.cumulative_rate(s) - self.cumulative_rate(t))).exp(),
            Self::Hyperbolic { k } => 1.0 / (1.0 + k * (s - t)),
        }
    }

    /// `∂d_t(s)/∂t`.
    pub fn dt(&self, t: f64, s: f64) -> f64 {
        match self {
            Self::ConstantRate { rate } => rate * self.value(t, s),
            Self::VariableRate { .. } => self.rate_at(t) * self.value(t, s),
            Self::Hyperbolic { k } => {
                let d = self.value(t, s);
                k * d * d
            }
        }
    }

    /// `∫_a^b d_t(s) ds` in closed form.
    pub fn integral(&self, t: f64, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        match self {
            Self::ConstantRate { rate } => {
                if *rate == 0.0 {
                    b - a
                } else {
                    (-rate * (a - t)).exp() * (-(-rate * (b - a)).exp_m1()) / rate
                }
            }
            Self::Hyperbolic { k } => {
                if *k == 0.0 {
                    b - a
                } else {
                    (k * (b - a) / (1.0 + k * (a - t))).ln_1p() / k
                }
            }
            Self::VariableRate { breakpoints, rates } => {
                let rt = self.cumulative_rate(t);
                let mut total = 0.0;
                for (i, &rho) in rates.iter().enumerate() {
                    let lo = if i == 0 { f64::NEG_INFINITY } else { breakpoints[i - 1] };
                    let hi = breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
                    let (c, e) = (a.max(lo), b.min(hi));
                    if e <= c {
                        continue;
                    }
                    let scale = (rt - self.cumulative_rate(c)).exp();
                    total += if rho == 0.0 {
                        scale * (e - c)
                    } else {
                        scale * (-(-rho * (e - c)).exp_m1()) / rho
                    };
                }
                total
            }
        }
    }

    /// `inf d_t(s)` over `0 ≤ t ≤ s ≤ horizon`.
    pub fn floor(&self, horizon: f64) -> f64 {
        self.value(0.0, horizon)
    }

    /// Points in `(0, horizon)` where `∂d/∂t` jumps.
    pub fn rate_jumps(&self, horizon: f64) -> Vec<f64> {
        match self {
            Self::VariableRate { breakpoints, rates } => breakpoints
                .iter()
                .enumerate()
                .filter(|(i, b)| **b > 0.0 && **b < horizon && rates[*i] != rates[i + 1])
                .map(|(_, b)| *b)
                .collect(),
            _ => Vec::new(),
        }
    }

    fn rate_at(&self, u: f64) -> f64 {
        match self {
            Self::VariableRate { breakpoints, rates } => rates[breakpoints.partition_point(|b| *b <= u)],
            Self::ConstantRate { rate } => *rate,
            Self::Hyperbolic { .. } => unreachable!("hyperbolic discount has no rate function"),
        }
    }

    /// `R(u) = ∫_0^u ρ` for the variable-rate family.
    fn cumulative_rate(&self, u: f64) -> f64 {
        let Self::VariableRate { breakpoints, rates } = self else {
            unreachable!("cumulative rate only exists for the variable-rate family")
        };
        let (from, to, sign) = if u >= 0.0 { (0.0, u, 1.0) } else { (u, 0.0, -1.0) };
        let mut total = 0.0;
        for (i, &rho) in rates.iter().enumerate() {
            let lo = if i == 0 { f64::NEG_INFINITY } else { breakpoints[i - 1] };
            let hi = breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
            let overlap = to.min(hi) - from.max(lo);
            if overlap > 0.0 {
                total += rho * overlap;
            }
        }
        sign * total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn families() -> Vec<DiscountSpec> {
        vec![
            DiscountSpec::ConstantRate { rate: 0.1 },
            DiscountSpec::ConstantRate { rate: 0.0 },
            DiscountSpec::Hyperbolic { k: 0.7 },
            DiscountSpec::VariableRate {
                breakpoints: vec![0.3, 0.6],
                rates: vec![0.2, 0.05, 0.4],
            },
        ]
    }

    #[test]
    fn constant_rate_value() {
        let d = DiscountSpec::ConstantRate { rate: 0.1 };
        assert_abs_diff_eq!(d.value(0.0, 1.0), 0.904_837_418_035_959_6, epsilon = 1e-15);
        assert_abs_diff_eq!(d.dt(0.2, 0.9), 0.1 * d.value(0.2, 0.9), epsilon = 1e-16);
    }

    #[test]
    fn anchored_value_is_one() {
        for d in families() {
            for t in [0.0, 0.3, 0.45, 1.0] {
                assert_eq!(d.value(t, t), 1.0, "{d:?}");
            }
        }
    }

    #[test]
    fn closed_form_integrals_match_quadrature() {
        let rule = crate::quadrature::CompositeRule::new(8, 64);
        for d in families() {
            for (t, a, b) in [(0.0, 0.0, 1.0), (0.2, 0.25, 0.95), (0.1, 0.3, 0.6), (0.5, 0.5, 0.5)] {
                // panel edges at the breakpoints keep the kinked integrand exact
                let mut q = 0.0;
                let mut cuts = vec![a];
                for bp in [0.3, 0.6] {
                    if bp > a && bp < b {
                        cuts.push(bp);
                    }
                }
                cuts.push(b);
                for w in cuts.windows(2) {
                    q += rule.integrate(w[0], w[1], |s| d.value(t, s));
                }
                assert_abs_diff_eq!(d.integral(t, a, b), q, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn dt_matches_central_difference() {
        let h = 1e-6;
        for d in families() {
            for (t, s) in [(0.1, 0.9), (0.45, 0.5), (0.7, 1.0)] {
                let fd = (d.value(t + h, s) - d.value(t - h, s)) / (2.0 * h);
                let exact = d.dt(t, s);
                assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3), "{d:?} {t} {s}");
            }
        }
    }

    #[test]
    fn variable_rate_jumps_are_reported() {
        let d = DiscountSpec::VariableRate {
            breakpoints: vec![0.3, 0.6],
            rates: vec![0.2, 0.2, 0.4],
        };
        assert_eq!(d.rate_jumps(1.0), vec![0.6]);
        assert!(DiscountSpec::ConstantRate { rate: 0.3 }.rate_jumps(1.0).is_empty());
    }

    #[test]
    fn invalid_parameters() {
        assert!(DiscountSpec::ConstantRate { rate: -0.1 }.validate().is_err());
        assert!(DiscountSpec::Hyperbolic { k: f64::NAN }.validate().is_err());
        assert!(DiscountSpec::VariableRate {
            breakpoints: vec![0.5, 0.2],
            rates: vec![0.1, 0.1, 0.1]
        }
        .validate()
        .is_err());
        assert!(DiscountSpec::VariableRate {
            breakpoints: vec![0.5],
            rates: vec![0.1]
        }
        .validate()
        .is_err());
    }
}
