//! Small-scale channel gain distributions.
//!
//! The offloading policy only ever asks one question of the channel: how
//! likely is the instantaneous power gain to exceed a threshold. Everything
//! is therefore expressed through the complementary CDF and its inverse.

/// Distribution of the channel power gain `|h|^2`.
///
/// Implementations must have a strictly decreasing ccdf with `ccdf(0) = 1`
/// and `ccdf(z) -> 0` as `z -> inf`, so the inverse is well defined on (0, 1].
pub trait ChannelModel: Send + Sync {
    /// P(|h|^2 > z).
    fn ccdf(&self, z: f64) -> f64;

    /// Threshold z such that `ccdf(z) = p`, for p in (0, 1].
    fn inverse_ccdf(&self, p: f64) -> f64;

    /// Derivative d/dp of `inverse_ccdf`.
    fn inverse_ccdf_deriv(&self, p: f64) -> f64;

    /// Draw a gain by inverse transform from a uniform u in (0, 1].
    fn sample_gain(&self, u: f64) -> f64 {
        self.inverse_ccdf(u)
    }
}

/// Rayleigh fading: the power gain is exponential with unit mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayleigh;

impl ChannelModel for Rayleigh {
    fn ccdf(&self, z: f64) -> f64 {
        (-z).exp()
    }

    fn inverse_ccdf(&self, p: f64) -> f64 {
        -p.ln()
    }

    fn inverse_ccdf_deriv(&self, p: f64) -> f64 {
        -1.0 / p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ccdf_endpoints() {
        let ch = Rayleigh;
        assert_eq!(ch.ccdf(0.0), 1.0);
        assert!(ch.ccdf(1e6) < 1e-300);
        assert!(ch.ccdf(1.0) < ch.ccdf(0.5));
    }

    #[test]
    fn inverse_round_trip() {
        let ch = Rayleigh;
        for &z in &[1e-9, 0.1, 1.0, 5.0, 40.0] {
            let p = ch.ccdf(z);
            assert!((ch.inverse_ccdf(p) - z).abs() <= 1e-12 * (1.0 + z));
        }
    }
}
