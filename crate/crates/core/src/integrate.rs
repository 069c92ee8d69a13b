//! Fixed-step classic Runge-Kutta.

/// State types the integrator can combine linearly.
pub trait OdeState: Copy {
    /// Returns `self + h * rate`.
    fn add_scaled(self, h: f64, rate: Self) -> Self;
}

impl<const N: usize> OdeState for [f64; N] {
    fn add_scaled(self, h: f64, rate: Self) -> Self {
        let mut out = self;
        for (o, r) in out.iter_mut().zip(rate) {
            *o += h * r;
        }
        out
    }
}

impl OdeState for f64 {
    fn add_scaled(self, h: f64, rate: Self) -> Self {
        self + h * rate
    }
}

/// One RK4 step of an autonomous system `y' = f(y)`.
///
/// Errors from `f` (non-finite states, for instance) propagate unchanged.
pub fn rk4_step<S, E, F>(y: S, h: f64, mut f: F) -> Result<S, E>
where
    S: OdeState,
    F: FnMut(S) -> Result<S, E>,
{
    let k1 = f(y)?;
    let k2 = f(y.add_scaled(0.5 * h, k1))?;
    let k3 = f(y.add_scaled(0.5 * h, k2))?;
    let k4 = f(y.add_scaled(h, k3))?;
    Ok(y
        .add_scaled(h / 6.0, k1)
        .add_scaled(h / 3.0, k2)
        .add_scaled(h / 3.0, k3)
        .add_scaled(h / 6.0, k4))
}
