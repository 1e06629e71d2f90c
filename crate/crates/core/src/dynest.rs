//! Lorenz-63 truth simulation and unscented Kalman filtering with identity
//! observations.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::ground::RngStream;

pub type LorenzState = Vector3<f64>;

/// Time-scaled Lorenz-63: `ẋ = κ (σ(y−x), x(ρ−z)−y, xy−βz) + ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub kappa: f64,
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    /// `Σ_ω` per second.
    pub process_noise: Matrix3<f64>,
    /// Integration substep (s).
    pub dt: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            kappa: 0.005,
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            process_noise: Matrix3::identity() * 0.1,
            dt: 1.0,
        }
    }
}

impl LorenzParams {
    pub fn noiseless(mut self) -> Self {
        self.process_noise = Matrix3::zeros();
        self
    }

    /// Nonzero equilibrium `(√(β(ρ−1)), √(β(ρ−1)), ρ−1)`.
    pub fn fixed_point(&self) -> LorenzState {
        let q = (self.beta * (self.rho - 1.0)).sqrt();
        Vector3::new(q, q, self.rho - 1.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("{} must be positive", self.dt)));
        }
        Ok(())
    }

    /// `L` with `L Lᵀ = Σ_ω`, from the symmetric eigendecomposition so that
    /// singular (even zero) noise is accepted.
    pub fn noise_factor(&self) -> Result<Matrix3<f64>> {
        psd_factor(&self.process_noise, "process noise")
    }
}

fn psd_factor(m: &Matrix3<f64>, what: &'static str) -> Result<Matrix3<f64>> {
    if (m - m.transpose()).abs().max() > 1e-12 * m.abs().max().max(1.0) {
        return Err(Error::NotPositiveDefinite(what));
    }
    let eig = SymmetricEigen::new(*m);
    let floor = -1e-12 * m.abs().max().max(1.0);
    if eig.eigenvalues.iter().any(|&l| l < floor) {
        return Err(Error::NotPositiveDefinite(what));
    }
    let sqrt = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    Ok(eig.eigenvectors * sqrt)
}

pub fn lorenz_derivative(x: &LorenzState, p: &LorenzParams) -> Vector3<f64> {
    p.kappa
        * Vector3::new(
            p.sigma * (x.y - x.x),
            x.x * (p.rho - x.z) - x.y,
            x.x * x.y - p.beta * x.z,
        )
}

/// Classical fourth-order Runge-Kutta step of length `h`.
pub fn rk4_step(x: &LorenzState, p: &LorenzParams, h: f64) -> LorenzState {
    let k1 = lorenz_derivative(x, p);
    let k2 = lorenz_derivative(&(x + 0.5 * h * k1), p);
    let k3 = lorenz_derivative(&(x + 0.5 * h * k2), p);
    let k4 = lorenz_derivative(&(x + h * k3), p);
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Substeps of at most `p.dt` covering `duration`.
fn substeps(p: &LorenzParams, duration: f64) -> (usize, f64) {
    if duration <= 0.0 {
        return (0, 0.0);
    }
    let n = (duration / p.dt - 1e-9).ceil().max(1.0) as usize;
    (n, duration / n as f64)
}

/// Noiseless drift over `duration` seconds.
pub fn integrate(x: &LorenzState, p: &LorenzParams, duration: f64) -> LorenzState {
    let (n, h) = substeps(p, duration);
    (0..n).fold(*x, |acc, _| rk4_step(&acc, p, h))
}

/// Advance the truth by `duration`: each substep is an RK4 drift step plus
/// `√h L ξ`.
pub fn step_truth(
    x: &LorenzState,
    p: &LorenzParams,
    duration: f64,
    rng: &mut RngStream,
) -> Result<LorenzState> {
    p.validate()?;
    let l = p.noise_factor()?;
    let (n, h) = substeps(p, duration);
    let mut state = *x;
    for _ in 0..n {
        let xi = Vector3::new(rng.standard_normal(), rng.standard_normal(), rng.standard_normal());
        state = rk4_step(&state, p, h) + h.sqrt() * (l * xi);
    }
    Ok(state)
}

/// Sigma-point spread `α`, prior-knowledge `β` and secondary `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnscentedParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for UnscentedParams {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            beta: 2.0,
            kappa: 0.0,
        }
    }
}

impl UnscentedParams {
    fn lambda(&self) -> f64 {
        self.alpha * self.alpha * (3.0 + self.kappa) - 3.0
    }

    /// `(mean weights, covariance weights)` of the 7 sigma points.
    fn weights(&self) -> ([f64; 7], [f64; 7]) {
        let lam = self.lambda();
        let w = 0.5 / (3.0 + lam);
        let mut wm = [w; 7];
        let mut wc = [w; 7];
        wm[0] = lam / (3.0 + lam);
        wc[0] = wm[0] + 1.0 - self.alpha * self.alpha + self.beta;
        (wm, wc)
    }
}

pub const JITTER: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UkfBelief {
    pub mean: Vector3<f64>,
    pub covariance: Matrix3<f64>,
    pub unscented: UnscentedParams,
}

impl UkfBelief {
    pub fn new(mean: Vector3<f64>, covariance: Matrix3<f64>) -> Result<Self> {
        Ok(Self {
            mean,
            covariance: hygiene(covariance)?,
            unscented: UnscentedParams::default(),
        })
    }

    pub fn with_unscented(mut self, params: UnscentedParams) -> Self {
        self.unscented = params;
        self
    }

    fn sigma_points(&self) -> Result<[Vector3<f64>; 7]> {
        let scale = 3.0 + self.unscented.lambda();
        let chol = (self.covariance * scale)
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("belief covariance"))?;
        let l = chol.l();
        let mut pts = [self.mean; 7];
        for i in 0..3 {
            let col = l.column(i).into_owned();
            pts[1 + i] = self.mean + col;
            pts[4 + i] = self.mean - col;
        }
        Ok(pts)
    }
}

/// Symmetrize, then lift the smallest eigenvalue to at least [`JITTER`].
/// Matrices that are clearly indefinite are rejected.
fn hygiene(p: Matrix3<f64>) -> Result<Matrix3<f64>> {
    let sym = (p + p.transpose()) * 0.5;
    if !sym.iter().all(|v| v.is_finite()) {
        return Err(Error::NotPositiveDefinite("covariance is not finite"));
    }
    let min = SymmetricEigen::new(sym).eigenvalues.min();
    if min >= JITTER {
        return Ok(sym);
    }
    if min < -1e-9 * sym.trace().abs().max(1.0) {
        return Err(Error::NotPositiveDefinite("covariance"));
    }
    Ok(sym + Matrix3::identity() * (JITTER - min))
}

/// Weighted mean and covariance of transformed sigma points, computed on
/// deviations from the central point.
fn reconstitute(pts: &[Vector3<f64>; 7], u: &UnscentedParams) -> (Vector3<f64>, Matrix3<f64>) {
    let (wm, wc) = u.weights();
    let centre = pts[0];
    let shift: Vector3<f64> = (1..7).map(|i| wm[i] * (pts[i] - centre)).sum();
    let mean = centre + shift;
    let mut cov = Matrix3::zeros();
    for i in 0..7 {
        let d = pts[i] - mean;
        cov += wc[i] * d * d.transpose();
    }
    (mean, cov)
}

/// Propagate sigma points through the noiseless drift for `duration` seconds
/// and add `Σ_ω · duration`.
pub fn ukf_predict(belief: &UkfBelief, p: &LorenzParams, duration: f64) -> Result<UkfBelief> {
    p.validate()?;
    if duration < 0.0 {
        return Err(Error::param("duration", "must be nonnegative"));
    }
    if duration == 0.0 {
        return Ok(*belief);
    }
    let pts = belief.sigma_points()?.map(|x| integrate(&x, p, duration));
    let (mean, cov) = reconstitute(&pts, &belief.unscented);
    Ok(UkfBelief {
        mean,
        covariance: hygiene(cov + p.process_noise * duration)?,
        unscented: belief.unscented,
    })
}

/// Long-run moments of the noiseless attractor. A forecast whose covariance
/// trace exceeds the climatological trace carries less information than the
/// attractor itself and is replaced by it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Climatology {
    pub mean: LorenzState,
    pub covariance: Matrix3<f64>,
}

impl Climatology {
    /// Sample moments of one long noiseless trajectory, `samples` points
    /// spaced 0.01 model time units apart after a burn-in.
    pub fn estimate(p: &LorenzParams, samples: usize) -> Result<Self> {
        if !(p.kappa > 0.0) || samples < 2 {
            return Err(Error::param("climatology", "needs κ > 0 and at least two samples"));
        }
        let h = 0.01 / p.kappa;
        let mut x = Vector3::new(1.0, 1.0, 1.0);
        for _ in 0..2000 {
            x = rk4_step(&x, p, h);
        }
        let mut sum = Vector3::zeros();
        let mut outer = Matrix3::zeros();
        for _ in 0..samples {
            x = rk4_step(&x, p, h);
            sum += x;
            outer += x * x.transpose();
        }
        let n = samples as f64;
        let mean = sum / n;
        let covariance = (outer - n * mean * mean.transpose()) / (n - 1.0);
        Ok(Self { mean, covariance: hygiene(covariance)? })
    }

    /// [`ukf_predict`], falling back to the climatological belief when the
    /// forecast is less informative than it or leaves the finite regime.
    pub fn forecast(&self, belief: &UkfBelief, p: &LorenzParams, duration: f64) -> Result<UkfBelief> {
        let fallback = UkfBelief { mean: self.mean, covariance: self.covariance, unscented: belief.unscented };
        match ukf_predict(belief, p, duration) {
            Ok(b) if b.covariance.trace() <= self.covariance.trace() => Ok(b),
            Ok(_) | Err(Error::NotPositiveDefinite(_)) => Ok(fallback),
            Err(e) => Err(e),
        }
    }
}

/// Sequential unscented updates with identity observations, one per
/// measurement.
pub fn ukf_update(
    belief: &UkfBelief,
    measurements: &[Vector3<f64>],
    noise: &Matrix3<f64>,
) -> Result<UkfBelief> {
    let mut b = *belief;
    let (_, wc) = b.unscented.weights();
    for z in measurements {
        let pts = b.sigma_points()?;
        // Observation map is the identity, so predicted observations are the
        // sigma points themselves.
        let (z_hat, pzz) = reconstitute(&pts, &b.unscented);
        let mut pxz = Matrix3::zeros();
        for i in 0..7 {
            pxz += wc[i] * (pts[i] - z_hat) * (pts[i] - z_hat).transpose();
        }
        let s = pzz + noise;
        let s_inv = s
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("innovation covariance"))?
            .inverse();
        let gain = pxz * s_inv;
        b.mean += gain * (z - z_hat);
        b.covariance = hygiene(b.covariance - gain * s * gain.transpose())?;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> LorenzParams {
        LorenzParams::default()
    }

    #[test]
    fn derivative_examples() {
        let p = params();
        assert!(lorenz_derivative(&p.fixed_point(), &p).norm() < 1e-12);
        assert_eq!(lorenz_derivative(&Vector3::zeros(), &p), Vector3::zeros());
        let d = lorenz_derivative(&Vector3::new(1.0, 2.0, 3.0), &p);
        let expected = Vector3::new(0.05, 0.115, -0.03);
        assert!((d - expected).norm() < 1e-15);
    }

    #[test]
    fn noiseless_fixed_point_is_stationary() {
        let p = params().noiseless();
        let x = step_truth(&p.fixed_point(), &p, 60.0, &mut RngStream::new(1)).unwrap();
        assert!((x - p.fixed_point()).norm() < 1e-10);
    }

    #[test]
    fn truth_replay_is_bit_identical() {
        let p = params();
        let run = |seed| {
            let mut rng = RngStream::new(seed);
            let mut x = Vector3::new(1.0, 1.0, 1.0);
            for _ in 0..50 {
                x = step_truth(&x, &p, 60.0, &mut rng).unwrap();
            }
            x
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn indefinite_noise_rejected() {
        let mut p = params();
        p.process_noise = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        assert!(step_truth(&Vector3::zeros(), &p, 1.0, &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn rk4_convergence_order() {
        let p = params().noiseless();
        let x0 = Vector3::new(1.0, 1.0, 20.0);
        let horizon = 800.0;
        let run = |h: f64| {
            let n = (horizon / h).round() as usize;
            (0..n).fold(x0, |x, _| rk4_step(&x, &p, h))
        };
        let h = 8.0;
        let reference = run(h / 100.0);
        let e1 = (run(h) - reference).norm();
        let e2 = (run(h / 2.0) - reference).norm();
        let order = (e1 / e2).log2();
        assert!(order >= 3.9, "observed order {order}");
    }

    #[test]
    fn kalman_gain_one_half() {
        let m = Vector3::new(1.0, -2.0, 0.5);
        let z = Vector3::new(3.0, 0.0, -1.5);
        let prior = UkfBelief::new(m, Matrix3::identity() * 2.0).unwrap();
        let post = ukf_update(&prior, &[z], &(Matrix3::identity() * 2.0)).unwrap();
        assert!((post.mean - (m + z) / 2.0).norm() < 1e-9);
        assert!((post.covariance - Matrix3::identity()).abs().max() < 1e-9);
        let same = ukf_update(&prior, &[], &Matrix3::identity()).unwrap();
        assert_eq!(same, prior);
    }

    fn random_spd(rng: &mut RngStream) -> Matrix3<f64> {
        let a = Matrix3::from_fn(|_, _| rng.uniform(-1.0, 1.0));
        a * a.transpose() + Matrix3::identity() * rng.uniform(0.1, 2.0)
    }

    #[test]
    fn update_matches_closed_form_kalman() {
        let mut rng = RngStream::new(21);
        for _ in 0..100 {
            let p = random_spd(&mut rng);
            let r = random_spd(&mut rng);
            let m = Vector3::from_fn(|_, _| rng.uniform(-10.0, 10.0));
            let z = Vector3::from_fn(|_, _| rng.uniform(-10.0, 10.0));
            let k = p * (p + r).try_inverse().unwrap();
            let mean = m + k * (z - m);
            let cov = (Matrix3::identity() - k) * p;
            let post = ukf_update(&UkfBelief::new(m, p).unwrap(), &[z], &r).unwrap();
            assert!((post.mean - mean).abs().max() < 1e-8);
            assert!((post.covariance - cov).abs().max() < 1e-8);
        }
    }

    #[test]
    fn predict_collapsed_and_zero_duration() {
        let p = params();
        let m = Vector3::new(2.0, 3.0, 15.0);
        let b = UkfBelief::new(m, Matrix3::identity() * 1e-8).unwrap();
        let pred = ukf_predict(&b, &p.noiseless(), 60.0).unwrap();
        assert!((pred.mean - integrate(&m, &p, 60.0)).norm() < 1e-6);
        assert_eq!(ukf_predict(&b, &p, 0.0).unwrap(), b);
        let noisy = ukf_predict(&b, &p, 60.0).unwrap();
        assert!((noisy.covariance - pred.covariance - Matrix3::identity() * 6.0).abs().max() < 1e-9);
    }

    /// Jacobian of the drift, for the variational-equation oracle.
    fn jacobian(x: &Vector3<f64>, p: &LorenzParams) -> Matrix3<f64> {
        p.kappa
            * Matrix3::new(
                -p.sigma, p.sigma, 0.0,
                p.rho - x.z, -1.0, -x.x,
                x.y, x.x, -p.beta,
            )
    }

    #[test]
    fn predict_matches_linearized_covariance() {
        let p = params().noiseless();
        let m = Vector3::new(-3.0, 4.0, 18.0);
        let p0 = Matrix3::new(2.0, 0.3, 0.0, 0.3, 1.0, -0.2, 0.0, -0.2, 1.5) * 1e-6;
        let duration = 30.0;
        // State transition matrix from dΦ/dt = J(x(t)) Φ, integrated with fine Euler-Heun steps.
        let steps = 30_000;
        let h = duration / steps as f64;
        let mut x = m;
        let mut phi = Matrix3::identity();
        for _ in 0..steps {
            let j0 = jacobian(&x, &p);
            let x1 = rk4_step(&x, &p, h);
            let j1 = jacobian(&x1, &p);
            let pred = phi + h * j0 * phi;
            phi += 0.5 * h * (j0 * phi + j1 * pred);
            x = x1;
        }
        let expected = phi * p0 * phi.transpose();
        let got = ukf_predict(&UkfBelief::new(m, p0).unwrap(), &p, duration).unwrap();
        let rel = (got.covariance - expected).norm() / expected.norm();
        assert!(rel < 0.01, "relative error {rel}");
    }

    #[test]
    fn long_run_beliefs_stay_pd_and_reach_noise_floor() {
        let p = params();
        let truth_params = p.noiseless();
        let noise = Matrix3::identity() * 2.0;
        let mut rng = RngStream::new(5);
        let mut x = Vector3::new(1.0, 1.0, 1.0);
        let mut b = UkfBelief::new(x + Vector3::new(1.0, -1.0, 0.5), Matrix3::identity() * 5.0).unwrap();
        let (mut err, mut tr, mut count) = (0.0, 0.0, 0);
        for step in 0..2_000 {
            x = integrate(&x, &truth_params, 60.0);
            b = ukf_predict(&b, &p, 60.0).unwrap();
            let z = x + 2f64.sqrt() * Vector3::from_fn(|_, _| rng.standard_normal());
            b = ukf_update(&b, &[z], &noise).unwrap();
            let eig = SymmetricEigen::new(b.covariance).eigenvalues.min();
            assert!(eig >= JITTER * 0.999);
            assert_eq!(b.covariance, b.covariance.transpose());
            if step >= 200 {
                err += (b.mean - x).norm_squared();
                tr += b.covariance.trace();
                count += 1;
            }
        }
        let (err, tr) = (err / count as f64, tr / count as f64);
        assert!(err <= 2.0 * tr && err >= 0.5 * tr, "mse {err} vs trace {tr}");
        // The posterior cannot beat a single raw measurement by more than the prior adds.
        assert!(tr < 6.0);
    }

    #[test]
    fn climatology_matches_the_attractor() {
        let c = Climatology::estimate(&params().noiseless(), 100_000).unwrap();
        // x and y are odd under the attractor's symmetry; z is not.
        assert!(c.mean.x.abs() < 1.0 && c.mean.y.abs() < 1.0);
        assert!((c.mean.z - 23.5).abs() < 0.5);
        // The z equation averages to zero: E[xy] = β E[z].
        let exy = c.covariance[(0, 1)] + c.mean.x * c.mean.y;
        assert!((exy - params().beta * c.mean.z).abs() / exy < 0.02);
        // So does the x equation: E[x] = E[y].
        assert!((c.mean.x - c.mean.y).abs() < 0.05);
        assert!(Climatology::estimate(&LorenzParams { kappa: 0.0, ..params() }, 10).is_err());
    }

    #[test]
    fn forecast_falls_back_when_uninformative() {
        let p = params();
        let c = Climatology::estimate(&p.noiseless(), 20_000).unwrap();
        let sharp = UkfBelief::new(p.fixed_point(), Matrix3::identity() * 0.01).unwrap();
        let kept = c.forecast(&sharp, &p, 1.0).unwrap();
        assert_eq!(kept, ukf_predict(&sharp, &p, 1.0).unwrap());
        let vague = UkfBelief::new(Vector3::new(1.0, 2.0, 20.0), Matrix3::identity() * 5.0).unwrap();
        let mut b = vague;
        for _ in 0..50 {
            b = c.forecast(&b, &p, 60.0).unwrap();
            assert!(b.covariance.trace() <= c.covariance.trace() + 1e-9);
        }
        assert_eq!(b.mean, c.mean);
    }

    proptest! {
        #[test]
        fn update_never_increases_trace(seed in 0u64..500, k in 1usize..4) {
            let mut rng = RngStream::new(seed);
            let p = random_spd(&mut rng);
            let r = random_spd(&mut rng);
            let m = Vector3::from_fn(|_, _| rng.uniform(-5.0, 5.0));
            let zs: Vec<_> = (0..k).map(|_| Vector3::from_fn(|_, _| rng.uniform(-5.0, 5.0))).collect();
            let post = ukf_update(&UkfBelief::new(m, p).unwrap(), &zs, &r).unwrap();
            prop_assert!(post.covariance.trace() <= p.trace() + 1e-9);
        }
    }
}
