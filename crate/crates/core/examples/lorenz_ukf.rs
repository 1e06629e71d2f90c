//! Tracking a noisy Lorenz-63 state with the unscented filter, observing it
//! only every third step; between observations the forecast may fall back
//! to the attractor's climatology.
//!
//! cargo run --example lorenz_ukf

use nalgebra::{Matrix3, Vector3};
use wsmax::dynest::{step_truth, ukf_update, Climatology, LorenzParams, UkfBelief};
use wsmax::RngStream;

fn main() -> wsmax::Result<()> {
    let params = LorenzParams::default();
    let clim = Climatology::estimate(&params.noiseless(), 100_000)?;
    println!("climatology mean {:.2?}, trace {:.1}", clim.mean.as_slice(), clim.covariance.trace());

    let noise = Matrix3::identity() * 2.0;
    let mut rng = RngStream::new(1);
    let mut truth = Vector3::new(-5.0, 3.0, 25.0);
    let mut belief = UkfBelief::new(truth + Vector3::new(1.0, -1.0, 0.5), Matrix3::identity() * 5.0)?;
    let dt = 60.0;
    for step in 1..=15 {
        truth = step_truth(&truth, &params, dt, &mut rng)?;
        belief = clim.forecast(&belief, &params, dt)?;
        let observed = step % 3 == 0;
        if observed {
            let z = truth + noise.cholesky().expect("positive definite").l()
                * Vector3::new(rng.standard_normal(), rng.standard_normal(), rng.standard_normal());
            belief = ukf_update(&belief, &[z], &noise)?;
        }
        println!(
            "step {step:>2} {} trace {:>7.2}  error {:>6.2}",
            if observed { "obs " } else { "    " },
            belief.covariance.trace(),
            (belief.mean - truth).norm()
        );
    }
    Ok(())
}
