//! Boris rotation in a uniform magnetic field: the speed is conserved and
//! the gyro period converges at second order in dt.
//!
//! cargo run --example gyro_orbit

use tilepic::pusher::{advance_momentum, InterpolatedField};
use tilepic::Vec3;

/// Measured gyro period, from the last upward zero crossing of u_y.
pub fn period(u0: f64, bz: f64, dt: f64) -> f64 {
    let f = InterpolatedField { e: Vec3::ZERO, b: Vec3::new(0.0, 0.0, bz) };
    let mut u = Vec3::new(u0, 0.0, 0.0);
    let gamma = (1.0 + u0 * u0).sqrt();
    let expected = 2.0 * std::f64::consts::PI * gamma / bz;
    let n = (3.0 * expected / dt) as usize;
    let mut crossings = Vec::new();
    for k in 0..n {
        let next = advance_momentum(u, &f, 1.0, dt);
        // positive charge rotates clockwise: u_y goes negative first
        if u.y < 0.0 && next.y >= 0.0 {
            let frac = -u.y / (next.y - u.y);
            crossings.push((k as f64 + frac) * dt);
        }
        u = next;
    }
    (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64
}

/// Observed convergence orders between successive halvings of dt.
pub fn demo() -> Vec<f64> {
    let (u0, bz) = (1.0, 1.0);
    let exact = 2.0 * std::f64::consts::PI * 2f64.sqrt() / bz;
    let h = 0.2;
    let errs: Vec<f64> = [h, h / 2.0, h / 4.0].iter().map(|&dt| (period(u0, bz, dt) - exact).abs()).collect();
    for (k, e) in errs.iter().enumerate() {
        println!("dt = {:<6} period error = {e:.3e}", h / f64::powi(2.0, k as i32));
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    println!("observed orders {orders:.3?}");
    orders
}

#[allow(dead_code)]
fn main() {
    demo();
}
