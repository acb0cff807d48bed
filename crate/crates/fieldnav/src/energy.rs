//! Cost-of-motion model: instantaneous electrical power as a function of
//! speed and ground slope, and the energy to traverse a path.
//!
//! Power is a rolling-resistance-plus-grade term on top of a constant
//! static draw:
//!
//! ```text
//! P(v, ε) = max(0, sin ε + μ·cos ε) · m · g · v + P_static
//! ```
//!
//! The `max(0, …)` clamps the motive term on descents steeper than the
//! rolling resistance (ε < −atan μ): the platform cannot recover energy
//! downhill, it just free-wheels while the electronics keep drawing the
//! static load.

/// Parameters of the power model. Defaults are the field platform's
/// measured constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    /// Platform mass, kg.
    pub mass_kg: f64,
    /// Rolling-resistance coefficient, dimensionless.
    pub friction_coeff: f64,
    /// Gravitational acceleration, m/s².
    pub gravity: f64,
    /// Constant draw of compute and electronics, W.
    pub static_power_w: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            mass_kg: 220.6,
            friction_coeff: 0.0767,
            gravity: 9.81,
            static_power_w: 203.0,
        }
    }
}

impl EnergyParams {
    /// Slope below which the motive term clamps to zero (free-wheeling
    /// descent), radians.
    pub fn freewheel_slope(&self) -> f64 {
        -self.friction_coeff.atan()
    }
}

/// Instantaneous electrical power at `speed` on ground sloping `slope`
/// radians along the direction of travel (positive = uphill). `speed` is a
/// magnitude; at zero speed only the static draw remains.
pub fn instantaneous_power(params: &EnergyParams, speed: f64, slope: f64) -> f64 {
    let motive_factor = (slope.sin() + params.friction_coeff * slope.cos()).max(0.0);
    motive_factor * params.mass_kg * params.gravity * speed.abs() + params.static_power_w
}

/// Energy in joules to traverse `polyline` (3D points, metres) at constant
/// `speed`. Each segment contributes its instantaneous power (at the
/// segment's slope) for its traversal time. Non-positive speed yields
/// +infinity: the traversal never completes.
pub fn edge_energy(params: &EnergyParams, polyline: &[[f64; 3]], speed: f64) -> f64 {
    if speed <= 0.0 {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    for pair in polyline.windows(2) {
        let [x0, y0, z0] = pair[0];
        let [x1, y1, z1] = pair[1];
        let horizontal = (x1 - x0).hypot(y1 - y0);
        let dz = z1 - z0;
        let length = (horizontal * horizontal + dz * dz).sqrt();
        if length == 0.0 {
            continue;
        }
        let slope = dz.atan2(horizontal);
        total += instantaneous_power(params, speed, slope) * (length / speed);
    }
    total
}
