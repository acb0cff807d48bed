//! The shared planning cost: squared distance to the local goal plus an
//! uncertainty-scaled interaction penalty for nearby predicted agents, and
//! the constant-velocity prediction that feeds it.

use crate::geom::{Point2, Vector2};

/// Cost and search tuning shared by the local planners.
#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    /// Interaction radius d (m): agents farther than this contribute zero.
    pub interaction_radius: f64,
    /// Plan horizon in ticks.
    pub horizon: usize,
    /// Search budget in iterations.
    pub budget_iters: usize,
    /// Planning tick (s).
    pub dt: f64,
    /// Cap on the 1/distance interaction factor (coincident positions).
    pub alpha_max: f64,
    /// Base per-axis prediction std-dev (m) at the current tick.
    pub sigma0: f64,
    /// Per-axis prediction std-dev growth rate (m/s).
    pub sigma_rate: f64,
    /// UCB1 exploration constant.
    pub ucb_c: f64,
    /// Leaves expanded per search iteration.
    pub select_k: usize,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            interaction_radius: 2.0,
            horizon: 8,
            budget_iters: 2000,
            dt: 0.2,
            alpha_max: 100.0,
            sigma0: 0.1,
            sigma_rate: 0.15,
            ucb_c: 1.4,
            select_k: 8,
        }
    }
}

/// Constant-velocity forecast of one agent over the plan horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedAgent {
    /// Mean position at each step k = 0..=horizon.
    pub means: Vec<Point2>,
    /// Uncertainty U at each step: area (m²) of the 1-σ circle.
    pub uncertainties: Vec<f64>,
}

/// Forecast every tracked agent over the horizon: means advance at the
/// track velocity, per-axis σ grows linearly, U = πσ². The robot's own plan
/// does not enter — the prediction is response-agnostic by construction.
pub fn cv_predict(
    tracks: &[(Point2, Vector2)],
    horizon: usize,
    params: &CostParams,
) -> Vec<PredictedAgent> {
    tracks
        .iter()
        .map(|&(pos, vel)| {
            let mut means = Vec::with_capacity(horizon + 1);
            let mut uncertainties = Vec::with_capacity(horizon + 1);
            for k in 0..=horizon {
                let dt_k = k as f64 * params.dt;
                means.push(pos + vel * dt_k);
                let sigma = params.sigma0 + params.sigma_rate * dt_k;
                uncertainties.push(std::f64::consts::PI * sigma * sigma);
            }
            PredictedAgent {
                means,
                uncertainties,
            }
        })
        .collect()
}

/// Planning cost of a robot position: squared distance to the goal plus, for
/// each agent within the interaction radius, its uncertainty scaled by the
/// capped inverse distance. Lower is better.
pub fn evaluate_state(
    robot: Point2,
    goal: Point2,
    agents: &[(Point2, f64)],
    params: &CostParams,
) -> f64 {
    let goal_term = (robot - goal).norm_squared();
    let mut interaction = 0.0;
    for &(pos, u) in agents {
        let dist = (pos - robot).norm();
        if dist <= params.interaction_radius {
            let alpha = if dist > 0.0 {
                (1.0 / dist).min(params.alpha_max)
            } else {
                params.alpha_max
            };
            interaction += u * alpha;
        }
    }
    goal_term + interaction
}

/// Convenience: the (position, U) pairs of all predictions at step `k`.
pub fn predictions_at(predictions: &[PredictedAgent], k: usize) -> Vec<(Point2, f64)> {
    predictions
        .iter()
        .map(|p| (p.means[k], p.uncertainties[k]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn at_goal_with_no_agents_cost_is_zero() {
        let p = CostParams::default();
        let g = Point2::new(4.0, -2.0);
        assert_eq!(evaluate_state(g, g, &[], &p), 0.0);
    }

    #[test]
    fn agent_outside_interaction_radius_contributes_nothing() {
        let p = CostParams::default();
        let robot = Point2::new(0.0, 0.0);
        let goal = Point2::new(3.0, 0.0);
        let far = vec![(Point2::new(0.0, 3.0), 5.0)];
        assert_abs_diff_eq!(
            evaluate_state(robot, goal, &far, &p),
            9.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn worked_interaction_example() {
        // Robot at origin, goal 3 m ahead, one agent 1 m ahead with U = 0.5:
        // 3² + 0.5·(1/1) = 9.5.
        let p = CostParams::default();
        let cost = evaluate_state(
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            &[(Point2::new(1.0, 0.0), 0.5)],
            &p,
        );
        assert_abs_diff_eq!(cost, 9.5, epsilon = 1e-12);
    }

    #[test]
    fn coincident_agent_hits_the_alpha_cap() {
        let p = CostParams::default();
        let r = Point2::new(1.0, 1.0);
        let cost = evaluate_state(r, r, &[(r, 0.5)], &p);
        assert_abs_diff_eq!(cost, 0.5 * 100.0, epsilon = 1e-12);
        // Very close but nonzero distance also caps.
        let near = Point2::new(1.0 + 1e-6, 1.0);
        let cost = evaluate_state(r, r, &[(near, 0.5)], &p);
        assert_abs_diff_eq!(cost, 50.0, epsilon = 1e-9);
    }

    #[test]
    fn cost_is_translation_invariant() {
        let p = CostParams::default();
        let mut rng = crate::rng::stream(30, "cost", 0);
        for _ in 0..200 {
            let robot = Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            let goal = Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            let agents: Vec<(Point2, f64)> = (0..4)
                .map(|_| {
                    (
                        Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)),
                        rng.gen_range(0.0..2.0),
                    )
                })
                .collect();
            let shift = Vector2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let shifted: Vec<(Point2, f64)> =
                agents.iter().map(|&(a, u)| (a + shift, u)).collect();
            let c0 = evaluate_state(robot, goal, &agents, &p);
            let c1 = evaluate_state(robot + shift, goal + shift, &shifted, &p);
            assert_abs_diff_eq!(c0, c1, epsilon = 1e-9);
        }
    }

    #[test]
    fn cv_prediction_moves_mean_and_grows_uncertainty() {
        let p = CostParams::default();
        let tracks = vec![(Point2::new(2.0, 1.0), Vector2::new(1.0, 0.0))];
        let pred = cv_predict(&tracks, 8, &p);
        assert_eq!(pred.len(), 1);
        assert_eq!(pred[0].means.len(), 9);
        // k=5 → displaced 5·0.2·1.0 = 1.0 m along +x.
        assert_abs_diff_eq!(pred[0].means[5].x, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pred[0].means[5].y, 1.0, epsilon = 1e-12);
        // k=0 → base uncertainty πσ₀².
        assert_abs_diff_eq!(
            pred[0].uncertainties[0],
            std::f64::consts::PI * 0.01,
            epsilon = 1e-12
        );
        // Uncertainty non-decreasing with k.
        for w in pred[0].uncertainties.windows(2) {
            assert!(w[0] <= w[1]);
        }
        // k=3: σ = 0.1 + 0.15·0.6 = 0.19.
        assert_abs_diff_eq!(
            pred[0].uncertainties[3],
            std::f64::consts::PI * 0.19 * 0.19,
            epsilon = 1e-12
        );
    }

    #[test]
    fn stationary_agent_prediction_stays_put() {
        let p = CostParams::default();
        let tracks = vec![(Point2::new(-3.0, 4.0), Vector2::zeros())];
        let pred = cv_predict(&tracks, 8, &p);
        for k in 0..=8 {
            assert_eq!(pred[0].means[k], Point2::new(-3.0, 4.0));
        }
    }

    #[test]
    fn one_sigma_radius_stays_below_interaction_radius_within_horizon() {
        // At the full 8-step (1.6 s) horizon the 1-σ radius must not reach
        // the interaction radius, keeping the penalty well-defined.
        let p = CostParams::default();
        let sigma_end = p.sigma0 + p.sigma_rate * (p.horizon as f64 * p.dt);
        assert!(sigma_end < p.interaction_radius);
        assert_abs_diff_eq!(sigma_end, 0.34, epsilon = 1e-12);
    }
}
