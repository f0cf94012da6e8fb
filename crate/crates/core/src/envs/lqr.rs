//! Discrete-time linear-quadratic regulator task and its Riccati solution.

use super::{Env, EnvSpec, EpisodeClock, StepResult};
use crate::error::{Error, Result};
use crate::numcore::{Matrix, Rng};

pub const LQR_HORIZON: usize = 100;
pub const LQR_ACTION_BOUND: f64 = 20.0;
const LQR_DT: f64 = 0.1;

/// `x' = A x + B u` with stage cost `xᵀQx + uᵀRu`.
#[derive(Debug, Clone, PartialEq)]
pub struct LqrProblem {
    pub a: Matrix,
    pub b: Matrix,
    pub q: Matrix,
    pub r: Matrix,
}

impl LqrProblem {
    /// Double integrator sampled at 0.1 s, `Q = I`, `R = 0.1`.
    pub fn double_integrator() -> Self {
        let dt = LQR_DT;
        Self {
            a: Matrix::from_rows(&[vec![1.0, dt], vec![0.0, 1.0]]).expect("2x2"),
            b: Matrix::from_rows(&[vec![0.5 * dt * dt], vec![dt]]).expect("2x1"),
            q: Matrix::identity(2),
            r: Matrix::from_rows(&[vec![0.1]]).expect("1x1"),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    /// One Riccati backup `P ↦ Q + AᵀPA − AᵀPB (R + BᵀPB)⁻¹ BᵀPA`, together
    /// with the gain `K = (R + BᵀPB)⁻¹ BᵀPA` it implies.
    pub fn riccati_step(&self, p: &Matrix) -> Result<(Matrix, Matrix)> {
        let at = self.a.transpose();
        let bt = self.b.transpose();
        let pa = p.matmul(&self.a)?;
        let pb = p.matmul(&self.b)?;
        let s = self.r.add(&bt.matmul(&pb)?)?;
        let k = s.inverse()?.matmul(&bt.matmul(&pa)?)?;
        let next = self
            .q
            .add(&at.matmul(&pa)?)?
            .sub(&at.matmul(&pb)?.matmul(&k)?)?;
        Ok((next, k))
    }

    /// Infinite-horizon solution by value iteration: `(P, K, iterations)`.
    pub fn solve_dare(&self, tol: f64, max_iter: usize) -> Result<(Matrix, Matrix, usize)> {
        let mut p = self.q.clone();
        for it in 1..=max_iter {
            let (next, k) = self.riccati_step(&p)?;
            let diff = next.max_abs_diff(&p)?;
            p = next;
            if diff < tol {
                return Ok((p, k, it));
            }
        }
        Err(Error::InvalidArgument(format!(
            "Riccati iteration did not converge in {max_iter} steps"
        )))
    }

    /// Cost-to-go matrices of the finite-horizon problem with zero terminal
    /// cost: the optimal cost of an episode of `horizon` steps from `x0` is
    /// `x0ᵀ P₀ x0`. Returns `(P₀, gains)` with `gains[t]` the optimal
    /// feedback at step `t`.
    pub fn finite_horizon(&self, horizon: usize) -> Result<(Matrix, Vec<Matrix>)> {
        let n = self.state_dim();
        let mut p = Matrix::zeros(n, n);
        let mut gains = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let (next, k) = self.riccati_step(&p)?;
            gains.push(k);
            p = next;
        }
        gains.reverse();
        Ok((p, gains))
    }

    /// `M` such that running `u = −K x` for `horizon` steps from `x0` costs
    /// `x0ᵀ M x0` (ignoring action bounds).
    pub fn policy_cost_matrix(&self, k: &Matrix, horizon: usize) -> Result<Matrix> {
        let closed = self.a.sub(&self.b.matmul(k)?)?;
        let stage = self.q.add(&k.transpose().matmul(&self.r)?.matmul(k)?)?;
        let n = self.state_dim();
        let mut m = Matrix::zeros(n, n);
        let mut power = Matrix::identity(n);
        for _ in 0..horizon {
            m = m.add(&power.transpose().matmul(&stage)?.matmul(&power)?)?;
            power = closed.matmul(&power)?;
        }
        Ok(m)
    }
}

pub fn quadratic_form(m: &Matrix, x: &[f64]) -> f64 {
    let mx = m.matvec(x).expect("square form");
    crate::numcore::dot(x, &mx)
}

/// LQR episode task. Initial state is uniform on `[−1, 1]ⁿ`; the
/// observation is the state; reward is the negated stage cost of the
/// pre-step state and clipped action. Episodes are truncated after 100
/// steps.
#[derive(Debug, Clone)]
pub struct LqrEnv {
    spec: EnvSpec,
    problem: LqrProblem,
    state: Vec<f64>,
    clock: EpisodeClock,
}

impl Default for LqrEnv {
    fn default() -> Self {
        Self::new()
    }
}

impl LqrEnv {
    pub fn new() -> Self {
        Self::with_problem(LqrProblem::double_integrator())
    }

    pub fn with_problem(problem: LqrProblem) -> Self {
        let m = problem.input_dim();
        Self {
            spec: EnvSpec {
                name: "lqr".into(),
                obs_dim: problem.state_dim(),
                act_dim: m,
                action_low: vec![-LQR_ACTION_BOUND; m],
                action_high: vec![LQR_ACTION_BOUND; m],
                max_episode_steps: LQR_HORIZON,
            },
            state: vec![0.0; problem.state_dim()],
            problem,
            clock: EpisodeClock::default(),
        }
    }

    pub fn problem(&self) -> &LqrProblem {
        &self.problem
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn reset_to(&mut self, state: &[f64]) -> Vec<f64> {
        self.state = state.to_vec();
        self.clock.start();
        self.state.clone()
    }
}

impl Env for LqrEnv {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut Rng) -> Result<Vec<f64>> {
        let x0: Vec<f64> = (0..self.problem.state_dim())
            .map(|_| rng.uniform(-1.0, 1.0))
            .collect();
        Ok(self.reset_to(&x0))
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        self.clock.ensure_active()?;
        let u = self.spec.clip_action(action)?;
        let p = &self.problem;
        let cost = quadratic_form(&p.q, &self.state) + quadratic_form(&p.r, &u);
        let ax = p.a.matvec(&self.state)?;
        let bu = p.b.matvec(&u)?;
        self.state = ax.iter().zip(&bu).map(|(a, b)| a + b).collect();
        let (terminated, truncated) = self.clock.tick(false, self.spec.max_episode_steps);
        Ok(StepResult {
            obs: self.state.clone(),
            reward: -cost,
            terminated,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_is_controllable() {
        let p = LqrProblem::double_integrator();
        // [B, AB] must have full rank.
        let ab = p.a.matmul(&p.b).unwrap();
        let det = p.b[(0, 0)] * ab[(1, 0)] - ab[(0, 0)] * p.b[(1, 0)];
        assert!(det.abs() > 1e-6);
    }

    #[test]
    fn riccati_converges_to_fixed_point() {
        let p = LqrProblem::double_integrator();
        let (pm, _, iters) = p.solve_dare(1e-12, 100_000).unwrap();
        assert!(iters > 1);
        let (again, _) = p.riccati_step(&pm).unwrap();
        assert!(again.max_abs_diff(&pm).unwrap() < 1e-10);
    }

    #[test]
    fn simulated_cost_matches_quadratic_form() {
        let p = LqrProblem::double_integrator();
        let (_, k, _) = p.solve_dare(1e-12, 100_000).unwrap();
        let m = p.policy_cost_matrix(&k, LQR_HORIZON).unwrap();
        let mut env = LqrEnv::new();
        let mut rng = Rng::new(3);
        for _ in 0..20 {
            let x0 = env.reset(&mut rng).unwrap();
            let predicted = quadratic_form(&m, &x0);
            let mut cost = 0.0;
            let mut x = x0.clone();
            loop {
                let u: Vec<f64> = k.matvec(&x).unwrap().iter().map(|v| -v).collect();
                let r = env.step(&u).unwrap();
                cost -= r.reward;
                let done = r.done();
                x = r.obs;
                if done {
                    break;
                }
            }
            assert!((cost - predicted).abs() < 1e-8 * predicted.max(1.0), "{cost} vs {predicted}");
        }
    }

    #[test]
    fn finite_horizon_optimum_is_a_lower_bound() {
        let p = LqrProblem::double_integrator();
        let (p0, gains) = p.finite_horizon(LQR_HORIZON).unwrap();
        let (_, k, _) = p.solve_dare(1e-12, 100_000).unwrap();
        let m = p.policy_cost_matrix(&k, LQR_HORIZON).unwrap();
        let mut env = LqrEnv::new();
        let mut rng = Rng::new(9);
        for _ in 0..10 {
            let x0 = env.reset(&mut rng).unwrap();
            // simulate the time-varying optimal policy
            let mut x = x0.clone();
            let mut cost = 0.0;
            for g in &gains {
                let u: Vec<f64> = g.matvec(&x).unwrap().iter().map(|v| -v).collect();
                let r = env.step(&u).unwrap();
                cost -= r.reward;
                x = r.obs;
            }
            let optimal = quadratic_form(&p0, &x0);
            assert!((cost - optimal).abs() < 1e-8 * optimal.max(1.0));
            assert!(optimal <= quadratic_form(&m, &x0) + 1e-12);
        }
    }

    #[test]
    fn optimal_actions_stay_inside_bounds() {
        let p = LqrProblem::double_integrator();
        let (_, gains) = p.finite_horizon(LQR_HORIZON).unwrap();
        // worst corners of the initial box
        for x0 in [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
            let mut x = x0.to_vec();
            for g in &gains {
                let u = -g.matvec(&x).unwrap()[0];
                assert!(u.abs() < LQR_ACTION_BOUND);
                let ax = p.a.matvec(&x).unwrap();
                x = vec![ax[0] + p.b[(0, 0)] * u, ax[1] + p.b[(1, 0)] * u];
            }
        }
    }
}
