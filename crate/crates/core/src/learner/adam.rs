use crate::error::{Error, Result};

/// First/second moment estimates for Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
        if params.len() != grad.len() || params.len() != self.m.len() {
            return Err(Error::ShapeMismatch(format!(
                "adam: {} params, {} gradients, {} moments",
                params.len(),
                grad.len(),
                self.m.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut s = AdamState::new(3);
        let mut p = vec![1.0, -2.0, 0.5];
        s.step(&mut p, &[0.0; 3], 1e-3).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut s = AdamState::new(1);
        let mut p = vec![0.0];
        s.step(&mut p, &[1.0], 1e-3).unwrap();
        // m_hat = 1, v_hat = 1 -> lr / (1 + eps)
        assert!((p[0] + 1e-3 / (1.0 + 1e-8)).abs() < 1e-18);
    }

    #[test]
    fn constant_gradient_step_tends_to_lr_sign() {
        let mut s = AdamState::new(2);
        let mut p = vec![0.0, 0.0];
        let g = [3.0, -0.25];
        let mut prev = p.clone();
        for _ in 0..5000 {
            prev.clone_from(&p);
            s.step(&mut p, &g, 1e-3).unwrap();
        }
        // m_hat -> g and v_hat -> g^2 exactly for constant g
        assert!((p[0] - prev[0] + 1e-3).abs() < 1e-9);
        assert!((p[1] - prev[1] - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn length_mismatch() {
        let mut s = AdamState::new(2);
        assert!(s.step(&mut [0.0], &[1.0], 1e-3).is_err());
    }
}
