use crate::error::{Error, Result};

/// Per-parameter Adam moments for one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Descends along `grads` (i.e. minimizes the loss they came from).
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::ShapeMismatch {
                context: "adam step",
                expected: self.m.len(),
                got: if params.len() != self.m.len() { params.len() } else { grads.len() },
            });
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_noop() {
        let mut s = AdamState::new(3);
        let mut p = vec![1.0, -2.0, 0.5];
        s.step(&mut p, &[0.0; 3], 1e-3).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_is_sign_of_gradient() {
        let mut s = AdamState::new(2);
        let mut p = vec![0.0, 0.0];
        s.step(&mut p, &[3.0, -0.02], 1e-2).unwrap();
        assert!((p[0] + 1e-2).abs() < 1e-9);
        assert!((p[1] - 1e-2).abs() < 1e-6);
    }

    /// Pencil-and-paper trace, lr = 0.1, g1 = 2, g2 = -1, p0 = 1.
    ///   m1 = 0.2, v1 = 0.004, m̂ = 2, v̂ = 4 -> p1 = 1 - 0.1 * 2 / (2 + 1e-8)
    ///   m2 = 0.18 - 0.1 = 0.08, v2 = 0.003996 + 0.001 = 0.004996
    ///   m̂ = 0.08 / 0.19, v̂ = 0.004996 / 0.001999
    #[test]
    fn two_step_trace() {
        let mut s = AdamState::new(1);
        let mut p = vec![1.0];
        s.step(&mut p, &[2.0], 0.1).unwrap();
        let p1 = 1.0 - 0.1 * 2.0 / (2.0 + 1e-8);
        assert!((p[0] - p1).abs() < 1e-12);
        s.step(&mut p, &[-1.0], 0.1).unwrap();
        let m_hat = 0.08 / (1.0 - 0.81);
        let v_hat = 0.004996 / (1.0 - 0.999f64 * 0.999);
        let p2 = p1 - 0.1 * m_hat / (v_hat.sqrt() + 1e-8);
        assert!((p[0] - p2).abs() < 1e-12, "{} vs {}", p[0], p2);
    }

    #[test]
    fn shape_mismatch() {
        let mut s = AdamState::new(2);
        let mut p = vec![0.0; 3];
        assert!(s.step(&mut p, &[0.0; 3], 0.1).is_err());
    }
}
