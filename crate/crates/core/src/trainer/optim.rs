//! Adam with bias correction over every model tensor.

use crate::scalar::Scalar;
use crate::trainer::model::{Shape, Weights};

#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: i32,
    m: Weights<T>,
    v: Weights<T>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(shape: Shape, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            m: Weights::zeros(shape),
            v: Weights::zeros(shape),
        }
    }

    pub fn steps(&self) -> i32 {
        self.step
    }

    pub fn update(&mut self, params: &mut Weights<T>, grads: &Weights<T>) {
        self.step += 1;
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let c1 = T::of(1.0 - self.beta1.powi(self.step));
        let c2 = T::of(1.0 - self.beta2.powi(self.step));
        let (lr, eps) = (T::of(self.lr), T::of(self.eps));
        let one = T::one();
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut());
        for (((p, g), m), v) in tensors {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (one - b1) * g[i];
                v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p[i] = p[i] - lr * mh / (vh.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        let shape = Shape { vocab: 1, dim: 1, hidden: 1, classes: 1 };
        let mut p = Weights::<f64>::zeros(shape);
        let mut g = Weights::zeros(shape);
        g.embeddings[0] = 3.0;
        g.enc_bias[0] = -0.5;
        let mut opt = Adam::new(shape, 0.1, 0.9, 0.999, 1e-8);
        opt.update(&mut p, &g);
        assert!((p.embeddings[0] + 0.1).abs() < 1e-6);
        assert!((p.enc_bias[0] - 0.1).abs() < 1e-6);
        assert_eq!(p.enc_weight[0], 0.0);
        assert_eq!(opt.steps(), 1);
    }
}
