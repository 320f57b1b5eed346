/// Diagonal Adam preconditioner over a flat parameter vector.
#[derive(Debug, Clone)]
pub(crate) struct Adam {
    step: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(n: usize, step: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self { step, beta1, beta2, eps, t: 0, m: vec![0.0; n], v: vec![0.0; n] }
    }

    /// Folds in a gradient and writes the descent direction (bias-corrected
    /// first moment of `grad`) and the per-coordinate step sizes (from the
    /// second moment of `scale_grad`).
    pub fn update(&mut self, grad: &[f64], scale_grad: &[f64], dir: &mut [f64], steps: &mut [f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..grad.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            let h = scale_grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * h * h;
            dir[i] = self.m[i] / c1;
            steps[i] = self.step / ((self.v[i] / c2).sqrt() + self.eps);
        }
    }
}
