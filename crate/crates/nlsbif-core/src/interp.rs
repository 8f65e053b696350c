//! Natural cubic spline on strictly increasing knots. Used for tabulated
//! potentials (which need two derivatives) and for moving states between
//! grids in the large-E rescaling.

/// Natural cubic spline interpolant.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    y2: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        assert!(n >= 3, "spline needs at least 3 knots");
        assert_eq!(xs.len(), ys.len());
        for w in xs.windows(2) {
            assert!(w[1] > w[0], "spline knots must be strictly increasing");
        }
        // Tridiagonal solve for the second derivatives, natural BCs.
        let mut y2 = vec![0.0f64; n];
        let mut u = vec![0.0f64; n];
        for i in 1..n - 1 {
            let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let d = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
                - (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            u[i] = (6.0 * d / (xs[i + 1] - xs[i - 1]) - sig * u[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + u[i];
        }
        Self { xs, ys, y2 }
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.clamp(1, self.xs.len() - 1) - 1,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.y2[i] + (b * b * b - b) * self.y2[i + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.y2[i + 1] - (3.0 * a * a - 1.0) * self.y2[i]) * h / 6.0
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.y2[i] + b * self.y2[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function_and_derivatives() {
        let xs: Vec<f64> = (0..401).map(|i| -4.0 + i as f64 * 0.02).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| (-x * x / 2.0).exp()).collect();
        let sp = CubicSpline::natural(xs, ys);
        for &x in &[-2.3, -0.77, 0.013, 1.51, 3.2] {
            let f = (-x * x / 2.0_f64).exp();
            let f1 = -x * f;
            let f2 = (x * x - 1.0) * f;
            assert!((sp.eval(x) - f).abs() < 1e-7);
            assert!((sp.deriv(x) - f1).abs() < 1e-5);
            assert!((sp.deriv2(x) - f2).abs() < 1e-3);
        }
    }

    #[test]
    fn exact_at_knots() {
        let xs = vec![0.0, 1.0, 2.5, 3.0, 4.0];
        let ys = vec![1.0, -0.5, 2.0, 0.0, 1.0];
        let sp = CubicSpline::natural(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            assert!((sp.eval(*x) - y).abs() < 1e-14);
        }
    }
}
