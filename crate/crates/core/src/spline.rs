//! Natural cubic splines on strictly increasing abscissas.

#[derive(Clone, Debug)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
    uniform: Option<f64>,
}

impl CubicSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for second derivatives, natural ends
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let cc = h1 / 6.0;
                let r = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                let denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (r - a * d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        let h0 = x[1] - x[0];
        let uniform = if x.windows(2).all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-12 * h0.abs().max(1.0)) {
            Some(h0)
        } else {
            None
        };
        CubicSpline { x: x.to_vec(), y: y.to_vec(), m, uniform }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0;
        }
        if t >= self.x[n - 1] {
            return n - 2;
        }
        if let Some(h) = self.uniform {
            let i = ((t - self.x[0]) / h) as usize;
            return i.min(n - 2);
        }
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        }
    }

    /// Value, first and second derivative.
    pub fn eval3(&self, t: f64) -> (f64, f64, f64) {
        let i = self.locate(t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (y1 - y0) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval3(t).0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.eval3(t).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let x: Vec<f64> = (0..201).map(|i| -5.0 + 0.05 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| (-t * t).exp()).collect();
        let s = CubicSpline::new(&x, &y);
        for &t in &[-1.234, 0.0, 0.777, 2.5] {
            let (v, d, _) = s.eval3(t);
            assert!((v - (-t * t).exp()).abs() < 1e-5);
            assert!((d + 2.0 * t * (-t * t).exp()).abs() < 1e-3);
        }
    }

    #[test]
    fn nonuniform_grid_interpolates_knots() {
        let x = vec![0.0, 0.1, 0.5, 0.7, 2.0];
        let y = vec![1.0, 2.0, -1.0, 0.5, 3.0];
        let s = CubicSpline::new(&x, &y);
        for (a, b) in x.iter().zip(&y) {
            assert!((s.eval(*a) - b).abs() < 1e-13);
        }
    }
}
