//! Trigonometric differentiation and interpolation on the periodic grid
//! `t_j = j/N`.
//!
//! Loops are discretized by their node values; the discrete derivative is
//! the derivative of the trigonometric interpolant.  On band-limited data
//! (total bandwidth below Nyquist) this derivative obeys the exact Leibniz
//! rule, which is what makes the discrete gauge identities hold to machine
//! precision.

/// Differentiation operator for `n` equispaced nodes on a period-1 circle.
#[derive(Debug, Clone)]
pub struct DiffOps {
    n: usize,
    /// Dense spectral differentiation matrix, row-major `n x n`.
    matrix: Vec<f64>,
}

impl DiffOps {
    pub fn new(n: usize) -> Self {
        assert!(n >= 4, "need at least 4 nodes");
        let mut matrix = vec![0.0; n * n];
        let nf = n as f64;
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    continue;
                }
                let d = j as isize - k as isize;
                let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
                let arg = std::f64::consts::PI * d as f64 / nf;
                let entry = if n % 2 == 0 {
                    // even grid: derivative of the cotangent cardinal function
                    sign * std::f64::consts::PI * (arg.cos() / arg.sin())
                } else {
                    sign * std::f64::consts::PI / arg.sin()
                };
                matrix[j * n + k] = entry;
            }
        }
        Self { n, matrix }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Derivative of a single scalar strand of node values.
    pub fn derivative(&self, strand: &[f64]) -> Vec<f64> {
        assert_eq!(strand.len(), self.n);
        let mut out = vec![0.0; self.n];
        for j in 0..self.n {
            let row = &self.matrix[j * self.n..(j + 1) * self.n];
            let mut acc = 0.0;
            for (k, s) in strand.iter().enumerate() {
                acc += row[k] * s;
            }
            out[j] = acc;
        }
        out
    }

    /// Derivative of interleaved strands (`n` rows of `width` components).
    pub fn derivative_strands(&self, data: &[f64], width: usize) -> Vec<f64> {
        assert_eq!(data.len(), self.n * width);
        let mut out = vec![0.0; data.len()];
        for j in 0..self.n {
            let row = &self.matrix[j * self.n..(j + 1) * self.n];
            for (k, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let src = &data[k * width..(k + 1) * width];
                let dst = &mut out[j * width..(j + 1) * width];
                for c in 0..width {
                    dst[c] += w * src[c];
                }
            }
        }
        out
    }

    /// Transpose application; the matrix is antisymmetric so this is `-D`.
    pub fn derivative_transpose_strands(&self, data: &[f64], width: usize) -> Vec<f64> {
        let mut out = self.derivative_strands(data, width);
        for v in &mut out {
            *v = -*v;
        }
        out
    }
}

/// Complex Fourier coefficients `c_k`, `k = 0..n-1` (index modulo n), of a
/// real strand; direct O(n^2) transform.
fn dft(strand: &[f64]) -> Vec<(f64, f64)> {
    let n = strand.len();
    let nf = n as f64;
    let mut coeffs = vec![(0.0, 0.0); n];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, &x) in strand.iter().enumerate() {
            let ang = -2.0 * std::f64::consts::PI * (k * j) as f64 / nf;
            re += x * ang.cos();
            im += x * ang.sin();
        }
        *c = (re / nf, im / nf);
    }
    coeffs
}

fn signed_freq(k: usize, n: usize) -> isize {
    if 2 * k < n {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// Mean of the strand together with the antiderivative of the mean-free part,
/// evaluated at the `n+1` nodes `t = 0, 1/n, ..., 1` and vanishing at `t=0`.
///
/// The full antiderivative of the strand is `mean * t + periodic_part(t)`.
pub fn antiderivative_nodes(strand: &[f64]) -> (f64, Vec<f64>) {
    let n = strand.len();
    let coeffs = dft(strand);
    let mean = coeffs[0].0;
    let mut out = vec![0.0; n + 1];
    for (j, o) in out.iter_mut().enumerate() {
        let t = j as f64 / n as f64;
        let mut acc = 0.0;
        for (k, &(re, im)) in coeffs.iter().enumerate() {
            let f = signed_freq(k, n);
            if f == 0 || 2 * k == n {
                // Nyquist antiderivative vanishes on the node grid
                continue;
            }
            let om = 2.0 * std::f64::consts::PI * f as f64;
            // Re[ c_k / (i om) (e^{i om t} - 1) ]
            let (er, ei) = ((om * t).cos() - 1.0, (om * t).sin());
            // c_k/(i om) = (im/om) + i(-re/om)? compute: (re + i im)/(i om) = (im - i re)/om
            let ar = im / om;
            let ai = -re / om;
            acc += ar * er - ai * ei;
        }
        *o = acc;
    }
    (mean, out)
}

/// Trigonometric interpolation of a strand onto `m` equispaced nodes.
pub fn resample(strand: &[f64], m: usize) -> Vec<f64> {
    let n = strand.len();
    if m == n {
        return strand.to_vec();
    }
    let coeffs = dft(strand);
    let mut out = vec![0.0; m];
    for (j, o) in out.iter_mut().enumerate() {
        let t = j as f64 / m as f64;
        *o = eval_coeffs(&coeffs, n, t);
    }
    out
}

/// Evaluate the trigonometric interpolant at an arbitrary parameter `t`.
pub fn eval_at(strand: &[f64], t: f64) -> f64 {
    let coeffs = dft(strand);
    eval_coeffs(&coeffs, strand.len(), t)
}

fn eval_coeffs(coeffs: &[(f64, f64)], n: usize, t: f64) -> f64 {
    let mut acc = 0.0;
    for (k, &(re, im)) in coeffs.iter().enumerate() {
        let f = signed_freq(k, n);
        if 2 * k == n && n % 2 == 0 {
            // split the Nyquist mode symmetrically: cos only
            acc += re * (std::f64::consts::PI * n as f64 * t).cos();
            continue;
        }
        let om = 2.0 * std::f64::consts::PI * f as f64;
        acc += re * (om * t).cos() - im * (om * t).sin();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derivative_exact_on_bandlimited() {
        let n = 32;
        let ops = DiffOps::new(n);
        let strand: Vec<f64> = (0..n)
            .map(|j| {
                let t = j as f64 / n as f64;
                (2.0 * std::f64::consts::PI * 3.0 * t).sin() + 0.4
            })
            .collect();
        let d = ops.derivative(&strand);
        for j in 0..n {
            let t = j as f64 / n as f64;
            let expect =
                2.0 * std::f64::consts::PI * 3.0 * (2.0 * std::f64::consts::PI * 3.0 * t).cos();
            assert_relative_eq!(d[j], expect, max_relative = 1e-10, epsilon = 1e-10);
        }
    }

    #[test]
    fn antiderivative_matches() {
        let n = 24;
        let strand: Vec<f64> = (0..n)
            .map(|j| {
                let t = j as f64 / n as f64;
                1.5 + (2.0 * std::f64::consts::PI * t).cos()
            })
            .collect();
        let (mean, anti) = antiderivative_nodes(&strand);
        assert_relative_eq!(mean, 1.5, epsilon = 1e-12);
        for (j, &a) in anti.iter().enumerate() {
            let t = j as f64 / n as f64;
            let expect = (2.0 * std::f64::consts::PI * t).sin() / (2.0 * std::f64::consts::PI);
            assert_relative_eq!(a, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn resample_roundtrip() {
        let n = 16;
        let strand: Vec<f64> = (0..n)
            .map(|j| {
                let t = j as f64 / n as f64;
                (2.0 * std::f64::consts::PI * 2.0 * t).sin() - 0.3 * (2.0 * std::f64::consts::PI * t).cos()
            })
            .collect();
        let up = resample(&strand, 48);
        let down = resample(&up, n);
        for (a, b) in strand.iter().zip(&down) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }
}
