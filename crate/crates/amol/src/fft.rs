//! Unnormalized 3D FFTs over row-major arrays, built from rustfft line transforms.

use std::sync::Arc;

use amol_core::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Plans for every power of two up to n, both directions.
pub struct FftCache {
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl FftCache {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT cache needs a power of two");
        let mut planner = FftPlanner::new();
        let sizes: Vec<usize> = (0..=n.trailing_zeros()).map(|e| 1usize << e).collect();
        FftCache {
            forward: sizes.iter().map(|&s| planner.plan_fft_forward(s)).collect(),
            inverse: sizes.iter().map(|&s| planner.plan_fft_inverse(s)).collect(),
        }
    }

    fn plan(&self, len: usize, dir: Direction) -> &Arc<dyn Fft<f64>> {
        let e = len.trailing_zeros() as usize;
        match dir {
            Direction::Forward => &self.forward[e],
            Direction::Inverse => &self.inverse[e],
        }
    }

    /// In-place raw transform: Σ_x a(x) e^{∓2πi⟨m, x/dims⟩}, no scaling.
    pub fn fft3(&self, data: &mut [Complex64], dims: [usize; 3], dir: Direction) {
        let [a, b, c] = dims;
        assert_eq!(data.len(), a * b * c);
        if c > 1 {
            let p = self.plan(c, dir);
            let mut scratch = vec![Complex64::new(0.0, 0.0); p.get_inplace_scratch_len()];
            p.process_with_scratch(data, &mut scratch);
        }
        let mut line = Vec::new();
        if b > 1 {
            let p = self.plan(b, dir);
            let mut scratch = vec![Complex64::new(0.0, 0.0); p.get_inplace_scratch_len()];
            for i in 0..a {
                for k in 0..c {
                    line.clear();
                    line.extend((0..b).map(|j| data[(i * b + j) * c + k]));
                    p.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[(i * b + j) * c + k] = *v;
                    }
                }
            }
        }
        if a > 1 {
            let p = self.plan(a, dir);
            let mut scratch = vec![Complex64::new(0.0, 0.0); p.get_inplace_scratch_len()];
            let stride = b * c;
            for r in 0..stride {
                line.clear();
                line.extend((0..a).map(|i| data[i * stride + r]));
                p.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[i * stride + r] = *v;
                }
            }
        }
    }
}
