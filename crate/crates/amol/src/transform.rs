//! FFT analysis and synthesis for the digital shearlet frame.
//!
//! A window w with lattice decimation D reads coefficients on a lattice of side
//! n/D: c = √(ΠD)/n³ · IFFT_{n/D}(fold(f̂·w)), where fold sums the spectrum over
//! residues modulo n/D. With Σ w² ≡ 1 on the grid the analysis is an isometry and
//! synthesis is its adjoint, f = √(ΠD)/n³ · IFFT_n(Σ_w w · FFT_{n/D}(c)).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use amol_core::frame::{
    window_bank, CoefficientBlock, CoefficientSet, CoefficientStore, FrameSpec, SparseWindow,
    WindowKey,
};
use amol_core::parametrization::ShearletIndex;
use amol_core::volume::{Domain, SampledVolume, Samples};
use amol_core::{Complex64, Error, Result};
use rayon::prelude::*;

use crate::fft::{Direction, FftCache};
use crate::parallel;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Which coefficients analysis keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    All,
    /// The N largest magnitudes, ties broken by index order.
    Top(usize),
}

/// A coefficient with its rank key. Orders "worse first": smaller magnitude,
/// then larger index.
#[derive(Debug, Clone, Copy)]
struct Ranked {
    mag: f64,
    key: WindowKey,
    offset: usize,
    value: Complex64,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .mag
            .total_cmp(&self.mag)
            .then_with(|| (self.key, self.offset).cmp(&(other.key, other.offset)))
    }
}

/// Keeps the best `cap` entries seen so far.
struct TopN {
    cap: usize,
    heap: BinaryHeap<Ranked>,
}

impl TopN {
    fn new(cap: usize) -> Self {
        TopN {
            cap,
            heap: BinaryHeap::with_capacity(cap + 1),
        }
    }

    fn push(&mut self, r: Ranked) {
        if self.cap == 0 {
            return;
        }
        if self.heap.len() < self.cap {
            self.heap.push(r);
        } else if let Some(worst) = self.heap.peek() {
            if r < *worst {
                self.heap.pop();
                self.heap.push(r);
            }
        }
    }

    /// Best first.
    fn into_sorted(self) -> Vec<Ranked> {
        self.heap.into_sorted_vec()
    }
}

/// Window bank and FFT plans for one frame spec.
pub struct Transform {
    spec: FrameSpec,
    windows: Vec<SparseWindow>,
    lookup: BTreeMap<WindowKey, usize>,
    fft: FftCache,
}

impl Transform {
    pub fn new(spec: FrameSpec) -> Result<Self> {
        spec.validate()?;
        let windows = window_bank(&spec);
        let lookup = windows
            .iter()
            .enumerate()
            .map(|(i, w)| (w.key, i))
            .collect();
        Ok(Transform {
            spec,
            windows,
            lookup,
            fft: FftCache::new(spec.n),
        })
    }

    pub fn spec(&self) -> &FrameSpec {
        &self.spec
    }

    pub fn windows(&self) -> &[SparseWindow] {
        &self.windows
    }

    pub fn window(&self, key: &WindowKey) -> Option<&SparseWindow> {
        self.lookup.get(key).map(|&i| &self.windows[i])
    }

    /// Total number of coefficients over all windows.
    pub fn coefficient_count(&self) -> usize {
        let n = self.spec.n;
        self.windows
            .iter()
            .map(|w| w.lattice_dims(n).iter().product::<usize>())
            .sum()
    }

    fn norm(&self, w: &SparseWindow) -> f64 {
        let n = self.spec.n as f64;
        (w.decimation.iter().product::<usize>() as f64).sqrt() / (n * n * n)
    }

    fn fold_index(&self, bin: u32, dims: [usize; 3]) -> usize {
        let n = self.spec.n;
        let b = bin as usize;
        let (i, j, k) = (b / (n * n), (b / n) % n, b % n);
        ((i % dims[0]) * dims[1] + j % dims[1]) * dims[2] + k % dims[2]
    }

    /// Raw forward spectrum of a volume.
    pub fn spectrum(&self, f: &SampledVolume) -> Result<Vec<Complex64>> {
        let n = self.spec.n;
        if f.dims != [n; 3] {
            return Err(Error::DimensionMismatch {
                expected: self.spec.len(),
                found: f.len(),
            });
        }
        if f.domain != Domain::Spatial {
            return Err(Error::Domain("analysis expects a spatial volume".into()));
        }
        let mut data = f.to_complex();
        self.fft.fft3(&mut data, [n; 3], Direction::Forward);
        Ok(data)
    }

    /// Coefficients of one window from a raw spectrum.
    pub fn analyze_window(&self, spectrum: &[Complex64], w: &SparseWindow) -> CoefficientBlock {
        let dims = w.lattice_dims(self.spec.n);
        let mut g = vec![ZERO; dims.iter().product()];
        for (&b, &v) in w.bins.iter().zip(&w.values) {
            g[self.fold_index(b, dims)] += spectrum[b as usize] * v;
        }
        self.fft.fft3(&mut g, dims, Direction::Inverse);
        let s = self.norm(w);
        g.iter_mut().for_each(|c| *c *= s);
        CoefficientBlock {
            key: w.key,
            decimation: w.decimation,
            values: g,
        }
    }

    /// Analysis of a raw spectrum.
    pub fn analyze_spectrum(&self, spectrum: &[Complex64], keep: Keep) -> CoefficientSet {
        let store = match keep {
            Keep::All => CoefficientStore::Dense(parallel::install(|| {
                self.windows
                    .par_iter()
                    .map(|w| self.analyze_window(spectrum, w))
                    .collect()
            })),
            Keep::Top(cap) => {
                let partial: Vec<Vec<Ranked>> = parallel::install(|| {
                    self.windows
                        .par_iter()
                        .map(|w| {
                            let block = self.analyze_window(spectrum, w);
                            let mut top = TopN::new(cap);
                            for (offset, &value) in block.values.iter().enumerate() {
                                top.push(Ranked {
                                    mag: value.norm(),
                                    key: w.key,
                                    offset,
                                    value,
                                });
                            }
                            top.into_sorted()
                        })
                        .collect()
                });
                let mut top = TopN::new(cap);
                partial.into_iter().flatten().for_each(|r| top.push(r));
                CoefficientStore::Sparse(self.to_entries(top.into_sorted()))
            }
        };
        let truncated = matches!(keep, Keep::Top(c) if c < self.coefficient_count());
        CoefficientSet {
            spec: self.spec,
            store,
            truncated,
        }
    }

    pub fn analysis(&self, f: &SampledVolume, keep: Keep) -> Result<CoefficientSet> {
        Ok(self.analyze_spectrum(&self.spectrum(f)?, keep))
    }

    fn to_entries(&self, ranked: Vec<Ranked>) -> Vec<(ShearletIndex, Complex64)> {
        let n = self.spec.n;
        ranked
            .into_iter()
            .map(|r| {
                let w = &self.windows[self.lookup[&r.key]];
                let block = CoefficientBlock {
                    key: r.key,
                    decimation: w.decimation,
                    values: Vec::new(),
                };
                (r.key.index(block.position(n, r.offset)), r.value)
            })
            .collect()
    }

    /// The first `count` coefficients of `set` in rank order (magnitude, then index).
    pub fn select_top(&self, set: &CoefficientSet, count: usize) -> Result<CoefficientSet> {
        let ranked = self.rank(set)?;
        let kept = ranked.into_iter().take(count).collect();
        Ok(CoefficientSet {
            spec: set.spec,
            store: CoefficientStore::Sparse(self.to_entries(kept)),
            truncated: count < set.len() || set.truncated,
        })
    }

    fn rank(&self, set: &CoefficientSet) -> Result<Vec<Ranked>> {
        let mut all = Vec::with_capacity(set.len());
        for (key, block) in self.blocks(set)? {
            for (offset, &value) in block.iter().enumerate() {
                all.push(Ranked {
                    mag: value.norm(),
                    key,
                    offset,
                    value,
                });
            }
        }
        all.sort_unstable();
        Ok(all)
    }

    /// Coefficients regrouped as one lattice array per window.
    fn blocks(&self, set: &CoefficientSet) -> Result<Vec<(WindowKey, Vec<Complex64>)>> {
        if set.spec != self.spec {
            return Err(Error::InvalidSpec(
                "coefficient set belongs to a different frame".into(),
            ));
        }
        let n = self.spec.n;
        match &set.store {
            CoefficientStore::Dense(blocks) => blocks
                .iter()
                .map(|b| {
                    let w = self
                        .window(&b.key)
                        .ok_or_else(|| Error::InvalidIndex(format!("{:?}", b.key)))?;
                    if b.decimation != w.decimation
                        || b.values.len() != w.lattice_dims(n).iter().product::<usize>()
                    {
                        return Err(Error::InvalidIndex(format!(
                            "block {:?} does not match its window",
                            b.key
                        )));
                    }
                    Ok((b.key, b.values.clone()))
                })
                .collect(),
            CoefficientStore::Sparse(entries) => {
                let mut grouped: BTreeMap<WindowKey, Vec<Complex64>> = BTreeMap::new();
                for (idx, c) in entries {
                    let key = WindowKey::of(idx)?;
                    let w = self
                        .window(&key)
                        .ok_or_else(|| Error::InvalidIndex(format!("{idx:?}")))?;
                    let dims = w.lattice_dims(n);
                    let k = &idx.k;
                    if k.iter().zip(dims).any(|(&v, d)| v < 0 || v as usize >= d) {
                        return Err(Error::InvalidIndex(format!(
                            "{idx:?} is off the lattice {dims:?}"
                        )));
                    }
                    let off = (k[0] as usize * dims[1] + k[1] as usize) * dims[2] + k[2] as usize;
                    grouped
                        .entry(key)
                        .or_insert_with(|| vec![ZERO; dims.iter().product()])[off] += c;
                }
                Ok(grouped.into_iter().collect())
            }
        }
    }

    /// Raw spectrum Σ_w w · √(ΠD)/n³ · FFT_{n/D}(c_w) of a coefficient set.
    pub fn synthesis_spectrum(&self, set: &CoefficientSet) -> Result<Vec<Complex64>> {
        let blocks = self.blocks(set)?;
        let len = self.spec.len();
        Ok(parallel::install(|| {
            blocks
                .into_par_iter()
                .fold(
                    || vec![ZERO; len],
                    |mut acc, (key, mut g)| {
                        let w = &self.windows[self.lookup[&key]];
                        let dims = w.lattice_dims(self.spec.n);
                        self.fft.fft3(&mut g, dims, Direction::Forward);
                        let s = self.norm(w);
                        for (&b, &v) in w.bins.iter().zip(&w.values) {
                            acc[b as usize] += g[self.fold_index(b, dims)] * (v * s);
                        }
                        acc
                    },
                )
                .reduce(
                    || vec![ZERO; len],
                    |mut a, b| {
                        a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                        a
                    },
                )
        }))
    }

    /// Adjoint of analysis; a complex spatial volume.
    pub fn synthesis(&self, set: &CoefficientSet) -> Result<SampledVolume> {
        let n = self.spec.n;
        let mut data = self.synthesis_spectrum(set)?;
        self.fft.fft3(&mut data, [n; 3], Direction::Inverse);
        SampledVolume::new([n; 3], Samples::Complex(data), Domain::Spatial)
    }

    /// A single digital atom ψ_λ as a volume.
    pub fn atom(&self, idx: &ShearletIndex) -> Result<SampledVolume> {
        self.synthesis(&self.single(idx))
    }

    fn single(&self, idx: &ShearletIndex) -> CoefficientSet {
        CoefficientSet {
            spec: self.spec,
            store: CoefficientStore::Sparse(vec![(idx.clone(), Complex64::new(1.0, 0.0))]),
            truncated: true,
        }
    }

    /// Σ_μ |⟨ψ_λ, ψ_μ⟩| over atoms μ whose window passes `include`: one row of the
    /// digital Gramian in ℓ¹.
    pub fn gramian_row_l1(
        &self,
        idx: &ShearletIndex,
        include: impl Fn(&WindowKey) -> bool + Sync,
    ) -> Result<f64> {
        let mut spectrum = self.synthesis_spectrum(&self.single(idx))?;
        let volume = self.spec.len() as f64;
        spectrum.iter_mut().for_each(|c| *c *= volume);
        let own = WindowKey::of(idx)?;
        let own_bins = &self.windows[self.lookup[&own]].bins;
        let mut mask = vec![false; self.spec.len()];
        own_bins.iter().for_each(|&b| mask[b as usize] = true);
        Ok(parallel::install(|| {
            self.windows
                .par_iter()
                .filter(|w| include(&w.key) && w.bins.iter().any(|&b| mask[b as usize]))
                .map(|w| {
                    self.analyze_window(&spectrum, w)
                        .values
                        .iter()
                        .map(|c| c.norm())
                        .sum::<f64>()
                })
                .sum()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_volume(n: usize, seed: u64) -> SampledVolume {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SampledVolume::real(
            n,
            (0..n * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    fn small() -> Transform {
        Transform::new(FrameSpec::new(16, 1).unwrap()).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let t = small();
        let c = t.analysis(&SampledVolume::zeros(16), Keep::All).unwrap();
        assert_eq!(c.len(), t.coefficient_count());
        assert_eq!(c.energy(), 0.0);
    }

    #[test]
    fn parseval_and_round_trip() {
        let t = small();
        let f = random_volume(16, 3);
        let c = t.analysis(&f, Keep::All).unwrap();
        assert!((c.energy() / f.energy() - 1.0).abs() < 1e-10);
        let g = t.synthesis(&c).unwrap();
        assert!(f.distance_sqr(&g).unwrap() / f.energy() < 1e-20);
    }

    #[test]
    fn full_lattice_is_also_tight() {
        let t = Transform::new(
            FrameSpec::new(16, 1)
                .unwrap()
                .with_lattice(amol_core::frame::LatticeMode::Full),
        )
        .unwrap();
        let f = random_volume(16, 4);
        let c = t.analysis(&f, Keep::All).unwrap();
        assert_eq!(c.len(), t.windows().len() * 16 * 16 * 16);
        assert!((c.energy() / f.energy() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn synthesis_is_the_adjoint() {
        let t = small();
        let f = random_volume(16, 5);
        let c = t.analysis(&random_volume(16, 6), Keep::All).unwrap();
        let lhs: Complex64 = {
            let a = t.analysis(&f, Keep::All).unwrap().entries();
            a.iter()
                .zip(c.entries())
                .map(|((_, x), (_, y))| x * y.conj())
                .sum()
        };
        let g = t.synthesis(&c).unwrap().to_complex();
        let rhs: Complex64 = f
            .to_complex()
            .iter()
            .zip(&g)
            .map(|(x, y)| x * y.conj())
            .sum();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn coarse_atom_coefficients() {
        let t = small();
        let idx = WindowKey::COARSE.index([0, 0, 0]);
        let atom = t.atom(&idx).unwrap();
        let c = t.analysis(&atom, Keep::All).unwrap();
        let own = c.entries().into_iter().find(|(i, _)| *i == idx).unwrap().1;
        assert!((own.re - atom.energy()).abs() < 1e-12 && own.im.abs() < 1e-12);
        assert!((c.energy() - atom.energy()).abs() < 1e-12);
        let top = t.analysis(&atom, Keep::Top(1)).unwrap();
        assert_eq!(top.entries()[0].0, idx);
    }

    #[test]
    fn streaming_top_matches_full_ranking() {
        let t = small();
        let f = random_volume(16, 8);
        let all = t.analysis(&f, Keep::All).unwrap();
        let streamed = t.analysis(&f, Keep::Top(50)).unwrap();
        assert_eq!(streamed, t.select_top(&all, 50).unwrap());
        assert!(streamed.truncated);
        let mags = streamed.magnitudes();
        assert!(mags.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn ties_follow_index_order() {
        let t = small();
        let a = WindowKey::new(3, 1, [0, 0]).index([1, 0, 0]);
        let b = WindowKey::new(1, 0, [0, 0]).index([0, 1, 0]);
        let set = CoefficientSet {
            spec: *t.spec(),
            store: CoefficientStore::Sparse(vec![
                (a.clone(), Complex64::new(1.0, 0.0)),
                (b.clone(), Complex64::new(0.0, 1.0)),
            ]),
            truncated: true,
        };
        let top = t.select_top(&set, 2).unwrap().entries();
        assert_eq!((top[0].0.clone(), top[1].0.clone()), (b, a));
    }

    #[test]
    fn truncated_synthesis_error_is_the_tail() {
        let t = small();
        let f = random_volume(16, 9);
        let all = t.analysis(&f, Keep::All).unwrap();
        let kept = t.select_top(&all, 300).unwrap();
        let err = f.distance_sqr(&t.synthesis(&kept).unwrap()).unwrap();
        let tail = all.energy() - kept.energy();
        assert!(err <= tail + 1e-8 * f.energy());
    }

    #[test]
    fn rejects_foreign_indices() {
        let t = small();
        let bad = CoefficientSet {
            spec: *t.spec(),
            store: CoefficientStore::Sparse(vec![(
                WindowKey::COARSE.index([99, 0, 0]),
                Complex64::new(1.0, 0.0),
            )]),
            truncated: true,
        };
        assert!(t.synthesis(&bad).is_err());
        assert!(t.analysis(&SampledVolume::zeros(8), Keep::All).is_err());
        let empty = CoefficientSet {
            spec: *t.spec(),
            store: CoefficientStore::Sparse(vec![]),
            truncated: true,
        };
        assert_eq!(t.synthesis(&empty).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn gramian_row_of_own_window() {
        let t = small();
        let idx = WindowKey::new(2, 1, [1, 0]).index([0, 0, 0]);
        let atom = t.atom(&idx).unwrap();
        let row = t.gramian_row_l1(&idx, |_| true).unwrap();
        let direct: f64 = t
            .analysis(&atom, Keep::All)
            .unwrap()
            .magnitudes()
            .iter()
            .sum();
        assert!((row - direct).abs() < 1e-10 * direct, "{row} {direct}");
        assert!(row >= atom.energy());
    }
}
