use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Truncated detector ⊗ field space.
///
/// Basis states `|j, n⟩` are stored detector-major:
/// `index = (j - 1) * (n_max + 1) + n`, with `j` in `1..=n_levels` and `n` in
/// `0..=n_max`. Each detector level therefore owns a contiguous slice of the
/// state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    n_levels: usize,
    n_max: usize,
}

impl HilbertSpace {
    pub fn new(n_levels: usize, n_max: usize) -> Result<Self> {
        if n_levels == 0 {
            return Err(invalid("n_levels", "detector needs at least one level"));
        }
        if n_max < 2 {
            return Err(invalid("n_max", "photon cutoff must be at least 2"));
        }
        Ok(Self { n_levels, n_max })
    }

    /// Number of detector levels (1 for an empty cavity).
    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of Fock states per detector level.
    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        self.n_levels * (self.n_max + 1)
    }

    /// Flat index of `|level, photons⟩`; `level` is 1-based.
    pub fn index(&self, level: usize, photons: usize) -> Result<usize> {
        self.check_level(level)?;
        if photons > self.n_max {
            return Err(Error::PhotonOutOfRange {
                photons,
                n_max: self.n_max,
            });
        }
        Ok((level - 1) * (self.n_max + 1) + photons)
    }

    /// Inverse of [`index`](Self::index): `(level, photons)` with 1-based level.
    pub fn decompose(&self, index: usize) -> (usize, usize) {
        (index / (self.n_max + 1) + 1, index % (self.n_max + 1))
    }

    pub(crate) fn check_level(&self, level: usize) -> Result<()> {
        if level == 0 || level > self.n_levels {
            Err(Error::LevelOutOfRange {
                index: level,
                levels: self.n_levels,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            })
        } else {
            Ok(())
        }
    }
}

/// Dense complex amplitudes over a [`HilbertSpace`].
///
/// States are kept at unit norm except during no-count evolution, where the
/// squared norm carries the no-click probability.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: HilbertSpace,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(space: HilbertSpace) -> Self {
        Self {
            space,
            amplitudes: vec![Complex64::new(0.0, 0.0); space.dim()],
        }
    }

    /// The canonical initial state `|1, 0⟩`: detector in its lowest level,
    /// field in vacuum.
    pub fn ground(space: HilbertSpace) -> Self {
        let mut state = Self::zeros(space);
        state.amplitudes[0] = Complex64::new(1.0, 0.0);
        state
    }

    pub fn basis(space: HilbertSpace, level: usize, photons: usize) -> Result<Self> {
        let idx = space.index(level, photons)?;
        let mut state = Self::zeros(space);
        state.amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Normalized superposition of `(level, photons, amplitude)` terms.
    pub fn superposition(
        space: HilbertSpace,
        terms: &[(usize, usize, Complex64)],
    ) -> Result<Self> {
        let mut state = Self::zeros(space);
        for &(level, photons, amp) in terms {
            state.amplitudes[space.index(level, photons)?] += amp;
        }
        if state.norm_sqr() == 0.0 {
            return Err(invalid("state", "superposition has zero norm"));
        }
        state.normalize();
        Ok(state)
    }

    pub fn from_amplitudes(space: HilbertSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        space.check_dim(amplitudes.len())?;
        Ok(Self { space, amplitudes })
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, level: usize, photons: usize) -> Result<Complex64> {
        Ok(self.amplitudes[self.space.index(level, photons)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    /// Rescales to unit norm and returns the norm before rescaling.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
        norm
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.space.check_dim(other.amplitudes.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Photon-number distribution `p(n)` with the detector traced out,
    /// normalized by the squared norm.
    pub fn photon_distribution(&self) -> Vec<f64> {
        let fock = self.space.fock_dim();
        let mut p = vec![0.0; fock];
        for chunk in self.amplitudes.chunks_exact(fock) {
            for (pn, a) in p.iter_mut().zip(chunk) {
                *pn += a.norm_sqr();
            }
        }
        let total: f64 = p.iter().sum();
        if total > 0.0 {
            p.iter_mut().for_each(|x| *x /= total);
        }
        p
    }

    /// Detector level populations `P_j`, normalized by the squared norm.
    pub fn level_populations(&self) -> Vec<f64> {
        let mut pops: Vec<f64> = self
            .amplitudes
            .chunks_exact(self.space.fock_dim())
            .map(|chunk| chunk.iter().map(|a| a.norm_sqr()).sum())
            .collect();
        let total: f64 = pops.iter().sum();
        if total > 0.0 {
            pops.iter_mut().for_each(|x| *x /= total);
        }
        pops
    }
}
