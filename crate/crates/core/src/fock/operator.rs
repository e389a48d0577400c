use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::space::{HilbertSpace, StateVector};
use crate::error::{invalid, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Declared symmetry of an operator. Anything other than `General` is checked
/// when the flag is attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Hermitian,
    AntiHermitian,
    General,
}

/// Relative tolerance of the symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Sparse complex operator in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    space: HilbertSpace,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    symmetry: Symmetry,
}

impl LinearOperator {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped. The result is flagged `General`.
    pub fn from_triplets<I>(space: HilbertSpace, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let dim = space.dim();
        let mut entries: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= dim || c >= dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.max(c) + 1,
            });
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut op = Self {
            space,
            row_ptr,
            cols,
            vals,
            symmetry: Symmetry::General,
        };
        op.prune();
        Ok(op)
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        Self {
            space,
            row_ptr: vec![0; space.dim() + 1],
            cols: Vec::new(),
            vals: Vec::new(),
            symmetry: Symmetry::Hermitian,
        }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        Self::diagonal(space, |_| ONE).with_symmetry_unchecked(Symmetry::Hermitian)
    }

    /// Diagonal operator with entries `f(index)`.
    pub fn diagonal(space: HilbertSpace, f: impl Fn(usize) -> Complex64) -> Self {
        Self::from_triplets(space, (0..space.dim()).map(|i| (i, i, f(i))))
            .expect("diagonal indices are in range")
    }

    fn prune(&mut self) {
        let dim = self.space.dim();
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for row in 0..dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                if self.vals[k] != ZERO {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[row + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Attaches a symmetry flag after verifying it.
    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Result<Self> {
        let defect = self.symmetry_defect(symmetry);
        let scale = self.max_abs().max(1.0);
        if defect > SYMMETRY_TOL * scale {
            return Err(invalid(
                "symmetry",
                alloc::format!("{symmetry:?} flag violated by {defect:e}"),
            ));
        }
        self.symmetry = symmetry;
        Ok(self)
    }

    pub(crate) fn with_symmetry_unchecked(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    /// `max |M - M†|` for `Hermitian`, `max |M + M†|` for `AntiHermitian`,
    /// zero for `General`.
    pub fn symmetry_defect(&self, symmetry: Symmetry) -> f64 {
        let sign = match symmetry {
            Symmetry::Hermitian => -1.0,
            Symmetry::AntiHermitian => 1.0,
            Symmetry::General => return 0.0,
        };
        let adj = self.adjoint();
        let diff = self.add_scaled(&adj, Complex64::new(sign, 0.0));
        diff.max_abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn row_sum_bound(&self) -> f64 {
        (0..self.dim())
            .map(|r| {
                self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    /// Row-major dense copy; intended for small spaces.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let dim = self.dim();
        let mut out = vec![ZERO; dim * dim];
        for (r, c, v) in self.triplets() {
            out[r * dim + c] = v;
        }
        out
    }

    /// `y = M x`.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// `y += coeff · M x`.
    pub fn apply_add(&self, coeff: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out += coeff * acc;
        }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.space.check_dim(state.amplitudes().len())?;
        let mut out = StateVector::zeros(self.space);
        self.apply_into(state.amplitudes(), out.amplitudes_mut());
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let triplets: Vec<_> = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        let sym = self.symmetry;
        Self::from_triplets(self.space, triplets)
            .expect("transposed indices stay in range")
            .with_symmetry_unchecked(sym)
    }

    pub fn scale(&self, coeff: Complex64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= coeff);
        out.symmetry = Symmetry::General;
        out.prune();
        out
    }

    /// `self + coeff · other`, flagged `General`.
    pub fn add_scaled(&self, other: &Self, coeff: Complex64) -> Self {
        assert_eq!(self.space, other.space, "operators act on different spaces");
        let triplets = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, coeff * v)));
        Self::from_triplets(self.space, triplets.collect::<Vec<_>>())
            .expect("indices stay in range")
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, ONE)
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.space, other.space, "operators act on different spaces");
        let dim = self.dim();
        let mut acc = vec![ZERO; dim];
        let mut marker = vec![usize::MAX; dim];
        let mut touched = Vec::new();
        let mut triplets = Vec::new();
        for row in 0..dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                let mid = self.cols[k];
                let a = self.vals[k];
                for kk in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let col = other.cols[kk];
                    if marker[col] != row {
                        marker[col] = row;
                        acc[col] = ZERO;
                        touched.push(col);
                    }
                    acc[col] += a * other.vals[kk];
                }
            }
            for &col in &touched {
                triplets.push((row, col, acc[col]));
            }
            touched.clear();
        }
        Self::from_triplets(self.space, triplets).expect("product indices stay in range")
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other)
            .add_scaled(&other.mul(self), Complex64::new(-1.0, 0.0))
    }
}

/// Field annihilation operator `â ⊗ 1_detector`, with `⟨n-1|â|n⟩ = √n`.
pub fn annihilation(space: HilbertSpace) -> LinearOperator {
    let fock = space.fock_dim();
    let triplets = (0..space.dim()).filter_map(|idx| {
        let n = idx % fock;
        (n > 0).then(|| (idx - 1, idx, Complex64::new(libm::sqrt(n as f64), 0.0)))
    });
    LinearOperator::from_triplets(space, triplets.collect::<Vec<_>>())
        .expect("ladder indices are in range")
}

pub fn creation(space: HilbertSpace) -> LinearOperator {
    annihilation(space).adjoint()
}

/// Photon number `n̂ = â†â`.
pub fn number(space: HilbertSpace) -> LinearOperator {
    let fock = space.fock_dim();
    LinearOperator::diagonal(space, |idx| Complex64::new((idx % fock) as f64, 0.0))
        .with_symmetry_unchecked(Symmetry::Hermitian)
}

/// Generalized Pauli operator `σ̂_{k,j} = |k⟩⟨j|` on the detector, identity on
/// the field. Levels are 1-based.
pub fn sigma(space: HilbertSpace, k: usize, j: usize) -> Result<LinearOperator> {
    space.check_level(k)?;
    space.check_level(j)?;
    let fock = space.fock_dim();
    let triplets = (0..fock).map(|n| ((k - 1) * fock + n, (j - 1) * fock + n, ONE));
    let op = LinearOperator::from_triplets(space, triplets.collect::<Vec<_>>())?;
    Ok(if k == j {
        op.with_symmetry_unchecked(Symmetry::Hermitian)
    } else {
        op
    })
}

/// Projector `σ̂_j = |j⟩⟨j|`.
pub fn projector(space: HilbertSpace, j: usize) -> Result<LinearOperator> {
    sigma(space, j, j)
}

/// Total-excitation parity `(-1)^{n̂ + Σ_j (j-1) σ̂_j}`.
pub fn excitation_parity(space: HilbertSpace) -> LinearOperator {
    LinearOperator::diagonal(space, |idx| {
        let (j, n) = space.decompose(idx);
        if (n + j - 1) % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    })
    .with_symmetry_unchecked(Symmetry::Hermitian)
}
