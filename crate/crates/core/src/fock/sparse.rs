use num_complex::Complex64;

/// Real sparse operator in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseOp {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_start = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry present") += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_start[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            row_start[r + 1] += row_start[r];
        }
        Self {
            dim,
            row_start,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_start[r]..self.row_start[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn transpose(&self) -> Self {
        let triplets = (0..self.dim)
            .flat_map(|r| self.row(r).map(move |(c, v)| (c, r, v)))
            .collect();
        Self::from_triplets(self.dim, triplets)
    }

    /// `self - other`
    pub fn sub(&self, other: &SparseOp) -> Self {
        assert_eq!(self.dim, other.dim);
        let triplets = (0..self.dim)
            .flat_map(|r| {
                self.row(r)
                    .map(move |(c, v)| (r, c, v))
                    .chain(other.row(r).map(move |(c, v)| (r, c, -v)))
            })
            .collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            vals: self.vals.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// Largest absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.dim];
        for (c, v) in self.cols.iter().zip(&self.vals) {
            sums[*c] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn apply_complex(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).map(|(c, v)| x[c] * v).sum();
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }
}
