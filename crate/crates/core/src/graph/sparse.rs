/// Compressed sparse row matrix for one relation.
///
/// Canonical form: column indices strictly increasing within each row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseAdjacency {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseAdjacency {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            offsets: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Build canonical CSR from `(row, col, value)` triplets. Duplicate
    /// coordinates are merged by summing their values; the number of merged
    /// entries is returned alongside the matrix.
    ///
    /// Panics if a coordinate is out of range.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(u32, u32, f64)>,
    ) -> (Self, usize) {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut offsets = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut merged = 0;
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in triplets {
            assert!(
                (r as usize) < rows && (c as usize) < cols,
                "triplet ({r}, {c}) outside {rows}x{cols}"
            );
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                merged += 1;
                continue;
            }
            last = Some((r, c));
            offsets[r as usize + 1] += 1;
            indices.push(c);
            values.push(v);
        }
        for i in 0..rows {
            offsets[i + 1] += offsets[i];
        }
        (
            Self {
                rows,
                cols,
                offsets,
                indices,
                values,
            },
            merged,
        )
    }

    /// Unit-valued matrix from an edge list.
    pub fn from_edges(rows: usize, cols: usize, edges: &[(u32, u32)]) -> (Self, usize) {
        Self::from_triplets(rows, cols, edges.iter().map(|&(r, c)| (r, c, 1.0)).collect())
    }

    /// Assemble from raw CSR arrays without any checking. [`super::validate`]
    /// reports whatever invariants the parts violate.
    pub fn from_raw_parts(
        rows: usize,
        cols: usize,
        offsets: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
    ) -> Self {
        Self {
            rows,
            cols,
            offsets,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    /// Iterate `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u32, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (c, v) = self.row(r);
            c.iter().zip(v).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.cols {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut next = counts;
        let mut indices = vec![0u32; self.nnz()];
        let mut values = vec![0f64; self.nnz()];
        // rows are visited in ascending order, so each output row stays sorted
        for (r, c, v) in self.iter() {
            let slot = &mut next[c as usize];
            indices[*slot] = r as u32;
            values[*slot] = v;
            *slot += 1;
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            offsets,
            indices,
            values,
        }
    }

    /// Dense row-major copy, for small matrices.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for (r, c, v) in self.iter() {
            out[r * self.cols + c as usize] += v;
        }
        out
    }
}
