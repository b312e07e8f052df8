//! Dense linear algebra over GF(2) on packed 64-bit words.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    /// Bits packed MSB-first into bytes (bit 0 is the MSB of byte 0).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for i in 0..self.len {
            if self.get(i) {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len.min(bytes.len() * 8) {
            v.set(i, bytes[i / 8] & (0x80 >> (i % 8)) != 0);
        }
        v
    }

    pub fn to_hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Restriction to the given positions, in order.
    pub fn select(&self, positions: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(positions.len());
        for (j, &p) in positions.iter().enumerate() {
            out.set(j, self.get(p));
        }
        out
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "BitVec[{}]({s})", self.len)
    }
}

/// Row-major GF(2) matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{}", self.rows.len(), self.cols)
    }
}

/// Outcome of a failed solve: the equations (row indices) that cannot be
/// satisfied together with the others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inconsistent {
    pub rows: Vec<usize>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVec::zeros(cols); rows],
        }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[BitVec]) -> Self {
        let nrows = columns.first().map_or(0, BitVec::len);
        let mut m = Self::zeros(nrows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), nrows, "ragged columns");
            for i in 0..nrows {
                if col.get(i) {
                    m.rows[i].set(j, true);
                }
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        self.rows[r].set(c, b);
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.rows[r]
    }

    pub fn column(&self, c: usize) -> BitVec {
        let mut v = BitVec::zeros(self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            v.set(i, row.get(c));
        }
        v
    }

    pub fn mul_vec(&self, x: &BitVec) -> BitVec {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        let mut y = BitVec::zeros(self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            y.set(i, row.dot(x));
        }
        y
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(c)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Solves `A x = b` by Gauss-Jordan elimination. Free variables are set
    /// to zero, so the result is deterministic.
    pub fn solve(&self, b: &BitVec) -> Result<BitVec, Inconsistent> {
        assert_eq!(b.len(), self.nrows(), "dimension mismatch");
        let n = self.nrows();
        let mut rows = self.rows.clone();
        let mut rhs = b.clone();
        // Track which original equations were combined into each row.
        let mut provenance: Vec<BitVec> = (0..n).map(|i| BitVec::unit(n, i)).collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..n).find(|&r| rows[r].get(c)) else {
                continue;
            };
            rows.swap(rank, p);
            provenance.swap(rank, p);
            let (bp, br) = (rhs.get(p), rhs.get(rank));
            rhs.set(rank, bp);
            rhs.set(p, br);
            let pivot = rows[rank].clone();
            let pivot_prov = provenance[rank].clone();
            let pivot_rhs = rhs.get(rank);
            for r in 0..n {
                if r != rank && rows[r].get(c) {
                    rows[r].xor_assign(&pivot);
                    provenance[r].xor_assign(&pivot_prov);
                    if pivot_rhs {
                        rhs.flip(r);
                    }
                }
            }
            pivots.push(c);
            rank += 1;
        }
        let bad: Vec<usize> = (rank..n).filter(|&r| rhs.get(r)).collect();
        if !bad.is_empty() {
            let mut culprits: Vec<usize> = bad
                .iter()
                .flat_map(|&r| (0..n).filter(|&i| provenance[r].get(i)).collect::<Vec<_>>())
                .collect();
            culprits.sort_unstable();
            culprits.dedup();
            return Err(Inconsistent { rows: culprits });
        }
        let mut x = BitVec::zeros(self.cols);
        for (r, &c) in pivots.iter().enumerate() {
            x.set(c, rhs.get(r));
        }
        Ok(x)
    }
}
