//! Sobol low-discrepancy sequences (unscrambled, 32-bit, Gray-code order).

use crate::error::{Error, Result};
use crate::sobol_table::DIRECTIONS;

const BITS: u32 = 32;

/// Maximum supported dimension.
pub const MAX_DIM: usize = DIRECTIONS.len() + 1;

/// Sobol sequence generator over the unit hypercube.
///
/// Point 0 is the origin; callers that need points in the open cube usually
/// skip it. `skip_to` repositions the stream in O(dim * log n).
#[derive(Clone, Debug)]
pub struct Sobol {
    dim: usize,
    v: Vec<[u32; BITS as usize]>,
    state: Vec<u32>,
    shift: Vec<u32>,
    index: u64,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_digital_shift(dim, &vec![0; dim])
    }

    /// Sequence randomized by a per-dimension digital (XOR) shift; equal
    /// shifts reproduce the same randomization.
    pub fn with_digital_shift(dim: usize, shifts: &[u32]) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::invalid(format!(
                "Sobol dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        if shifts.len() != dim {
            return Err(Error::dims(format!(
                "{} shifts for dimension {dim}",
                shifts.len()
            )));
        }
        let mut v = Vec::with_capacity(dim);
        // first dimension: van der Corput, v_k = 2^(31-k)
        let mut v0 = [0u32; BITS as usize];
        for (k, slot) in v0.iter_mut().enumerate() {
            *slot = 1u32 << (BITS - 1 - k as u32);
        }
        v.push(v0);
        for d in 1..dim {
            let (s, a, m) = DIRECTIONS[d - 1];
            let s = s as usize;
            let mut vd = [0u32; BITS as usize];
            for k in 0..s.min(BITS as usize) {
                vd[k] = m[k] << (BITS - 1 - k as u32);
            }
            for k in s..BITS as usize {
                let mut val = vd[k - s] ^ (vd[k - s] >> s);
                for i in 1..s {
                    if (a >> (s - 1 - i)) & 1 == 1 {
                        val ^= vd[k - i];
                    }
                }
                vd[k] = val;
            }
            v.push(vd);
        }
        Ok(Sobol {
            dim,
            v,
            state: vec![0; dim],
            shift: shifts.to_vec(),
            index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the next point `next_point` would return.
    pub fn position(&self) -> u64 {
        self.index
    }

    /// Jump so the next point returned is point `n` of the sequence. Uses
    /// the Gray-code representation g = n ^ (n >> 1) of the target state.
    pub fn skip_to(&mut self, n: u64) {
        let gray = n ^ (n >> 1);
        for d in 0..self.dim {
            let mut acc = 0u32;
            for k in 0..BITS.min(64) as usize {
                if (gray >> k) & 1 == 1 {
                    acc ^= self.v[d][k];
                }
            }
            self.state[d] = acc;
        }
        self.index = n;
    }

    /// Next point, components in [0, 1).
    pub fn next_point(&mut self) -> Vec<f64> {
        let out: Vec<f64> = self
            .state
            .iter()
            .zip(self.shift.iter())
            .map(|(&s, &sh)| (s ^ sh) as f64 / (1u64 << BITS) as f64)
            .collect();
        // Gray-code update: flip direction ctz(index + 1)
        let c = (self.index + 1).trailing_zeros().min(BITS - 1) as usize;
        for d in 0..self.dim {
            self.state[d] ^= self.v[d][c];
        }
        self.index += 1;
        out
    }

    /// Generate `n` points as row vectors.
    pub fn take_points(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.next_point()).collect()
    }
}
