use crate::element::Element;
use crate::error::{Error, Result};

/// Dense row-major `rows x d` matrix. Row `i` is `data[i*d .. (i+1)*d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix<T> {
    rows: usize,
    d: usize,
    data: Vec<T>,
}

impl<T: Element> FeatureMatrix<T> {
    pub fn zeros(rows: usize, d: usize) -> Self {
        Self::filled(rows, d, T::zero())
    }

    pub fn filled(rows: usize, d: usize, value: T) -> Self {
        FeatureMatrix {
            rows,
            d,
            data: vec![value; rows * d],
        }
    }

    pub fn from_vec(rows: usize, d: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * d {
            return Err(Error::LengthMismatch {
                expected: rows * d,
                got: data.len(),
            });
        }
        Ok(FeatureMatrix { rows, d, data })
    }

    /// Builds a matrix from nested rows; all rows must share one length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(FeatureMatrix {
            rows: rows.len(),
            d,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.d..(i + 1) * self.d]
    }

    /// Copies the selected rows, in order, into a new matrix.
    pub fn gather_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: idx.len(),
            d: self.d,
            data,
        }
    }

    /// Order-sensitive FNV-1a hash over the element bit patterns.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for word in [self.rows as u64, self.d as u64]
            .into_iter()
            .chain(self.data.iter().map(|x| x.to_bits_u64()))
        {
            for b in word.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }

    /// Same shape and identical bit patterns.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.d == other.d
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits_u64() == b.to_bits_u64())
    }

    pub fn map<U: Element>(&self, f: impl Fn(T) -> U) -> FeatureMatrix<U> {
        FeatureMatrix {
            rows: self.rows,
            d: self.d,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_layout() {
        let m = FeatureMatrix::from_rows(&[[1i64, 2], [3, 4], [5, 6]]).unwrap();
        assert_eq!(m.rows(), 3);
        assert_eq!(m.dim(), 2);
        assert_eq!(m.row(1), &[3, 4]);
        assert_eq!(m.gather_rows(&[2, 0]).data(), &[5, 6, 1, 2]);
    }

    #[test]
    fn rejects_ragged_rows() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0], vec![1.0, 2.0]];
        assert!(FeatureMatrix::from_rows(&rows).is_err());
        assert!(FeatureMatrix::<f64>::from_vec(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn hash_sees_signed_zero() {
        let a = FeatureMatrix::from_vec(1, 1, vec![0.0f64]).unwrap();
        let b = FeatureMatrix::from_vec(1, 1, vec![-0.0f64]).unwrap();
        assert_eq!(a, b);
        assert!(!a.bitwise_eq(&b));
        assert_ne!(a.content_hash(), b.content_hash());
    }
}
