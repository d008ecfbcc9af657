use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::SdeError;

const MAGIC: &[u8; 4] = b"PENS";
const VERSION: u32 = 1;

/// Immutable set of sampled paths on a shared time grid.
///
/// `hit_zero_at[i]` is the first recorded-grid time at which path `i` hit
/// zero (affine, BESQ, OU) or left the solution domain (Bernstein). Bernstein
/// paths are frozen after that time; other processes keep evolving.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathEnsemble {
    times: Vec<f64>,
    values: Vec<f64>,
    n_paths: usize,
    hit_zero_at: Vec<Option<f64>>,
    seed: u64,
}

impl PathEnsemble {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        hit_zero_at: Vec<Option<f64>>,
        seed: u64,
    ) -> Result<Self, SdeError> {
        let n_paths = hit_zero_at.len();
        if times.is_empty() || values.len() != n_paths * times.len() {
            return Err(SdeError::BadFormat(format!(
                "{} values for {} paths x {} times",
                values.len(),
                n_paths,
                times.len()
            )));
        }
        Ok(PathEnsemble {
            times,
            values,
            n_paths,
            hit_zero_at,
            seed,
        })
    }

    pub(crate) fn from_rows(times: Vec<f64>, rows: Vec<(Vec<f64>, Option<f64>)>, seed: u64) -> Self {
        let n_paths = rows.len();
        let mut values = Vec::with_capacity(n_paths * times.len());
        let mut hits = Vec::with_capacity(n_paths);
        for (row, hit) in rows {
            debug_assert_eq!(row.len(), times.len());
            values.extend_from_slice(&row);
            hits.push(hit);
        }
        PathEnsemble {
            times,
            values,
            n_paths,
            hit_zero_at: hits,
            seed,
        }
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let n = self.times.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.times.len() + k]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_paths).map(|i| self.value(i, k)).collect()
    }

    pub fn hit_zero_at(&self, i: usize) -> Option<f64> {
        self.hit_zero_at[i]
    }

    pub fn hits(&self) -> &[Option<f64>] {
        &self.hit_zero_at
    }

    /// Fraction of paths with a recorded hit.
    pub fn hit_fraction(&self) -> f64 {
        self.hit_zero_at.iter().filter(|h| h.is_some()).count() as f64 / self.n_paths as f64
    }

    /// Index of the grid time closest to `t`, if within `1e-9` relative.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        let (k, d) = self
            .times
            .iter()
            .enumerate()
            .map(|(k, s)| (k, (s - t).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        (d <= 1e-9 * t.abs().max(1.0)).then_some(k)
    }

    /// True while path `i` has not yet hit (strictly before the hit time).
    pub fn alive(&self, i: usize, k: usize) -> bool {
        self.hit_zero_at[i].is_none_or(|h| self.times[k] < h)
    }

    /// Pointwise transform `(t, v) ↦ f(t, v)` keeping hits and seed.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> PathEnsemble {
        let n = self.times.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, v)| f(self.times[idx % n], *v))
            .collect();
        PathEnsemble {
            times: self.times.clone(),
            values,
            n_paths: self.n_paths,
            hit_zero_at: self.hit_zero_at.clone(),
            seed: self.seed,
        }
    }

    /// Copy with the hit times cleared, for processes that continue
    /// through zero (the signed δ = 1 coordinate).
    pub fn without_hits(&self) -> PathEnsemble {
        PathEnsemble {
            hit_zero_at: vec![None; self.n_paths],
            ..self.clone()
        }
    }

    /// Copy with each path held at its last value before the hit time.
    pub fn frozen_at_hits(&self) -> PathEnsemble {
        let mut out = self.clone();
        let n = self.times.len();
        for i in 0..self.n_paths {
            if let Some(h) = self.hit_zero_at[i] {
                let row = &mut out.values[i * n..(i + 1) * n];
                let mut last = row[0];
                for (k, v) in row.iter_mut().enumerate() {
                    if self.times[k] < h {
                        last = *v;
                    } else {
                        *v = last;
                    }
                }
            }
        }
        out
    }

    /// Bitwise equality of every stored number.
    pub fn bit_identical(&self, other: &PathEnsemble) -> bool {
        let same = |a: &[f64], b: &[f64]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        };
        self.seed == other.seed
            && self.n_paths == other.n_paths
            && same(&self.times, &other.times)
            && same(&self.values, &other.values)
            && self.hit_zero_at.len() == other.hit_zero_at.len()
            && self
                .hit_zero_at
                .iter()
                .zip(&other.hit_zero_at)
                .all(|(a, b)| a.map(f64::to_bits) == b.map(f64::to_bits))
    }

    /// Long-format CSV `path_id,t,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "path_id,t,value")?;
        for i in 0..self.n_paths {
            for (k, t) in self.times.iter().enumerate() {
                writeln!(w, "{i},{t},{}", self.value(i, k))?;
            }
        }
        Ok(())
    }

    /// Binary dump, little-endian: magic `PENS`, u32 version, u64 n_paths,
    /// u64 n_times, u64 seed, then `n_times` f64 times, `n_paths·n_times`
    /// f64 values (row-major by path), and `n_paths` f64 hit times (NaN for
    /// none).
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n_paths as u64).to_le_bytes())?;
        w.write_all(&(self.times.len() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * (self.times.len() + self.values.len() + self.n_paths));
        for v in self.times.iter().chain(&self.values) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for h in &self.hit_zero_at {
            buf.extend_from_slice(&h.unwrap_or(f64::NAN).to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, SdeError> {
        let mut head = [0u8; 32];
        r.read_exact(&mut head)?;
        if &head[..4] != MAGIC {
            return Err(SdeError::BadFormat("bad magic".into()));
        }
        let version = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(SdeError::BadFormat(format!("unsupported version {version}")));
        }
        let u = |a: usize| u64::from_le_bytes(head[a..a + 8].try_into().expect("8 bytes"));
        let (n_paths, n_times, seed) = (u(8) as usize, u(16) as usize, u(24));
        let count = n_times
            .checked_mul(n_paths)
            .and_then(|c| c.checked_add(n_times + n_paths))
            .ok_or_else(|| SdeError::BadFormat("dimensions overflow".into()))?;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 8 * count {
            return Err(SdeError::BadFormat(format!(
                "expected {} payload bytes, found {}",
                8 * count,
                body.len()
            )));
        }
        let mut nums = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
        let times: Vec<f64> = nums.by_ref().take(n_times).collect();
        let values: Vec<f64> = nums.by_ref().take(n_times * n_paths).collect();
        let hits = nums.map(|h| (!h.is_nan()).then_some(h)).collect();
        PathEnsemble::new(times, values, hits, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PathEnsemble {
        PathEnsemble::new(
            vec![0.0, 0.5, 1.0],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            vec![None, Some(0.5)],
            42,
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let e = sample();
        let mut buf = Vec::new();
        e.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"PENS");
        assert_eq!(buf.len(), 32 + 8 * (3 + 6 + 2));
        let back = PathEnsemble::read_binary(&buf[..]).unwrap();
        assert!(back.bit_identical(&e));
        assert!(PathEnsemble::read_binary(&buf[..40]).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "path_id,t,value");
        assert_eq!(lines[4], "1,0,4");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn alive_and_freeze() {
        let e = sample();
        assert!(e.alive(1, 0));
        assert!(!e.alive(1, 1));
        assert_eq!(e.frozen_at_hits().path(1), &[4.0, 4.0, 4.0]);
        assert_eq!(e.hit_fraction(), 0.5);
        assert_eq!(e.time_index(0.5), Some(1));
        assert_eq!(e.time_index(0.7), None);
    }
}
