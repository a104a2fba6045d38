//! Block-diagonal density operators and population vectors in the
//! collective-state basis.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::{self, block_dim, EnsembleParams, IrrepLabel, SpinOp};
use crate::error::{domain, Error, Result};

/// Density operator with one `(2J+1)`-dimensional block per irrep.
///
/// Entry `(i, k)` of block `J` is the coefficient of the collective state
/// `||J, J-i>><<J, J-k||`, which already sums over the irrep copies. The trace
/// is therefore the plain sum of block diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveDensity {
    pub params: EnsembleParams,
    /// Keyed by `2J`.
    pub blocks: BTreeMap<u32, DMatrix<Complex64>>,
}

impl CollectiveDensity {
    /// All-zero blocks for the given irreps (`None` keeps every irrep).
    pub fn zeros(params: EnsembleParams, keep_top: Option<u32>) -> Self {
        let blocks = basis::top_irreps(params.n_spins, keep_top)
            .into_iter()
            .map(|tj| (tj, DMatrix::zeros(block_dim(tj), block_dim(tj))))
            .collect();
        Self { params, blocks }
    }

    /// Pure state inside irrep `two_j`, amplitudes ordered `M = J..-J`.
    pub fn pure(params: EnsembleParams, two_j: u32, amps: &[Complex64]) -> Result<Self> {
        if !basis::irrep_exists(params.n_spins, two_j) {
            return domain(format!("no irrep 2J={two_j} for N={}", params.n_spins));
        }
        if amps.len() != block_dim(two_j) {
            return domain(format!("expected {} amplitudes, got {}", block_dim(two_j), amps.len()));
        }
        let v = DVector::from_column_slice(amps);
        let norm = v.norm();
        if norm < 1e-300 {
            return domain("zero state vector");
        }
        let v = v / Complex64::new(norm, 0.0);
        let mut rho = Self::zeros(params, None);
        rho.blocks.insert(two_j, &v * v.adjoint());
        Ok(rho)
    }

    /// Dicke state `||J, M>>`.
    pub fn dicke(params: EnsembleParams, two_j: u32, two_m: i32) -> Result<Self> {
        let lab = IrrepLabel::new(two_j, two_m)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); block_dim(two_j)];
        amps[lab.index()] = Complex64::new(1.0, 0.0);
        Self::pure(params, two_j, &amps)
    }

    /// All spins up.
    pub fn coherent_up(params: EnsembleParams) -> Self {
        let n = params.n_spins;
        Self::dicke(params, n, n as i32).expect("top state always exists")
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(params: EnsembleParams, p: &PopulationVector) -> Result<Self> {
        if p.n_spins != params.n_spins {
            return domain("population vector belongs to a different ensemble size");
        }
        let mut rho = Self::zeros(params, None);
        for (lab, &v) in p.labels.iter().zip(&p.values) {
            let b = rho.blocks.get_mut(&lab.two_j).expect("label inside ensemble");
            b[(lab.index(), lab.index())] = Complex64::new(v, 0.0);
        }
        Ok(rho)
    }

    pub fn maximally_mixed(params: EnsembleParams) -> Self {
        Self::from_populations(params, &PopulationVector::maximally_mixed(params.n_spins))
            .expect("same ensemble")
    }

    pub fn trace(&self) -> Complex64 {
        self.blocks.values().map(|b| b.trace()).sum()
    }

    pub fn dim(&self) -> usize {
        self.blocks.values().map(|b| b.nrows() * b.nrows()).sum()
    }

    /// Largest `|B - B^†|` entry over all blocks.
    pub fn hermiticity_error(&self) -> f64 {
        self.blocks
            .values()
            .map(|b| (b - b.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm())))
            .fold(0.0, f64::max)
    }

    pub fn min_diagonal(&self) -> f64 {
        self.blocks
            .values()
            .flat_map(|b| (0..b.nrows()).map(move |i| b[(i, i)].re))
            .fold(f64::INFINITY, f64::min)
    }

    /// Check the documented invariants at the given tolerance.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::Numerical(format!("trace {tr} differs from 1")));
        }
        let h = self.hermiticity_error();
        if h > tol {
            return Err(Error::Numerical(format!("blocks not Hermitian (error {h:.3e})")));
        }
        let m = self.min_diagonal();
        if m < -tol {
            return Err(Error::Numerical(format!("negative population {m:.3e}")));
        }
        Ok(())
    }

    /// Diagonal entries as a population vector.
    pub fn populations(&self) -> PopulationVector {
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for (&tj, b) in self.blocks.iter().rev() {
            for i in 0..b.nrows() {
                labels.push(IrrepLabel { two_j: tj, two_m: tj as i32 - 2 * i as i32 });
                values.push(b[(i, i)].re);
            }
        }
        PopulationVector { n_spins: self.params.n_spins, labels, values }
    }

    /// `tr(rho O_1 O_2 ... O_k)` for an ordered operator product.
    pub fn expectation(&self, product: &[SpinOp]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (&tj, b) in &self.blocks {
            let d = b.nrows();
            let mut op = DMatrix::<Complex64>::identity(d, d);
            for &o in product {
                op *= basis::spin_matrix(o, tj);
            }
            total += (b * op).trace();
        }
        total
    }

    /// `<J_axis^k>` (real part; imaginary part vanishes for Hermitian states).
    pub fn moment(&self, axis: SpinOp, k: usize) -> f64 {
        self.expectation(&vec![axis; k]).re
    }

    /// Flatten blocks (largest irrep first, row-major, re/im interleaved).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for b in self.blocks.values().rev() {
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    out.push(b[(r, c)].re);
                    out.push(b[(r, c)].im);
                }
            }
        }
        out
    }

    /// Inverse of [`Self::to_flat`] using this state's block layout.
    pub fn set_from_flat(&mut self, flat: &[f64]) {
        let mut k = 0;
        for b in self.blocks.values_mut().rev() {
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    b[(r, c)] = Complex64::new(flat[k], flat[k + 1]);
                    k += 2;
                }
            }
        }
    }

    /// Write the plain-text snapshot format.
    ///
    /// ```text
    /// N gamma kappa
    /// J=<2J>
    /// re im re im ...      (one line per row)
    /// ```
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {:e} {:e}", self.params.n_spins, self.params.gamma, self.params.kappa)?;
        for (&tj, b) in self.blocks.iter().rev() {
            writeln!(w, "J={tj}")?;
            for r in 0..b.nrows() {
                let row: Vec<String> = (0..b.ncols())
                    .map(|c| format!("{:e} {:e}", b[(r, c)].re, b[(r, c)].im))
                    .collect();
                writeln!(w, "{}", row.join(" "))?;
            }
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().filter(|l| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let header = lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))??;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 {
            return Err(Error::Parse(format!("bad header line '{header}'")));
        }
        let pf = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("'{s}': {e}")));
        let n: u32 = h[0].parse().map_err(|e| Error::Parse(format!("'{}': {e}", h[0])))?;
        let params = EnsembleParams::new(n, pf(h[1])?, pf(h[2])?)?;
        let mut rho = Self::zeros(params, Some(0));
        rho.blocks.clear();
        while let Some(line) = lines.next() {
            let line = line?;
            let tj: u32 = line
                .trim()
                .strip_prefix("J=")
                .ok_or_else(|| Error::Parse(format!("expected block header, got '{line}'")))?
                .parse()
                .map_err(|e| Error::Parse(format!("block header '{line}': {e}")))?;
            if !basis::irrep_exists(n, tj) {
                return Err(Error::Parse(format!("irrep 2J={tj} invalid for N={n}")));
            }
            let d = block_dim(tj);
            let mut b = DMatrix::zeros(d, d);
            for r in 0..d {
                let row = lines.next().ok_or_else(|| Error::Parse("truncated block".into()))??;
                let vals: Vec<f64> = row.split_whitespace().map(pf).collect::<Result<_>>()?;
                if vals.len() != 2 * d {
                    return Err(Error::Parse(format!("row has {} numbers, expected {}", vals.len(), 2 * d)));
                }
                for c in 0..d {
                    b[(r, c)] = Complex64::new(vals[2 * c], vals[2 * c + 1]);
                }
            }
            rho.blocks.insert(tj, b);
        }
        Ok(rho)
    }
}

/// Populations `p_{J,M}` of collective states, largest irrep first and
/// `M` descending within each irrep.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationVector {
    pub n_spins: u32,
    pub labels: Vec<IrrepLabel>,
    pub values: Vec<f64>,
}

impl PopulationVector {
    pub fn labels_for(n: u32) -> Vec<IrrepLabel> {
        let mut labels = Vec::new();
        for tj in basis::irreps(n) {
            for i in 0..block_dim(tj) {
                labels.push(IrrepLabel { two_j: tj, two_m: tj as i32 - 2 * i as i32 });
            }
        }
        labels
    }

    pub fn zeros(n: u32) -> Self {
        let labels = Self::labels_for(n);
        let values = vec![0.0; labels.len()];
        Self { n_spins: n, labels, values }
    }

    /// `p = 1` on the fully polarized state.
    pub fn coherent_up(n: u32) -> Self {
        let mut p = Self::zeros(n);
        p.values[0] = 1.0;
        p
    }

    /// `p_{J,M} = d_N^J / 2^N`.
    pub fn maximally_mixed(n: u32) -> Self {
        let mut p = Self::zeros(n);
        let ln2n = n as f64 * std::f64::consts::LN_2;
        for (lab, v) in p.labels.iter().zip(p.values.iter_mut()) {
            *v = (basis::ln_degeneracy(n, lab.two_j) - ln2n).exp();
        }
        p
    }

    pub fn get(&self, two_j: u32, two_m: i32) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l.two_j == two_j && l.two_m == two_m)
            .map(|i| self.values[i])
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `two_j,two_m,p`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["two_j", "two_m", "p"])?;
        for (l, v) in self.labels.iter().zip(&self.values) {
            wr.write_record([l.two_j.to_string(), l.two_m.to_string(), format!("{v:e}")])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(n: u32, r: R) -> Result<Self> {
        let mut p = Self::zeros(n);
        let mut rd = csv::Reader::from_reader(r);
        for rec in rd.records() {
            let rec = rec?;
            let parse_err = |s: &str| Error::Parse(format!("bad CSV field '{s}'"));
            let tj: u32 = rec[0].parse().map_err(|_| parse_err(&rec[0]))?;
            let tm: i32 = rec[1].parse().map_err(|_| parse_err(&rec[1]))?;
            let v: f64 = rec[2].parse().map_err(|_| parse_err(&rec[2]))?;
            let i = p
                .labels
                .iter()
                .position(|l| l.two_j == tj && l.two_m == tm)
                .ok_or_else(|| Error::Parse(format!("label ({tj},{tm}) not in ensemble")))?;
            p.values[i] = v;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32) -> EnsembleParams {
        EnsembleParams::new(n, 1.0, 0.0).unwrap()
    }

    #[test]
    fn coherent_state_moments() {
        let rho = CollectiveDensity::coherent_up(params(10));
        assert!((rho.moment(SpinOp::Z, 1) - 5.0).abs() < 1e-12);
        assert!((rho.moment(SpinOp::X, 2) - 2.5).abs() < 1e-12);
        assert!(rho.moment(SpinOp::Y, 1).abs() < 1e-12);
        rho.validate(1e-12).unwrap();
    }

    #[test]
    fn dicke_second_moment() {
        for (tj, tm) in [(6u32, 2i32), (4, -2), (3, 1), (2, 0)] {
            let n = if tj % 2 == 0 { 6 } else { 5 };
            let rho = CollectiveDensity::dicke(params(n), tj, tm).unwrap();
            let j = tj as f64 / 2.0;
            let m = tm as f64 / 2.0;
            let want = (j * (j + 1.0) - m * m) / 2.0;
            assert!((rho.moment(SpinOp::X, 2) - want).abs() < 1e-12);
            assert!((rho.moment(SpinOp::Y, 2) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_is_normalized() {
        for n in [1u32, 2, 7, 40] {
            let p = PopulationVector::maximally_mixed(n);
            assert!((p.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn text_round_trip() {
        let amps: Vec<Complex64> = (0..5).map(|i| Complex64::new(i as f64 + 1.0, 0.5 * i as f64)).collect();
        let rho = CollectiveDensity::pure(params(4), 4, &amps).unwrap();
        let mut buf = Vec::new();
        rho.write_text(&mut buf).unwrap();
        let back = CollectiveDensity::read_text(&buf[..]).unwrap();
        let a = rho.to_flat();
        let b = back.to_flat();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_round_trip() {
        let p = PopulationVector::maximally_mixed(5);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("two_j,two_m,p"));
        let back = PopulationVector::read_csv(5, &buf[..]).unwrap();
        assert!(back.max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn flat_round_trip() {
        let mut rho = CollectiveDensity::maximally_mixed(params(3));
        let flat = rho.to_flat();
        rho.set_from_flat(&flat);
        assert_eq!(rho.to_flat(), flat);
    }
}
