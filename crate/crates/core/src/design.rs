//! Design matrices and regression instances.
//!
//! Generated designs are column-normalized so that `(X^T X)_jj = n`.
//! Columns are rescaled only; nothing is centered.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simcore::{fill_normal, Matrix, Seed, Vector};

/// Relative tolerance of the normalization invariant.
pub const NORM_TOL: f64 = 1e-9;

/// How a design matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Equicorrelated { rho: f64 },
    Expanded { eta: f64, base_p: usize },
    Clustered { nu: f64 },
    External,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Equicorrelated { rho } => write!(f, "equicorrelated({rho})"),
            Provenance::Expanded { eta, base_p } => write!(f, "expanded({eta};{base_p})"),
            Provenance::Clustered { nu } => write!(f, "clustered({nu})"),
            Provenance::External => write!(f, "external"),
        }
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "external" {
            return Ok(Provenance::External);
        }
        let open = s.find('(').ok_or_else(|| format!("bad provenance '{s}'"))?;
        let inner = s[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| format!("bad provenance '{s}'"))?;
        let num = |t: &str| -> std::result::Result<f64, String> {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("bad number '{t}' in provenance"))
        };
        match &s[..open] {
            "equicorrelated" => Ok(Provenance::Equicorrelated { rho: num(inner)? }),
            "clustered" => Ok(Provenance::Clustered { nu: num(inner)? }),
            "expanded" => {
                let (eta, base_p) = inner
                    .split_once(';')
                    .ok_or_else(|| format!("bad provenance '{s}'"))?;
                let base_p = base_p
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| format!("bad base_p '{base_p}'"))?;
                Ok(Provenance::Expanded {
                    eta: num(eta)?,
                    base_p,
                })
            }
            other => Err(format!("unknown provenance kind '{other}'")),
        }
    }
}

/// An `n x p` design with provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    x: Matrix,
    normalized: bool,
    provenance: Provenance,
}

impl DesignMatrix {
    /// Wraps an external matrix. `normalized` is derived from the data.
    pub fn external(x: Matrix) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::EmptyInput("design matrix"));
        }
        let normalized = is_root_n_normalized(&x);
        Ok(DesignMatrix {
            x,
            normalized,
            provenance: Provenance::External,
        })
    }

    /// Rescales every column of `x` to Euclidean norm `sqrt(n)`.
    pub fn normalized_from(mut x: Matrix, provenance: Provenance) -> Result<Self> {
        let target = (x.rows() as f64).sqrt();
        rescale_columns(&mut x, target)?;
        Ok(DesignMatrix {
            x,
            normalized: true,
            provenance,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// True when every column has squared norm `n` (within `1e-9 n`).
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Copy with every column rescaled to Euclidean norm `target`.
    /// The `normalized` flag is recomputed for the new scale.
    pub fn with_column_norm(&self, target: f64) -> Result<Self> {
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "column norm target {target}"
            )));
        }
        let mut x = self.x.clone();
        rescale_columns(&mut x, target)?;
        let normalized = is_root_n_normalized(&x);
        Ok(DesignMatrix {
            x,
            normalized,
            provenance: self.provenance,
        })
    }

    /// Common column norm, if all columns share one (relative `1e-9`).
    pub fn common_column_norm(&self) -> Option<f64> {
        let norms = self.x.column_norms_sq();
        let first = norms[0];
        if first <= 0.0 {
            return None;
        }
        norms
            .iter()
            .all(|v| (v - first).abs() <= NORM_TOL * first)
            .then(|| first.sqrt())
    }

    /// CSV export: a `# n,p,normalized,provenance` header line followed by
    /// one matrix row per line, each entry with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# {},{},{},{}",
            self.n(),
            self.p(),
            self.normalized,
            self.provenance
        )?;
        let mut line = String::new();
        for i in 0..self.n() {
            line.clear();
            for (j, v) in self.x.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format_f64(*v));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    /// Parses the format written by [`DesignMatrix::write_csv`]. A header
    /// that claims normalization must agree with the data.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty design file"))?;
        let header = header
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::parse(1, "header must start with '#'"))?;
        let fields: Vec<&str> = header.splitn(4, ',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(1, "header needs n,p,normalized,provenance"));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(1, format!("bad n '{}'", fields[0])))?;
        let p: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(1, format!("bad p '{}'", fields[1])))?;
        let claimed: bool = fields[2]
            .parse()
            .map_err(|_| Error::parse(1, format!("bad normalized flag '{}'", fields[2])))?;
        let provenance: Provenance = fields[3].parse().map_err(|e| Error::parse(1, e))?;
        if n == 0 || p == 0 {
            return Err(Error::parse(1, "n and p must be positive"));
        }
        let total = n
            .checked_mul(p)
            .filter(|t| *t <= text.len())
            .ok_or_else(|| Error::parse(1, "n*p exceeds file contents"))?;
        let mut data = Vec::with_capacity(total);
        let mut rows = 0;
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if rows == n {
                return Err(Error::parse(lineno, format!("more than {n} rows")));
            }
            let before = data.len();
            for tok in line.split(',') {
                data.push(parse_f64(tok, lineno)?);
            }
            if data.len() - before != p {
                return Err(Error::parse(
                    lineno,
                    format!("expected {p} values, found {}", data.len() - before),
                ));
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::parse(
                text.lines().count().max(1),
                format!("expected {n} rows, found {rows}"),
            ));
        }
        let x = Matrix::new(n, p, data)?;
        let normalized = is_root_n_normalized(&x);
        if claimed && !normalized {
            return Err(Error::parse(1, "header claims normalization but column norms differ from sqrt(n)"));
        }
        Ok(DesignMatrix {
            x,
            normalized,
            provenance,
        })
    }
}

/// Shortest-exact formatting with 17 significant digits.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn parse_f64(tok: &str, lineno: usize) -> Result<f64> {
    let tok = tok.trim();
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(lineno, format!("invalid number '{tok}'")))
}

/// Parses a vector file: one value per non-empty, non-`#` line.
pub fn parse_vector_csv(text: &str) -> Result<Vector> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_f64(line, idx + 1)?);
    }
    if out.is_empty() {
        return Err(Error::parse(1, "no values"));
    }
    Vector::new(out)
}

pub fn vector_to_csv(v: &[f64]) -> String {
    let mut s = String::with_capacity(v.len() * 24);
    for x in v {
        s.push_str(&format_f64(*x));
        s.push('\n');
    }
    s
}

fn is_root_n_normalized(x: &Matrix) -> bool {
    let n = x.rows() as f64;
    x.column_norms_sq()
        .iter()
        .all(|v| (v - n).abs() <= NORM_TOL * n)
}

fn rescale_columns(x: &mut Matrix, target: f64) -> Result<()> {
    for (j, sq) in x.column_norms_sq().into_iter().enumerate() {
        if !(sq > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "column {j} is zero and cannot be normalized"
            )));
        }
        x.scale_column(j, target / sq.sqrt());
    }
    Ok(())
}

/// A draw from `Y = X beta0 + sigma * eps`.
#[derive(Debug, Clone)]
pub struct RegressionInstance {
    pub design: DesignMatrix,
    pub beta0: Vector,
    pub sigma: f64,
    pub eps: Vector,
    pub y: Vector,
    pub s: usize,
}

impl RegressionInstance {
    /// Builds the instance for a given noise vector.
    pub fn from_noise(design: DesignMatrix, beta0: Vector, sigma: f64, eps: Vector) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma = {sigma}")));
        }
        if beta0.len() != design.p() || eps.len() != design.n() {
            return Err(Error::DimensionMismatch("instance shapes".into()));
        }
        let signal = design.matrix().matvec(&beta0)?;
        let y = Vector::new(
            signal
                .iter()
                .zip(eps.iter())
                .map(|(m, e)| m + sigma * e)
                .collect(),
        )?;
        let s = beta0.iter().filter(|v| **v != 0.0).count();
        Ok(RegressionInstance {
            design,
            beta0,
            sigma,
            eps,
            y,
            s,
        })
    }
}

/// Rows i.i.d. `N(0, (1-rho) I + rho 11^T)`, via the one-factor form
/// `row_i = sqrt(1-rho) z_i + sqrt(rho) z0_i`, then normalized.
pub fn gen_equicorrelated(n: usize, p: usize, rho: f64, seed: Seed) -> Result<DesignMatrix> {
    if n == 0 || p == 0 {
        return Err(Error::EmptyInput("design dimensions"));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho = {rho} not in [0,1)")));
    }
    let mut rng = seed.rng();
    let own = (1.0 - rho).sqrt();
    let shared = rho.sqrt();
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        let z0: f64 = StandardNormal.sample(&mut rng);
        for z in fill_normal(&mut rng, p) {
            data.push(own * z + shared * z0);
        }
    }
    DesignMatrix::normalized_from(Matrix::new(n, p, data)?, Provenance::Equicorrelated { rho })
}

/// Adds, for each column `X^(j)`, `p-1` columns `X^(j) + eta N` and
/// renormalizes. Column order: the originals, then the perturbations of
/// column 1, then of column 2, and so on.
///
/// The base must have a common column norm; the output keeps it.
pub fn expand_design(base: &DesignMatrix, eta: f64, seed: Seed) -> Result<DesignMatrix> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must be > 0")));
    }
    let target = base.common_column_norm().ok_or_else(|| {
        Error::InvalidParameter("expand_design needs a base with equal column norms".into())
    })?;
    let n = base.n();
    let p = base.p();
    let out_p = p * p;
    let mut rng = seed.rng();
    let base_cols = base.matrix().columns();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(out_p);
    cols.extend(base_cols.iter().cloned());
    for parent in &base_cols {
        for _ in 1..p {
            let noise = fill_normal(&mut rng, n);
            cols.push(parent.iter().zip(&noise).map(|(x, z)| x + eta * z).collect());
        }
    }
    let mut x = Matrix::from_columns(&cols)?;
    rescale_columns(&mut x, target)?;
    let normalized = is_root_n_normalized(&x);
    Ok(DesignMatrix {
        x,
        normalized,
        provenance: Provenance::Expanded { eta, base_p: p },
    })
}

/// First column the all-ones vector (norm `sqrt(n)`), the other `p-1`
/// columns `X^(1) + nu N`, then normalized.
pub fn gen_clustered(n: usize, p: usize, nu: f64, seed: Seed) -> Result<DesignMatrix> {
    if n == 0 || p == 0 {
        return Err(Error::EmptyInput("design dimensions"));
    }
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be >= 0")));
    }
    let mut rng = seed.rng();
    let mut cols = Vec::with_capacity(p);
    cols.push(vec![1.0; n]);
    for _ in 1..p {
        let noise = fill_normal(&mut rng, n);
        cols.push(noise.iter().map(|z| 1.0 + nu * z).collect::<Vec<_>>());
    }
    DesignMatrix::normalized_from(Matrix::from_columns(&cols)?, Provenance::Clustered { nu })
}

/// `(1,…,1,0,…,0)` with `s` leading ones.
pub fn make_beta0(p: usize, s: usize) -> Result<Vector> {
    if s > p {
        return Err(Error::InvalidParameter(format!("s = {s} > p = {p}")));
    }
    let mut v = vec![0.0; p];
    v[..s].iter_mut().for_each(|b| *b = 1.0);
    Vector::new(v)
}

/// Draws `eps` and forms `Y = X beta0 + sigma eps`. For expanded designs
/// the signal lives on the original columns, which come first.
pub fn gen_instance(design: &DesignMatrix, s: usize, sigma: f64, seed: Seed) -> Result<RegressionInstance> {
    let signal_cols = match design.provenance() {
        Provenance::Expanded { base_p, .. } => base_p,
        _ => design.p(),
    };
    if s > signal_cols {
        return Err(Error::InvalidParameter(format!(
            "s = {s} exceeds the {signal_cols} signal columns"
        )));
    }
    let beta0 = make_beta0(design.p(), s)?;
    let eps = Vector::from_vec_unchecked(fill_normal(&mut seed.rng(), design.n()));
    RegressionInstance::from_noise(design.clone(), beta0, sigma, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_normalized(d: &DesignMatrix) {
        let n = d.n() as f64;
        for sq in d.matrix().column_norms_sq() {
            assert!((sq - n).abs() <= 1e-9 * n, "{sq} vs {n}");
        }
        assert!(d.is_normalized());
    }

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let ma = a.iter().sum::<f64>() / a.len() as f64;
        let mb = b.iter().sum::<f64>() / b.len() as f64;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            sab += (x - ma) * (y - mb);
            saa += (x - ma).powi(2);
            sbb += (y - mb).powi(2);
        }
        sab / (saa * sbb).sqrt()
    }

    #[test]
    fn equicorrelated_is_normalized() {
        for (i, rho) in [0.0, 0.5, 0.9, 0.99].into_iter().enumerate() {
            let d = gen_equicorrelated(20, 40, rho, Seed(i as u64)).unwrap();
            assert_normalized(&d);
        }
    }

    #[test]
    fn uncorrelated_gram_offdiagonal_mean_is_small() {
        let mut total = 0.0;
        let mut count = 0usize;
        for r in 0..10_000u64 {
            let d = gen_equicorrelated(20, 5, 0.0, Seed(100).derive(r)).unwrap();
            let cols = d.matrix().columns();
            for j in 0..5 {
                for k in (j + 1)..5 {
                    total += crate::simcore::dot(&cols[j], &cols[k]) / 20.0;
                    count += 1;
                }
            }
        }
        let mean = total / count as f64;
        assert!(mean.abs() <= 0.02, "{mean}");
    }

    #[test]
    fn equicorrelated_pair_correlation() {
        let mut acc = 0.0;
        for r in 0..1000u64 {
            let d = gen_equicorrelated(200, 2, 0.9, Seed(7).derive(r)).unwrap();
            let cols = d.matrix().columns();
            acc += corr(&cols[0], &cols[1]);
        }
        let mean = acc / 1000.0;
        assert!((0.85..=0.95).contains(&mean), "{mean}");
    }

    #[test]
    fn equicorrelated_rejects_bad_params() {
        assert!(gen_equicorrelated(20, 40, 1.0, Seed(1)).is_err());
        assert!(gen_equicorrelated(20, 40, -0.1, Seed(1)).is_err());
        assert!(matches!(
            gen_equicorrelated(0, 40, 0.5, Seed(1)),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn expand_shape_and_order() {
        let base = gen_equicorrelated(20, 40, 0.0, Seed(3)).unwrap();
        let e = expand_design(&base, 0.1, Seed(4)).unwrap();
        assert_eq!(e.p(), 1600);
        assert_normalized(&e);
        assert_eq!(
            e.provenance(),
            Provenance::Expanded {
                eta: 0.1,
                base_p: 40
            }
        );
        for j in 0..40 {
            let a = e.matrix().column(j);
            let b = base.matrix().column(j);
            assert!(a.sub(&b).max_abs() <= 1e-12);
        }
        assert!(expand_design(&base, 0.0, Seed(4)).is_err());
    }

    #[test]
    fn tiny_eta_copies_parents() {
        let base = gen_equicorrelated(10, 4, 0.0, Seed(5)).unwrap();
        let e = expand_design(&base, 1e-12, Seed(6)).unwrap();
        for j in 0..4 {
            let parent = base.matrix().column(j);
            for k in 0..3 {
                let child = e.matrix().column(4 + j * 3 + k);
                assert!(child.sub(&parent).norm() <= 1e-6 * parent.norm());
            }
        }
    }

    #[test]
    fn larger_eta_lowers_within_group_correlation() {
        let within = |eta: f64, seed: Seed| {
            let base = gen_equicorrelated(20, 40, 0.0, seed).unwrap();
            let e = expand_design(&base, eta, seed.derive(1)).unwrap();
            let m = e.matrix();
            let mut acc = 0.0;
            for j in 0..40 {
                let parent = m.column(j);
                for k in 0..39 {
                    acc += parent.dot(&m.column(40 + j * 39 + k)) / 20.0;
                }
            }
            acc / (40.0 * 39.0)
        };
        let (mut small, mut large) = (0.0, 0.0);
        for r in 0..100u64 {
            small += within(0.001, Seed(11).derive(r));
            large += within(0.1, Seed(11).derive(r));
        }
        assert!(large < small, "{large} !< {small}");
    }

    #[test]
    fn clustered_designs() {
        let d = gen_clustered(12, 6, 0.0, Seed(1)).unwrap();
        assert_normalized(&d);
        let first = d.matrix().column(0);
        for j in 1..6 {
            assert!(d.matrix().column(j).sub(&first).max_abs() == 0.0);
        }
        let nu = 1.0 / (8f64.sqrt() * 50.0);
        let d = gen_clustered(50, 2500, nu, Seed(2)).unwrap();
        assert_eq!(d.p(), 2500);
        assert_normalized(&d);
    }

    #[test]
    fn beta0_examples() {
        assert_eq!(&*make_beta0(5, 2).unwrap(), &[1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(&*make_beta0(5, 0).unwrap(), &[0.0; 5]);
        assert_eq!(&*make_beta0(3, 3).unwrap(), &[1.0; 3]);
        assert!(make_beta0(3, 4).is_err());
    }

    #[test]
    fn instance_model_holds() {
        let d = gen_equicorrelated(20, 40, 0.3, Seed(8)).unwrap();
        let inst = gen_instance(&d, 4, 0.0, Seed(9)).unwrap();
        let xb = d.matrix().matvec(&inst.beta0).unwrap();
        assert_eq!(inst.y, xb);
        assert_eq!(inst.s, 4);

        let inst = gen_instance(&d, 0, 1.0, Seed(9)).unwrap();
        assert_eq!(inst.y, inst.eps);

        let inst = gen_instance(&d, 4, 1.0, Seed(10)).unwrap();
        let xb = d.matrix().matvec(&inst.beta0).unwrap();
        for i in 0..20 {
            assert!((inst.y[i] - xb[i] - inst.eps[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn expanded_instance_signal_on_originals() {
        let base = gen_equicorrelated(10, 5, 0.0, Seed(1)).unwrap();
        let e = expand_design(&base, 0.1, Seed(2)).unwrap();
        let inst = gen_instance(&e, 3, 1.0, Seed(3)).unwrap();
        assert_eq!(inst.beta0.support(), vec![0, 1, 2]);
        assert!(gen_instance(&e, 6, 1.0, Seed(3)).is_err());
    }

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let d = gen_equicorrelated(6, 4, 0.9, Seed(13)).unwrap();
        let text = d.to_csv_string();
        assert!(text.starts_with("# 6,4,true,equicorrelated(0.9)\n"));
        let back = DesignMatrix::parse_csv(&text).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let bad = "# 2,2,false,external\n1.0,2.0\n3.0,abc\n";
        match DesignMatrix::parse_csv(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let short = "# 2,2,false,external\n1.0,2.0\n";
        assert!(DesignMatrix::parse_csv(short).is_err());
        let lying = "# 1,2,true,external\n1.0,2.0\n";
        assert!(DesignMatrix::parse_csv(lying).is_err());
        assert!(DesignMatrix::parse_csv("").is_err());
    }

    #[test]
    fn provenance_roundtrip() {
        for p in [
            Provenance::Equicorrelated { rho: 0.25 },
            Provenance::Expanded {
                eta: 0.001,
                base_p: 40,
            },
            Provenance::Clustered { nu: 0.0 },
            Provenance::External,
        ] {
            assert_eq!(p.to_string().parse::<Provenance>().unwrap(), p);
        }
    }
}
