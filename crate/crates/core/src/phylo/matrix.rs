use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::genotype::{signature_distance, Abstraction, GenotypeSignature};
use super::PhyloError;
use crate::grammar::LudemeTree;

/// Symmetric pairwise distances with a zero diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    pub d: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, d: Vec<Vec<f64>>) -> Result<Self, PhyloError> {
        let m = DistanceMatrix { labels, d };
        m.check()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn check(&self) -> Result<(), PhyloError> {
        let n = self.labels.len();
        let mut seen: Vec<&String> = self.labels.iter().collect();
        seen.sort();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(PhyloError::DuplicateName(w[0].clone()));
        }
        if self.d.len() != n || self.d.iter().any(|r| r.len() != n) {
            return Err(PhyloError::Matrix(format!("expected a {n}x{n} matrix")));
        }
        for i in 0..n {
            if self.d[i][i] != 0.0 {
                return Err(PhyloError::Matrix(format!("non-zero diagonal at {}", self.labels[i])));
            }
            for j in 0..i {
                let v = self.d[i][j];
                if !v.is_finite() || v < 0.0 || v != self.d[j][i] {
                    return Err(PhyloError::Matrix(format!(
                        "entry ({}, {}) is negative or asymmetric",
                        self.labels[i], self.labels[j]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Header row `label,<names...>`, then one row per label holding the
    /// lower triangle including the zero diagonal.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let mut header = vec!["label".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header).expect("writing to memory");
        for (i, label) in self.labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend(self.d[i][..=i].iter().map(|v| v.to_string()));
            w.write_record(&row).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
    }

    pub fn from_csv(text: &str) -> Result<Self, PhyloError> {
        let bad = |m: String| PhyloError::Matrix(m);
        let mut r = csv::ReaderBuilder::new().flexible(true).has_headers(false).from_reader(text.as_bytes());
        let mut rows = r.records();
        let header = rows.next().ok_or_else(|| bad("empty file".into()))?.map_err(|e| bad(e.to_string()))?;
        let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let n = labels.len();
        let mut d = vec![vec![0.0; n]; n];
        for (i, rec) in rows.enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            if i >= n || rec.get(0) != Some(labels[i].as_str()) {
                return Err(bad(format!("row {} does not match the header", i + 1)));
            }
            if rec.len() < i + 1 {
                return Err(bad(format!("row {} is too short", labels[i])));
            }
            for j in 0..i {
                let v: f64 = rec[j + 1].trim().parse().map_err(|_| bad(format!("bad number `{}`", &rec[j + 1])))?;
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        DistanceMatrix::new(labels, d)
    }

    /// Plain aligned table for terminals.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for (i, l) in self.labels.iter().enumerate() {
            let _ = write!(s, "{l:>24}");
            for v in &self.d[i] {
                let _ = write!(s, " {v:.3}");
            }
            s.push('\n');
        }
        s
    }
}

/// Pairwise genotype distances over named trees.
pub fn distance_matrix(corpus: &[(String, LudemeTree)], mode: Abstraction) -> Result<DistanceMatrix, PhyloError> {
    let n = corpus.len();
    let labels: Vec<String> = corpus.iter().map(|(name, _)| name.clone()).collect();
    let sigs: Vec<GenotypeSignature> = corpus.iter().map(|(_, t)| GenotypeSignature::of(t, mode)).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let one = |&(i, j): &(usize, usize)| signature_distance(&sigs[i], &sigs[j]);
    #[cfg(feature = "parallel")]
    let values: Vec<f64> = {
        use rayon::prelude::*;
        pairs.par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<f64> = pairs.iter().map(one).collect();
    let mut d = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        d[i][j] = v;
        d[j][i] = v;
    }
    DistanceMatrix::new(labels, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TIC_TAC_TOE;
    use crate::grammar::parse;

    #[test]
    fn single_game() {
        let m = distance_matrix(&[("T".into(), parse(TIC_TAC_TOE).unwrap())], Abstraction::Categories).unwrap();
        assert_eq!(m.d, vec![vec![0.0]]);
    }

    #[test]
    fn duplicates() {
        let t = parse(TIC_TAC_TOE).unwrap();
        let m = distance_matrix(&[("A".into(), t.clone()), ("B".into(), t.clone())], Abstraction::Categories).unwrap();
        assert_eq!(m.d[0][1], 0.0);
        let err = distance_matrix(&[("A".into(), t.clone()), ("A".into(), t)], Abstraction::Categories).unwrap_err();
        assert!(matches!(err, PhyloError::DuplicateName(n) if n == "A"));
    }

    #[test]
    fn csv_round_trip() {
        let m = DistanceMatrix::new(
            vec!["A".into(), "B, the second".into(), "C".into()],
            vec![vec![0.0, 0.1, 0.25], vec![0.1, 0.0, 1.0 / 3.0], vec![0.25, 1.0 / 3.0, 0.0]],
        )
        .unwrap();
        let text = m.to_csv();
        assert!(text.starts_with("label,A,\"B, the second\",C\nA,0\n"));
        assert_eq!(DistanceMatrix::from_csv(&text).unwrap(), m);
        assert!(DistanceMatrix::from_csv("label,A,B\nA,0\nB,-1,0\n").is_err());
    }
}
