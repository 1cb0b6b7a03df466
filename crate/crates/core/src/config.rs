//! Model parameters and the hyperedge composition matrix.
//!
//! A hyperedge of size `d` belongs to a community when strictly more than
//! half of its members sit there, so every per-type table here is indexed by
//! `(c, d)` with `d / 2 < c <= d`.

use std::fmt;

use serde::Serialize;

/// Absolute tolerance for probability vectors (`q` and the rows of `w`).
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Smallest admissible majority count for edges of size `d`.
#[inline]
pub fn min_majority(d: usize) -> usize {
    d / 2 + 1
}

/// Dense storage for values indexed by `(c, d)`, `1 <= d <= L`,
/// `d / 2 < c <= d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangularTable {
    max_size: usize,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl TriangularTable {
    pub fn filled(max_size: usize, mut value: impl FnMut(usize, usize) -> f64) -> Self {
        let mut offsets = Vec::with_capacity(max_size + 2);
        let mut values = Vec::new();
        // offsets[d] is the start of row d; offsets[0] is unused.
        offsets.push(0);
        for d in 1..=max_size {
            offsets.push(values.len());
            for c in min_majority(d)..=d {
                values.push(value(c, d));
            }
        }
        offsets.push(values.len());
        Self {
            max_size,
            offsets,
            values,
        }
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Entry `(c, d)`; `None` outside the admissible triangle.
    pub fn get(&self, c: usize, d: usize) -> Option<f64> {
        if d == 0 || d > self.max_size || c < min_majority(d) || c > d {
            return None;
        }
        Some(self.values[self.offsets[d] + c - min_majority(d)])
    }

    /// Row `d` as a slice ordered by increasing `c`.
    pub fn row(&self, d: usize) -> &[f64] {
        &self.values[self.offsets[d]..self.offsets[d + 1]]
    }

    /// Iterates `(c, d, value)` over the whole triangle.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (1..=self.max_size).flat_map(move |d| {
            self.row(d)
                .iter()
                .enumerate()
                .map(move |(k, &v)| (min_majority(d) + k, d, v))
        })
    }
}

/// The three standard hyperedge composition models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightModel {
    Majority,
    Linear,
    Strict,
}

impl std::str::FromStr for WeightModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "majority" => Ok(Self::Majority),
            "linear" => Ok(Self::Linear),
            "strict" => Ok(Self::Strict),
            other => Err(format!("unknown weight model `{other}`")),
        }
    }
}

impl fmt::Display for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Majority => "majority",
            Self::Linear => "linear",
            Self::Strict => "strict",
        })
    }
}

/// `w[c, d]`: fraction of community hyperedges of size `d` that have exactly
/// `c` members in their own community. Every row sums to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightMatrix {
    table: TriangularTable,
}

impl WeightMatrix {
    pub fn standard(model: WeightModel, max_size: usize) -> Self {
        let table = TriangularTable::filled(max_size, |c, d| match model {
            WeightModel::Majority => 1.0 / d.div_ceil(2) as f64,
            WeightModel::Linear => (2 * c) as f64 / ((d + d / 2 + 1) * d.div_ceil(2)) as f64,
            WeightModel::Strict => {
                if c == d {
                    1.0
                } else {
                    0.0
                }
            }
        });
        Self { table }
    }

    /// Builds a matrix from explicit rows; row `k` holds `w[c, k + 1]` for
    /// increasing `c`. Rows within [`SUM_TOLERANCE`] of one are renormalized.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ValidationErrors> {
        let mut errors = Vec::new();
        for (k, row) in rows.iter().enumerate() {
            let d = k + 1;
            if row.len() != d.div_ceil(2) {
                errors.push(ValidationError::WeightRowLength {
                    d,
                    expected: d.div_ceil(2),
                    found: row.len(),
                });
                continue;
            }
            for (i, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    errors.push(ValidationError::WeightEntry {
                        c: min_majority(d) + i,
                        d,
                        value: v,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                errors.push(ValidationError::WeightRowSum { d, sum });
            }
        }
        if rows.is_empty() {
            errors.push(ValidationError::EmptySizeDistribution);
        }
        if !errors.is_empty() {
            return Err(ValidationErrors(errors));
        }
        let table = TriangularTable::filled(rows.len(), |c, d| {
            let row = &rows[d - 1];
            let sum: f64 = row.iter().sum();
            row[c - min_majority(d)] / sum
        });
        Ok(Self { table })
    }

    pub fn max_size(&self) -> usize {
        self.table.max_size()
    }

    pub fn get(&self, c: usize, d: usize) -> Option<f64> {
        self.table.get(c, d)
    }

    pub fn row(&self, d: usize) -> &[f64] {
        self.table.row(d)
    }

    pub fn table(&self) -> &TriangularTable {
        &self.table
    }
}

/// Full parameter record of the generator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorParams {
    /// Number of nodes.
    pub n: usize,
    /// Power-law exponent of the degree distribution.
    pub gamma: f64,
    pub min_degree: u32,
    pub max_degree: u32,
    /// Power-law exponent of the community size distribution.
    pub beta: f64,
    pub min_community: usize,
    pub max_community: usize,
    /// Expected fraction of each node's degree spent on background hyperedges.
    pub xi: f64,
    /// `q[d - 1]` is the share of volume devoted to hyperedges of size `d`.
    pub q: Vec<f64>,
    pub w: WeightMatrix,
    /// Simple hypergraph (rewired) versus multi-hypergraph.
    pub simple: bool,
    pub seed: u64,
}

/// `floor(n^e)`, guarding against `powf` landing just under an integer.
pub fn floor_power(n: usize, exponent: f64) -> usize {
    let v = (n as f64).powf(exponent);
    let r = v.round();
    if (v - r).abs() < 1e-9 * r.max(1.0) {
        r as usize
    } else {
        v.floor() as usize
    }
}

impl GeneratorParams {
    /// The experimental defaults: gamma 2.5, degrees in `[5, floor(n^0.5)]`,
    /// beta 1.5, community sizes in `[50, floor(n^0.75)]`, xi 0.2, uniform
    /// volume over sizes 2..=5, majority composition, simple output.
    pub fn standard(n: usize) -> Self {
        Self {
            n,
            gamma: 2.5,
            min_degree: 5,
            max_degree: floor_power(n, 0.5) as u32,
            beta: 1.5,
            min_community: 50,
            max_community: floor_power(n, 0.75),
            xi: 0.2,
            q: vec![0.0, 0.25, 0.25, 0.25, 0.25],
            w: WeightMatrix::standard(WeightModel::Majority, 5),
            simple: true,
            seed: 0,
        }
    }

    /// Uniform volume over sizes `2..=max_size`, no size-1 hyperedges.
    pub fn uniform_sizes(max_size: usize) -> Vec<f64> {
        let mut q = vec![0.0; max_size];
        if max_size >= 2 {
            let share = 1.0 / (max_size - 1) as f64;
            q[1..].iter_mut().for_each(|x| *x = share);
        }
        q
    }

    /// Largest hyperedge size `L`.
    pub fn max_edge_size(&self) -> usize {
        self.q.len()
    }

    /// Share of volume for size `d` (zero outside `1..=L`).
    pub fn q_of(&self, d: usize) -> f64 {
        if d == 0 {
            0.0
        } else {
            self.q.get(d - 1).copied().unwrap_or(0.0)
        }
    }

    /// Smallest size `d >= 2` with a positive share.
    pub fn smallest_active_size(&self) -> Option<usize> {
        (2..=self.max_edge_size()).find(|&d| self.q_of(d) > 0.0)
    }

    /// Checks every parameter constraint, reporting all violations at once.
    pub fn validate(&self) -> Result<(), ValidationErrors> {
        use ValidationError as V;
        let mut errors = Vec::new();

        if self.n == 0 {
            errors.push(V::NodeCount { n: self.n });
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            errors.push(V::Exponent {
                field: "gamma",
                value: self.gamma,
            });
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            errors.push(V::Exponent {
                field: "beta",
                value: self.beta,
            });
        }
        if self.min_degree == 0 {
            errors.push(V::MinDegree {
                value: self.min_degree,
            });
        }
        if self.min_degree > self.max_degree {
            errors.push(V::DegreeRange {
                min: self.min_degree,
                max: self.max_degree,
            });
        }
        if self.max_degree as usize > self.n {
            errors.push(V::MaxDegree {
                value: self.max_degree,
                n: self.n,
            });
        }
        if self.min_community <= self.min_degree as usize {
            errors.push(V::MinCommunity {
                value: self.min_community,
                min_degree: self.min_degree,
            });
        }
        if self.min_community > self.max_community {
            errors.push(V::CommunityRange {
                min: self.min_community,
                max: self.max_community,
            });
        }
        if self.max_community > self.n {
            errors.push(V::MaxCommunity {
                value: self.max_community,
                n: self.n,
            });
        }
        if !(0.0..=1.0).contains(&self.xi) {
            errors.push(V::Xi { value: self.xi });
        }

        if self.q.is_empty() {
            errors.push(V::EmptySizeDistribution);
        } else {
            for (k, &v) in self.q.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    errors.push(V::SizeShare { d: k + 1, value: v });
                }
            }
            let sum: f64 = self.q.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                errors.push(V::SizeShareSum { sum });
            }
            if self.smallest_active_size().is_none() {
                errors.push(V::NoMultiNodeSizes);
            }
        }
        if self.w.max_size() != self.q.len() {
            errors.push(V::WeightMatrixSize {
                expected: self.q.len(),
                found: self.w.max_size(),
            });
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(ValidationErrors(errors))
        }
    }

    /// Validates and renormalizes `q` (which must already sum to one within
    /// tolerance).
    pub fn normalized(mut self) -> Result<Self, ValidationErrors> {
        self.validate()?;
        let sum: f64 = self.q.iter().sum();
        self.q.iter_mut().for_each(|v| *v /= sum);
        Ok(self)
    }

    /// Soft issues that do not block generation.
    pub fn advisories(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.max_degree as usize > self.max_community {
            notes.push(format!(
                "max degree {} exceeds max community size {}; high-degree nodes may not fit",
                self.max_degree, self.max_community
            ));
        }
        notes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationError {
    NodeCount {
        n: usize,
    },
    Exponent {
        field: &'static str,
        value: f64,
    },
    MinDegree {
        value: u32,
    },
    DegreeRange {
        min: u32,
        max: u32,
    },
    MaxDegree {
        value: u32,
        n: usize,
    },
    MinCommunity {
        value: usize,
        min_degree: u32,
    },
    CommunityRange {
        min: usize,
        max: usize,
    },
    MaxCommunity {
        value: usize,
        n: usize,
    },
    Xi {
        value: f64,
    },
    EmptySizeDistribution,
    SizeShare {
        d: usize,
        value: f64,
    },
    SizeShareSum {
        sum: f64,
    },
    NoMultiNodeSizes,
    WeightMatrixSize {
        expected: usize,
        found: usize,
    },
    WeightRowLength {
        d: usize,
        expected: usize,
        found: usize,
    },
    WeightEntry {
        c: usize,
        d: usize,
        value: f64,
    },
    WeightRowSum {
        d: usize,
        sum: f64,
    },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationError as V;
        match self {
            V::NodeCount { n } => write!(f, "n = {n}: need at least one node"),
            V::Exponent { field, value } => {
                write!(f, "{field} = {value}: exponent must be positive and finite")
            }
            V::MinDegree { value } => write!(f, "delta = {value}: min degree must be positive"),
            V::DegreeRange { min, max } => write!(f, "delta = {min} exceeds D = {max}"),
            V::MaxDegree { value, n } => write!(f, "D = {value} exceeds n = {n}"),
            V::MinCommunity { value, min_degree } => {
                write!(f, "s = {value}: must exceed delta = {min_degree}")
            }
            V::CommunityRange { min, max } => write!(f, "s = {min} exceeds S = {max}"),
            V::MaxCommunity { value, n } => write!(f, "S = {value} exceeds n = {n}"),
            V::Xi { value } => write!(f, "xi = {value}: must lie in [0, 1]"),
            V::EmptySizeDistribution => write!(f, "q is empty"),
            V::SizeShare { d, value } => write!(f, "q_{d} = {value}: must lie in [0, 1]"),
            V::SizeShareSum { sum } => write!(f, "q sums to {sum}, not 1"),
            V::NoMultiNodeSizes => write!(f, "q puts no volume on sizes >= 2"),
            V::WeightMatrixSize { expected, found } => {
                write!(f, "w covers sizes up to {found}, q up to {expected}")
            }
            V::WeightRowLength { d, expected, found } => {
                write!(f, "w row {d} has {found} entries, expected {expected}")
            }
            V::WeightEntry { c, d, value } => {
                write!(f, "w[{c},{d}] = {value}: must lie in [0, 1]")
            }
            V::WeightRowSum { d, sum } => write!(f, "w row {d} sums to {sum}, not 1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "invalid parameters: {}", parts.join("; "))
    }
}

impl std::error::Error for ValidationErrors {}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model: WeightModel, d: usize) -> Vec<f64> {
        WeightMatrix::standard(model, 5).row(d).to_vec()
    }

    fn assert_row(actual: &[f64], expected: &[f64]) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15, "{actual:?} vs {expected:?}");
        }
    }

    #[test]
    fn standard_rows_match_reference_table() {
        assert_row(&row(WeightModel::Majority, 5), &[1.0 / 3.0; 3]);
        assert_row(&row(WeightModel::Majority, 3), &[0.5, 0.5]);
        assert_row(&row(WeightModel::Majority, 1), &[1.0]);
        assert_row(
            &row(WeightModel::Linear, 5),
            &[3.0 / 12.0, 4.0 / 12.0, 5.0 / 12.0],
        );
        assert_row(&row(WeightModel::Linear, 4), &[3.0 / 7.0, 4.0 / 7.0]);
        assert_row(&row(WeightModel::Linear, 3), &[2.0 / 5.0, 3.0 / 5.0]);
        assert_row(&row(WeightModel::Strict, 5), &[0.0, 0.0, 1.0]);
        assert_row(&row(WeightModel::Strict, 2), &[1.0]);
    }

    #[test]
    fn rows_sum_to_one_up_to_64() {
        for model in [
            WeightModel::Majority,
            WeightModel::Linear,
            WeightModel::Strict,
        ] {
            let w = WeightMatrix::standard(model, 64);
            for d in 1..=64 {
                let s: f64 = w.row(d).iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "{model} d={d} sum={s}");
            }
        }
    }

    #[test]
    fn entries_outside_triangle_are_absent() {
        let w = WeightMatrix::standard(WeightModel::Majority, 5);
        assert_eq!(w.get(2, 4), None);
        assert_eq!(w.get(6, 5), None);
        assert_eq!(w.get(1, 6), None);
        assert!(w.get(3, 4).is_some());
    }

    #[test]
    fn defaults_at_1000_are_valid() {
        let p = GeneratorParams::standard(1000);
        assert_eq!(p.max_degree, 31);
        assert_eq!(p.max_community, 177);
        p.validate().unwrap();
    }

    #[test]
    fn q_must_sum_to_one() {
        let mut p = GeneratorParams::standard(1000);
        p.q = vec![0.5, 0.6];
        p.w = WeightMatrix::standard(WeightModel::Majority, 2);
        let err = p.validate().unwrap_err();
        assert!(err
            .0
            .iter()
            .any(|e| matches!(e, ValidationError::SizeShareSum { .. })));
    }

    #[test]
    fn s_must_exceed_delta() {
        let mut p = GeneratorParams::standard(1000);
        p.min_community = p.min_degree as usize;
        let err = p.validate().unwrap_err();
        assert_eq!(
            err.0,
            vec![ValidationError::MinCommunity {
                value: 5,
                min_degree: 5
            }]
        );
    }

    #[test]
    fn reports_every_violation() {
        let mut p = GeneratorParams::standard(1000);
        p.xi = 1.5;
        p.min_degree = 40;
        let err = p.validate().unwrap_err();
        assert!(err.0.contains(&ValidationError::Xi { value: 1.5 }));
        assert!(err
            .0
            .contains(&ValidationError::DegreeRange { min: 40, max: 31 }));
        assert!(err.to_string().contains("xi = 1.5"));
    }

    #[test]
    fn validate_does_not_mutate() {
        let p = GeneratorParams::standard(1000);
        let before = p.clone();
        let a = p.validate();
        let b = p.validate();
        assert_eq!(a, b);
        assert_eq!(p, before);
    }

    #[test]
    fn near_unit_q_is_renormalized() {
        let mut p = GeneratorParams::standard(1000);
        p.q = vec![0.0, 0.25, 0.25, 0.25, 0.25 + 5e-10];
        let p = p.normalized().unwrap();
        assert!((p.q.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn explicit_rows_validated() {
        assert!(WeightMatrix::from_rows(&[vec![1.0], vec![1.0], vec![0.3, 0.7]]).is_ok());
        let err = WeightMatrix::from_rows(&[vec![1.0], vec![1.0], vec![0.3, 0.6]]).unwrap_err();
        assert!(matches!(
            err.0[0],
            ValidationError::WeightRowSum { d: 3, .. }
        ));
        let err = WeightMatrix::from_rows(&[vec![1.0], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(
            err.0[0],
            ValidationError::WeightRowLength { d: 2, .. }
        ));
    }

    #[test]
    fn floor_power_is_exact_on_perfect_powers() {
        assert_eq!(floor_power(1_000_000, 0.5), 1000);
        assert_eq!(floor_power(1024, 0.5), 32);
        assert_eq!(floor_power(1024, 0.75), 181);
        assert_eq!(floor_power(10_000, 0.75), 1000);
    }
}
