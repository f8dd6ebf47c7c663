//! The tropical J-function as a coefficient report.

use serde::{Deserialize, Serialize};

use super::{DescendentTable, Family};
use crate::lattice::format_rational;

/// Coefficient of `q^{nu+2} e^{d y1} y2^n / n!` in `J_i`, with `n = points`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JEntry {
    pub d: u32,
    pub nu: u32,
    pub points: usize,
    pub q_power: u32,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JColumn {
    pub i: usize,
    pub insertion: String,
    /// Terms of `J_i` not coming from invariants, written symbolically.
    pub constant: Vec<String>,
    pub entries: Vec<JEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JReport {
    pub prefactor: String,
    pub d_max: u32,
    pub columns: Vec<JColumn>,
}

/// Arrange a table as `J = e^{q(y0 T0 + y1 T1)} sum_i J_i T_i`.
pub fn j_function(table: &DescendentTable, d_max: u32) -> JReport {
    let columns = (0..3)
        .map(|i| {
            let family = Family::from_index(i);
            let mut constant = Vec::new();
            if i == 0 {
                constant.push("1".to_string());
            }
            if i == 2 {
                constant.push("q*y2".to_string());
            }
            let entries = table
                .entries
                .iter()
                .filter(|(&(f, d, _), _)| f == family && d >= 1 && d <= d_max)
                .map(|(&(f, d, nu), v)| JEntry {
                    d,
                    nu,
                    points: f.points(d, nu).unwrap_or(0),
                    q_power: nu + 2,
                    value: format_rational(v),
                })
                .collect();
            JColumn {
                i,
                insertion: format!("T{}", 2 - i),
                constant,
                entries,
            }
        })
        .collect();
    JReport {
        prefactor: "exp(q*(y0*T0 + y1*T1))".to_string(),
        d_max,
        columns,
    }
}
