//! Export of the multiplicity ILP in LP file format.
//!
//! Variables: `x_i_j` (integer, requests of type `i` in bin `j`) and `y_j`
//! (binary, bin `j` used). Rows:
//!
//! * `assign_i`: `sum_j x_i_j = n_i`
//! * `activate_i_j`: `x_i_j - n_i y_j <= 0`
//! * `resource_t_j_m`: `sum_{i active at t} a_im x_i_j - b_m y_j <= 0`
//!
//! Type indices follow the sorted type table and start at 1; bins run over
//! `1..=k`.

use std::fmt::Write as _;

use serde::Serialize;

use super::ExactError;
use crate::model::{group_types, Instance, TypeKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IlpOptions {
    /// Emit one resource block per maximal stretch of instants with the
    /// same active types instead of one per instant.
    pub dedup_consecutive: bool,
}

impl Default for IlpOptions {
    fn default() -> Self {
        Self {
            dedup_consecutive: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct IlpCounts {
    pub integer_vars: usize,
    pub binary_vars: usize,
    pub assign_rows: usize,
    pub activate_rows: usize,
    pub resource_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VariableInfo {
    Integer {
        name: String,
        type_index: usize,
        type_key: TypeKey,
        multiplicity: usize,
        bin: u32,
    },
    Binary {
        name: String,
        bin: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpModel {
    pub lp: String,
    pub variables: Vec<VariableInfo>,
    pub counts: IlpCounts,
}

impl IlpModel {
    /// Sidecar mapping variable names to type keys and bins.
    pub fn sidecar_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.variables).expect("sidecar serializes");
        s.push('\n');
        s
    }
}

const TERMS_PER_LINE: usize = 8;

fn push_terms(out: &mut String, terms: &[(i128, String)]) {
    for (i, (coef, var)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        match (i, *coef < 0) {
            (0, false) => {}
            (0, true) => out.push_str("- "),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        let _ = write!(out, "{} {var}", coef.unsigned_abs());
    }
}

/// Builds the LP model of the instance with `k` bins. Time instants are
/// taken from the instance as given, so callers normally compress first.
pub fn export_ilp(
    instance: &Instance,
    k: u32,
    options: IlpOptions,
) -> Result<IlpModel, ExactError> {
    if k < 1 {
        return Err(ExactError::NoBins);
    }
    let table = group_types(instance);
    let capacity = instance.capacity().components();
    let mut counts = IlpCounts::default();
    let mut variables = Vec::new();
    let mut lp = String::new();

    let _ = writeln!(
        lp,
        "\\ dvbp model: {} types, {} bins, {} dimensions",
        table.len(),
        k,
        capacity.len()
    );
    lp.push_str("Minimize\n obj: ");
    let objective: Vec<(i128, String)> = (1..=k).map(|j| (1, format!("y_{j}"))).collect();
    push_terms(&mut lp, &objective);
    lp.push_str("\nSubject To\n");

    for (i, entry) in table.entries.iter().enumerate() {
        let terms: Vec<_> = (1..=k).map(|j| (1, format!("x_{}_{j}", i + 1))).collect();
        let _ = write!(lp, " assign_{}: ", i + 1);
        push_terms(&mut lp, &terms);
        let _ = writeln!(lp, " = {}", entry.multiplicity());
        counts.assign_rows += 1;
    }
    for (i, entry) in table.entries.iter().enumerate() {
        for j in 1..=k {
            let _ = writeln!(
                lp,
                " activate_{0}_{j}: 1 x_{0}_{j} - {1} y_{j} <= 0",
                i + 1,
                entry.multiplicity()
            );
            counts.activate_rows += 1;
        }
    }

    // sweep type intervals; each stretch between consecutive coordinates
    // has a constant active set
    let mut coords: Vec<u64> = table
        .entries
        .iter()
        .flat_map(|e| [e.key.start, e.key.end])
        .collect();
    coords.sort_unstable();
    coords.dedup();
    for w in coords.windows(2) {
        let (from, to) = (w[0], w[1]);
        let active: Vec<usize> = table
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.key.start <= from && from < e.key.end)
            .map(|(i, _)| i)
            .collect();
        if active.is_empty() {
            continue;
        }
        let instants: Vec<u64> = if options.dedup_consecutive {
            vec![from]
        } else {
            (from..to).collect()
        };
        for t in instants {
            for j in 1..=k {
                for (m, &b) in capacity.iter().enumerate() {
                    let mut terms: Vec<(i128, String)> = active
                        .iter()
                        .map(|&i| (table.entries[i].key.demand[m], i))
                        .filter(|&(a, _)| a > 0)
                        .map(|(a, i)| (a as i128, format!("x_{}_{j}", i + 1)))
                        .collect();
                    terms.push((-(b as i128), format!("y_{j}")));
                    let _ = write!(lp, " resource_{t}_{j}_{}: ", m + 1);
                    push_terms(&mut lp, &terms);
                    lp.push_str(" <= 0\n");
                    counts.resource_rows += 1;
                }
            }
        }
    }

    lp.push_str("Bounds\n");
    for (i, entry) in table.entries.iter().enumerate() {
        for j in 1..=k {
            let _ = writeln!(lp, " 0 <= x_{}_{j} <= {}", i + 1, entry.multiplicity());
            variables.push(VariableInfo::Integer {
                name: format!("x_{}_{j}", i + 1),
                type_index: i + 1,
                type_key: entry.key.clone(),
                multiplicity: entry.multiplicity(),
                bin: j,
            });
            counts.integer_vars += 1;
        }
    }
    if !table.is_empty() {
        lp.push_str("Generals\n");
        for i in 1..=table.len() {
            let names: Vec<String> = (1..=k).map(|j| format!("x_{i}_{j}")).collect();
            let _ = writeln!(lp, " {}", names.join(" "));
        }
    }
    lp.push_str("Binaries\n");
    let names: Vec<String> = (1..=k).map(|j| format!("y_{j}")).collect();
    let _ = writeln!(lp, " {}", names.join(" "));
    for j in 1..=k {
        variables.push(VariableInfo::Binary {
            name: format!("y_{j}"),
            bin: j,
        });
        counts.binary_vars += 1;
    }
    lp.push_str("End\n");

    Ok(IlpModel {
        lp,
        variables,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Request;

    fn two_types_sharing_two_instants() -> Instance {
        Instance::new(
            vec![10],
            vec![
                Request::new(1, vec![3], 1, 3),
                Request::new(2, vec![4], 1, 3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn counts_per_instant() {
        let model = export_ilp(
            &two_types_sharing_two_instants(),
            2,
            IlpOptions {
                dedup_consecutive: false,
            },
        )
        .unwrap();
        assert_eq!(model.counts.integer_vars + model.counts.binary_vars, 6);
        assert_eq!(model.counts.assign_rows, 2);
        assert_eq!(model.counts.activate_rows, 4);
        assert_eq!(model.counts.resource_rows, 4);
    }

    #[test]
    fn identical_consecutive_instants_are_merged() {
        let model =
            export_ilp(&two_types_sharing_two_instants(), 2, IlpOptions::default()).unwrap();
        assert_eq!(model.counts.resource_rows, 2);
    }

    #[test]
    fn exact_text_for_one_type() {
        let inst = Instance::new(
            vec![10],
            (1..=3).map(|i| Request::new(i, vec![5], 1, 2)).collect(),
        )
        .unwrap();
        let model = export_ilp(&inst, 2, IlpOptions::default()).unwrap();
        let expected = "\
\\ dvbp model: 1 types, 2 bins, 1 dimensions
Minimize
 obj: 1 y_1 + 1 y_2
Subject To
 assign_1: 1 x_1_1 + 1 x_1_2 = 3
 activate_1_1: 1 x_1_1 - 3 y_1 <= 0
 activate_1_2: 1 x_1_2 - 3 y_2 <= 0
 resource_1_1_1: 5 x_1_1 - 10 y_1 <= 0
 resource_1_2_1: 5 x_1_2 - 10 y_2 <= 0
Bounds
 0 <= x_1_1 <= 3
 0 <= x_1_2 <= 3
Generals
 x_1_1 x_1_2
Binaries
 y_1 y_2
End
";
        assert_eq!(model.lp, expected);
    }

    #[test]
    fn empty_instance_is_objective_only() {
        let inst = Instance::new(vec![10], vec![]).unwrap();
        let model = export_ilp(&inst, 1, IlpOptions::default()).unwrap();
        assert_eq!(
            model.counts,
            IlpCounts {
                binary_vars: 1,
                ..Default::default()
            }
        );
        assert!(model.lp.contains(" obj: 1 y_1\n"));
    }

    #[test]
    fn zero_bins_rejected() {
        let inst = Instance::new(vec![10], vec![]).unwrap();
        assert_eq!(
            export_ilp(&inst, 0, IlpOptions::default()).unwrap_err(),
            ExactError::NoBins
        );
    }

    #[test]
    fn long_rows_wrap() {
        let inst = Instance::new(
            vec![100],
            (1..=20)
                .map(|i| Request::new(i, vec![i as u64], 1, 2))
                .collect(),
        )
        .unwrap();
        let model = export_ilp(&inst, 1, IlpOptions::default()).unwrap();
        let row = model
            .lp
            .split("resource_1_1_1:")
            .nth(1)
            .unwrap()
            .split("<= 0")
            .next()
            .unwrap();
        assert!(row.contains("\n   "));
        assert_eq!(row.matches(" x_").count(), 20);
    }

    #[test]
    fn output_is_deterministic_and_sidecar_lists_all_variables() {
        let inst = two_types_sharing_two_instants();
        let a = export_ilp(&inst, 3, IlpOptions::default()).unwrap();
        let b = export_ilp(&inst, 3, IlpOptions::default()).unwrap();
        assert_eq!(a.lp, b.lp);
        let sidecar: serde_json::Value = serde_json::from_str(&a.sidecar_json()).unwrap();
        assert_eq!(sidecar.as_array().unwrap().len(), 2 * 3 + 3);
        assert_eq!(sidecar[0]["name"], "x_1_1");
        assert_eq!(sidecar[0]["type_key"]["demand"][0], 3);
    }
}
