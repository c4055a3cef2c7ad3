//! Importer for MATPOWER-style case files (`.m`).
//!
//! Parses the `mpc.baseMVA`, `mpc.bus`, `mpc.gen`, and `mpc.branch` tables of
//! a case function. Columns follow the MATPOWER convention:
//!
//! - bus:    `BUS_I TYPE PD QD GS BS AREA VM VA BASE_KV ZONE VMAX VMIN`
//! - gen:    `BUS PG QG QMAX QMIN VG MBASE STATUS PMAX PMIN`
//! - branch: `F_BUS T_BUS R X B RATEA RATEB RATEC RATIO ANGLE STATUS ...`
//!
//! Power columns are MW/MVAr and get divided by `baseMVA`; branch impedance
//! is already per-unit. Each branch becomes a series admittance `1/(r+jx)`
//! and its charging susceptance contributes `j b/2` to the shunt of both end
//! buses. Bus type 3 maps to the slack, 2 to a generator, 1 to a load. The
//! slack voltage is pinned to `1 ∠ 0` regardless of the file's `VM`.
//!
//! Off-nominal transformer taps and phase shifters are out of scope and are
//! rejected.

use super::{BaseValues, Bus, BusKind, GridSpec, Line, Shunt};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;

/// Parse the text of a MATPOWER-style case file.
pub fn parse_case(text: &str) -> Result<GridSpec> {
    let base_mva = parse_scalar(text, "mpc.baseMVA")?;
    let bus_rows = parse_matrix(text, "mpc.bus")?;
    let gen_rows = parse_matrix(text, "mpc.gen")?;
    let branch_rows = parse_matrix(text, "mpc.branch")?;

    let name = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("function mpc = "))
        .unwrap_or("matpower-case")
        .trim()
        .to_string();

    let mut gens_by_bus: HashMap<usize, &Vec<f64>> = HashMap::new();
    for row in &gen_rows {
        if row.len() < 10 {
            return Err(Error::InvalidGrid(format!(
                "gen row needs >= 10 columns, got {}",
                row.len()
            )));
        }
        if row[7] != 0.0 {
            gens_by_bus.insert(row[0] as usize, row);
        }
    }

    let mut buses = Vec::with_capacity(bus_rows.len());
    let mut shunt_acc: HashMap<usize, Complex64> = HashMap::new();
    let mut base_kv = 0.0;
    for row in &bus_rows {
        if row.len() < 13 {
            return Err(Error::InvalidGrid(format!(
                "bus row needs >= 13 columns, got {}",
                row.len()
            )));
        }
        let id = row[0] as usize;
        let bus_type = row[1] as usize;
        let pd = row[2] / base_mva;
        let qd = row[3] / base_mva;
        let gs = row[4] / base_mva;
        let bs = row[5] / base_mva;
        base_kv = row[9];
        let vmax = row[11];
        let vmin = row[12];

        if gs != 0.0 || bs != 0.0 {
            *shunt_acc.entry(id).or_insert(Complex64::new(0.0, 0.0)) += Complex64::new(gs, bs);
        }

        let kind = match bus_type {
            3 => BusKind::Slack,
            2 => BusKind::Generator,
            1 => BusKind::Load,
            other => {
                return Err(Error::InvalidGrid(format!(
                    "bus {id}: unsupported bus type {other}"
                )))
            }
        };
        if kind != BusKind::Load && (pd != 0.0 || qd != 0.0) {
            return Err(Error::InvalidGrid(format!(
                "bus {id}: demand on a non-load bus is not supported"
            )));
        }

        let mut bus = Bus::plain(id, kind);
        bus.v_limits = [vmin, vmax];
        if kind == BusKind::Load {
            bus.demand = Some(Complex64::new(pd, qd));
        }
        if kind == BusKind::Generator {
            let gen = gens_by_bus.get(&id).ok_or_else(|| {
                Error::InvalidGrid(format!("bus {id} is type 2 but has no in-service generator"))
            })?;
            bus.v_setpoint = Some(gen[5]);
            bus.p_nominal = Some(gen[1] / base_mva);
            bus.q_limits = Some([gen[4] / base_mva, gen[3] / base_mva]);
            bus.p_limits = Some([gen[9] / base_mva, gen[8] / base_mva]);
        }
        buses.push(bus);
    }

    let mut lines = Vec::with_capacity(branch_rows.len());
    for row in &branch_rows {
        if row.len() < 11 {
            return Err(Error::InvalidGrid(format!(
                "branch row needs >= 11 columns, got {}",
                row.len()
            )));
        }
        if row[10] == 0.0 {
            continue; // out of service
        }
        let (from, to) = (row[0] as usize, row[1] as usize);
        let (r, x, b) = (row[2], row[3], row[4]);
        if row[8] != 0.0 && row[8] != 1.0 {
            return Err(Error::InvalidGrid(format!(
                "branch ({from},{to}): off-nominal tap ratio {} not supported",
                row[8]
            )));
        }
        if row[9] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "branch ({from},{to}): phase shift not supported"
            )));
        }
        let z = Complex64::new(r, x);
        if z.norm() == 0.0 {
            return Err(Error::InvalidGrid(format!(
                "branch ({from},{to}): zero impedance"
            )));
        }
        lines.push(Line {
            from,
            to,
            y: z.inv(),
        });
        if b != 0.0 {
            let half = Complex64::new(0.0, b / 2.0);
            *shunt_acc.entry(from).or_insert(Complex64::new(0.0, 0.0)) += half;
            *shunt_acc.entry(to).or_insert(Complex64::new(0.0, 0.0)) += half;
        }
    }

    let mut shunts: Vec<Shunt> = shunt_acc
        .into_iter()
        .map(|(bus, y)| Shunt { bus, y })
        .collect();
    shunts.sort_by_key(|s| s.bus);

    Ok(GridSpec {
        name,
        base: BaseValues {
            mva: base_mva,
            kv: base_kv,
        },
        buses,
        lines,
        shunts,
    })
}

fn parse_scalar(text: &str, key: &str) -> Result<f64> {
    for line in text.lines() {
        let line = strip_comment(line).trim().to_string();
        if let Some(rest) = line.strip_prefix(key) {
            let rest = rest.trim_start();
            if let Some(expr) = rest.strip_prefix('=') {
                let val = expr.trim().trim_end_matches(';').trim();
                return val.parse::<f64>().map_err(|_| {
                    Error::InvalidGrid(format!("cannot parse {key} value '{val}'"))
                });
            }
        }
    }
    Err(Error::InvalidGrid(format!("missing {key}")))
}

fn parse_matrix(text: &str, key: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    let mut in_block = false;
    for raw in text.lines() {
        let line = strip_comment(raw);
        let line = line.trim();
        if !in_block {
            if let Some(rest) = line.strip_prefix(key) {
                let rest = rest.trim_start();
                if let Some(after_eq) = rest.strip_prefix('=') {
                    if after_eq.trim_start().starts_with('[') {
                        in_block = true;
                        let tail = after_eq.trim_start().trim_start_matches('[');
                        push_rows(tail, &mut rows)?;
                        if tail.contains(']') {
                            return finish(rows, key);
                        }
                    }
                }
            }
            continue;
        }
        if line.contains(']') {
            let head = line.split(']').next().unwrap_or("");
            push_rows(head, &mut rows)?;
            return finish(rows, key);
        }
        push_rows(line, &mut rows)?;
    }
    Err(Error::InvalidGrid(format!("missing or unterminated {key}")))
}

fn finish(rows: Vec<Vec<f64>>, key: &str) -> Result<Vec<Vec<f64>>> {
    if rows.is_empty() {
        return Err(Error::InvalidGrid(format!("{key} table is empty")));
    }
    Ok(rows)
}

fn push_rows(segment: &str, rows: &mut Vec<Vec<f64>>) -> Result<()> {
    for row_text in segment.split(';') {
        let fields: Vec<f64> = row_text
            .split_whitespace()
            .map(|tok| {
                tok.trim_end_matches(',')
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidGrid(format!("bad numeric field '{tok}'")))
            })
            .collect::<Result<_>>()?;
        if !fields.is_empty() {
            rows.push(fields);
        }
    }
    Ok(())
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_admittance, is_laplacian, LAPLACIAN_TOL};

    const TINY_CASE: &str = r#"
function mpc = tiny3
% three-bus toy case
mpc.version = '2';
mpc.baseMVA = 100;

%% bus data
mpc.bus = [
    1  3  0   0   0  0  1  1.00  0  230  1  1.1  0.9;
    2  2  0   0   0  0  1  1.02  0  230  1  1.1  0.9;
    3  1  50  20  0  0  1  1.00  0  230  1  1.1  0.9;
];

mpc.gen = [
    1  0   0  100  -100  1.00  100  1  200  0;
    2  30  0  100  -100  1.02  100  1  100  0;
];

mpc.branch = [
    1  2  0.02  0.06  0.06  0  0  0  0  0  1;
    1  3  0.08  0.24  0.05  0  0  0  0  0  1;
    2  3  0.06  0.18  0.04  0  0  0  0  0  1;
];
"#;

    #[test]
    fn parses_tiny_case() {
        let spec = parse_case(TINY_CASE).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.name, "tiny3");
        assert_eq!(spec.base.mva, 100.0);
        assert_eq!(spec.n(), 3);
        assert_eq!(spec.slack_index(), 0);
        assert_eq!(spec.generator_indices(), vec![1]);
        assert_eq!(spec.load_indices(), vec![2]);

        let load = &spec.buses[2];
        assert_eq!(load.demand.unwrap(), Complex64::new(0.5, 0.2));

        let gen = &spec.buses[1];
        assert_eq!(gen.v_setpoint, Some(1.02));
        assert_eq!(gen.p_nominal, Some(0.3));
        assert_eq!(gen.q_limits, Some([-1.0, 1.0]));
        assert_eq!(gen.p_limits, Some([0.0, 1.0]));

        // series admittance of branch (1,2)
        let y12 = spec.lines[0].y;
        let z = Complex64::new(0.02, 0.06);
        assert!((y12 - z.inv()).norm() < 1e-12);

        // charging: bus 1 gets (0.06 + 0.05)/2, bus 2 (0.06 + 0.04)/2
        let s1 = spec.shunts.iter().find(|s| s.bus == 1).unwrap();
        assert!((s1.y - Complex64::new(0.0, 0.055)).norm() < 1e-12);
        let s2 = spec.shunts.iter().find(|s| s.bus == 2).unwrap();
        assert!((s2.y - Complex64::new(0.0, 0.05)).norm() < 1e-12);

        let adm = build_admittance(&spec).unwrap();
        assert!(!adm.is_laplacian);
        assert!(!is_laplacian(&adm.y, LAPLACIAN_TOL));
        // row sums equal shunts
        let ones = crate::CVector::from_element(3, Complex64::new(1.0, 0.0));
        let sums = &adm.y * ones;
        assert!((sums[0] - Complex64::new(0.0, 0.055)).norm() < 1e-12);
    }

    #[test]
    fn rejects_tap_ratio() {
        let text = TINY_CASE.replace(
            "1  2  0.02  0.06  0.06  0  0  0  0  0  1;",
            "1  2  0.02  0.06  0.06  0  0  0  0.95  0  1;",
        );
        assert!(parse_case(&text).is_err());
    }

    #[test]
    fn skips_out_of_service_branch() {
        let text = TINY_CASE.replace(
            "2  3  0.06  0.18  0.04  0  0  0  0  0  1;",
            "2  3  0.06  0.18  0.04  0  0  0  0  0  0;",
        );
        let spec = parse_case(&text).unwrap();
        assert_eq!(spec.lines.len(), 2);
    }

    #[test]
    fn missing_table_is_an_error() {
        assert!(parse_case("function mpc = x\nmpc.baseMVA = 100;\n").is_err());
    }
}
