//! CSV emission. Floating-point values carry 17 significant digits and the
//! writers are pure string builders, so identical inputs give byte-identical
//! files.

use crate::diagnostics::DiagnosticRecord;
use crate::study::ConvergenceTable;

pub const DIAGNOSTICS_HEADER: &str =
    "time,l2_f,l2_E,l2_B,mass,energy_kin,energy_em,div_e,div_b";
pub const CONVERGENCE_HEADER: &str = "level,h,tau,err_f,err_E,err_B,eoc_f,eoc_E,eoc_B";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn diagnostics_csv(records: &[DiagnosticRecord]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in records {
        let fields = [
            r.time,
            r.l2_f,
            r.l2_e,
            r.l2_b,
            r.mass,
            r.energy_kinetic,
            r.energy_em,
            r.div_e,
            r.div_b,
        ];
        let line: Vec<String> = fields.iter().map(|&x| num(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for r in &table.rows {
        let mut line = vec![r.level.to_string()];
        line.extend(
            [r.h, r.tau, r.err_f, r.err_e, r.err_b, r.eoc_f, r.eoc_e, r.eoc_b]
                .iter()
                .map(|&x| num(x)),
        );
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
